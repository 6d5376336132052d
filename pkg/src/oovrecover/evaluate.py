"""Scoring of recovery reports against labelled ground truth.

``pass1_rate`` counts occurrences recovered in pass 1; ``pass2_rate`` is
cumulative (pass 1 or pass 2), and ``pass2_incremental_rate`` counts only
the occurrences first recovered in pass 2.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .formats import Label
from .recovery import Recovered, RecoveryReport

MODES = ("word", "verify", "sentence")


@dataclass
class Counts:
    total: int = 0
    pass1: int = 0
    pass2: int = 0
    missed: int = 0
    spurious: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(*(a + b for a, b in zip(asdict(self).values(), asdict(other).values())))

    @property
    def pass1_rate(self) -> float:
        return 100.0 * self.pass1 / self.total if self.total else 0.0

    @property
    def pass2_rate(self) -> float:
        return 100.0 * (self.pass1 + self.pass2) / self.total if self.total else 0.0

    @property
    def pass2_incremental_rate(self) -> float:
        return 100.0 * self.pass2 / self.total if self.total else 0.0


@dataclass
class EvalResult:
    mode: str
    counts: Counts
    categories: Dict[str, Counts] = field(default_factory=dict)
    window_ms: Optional[int] = None
    verdicts: List[dict] = field(default_factory=list)

    @property
    def pass1_rate(self):
        return self.counts.pass1_rate

    @property
    def pass2_rate(self):
        return self.counts.pass2_rate

    def to_json(self) -> dict:
        def rates(c: Counts):
            return {
                **asdict(c),
                "pass1_rate": round(c.pass1_rate, 1),
                "pass2_rate": round(c.pass2_rate, 1),
                "pass2_incremental_rate": round(c.pass2_incremental_rate, 1),
            }

        out = {"mode": self.mode, **rates(self.counts)}
        if self.window_ms is not None:
            out["window_ms"] = self.window_ms
        if self.categories:
            out["categories"] = {k: rates(v) for k, v in sorted(self.categories.items())}
        if self.verdicts:
            out["verdicts"] = self.verdicts
        return out

    def to_markdown(self) -> str:
        lines = [
            "| Category | Total | Pass 1 (%) | Pass 2 (%) | Pass 2 only (%) | Missed | Spurious |",
            "|---|---|---|---|---|---|---|",
        ]
        rows = [("all", self.counts)] + sorted(self.categories.items())
        for name, c in rows:
            lines.append(
                f"| {name} | {c.total} | {c.pass1_rate:.1f} | {c.pass2_rate:.1f} | "
                f"{c.pass2_incremental_rate:.1f} | {c.missed} | {c.spurious} |"
            )
        return "\n".join(lines) + "\n"


def _fold(s: str) -> str:
    return " ".join(s.lower().split())


def _index_reports(reports, truth) -> Dict[str, List[Recovered]]:
    by_utt = {}
    for r in reports:
        if r.utt_id not in truth:
            raise KeyError(f"utterance {r.utt_id!r} has a report but no ground truth")
        by_utt[r.utt_id] = list(r.recovered)
    return by_utt


def _score_utterance(labels: Sequence[Label], recs: Sequence[Recovered], window_ms: Optional[int]):
    """Maximum one-to-one matching of labels to recoveries.

    An edge needs a surface match and, with a window, both boundaries within
    ``window_ms``.  Among maximum matchings, pass-1 edges are preferred.
    Returns the pass number matched to each label (0 for a miss) and the
    number of unmatched recoveries.
    """
    n_l, n_r = len(labels), len(recs)
    passes = [0] * n_l
    if not n_l or not n_r:
        return passes, n_r
    big = 1e6
    cost = np.full((n_l, n_r), big)
    for a, lab in enumerate(labels):
        for b, rec in enumerate(recs):
            if _fold(rec.surface) != _fold(lab.surface):
                continue
            if window_ms is not None and (
                abs(rec.start - lab.start) > window_ms or abs(rec.end - lab.end) > window_ms
            ):
                continue
            cost[a, b] = 0.0 if rec.pass_no == 1 else 1.0
    rows, cols = linear_sum_assignment(cost)
    matched = 0
    for a, b in zip(rows, cols):
        if cost[a, b] < big:
            passes[a] = recs[b].pass_no
            matched += 1
    return passes, n_r - matched


def _evaluate(mode, reports, truth: Mapping[str, List[Label]], window_ms=None) -> EvalResult:
    by_utt = _index_reports(reports, truth)
    total = Counts()
    cats: Dict[str, Counts] = defaultdict(Counts)
    verdicts = []
    for utt_id in sorted(truth):
        labels = truth[utt_id]
        recs = by_utt.get(utt_id, [])
        passes, spurious = _score_utterance(labels, recs, window_ms)
        c = Counts(total=len(labels), spurious=spurious)
        for lab, p in zip(labels, passes):
            cat = Counts(total=1)
            if p == 1:
                c.pass1 += 1
                cat.pass1 = 1
            elif p == 2:
                c.pass2 += 1
                cat.pass2 = 1
            else:
                c.missed += 1
                cat.missed = 1
            if lab.category is not None:
                cats[lab.category] = cats[lab.category] + cat
            if mode == "verify":
                verdicts.append({
                    "utt_id": utt_id,
                    "surface": lab.surface,
                    "verdict": {1: "pass1", 2: "pass2"}.get(p, "miss"),
                })
        total = total + c
    return EvalResult(mode, total, dict(cats), window_ms, verdicts)


def eval_word_level(reports: Sequence[RecoveryReport], truth) -> EvalResult:
    return _evaluate("word", reports, truth)


def eval_verification(reports: Sequence[RecoveryReport], truth) -> EvalResult:
    return _evaluate("verify", reports, truth)


def eval_sentence_level(reports: Sequence[RecoveryReport], truth, window_ms: int = 500) -> EvalResult:
    if window_ms < 0:
        raise ValueError("window_ms must be >= 0")
    return _evaluate("sentence", reports, truth, window_ms)


def evaluate(mode: str, reports, truth, window_ms: int = 500) -> EvalResult:
    if mode == "word":
        return eval_word_level(reports, truth)
    if mode == "verify":
        return eval_verification(reports, truth)
    if mode == "sentence":
        return eval_sentence_level(reports, truth, window_ms)
    raise ValueError(f"unknown evaluation mode {mode!r}")
