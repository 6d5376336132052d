"""Two-pass recovery of context words from a decoded hypothesis.

Pass 1 looks for ``!SIL`` segments whose phone sequence is exactly a
pronunciation of some context entry.  Pass 2 scores every contiguous span of
up to ``max_span_words`` words against every context pronunciation with the
weighted edit distance and accepts the cheapest (entry, span) pairs greedily.
Recovered words are then spliced into the normal-LM transcript by time.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .align import CostMatrix, prefix_distances
from .phoneset import Lexicon, PhoneSeq

log = logging.getLogger(__name__)

SIL = "!SIL"


@dataclass(frozen=True)
class TimedWord:
    surface: str
    start: int
    end: int
    phones: Optional[PhoneSeq] = None

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"bad timing for {self.surface!r}: [{self.start}, {self.end})")
        if self.surface == SIL and not self.phones:
            raise ValueError("!SIL word without phones")


@dataclass(frozen=True)
class Hypothesis:
    utt_id: str
    words: Tuple[TimedWord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        starts = [w.start for w in self.words]
        if starts != sorted(starts):
            raise ValueError(f"{self.utt_id}: words not sorted by start time")

    def text(self) -> str:
        return " ".join(w.surface for w in self.words)


@dataclass(frozen=True)
class ContextEntry:
    id: int
    surface: str
    variants: Tuple[PhoneSeq, ...]

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(tuple(v) for v in self.variants))
        if not self.variants or not all(self.variants):
            raise ValueError(f"context entry {self.surface!r} needs non-empty pronunciations")


@dataclass(frozen=True)
class RecoveryConfig:
    cost_threshold: float = 10.0
    max_span_words: int = 5
    window_ms: int = 500
    length_normalize: bool = False
    # When False, pass 2 recovers an entry at most once per utterance and
    # never one already found by pass 1.  Pass 1 always reports every exact hit.
    allow_repeats: bool = False

    def __post_init__(self):
        if self.cost_threshold < 0:
            raise ValueError("cost_threshold must be >= 0")
        if self.max_span_words < 1:
            raise ValueError("max_span_words must be >= 1")
        if self.window_ms < 0:
            raise ValueError("window_ms must be >= 0")


@dataclass(frozen=True)
class Recovered:
    entry_id: int
    surface: str
    pass_no: int
    cost: float
    start: int
    end: int
    span: Tuple[int, int]  # [first, stop) word indices in the OOV hypothesis

    def overlaps(self, other: "Recovered") -> bool:
        return self.span[0] < other.span[1] and other.span[0] < self.span[1]


@dataclass
class RecoveryReport:
    utt_id: str
    recovered: List[Recovered]
    merged: Hypothesis
    diagnostics: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "utt_id": self.utt_id,
            "recoveries": [
                {
                    "surface": r.surface,
                    "entry_id": r.entry_id,
                    "pass": r.pass_no,
                    "cost": r.cost,
                    "start_ms": r.start,
                    "end_ms": r.end,
                    "span": list(r.span),
                }
                for r in self.recovered
            ],
            "merged": [{"w": w.surface, "start_ms": w.start, "end_ms": w.end} for w in self.merged.words],
            "diagnostics": list(self.diagnostics),
        }


def _recovered_for(entry: ContextEntry, pass_no, cost, hyp: Hypothesis, first, stop) -> Recovered:
    return Recovered(entry.id, entry.surface, pass_no, float(cost),
                     hyp.words[first].start, max(w.end for w in hyp.words[first:stop]), (first, stop))


def pass1_exact(oov_hyp: Hypothesis, context: Sequence[ContextEntry]) -> List[Recovered]:
    lookup: Dict[PhoneSeq, ContextEntry] = {}
    for entry in sorted(context, key=lambda e: e.id):
        for v in entry.variants:
            lookup.setdefault(v, entry)
    out = []
    for k, w in enumerate(oov_hyp.words):
        if w.surface != SIL:
            continue
        entry = lookup.get(tuple(w.phones))
        if entry is not None:
            out.append(_recovered_for(entry, 1, 0.0, oov_hyp, k, k + 1))
    return out


def word_phones(hyp: Hypothesis, lexicon: Optional[Lexicon]) -> List[Optional[PhoneSeq]]:
    """Attached phones if present, else the first lexicon pronunciation, else None."""
    out = []
    for w in hyp.words:
        if w.phones:
            out.append(tuple(w.phones))
        elif lexicon is not None and w.surface in lexicon:
            out.append(lexicon.get(w.surface)[0])
        else:
            out.append(None)
    return out


def span_candidates(oov_hyp, context, costs: CostMatrix, cfg: RecoveryConfig,
                    excluded=(), lexicon=None, diagnostics=None):
    """Best cost of every (entry, span) pair, as ``(cost, entry_index, first, stop)``.

    Spans never cross a word listed in ``excluded`` or a word without phones.
    ``entry_index`` indexes ``context``.
    """
    if not context or not oov_hyp.words:
        return []
    phones = word_phones(oov_hyp, lexicon)
    blocked = np.zeros(len(phones), dtype=bool)
    for first, stop in excluded:
        blocked[first:stop] = True
    for k, p in enumerate(phones):
        if p is None and not blocked[k]:
            blocked[k] = True
            if diagnostics is not None:
                diagnostics.append(
                    f"word {k} {oov_hyp.words[k].surface!r} has no pronunciation; spans containing it skipped"
                )

    variants = [v for e in context for v in e.variants]
    group_start = np.cumsum([0] + [len(e.variants) for e in context[:-1]])
    var_len = np.array([len(v) for v in variants], dtype=np.float64)

    out = []
    n = len(phones)
    for first in range(n):
        if blocked[first]:
            continue
        stop = first
        bounds = []
        hyp: List[int] = []
        while stop < n and stop - first < cfg.max_span_words and not blocked[stop]:
            hyp.extend(phones[stop])
            stop += 1
            bounds.append(len(hyp))
        rows = prefix_distances(variants, hyp, costs)
        cols = rows[:, bounds]
        if cfg.length_normalize:
            cols = cols / var_len[:, None]
        per_entry = np.minimum.reduceat(cols, group_start, axis=0)
        for length in range(len(bounds)):
            for e, c in enumerate(per_entry[:, length].tolist()):
                out.append((c, e, first, first + length + 1))
    return out


def pass2_fuzzy(oov_hyp: Hypothesis, context: Sequence[ContextEntry], costs: CostMatrix,
                cfg: RecoveryConfig, already: Sequence[Recovered] = (),
                lexicon: Optional[Lexicon] = None, diagnostics: Optional[list] = None) -> List[Recovered]:
    """Greedy lowest-cost-first assignment of context entries to word spans.

    Ties go to the longer span, then the lower entry id.  Spans of
    ``already`` are excluded; unless ``cfg.allow_repeats`` their entries are
    too.
    """
    context = list(context)
    cands = span_candidates(oov_hyp, context, costs, cfg, [r.span for r in already], lexicon, diagnostics)
    cands = [c for c in cands if c[0] <= cfg.cost_threshold]
    cands.sort(key=lambda c: (c[0], -(c[3] - c[2]), context[c[1]].id, c[2]))

    used_words = np.zeros(len(oov_hyp.words), dtype=bool)
    used_entries = {r.entry_id for r in already}
    out = []
    for cost, e, first, stop in cands:
        entry = context[e]
        if used_words[first:stop].any():
            continue
        if not cfg.allow_repeats and entry.id in used_entries:
            continue
        used_words[first:stop] = True
        used_entries.add(entry.id)
        out.append(_recovered_for(entry, 2, cost, oov_hyp, first, stop))
    out.sort(key=lambda r: r.span)
    return out


def merge_transcripts(normal_hyp: Hypothesis, recovered: Sequence[Recovered]) -> Hypothesis:
    """Splice recovered words into the normal transcript.

    A normal word is dropped only when it lies entirely inside a recovered
    time span; partially overlapping words are kept alongside the recovery.
    """
    kept = [
        w for w in normal_hyp.words
        if not any(r.start <= w.start and w.end <= r.end for r in recovered)
    ]
    added = [TimedWord(r.surface, r.start, r.end) for r in recovered]
    words = sorted(kept + added, key=lambda w: w.start)
    return Hypothesis(normal_hyp.utt_id, tuple(words))


def recover_utterance(normal_hyp: Hypothesis, oov_hyp: Hypothesis, context: Sequence[ContextEntry],
                      costs: CostMatrix, cfg: RecoveryConfig = RecoveryConfig(),
                      lexicon: Optional[Lexicon] = None) -> RecoveryReport:
    if normal_hyp.utt_id != oov_hyp.utt_id:
        raise ValueError(f"utterance id mismatch: {normal_hyp.utt_id!r} vs {oov_hyp.utt_id!r}")
    diagnostics: List[str] = []
    first = pass1_exact(oov_hyp, context)
    second = pass2_fuzzy(oov_hyp, context, costs, cfg, first, lexicon, diagnostics)
    recovered = sorted(first + second, key=lambda r: r.span)
    merged = merge_transcripts(normal_hyp, recovered)
    return RecoveryReport(normal_hyp.utt_id, recovered, merged, diagnostics)


_WORKER: dict = {}


def _init_worker(context, costs, cfg, lexicon):
    _WORKER.update(context=context, costs=costs, cfg=cfg, lexicon=lexicon)


def _recover_pair(pair):
    normal, oov = pair
    w = _WORKER
    return recover_utterance(normal, oov, w["context"], w["costs"], w["cfg"], w["lexicon"])


def pair_hypotheses(normal_hyps: Sequence[Hypothesis], oov_hyps: Sequence[Hypothesis]):
    """Pair decodes by utt_id in normal-file order.

    Returns ``(pairs, unmatched_ids)``; ids present in only one file are
    reported in ``unmatched_ids`` (sorted) and skipped.
    """
    oov_by_id = {h.utt_id: h for h in oov_hyps}
    normal_ids = {h.utt_id for h in normal_hyps}
    pairs = [(h, oov_by_id[h.utt_id]) for h in normal_hyps if h.utt_id in oov_by_id]
    unmatched = sorted((normal_ids ^ set(oov_by_id)))
    for utt_id in unmatched:
        log.warning("utterance %s present in only one hypothesis file; skipped", utt_id)
    return pairs, unmatched


def recover_corpus(pairs, context, costs, cfg=RecoveryConfig(), lexicon=None, jobs: int = 1) -> List[RecoveryReport]:
    """Recover every ``(normal, oov)`` pair; output order follows the input for any ``jobs``."""
    context = list(context)
    if jobs <= 1 or len(pairs) < 2:
        return [recover_utterance(n, o, context, costs, cfg, lexicon) for n, o in pairs]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(pairs) // (4 * jobs))
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(context, costs, cfg, lexicon)) as ex:
        return list(ex.map(_recover_pair, pairs, chunksize=chunk))
