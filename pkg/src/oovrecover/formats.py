"""Readers and writers for the corpus formats.

hypotheses.jsonl::

    {"utt_id": "u1", "words": [{"w": "!SIL", "start_ms": 0, "end_ms": 420,
                                "phones": ["b", "r", "n", "o"]}]}

context.tsv: ``surface[<TAB>phones]``.  Lines sharing a surface form are
merged into one entry; a line without phones pulls every lexicon
pronunciation of the phrase.

truth.jsonl::

    {"utt_id": "u1", "labels": [{"surface": "brno", "start_ms": 0, "end_ms": 420}]}

report.jsonl holds one :meth:`RecoveryReport.to_json` record per utterance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional

from .errors import DataError, FormatError
from .phoneset import Lexicon, PhoneSet, phonemize
from .recovery import ContextEntry, Hypothesis, Recovered, RecoveryReport, TimedWord


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def _jsonl_records(path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"malformed JSON ({e.msg})", path, lineno) from None
            if not isinstance(rec, dict):
                raise FormatError("record is not a JSON object", path, lineno)
            yield lineno, rec


def hypothesis_from_json(rec: dict, phoneset: PhoneSet) -> Hypothesis:
    words = []
    for w in rec["words"]:
        phones = w.get("phones")
        words.append(TimedWord(
            str(w["w"]), int(w["start_ms"]), int(w["end_ms"]),
            phoneset.encode(phones) if phones else None,
        ))
    return Hypothesis(str(rec["utt_id"]), tuple(words))


def hypothesis_to_json(hyp: Hypothesis, phoneset: PhoneSet) -> dict:
    words = []
    for w in hyp.words:
        d = {"w": w.surface, "start_ms": w.start, "end_ms": w.end}
        if w.phones:
            d["phones"] = phoneset.decode(w.phones)
        words.append(d)
    return {"utt_id": hyp.utt_id, "words": words}


def read_hypotheses(path, phoneset: PhoneSet) -> List[Hypothesis]:
    out = []
    for lineno, rec in _jsonl_records(path):
        try:
            out.append(hypothesis_from_json(rec, phoneset))
        except (KeyError, TypeError, ValueError, DataError) as e:
            raise FormatError(f"bad hypothesis record ({type(e).__name__}: {e})", path, lineno) from None
    return out


def write_hypotheses(hyps, phoneset: PhoneSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for h in hyps:
            f.write(_dumps(hypothesis_to_json(h, phoneset)) + "\n")


def read_context(path, lexicon: Optional[Lexicon], phoneset: PhoneSet) -> List[ContextEntry]:
    order: List[str] = []
    variants: Dict[str, list] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            surface, _, phones = line.partition("\t")
            surface = " ".join(surface.lower().split())
            if not surface:
                raise FormatError("empty context surface", path, lineno)
            try:
                if phones.strip():
                    new = [phoneset.encode(phones.split())]
                elif lexicon is None:
                    raise FormatError(f"no phones for {surface!r} and no lexicon given", path, lineno)
                else:
                    new = phonemize(surface, lexicon)
            except FormatError:
                raise
            except DataError as e:
                raise FormatError(f"{type(e).__name__}: {e}", path, lineno) from None
            if surface not in variants:
                order.append(surface)
                variants[surface] = []
            for v in new:
                if v not in variants[surface]:
                    variants[surface].append(v)
    return [ContextEntry(i, s, tuple(variants[s])) for i, s in enumerate(order)]


def write_context(entries, phoneset: PhoneSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for e in entries:
            for v in e.variants:
                f.write(f"{e.surface}\t{' '.join(phoneset.decode(v))}\n")


def write_reports(reports, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in reports:
            f.write(_dumps(r.to_json()) + "\n")


def report_from_json(rec: dict) -> RecoveryReport:
    recovered = [
        Recovered(int(r["entry_id"]), str(r["surface"]), int(r["pass"]), float(r["cost"]),
                  int(r["start_ms"]), int(r["end_ms"]), tuple(r["span"]))
        for r in rec.get("recoveries", [])
    ]
    merged = Hypothesis(rec["utt_id"], tuple(
        TimedWord(w["w"], int(w["start_ms"]), int(w["end_ms"])) for w in rec.get("merged", [])
    ))
    return RecoveryReport(str(rec["utt_id"]), recovered, merged, list(rec.get("diagnostics", [])))


def read_reports(path) -> List[RecoveryReport]:
    out = []
    for lineno, rec in _jsonl_records(path):
        try:
            out.append(report_from_json(rec))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad report record ({type(e).__name__}: {e})", path, lineno) from None
    return out


@dataclass(frozen=True)
class Label:
    surface: str
    start: int
    end: int
    category: Optional[str] = None

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"label {self.surface!r} has end <= start")


def read_truth(path) -> Dict[str, List[Label]]:
    out: Dict[str, List[Label]] = {}
    for lineno, rec in _jsonl_records(path):
        try:
            labels = [
                Label(str(lab["surface"]), int(lab["start_ms"]), int(lab["end_ms"]), lab.get("category"))
                for lab in rec["labels"]
            ]
            out[str(rec["utt_id"])] = labels
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad truth record ({type(e).__name__}: {e})", path, lineno) from None
    return out


def write_truth(truth: Dict[str, List[Label]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for utt_id, labels in truth.items():
            recs = []
            for lab in labels:
                d = {"surface": lab.surface, "start_ms": lab.start, "end_ms": lab.end}
                if lab.category is not None:
                    d["category"] = lab.category
                recs.append(d)
            f.write(_dumps({"utt_id": utt_id, "labels": recs}) + "\n")
