"""Substitution-cost matrices from articulatory features and decoder statistics.

Four constructions are provided on top of the hard (unit-cost) matrix:

* phonetic: cosine distance between feature vectors, defined for every pair;
* acoustic: ``(1 - N_C / (N_C + N_S)) ** exponent`` per reference phone,
  applied to the substitution partners actually observed for that phone,
  only for phones with more than ``min_substitutions`` substitutions;
* append: acoustic where defined, phonetic elsewhere;
* weighted: ``w * acoustic + (1 - w) * phonetic`` where acoustic is
  defined, phonetic elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .align import CostMatrix, align_sequences, make_hard_matrix
from .errors import FormatError, UnknownPhone


@dataclass(frozen=True)
class SimilarityConfig:
    min_substitutions: int = 100
    exponent: int = 4
    ensemble_weight: float = 0.5
    # Score each (ref, hyp) pair from its own count instead of the
    # per-reference-phone total.  Experimental, off by default.
    per_pair: bool = False

    def __post_init__(self):
        if self.min_substitutions < 0:
            raise ValueError("min_substitutions must be >= 0")
        if self.exponent < 1:
            raise ValueError("exponent must be >= 1")
        if not 0.0 <= self.ensemble_weight <= 1.0:
            raise ValueError("ensemble_weight must lie in [0, 1]")


@dataclass
class PhoneStats:
    """Alignment counts per reference phone (and per hypothesis phone for insertions)."""

    correct: np.ndarray
    substituted: np.ndarray
    deleted: np.ndarray
    inserted: np.ndarray
    pairs: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "PhoneStats":
        z = lambda: np.zeros(n, dtype=np.int64)  # noqa: E731
        return cls(z(), z(), z(), z(), np.zeros((n, n), dtype=np.int64))

    def __add__(self, other: "PhoneStats") -> "PhoneStats":
        return PhoneStats(
            self.correct + other.correct,
            self.substituted + other.substituted,
            self.deleted + other.deleted,
            self.inserted + other.inserted,
            self.pairs + other.pairs,
        )

    def is_consistent(self) -> bool:
        return bool(np.array_equal(self.pairs.sum(axis=1), self.substituted))


def harvest_phone_stats(pairs: Iterable[Tuple[Sequence[int], Sequence[int]]], phoneset) -> PhoneStats:
    """Count correct/substituted/deleted/inserted phones over aligned pairs.

    Each ``(ref, hyp)`` pair is aligned under the hard matrix.
    """
    n = len(phoneset)
    hard = make_hard_matrix(n)
    stats = PhoneStats.empty(n)
    for ref, hyp in pairs:
        for op in align_sequences(ref, hyp, hard).ops:
            if op.kind == "match":
                stats.correct[ref[op.ref_pos]] += 1
            elif op.kind == "sub":
                p, q = ref[op.ref_pos], hyp[op.hyp_pos]
                stats.substituted[p] += 1
                stats.pairs[p, q] += 1
            elif op.kind == "del":
                stats.deleted[ref[op.ref_pos]] += 1
            else:
                stats.inserted[hyp[op.hyp_pos]] += 1
    return stats


def acoustic_base(n_correct, n_substituted, exponent=4):
    return (1.0 - n_correct / (n_correct + n_substituted)) ** exponent


def build_phonetic_matrix(phoneset, insert_cost=1.0, delete_cost=1.0) -> CostMatrix:
    f = phoneset.features
    unit = f / np.linalg.norm(f, axis=1, keepdims=True)
    dist = np.clip(1.0 - unit @ unit.T, 0.0, None)
    defined = ~np.eye(len(phoneset), dtype=bool)
    return CostMatrix(insert_cost, delete_cost, dist, label="phonetic", defined=defined)


def build_acoustic_matrix(stats: PhoneStats, cfg: SimilarityConfig, phoneset,
                          insert_cost=1.0, delete_cost=1.0) -> CostMatrix:
    n = len(phoneset)
    sub = np.ones((n, n))
    defined = np.zeros((n, n), dtype=bool)
    for p in range(n):
        nc, ns = int(stats.correct[p]), int(stats.substituted[p])
        if cfg.per_pair:
            for q in np.nonzero(stats.pairs[p])[0]:
                k = int(stats.pairs[p, q])
                if q != p and k > cfg.min_substitutions:
                    sub[p, q] = acoustic_base(nc, k, cfg.exponent)
                    defined[p, q] = True
            continue
        if ns <= cfg.min_substitutions:
            continue
        base = acoustic_base(nc, ns, cfg.exponent)
        for q in np.nonzero(stats.pairs[p])[0]:
            if q != p:
                sub[p, q] = base
                defined[p, q] = True
    return CostMatrix(insert_cost, delete_cost, sub, label="acoustic", defined=defined)


def _check_parents(acoustic: CostMatrix, phonetic: CostMatrix):
    if not acoustic.same_shape(phonetic):
        raise ValueError("acoustic and phonetic matrices differ in size or insert/delete costs")


def build_append_matrix(acoustic: CostMatrix, phonetic: CostMatrix) -> CostMatrix:
    _check_parents(acoustic, phonetic)
    sub = np.where(acoustic.defined, acoustic.sub, phonetic.sub)
    return CostMatrix(acoustic.insert_cost, acoustic.delete_cost, sub, label="append",
                      defined=acoustic.defined | phonetic.defined)


def build_weighted_matrix(acoustic: CostMatrix, phonetic: CostMatrix, w: float = 0.5) -> CostMatrix:
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {w}")
    _check_parents(acoustic, phonetic)
    mixed = w * acoustic.sub + (1.0 - w) * phonetic.sub
    sub = np.where(acoustic.defined, mixed, phonetic.sub)
    return CostMatrix(acoustic.insert_cost, acoustic.delete_cost, sub, label="weighted",
                      defined=acoustic.defined | phonetic.defined)


def read_phone_pairs(path, phoneset):
    """Parse ``utt_id<TAB>ref phones<TAB>hyp phones`` lines."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError("expected utt_id<TAB>ref<TAB>hyp", path, lineno)
            try:
                out.append((cols[0], phoneset.encode(cols[1].split()), phoneset.encode(cols[2].split())))
            except UnknownPhone as e:
                raise FormatError(f"unknown phone {e}", path, lineno) from None
    return out


def write_phone_pairs(rows, phoneset, path):
    with open(path, "w", encoding="utf-8") as f:
        for utt_id, ref, hyp in rows:
            f.write(f"{utt_id}\t{' '.join(phoneset.decode(ref))}\t{' '.join(phoneset.decode(hyp))}\n")
