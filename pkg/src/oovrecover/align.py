"""Weighted edit distance over phone sequences and alignment traceback.

The recursion is the textbook one::

    c[i, j] = min(c[i-1, j]   + delete_cost,
                  c[i, j-1]   + insert_cost,
                  c[i-1, j-1] + sub[ref[i-1], hyp[j-1]])

with ``c[0, j] = j * insert_cost`` and ``c[i, 0] = i * delete_cost``.
``ref`` indexes rows of the substitution table and ``hyp`` its columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numba
import numpy as np

from .errors import FormatError, UnknownPhone

# Substitution costs are clamped to (insert + delete) - EPS so that a
# substitution is always strictly cheaper than a deletion plus an insertion.
EPS = 1e-6

LABELS = ("hard", "phonetic", "acoustic", "append", "weighted")


class PhoneIndexError(IndexError):
    pass


@dataclass(eq=False)
class CostMatrix:
    """Insertion/deletion costs and an ``N x N`` substitution table.

    ``defined`` marks the off-diagonal entries that were set explicitly;
    every other off-diagonal entry holds the 1.0 hard-cost default.  On
    construction the diagonal is forced to 0 and any substitution cost
    ``>= insert_cost + delete_cost`` is clamped to ``insert_cost +
    delete_cost - EPS`` (floored at 0).
    """

    insert_cost: float
    delete_cost: float
    sub: np.ndarray
    label: str = "hard"
    defined: Optional[np.ndarray] = None
    n_clamped: int = field(init=False, default=0)

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown matrix label {self.label!r}")
        self.insert_cost = float(self.insert_cost)
        self.delete_cost = float(self.delete_cost)
        for name in ("insert_cost", "delete_cost"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        sub = np.array(self.sub, dtype=np.float64)
        if sub.ndim != 2 or sub.shape[0] != sub.shape[1]:
            raise ValueError(f"substitution table must be square, got {sub.shape}")
        if not np.all(np.isfinite(sub)) or (sub < 0).any():
            raise ValueError("substitution costs must be finite and >= 0")
        np.fill_diagonal(sub, 0.0)
        limit = self.insert_cost + self.delete_cost
        over = sub >= limit
        np.fill_diagonal(over, False)
        self.n_clamped = int(over.sum())
        sub[over] = max(limit - EPS, 0.0)

        if self.defined is None:
            defined = np.zeros(sub.shape, dtype=bool)
        else:
            defined = np.array(self.defined, dtype=bool)
            if defined.shape != sub.shape:
                raise ValueError("defined mask shape mismatch")
        np.fill_diagonal(defined, False)

        sub.setflags(write=False)
        defined.setflags(write=False)
        self.sub = sub
        self.defined = defined

    @property
    def size(self) -> int:
        return self.sub.shape[0]

    @property
    def n_defined(self) -> int:
        return int(self.defined.sum())

    def same_shape(self, other: "CostMatrix") -> bool:
        return (
            self.size == other.size
            and self.insert_cost == other.insert_cost
            and self.delete_cost == other.delete_cost
        )


def make_hard_matrix(phoneset_or_size, insert_cost=1.0, delete_cost=1.0) -> CostMatrix:
    n = phoneset_or_size if isinstance(phoneset_or_size, int) else len(phoneset_or_size)
    sub = np.ones((n, n))
    return CostMatrix(insert_cost, delete_cost, sub, label="hard")


# ---------------------------------------------------------------------------
# DP kernels


@numba.njit(cache=True)
def _last_row(ref, hyp, sub, ins, dele, out):
    """Fill ``out[j] = c[len(ref), j]`` for ``j = 0..len(hyp)``."""
    n = hyp.shape[0]
    m = ref.shape[0]
    prev = np.empty(n + 1)
    cur = np.empty(n + 1)
    for j in range(n + 1):
        prev[j] = j * ins
    for i in range(1, m + 1):
        cur[0] = i * dele
        r = ref[i - 1]
        for j in range(1, n + 1):
            best = prev[j - 1] + sub[r, hyp[j - 1]]
            d = prev[j] + dele
            if d < best:
                best = d
            x = cur[j - 1] + ins
            if x < best:
                best = x
            cur[j] = best
        prev, cur = cur, prev
    for j in range(n + 1):
        out[j] = prev[j]


@numba.njit(cache=True)
def _distance(ref, hyp, sub, ins, dele):
    out = np.empty(hyp.shape[0] + 1)
    _last_row(ref, hyp, sub, ins, dele, out)
    return out[hyp.shape[0]]


@numba.njit(cache=True)
def _cross(ref_flat, ref_off, hyp_flat, hyp_off, sub, ins, dele):
    nr = ref_off.shape[0] - 1
    nh = hyp_off.shape[0] - 1
    out = np.empty((nr, nh))
    for a in range(nr):
        ref = ref_flat[ref_off[a]:ref_off[a + 1]]
        for b in range(nh):
            hyp = hyp_flat[hyp_off[b]:hyp_off[b + 1]]
            out[a, b] = _distance(ref, hyp, sub, ins, dele)
    return out


@numba.njit(cache=True)
def _prefix_rows(ref_flat, ref_off, hyp, sub, ins, dele):
    nr = ref_off.shape[0] - 1
    out = np.empty((nr, hyp.shape[0] + 1))
    for a in range(nr):
        _last_row(ref_flat[ref_off[a]:ref_off[a + 1]], hyp, sub, ins, dele, out[a])
    return out


@numba.njit(cache=True)
def _full_table(ref, hyp, sub, ins, dele):
    m = ref.shape[0]
    n = hyp.shape[0]
    c = np.empty((m + 1, n + 1))
    for j in range(n + 1):
        c[0, j] = j * ins
    for i in range(1, m + 1):
        c[i, 0] = i * dele
        r = ref[i - 1]
        for j in range(1, n + 1):
            best = c[i - 1, j - 1] + sub[r, hyp[j - 1]]
            d = c[i - 1, j] + dele
            if d < best:
                best = d
            x = c[i, j - 1] + ins
            if x < best:
                best = x
            c[i, j] = best
    return c


# ---------------------------------------------------------------------------
# Public API


def _as_indices(seq, n) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        bad = arr[(arr < 0) | (arr >= n)][0]
        raise PhoneIndexError(f"phone index {int(bad)} out of range for {n}x{n} matrix")
    return arr


def _flatten(seqs, n):
    arrays = [_as_indices(s, n) for s in seqs]
    off = np.zeros(len(arrays) + 1, dtype=np.int64)
    if arrays:
        off[1:] = np.cumsum([a.size for a in arrays])
        flat = np.concatenate(arrays) if off[-1] else np.zeros(0, dtype=np.int64)
    else:
        flat = np.zeros(0, dtype=np.int64)
    return flat, off


def weighted_edit_distance(ref, hyp, costs: CostMatrix) -> float:
    """Minimum total cost of turning ``ref`` into ``hyp``."""
    r = _as_indices(ref, costs.size)
    h = _as_indices(hyp, costs.size)
    return float(_distance(r, h, costs.sub, costs.insert_cost, costs.delete_cost))


def cross_distances(refs: Sequence, hyps: Sequence, costs: CostMatrix) -> np.ndarray:
    """``out[a, b] = weighted_edit_distance(refs[a], hyps[b], costs)``."""
    rf, ro = _flatten(refs, costs.size)
    hf, ho = _flatten(hyps, costs.size)
    return _cross(rf, ro, hf, ho, costs.sub, costs.insert_cost, costs.delete_cost)


def prefix_distances(refs: Sequence, hyp, costs: CostMatrix) -> np.ndarray:
    """Distances from every ``refs[a]`` to every prefix of ``hyp``.

    ``out[a, j]`` is the distance between ``refs[a]`` and ``hyp[:j]``, which
    is the last row of the DP table, so one pass scores all prefixes.
    """
    rf, ro = _flatten(refs, costs.size)
    h = _as_indices(hyp, costs.size)
    return _prefix_rows(rf, ro, h, costs.sub, costs.insert_cost, costs.delete_cost)


class EditOp(NamedTuple):
    kind: str  # "match", "sub", "del" or "ins"
    ref_pos: Optional[int]
    hyp_pos: Optional[int]
    cost: float


@dataclass(frozen=True)
class Alignment:
    ops: List[EditOp]
    total_cost: float

    def replay(self, ref, hyp):
        """Rebuild ``(ref, hyp)`` from the ops; used to check the alignment."""
        r, h = [], []
        for op in self.ops:
            if op.kind in ("match", "sub", "del"):
                r.append(ref[op.ref_pos])
            if op.kind in ("match", "sub", "ins"):
                h.append(hyp[op.hyp_pos])
        return r, h


def align_sequences(ref, hyp, costs: CostMatrix) -> Alignment:
    """Full DP with traceback.

    Ties prefer a diagonal step (match or substitution), then deletion,
    then insertion.
    """
    r = _as_indices(ref, costs.size)
    h = _as_indices(hyp, costs.size)
    sub, ins, dele = costs.sub, costs.insert_cost, costs.delete_cost
    c = _full_table(r, h, sub, ins, dele)
    i, j = len(r), len(h)
    ops = []
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            s = sub[r[i - 1], h[j - 1]]
            if c[i, j] == c[i - 1, j - 1] + s:
                kind = "match" if r[i - 1] == h[j - 1] else "sub"
                ops.append(EditOp(kind, i - 1, j - 1, float(s)))
                i, j = i - 1, j - 1
                continue
        if i > 0 and c[i, j] == c[i - 1, j] + dele:
            ops.append(EditOp("del", i - 1, None, dele))
            i -= 1
        else:
            ops.append(EditOp("ins", None, j - 1, ins))
            j -= 1
    ops.reverse()
    return Alignment(ops, float(c[len(r), len(h)]))


# ---------------------------------------------------------------------------
# costmatrix.tsv


def save_cost_matrix(costs: CostMatrix, phoneset, path) -> int:
    """Write the header and every defined entry; returns the entry count."""
    symbols = phoneset.symbols if hasattr(phoneset, "symbols") else list(phoneset)
    if len(symbols) != costs.size:
        raise ValueError("phone set size does not match matrix")
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"#I={costs.insert_cost!r}\t#D={costs.delete_cost!r}\t#label={costs.label}\n")
        rows, cols = np.nonzero(costs.defined)
        for a, b in zip(rows.tolist(), cols.tolist()):
            f.write(f"{symbols[a]}\t{symbols[b]}\t{float(costs.sub[a, b])!r}\n")
            n += 1
    return n


def load_cost_matrix(path, phoneset) -> CostMatrix:
    header = None
    n = len(phoneset)
    sub = np.ones((n, n))
    defined = np.zeros((n, n), dtype=bool)
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if header is None:
                header = _parse_header(line, path, lineno)
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError("expected phone_a<TAB>phone_b<TAB>cost", path, lineno)
            try:
                a, b = phoneset.index(cols[0]), phoneset.index(cols[1])
            except UnknownPhone as e:
                raise FormatError(f"unknown phone {e}", path, lineno) from None
            if a == b:
                raise FormatError(f"diagonal entry for {cols[0]!r}", path, lineno)
            try:
                sub[a, b] = float(cols[2])
            except ValueError:
                raise FormatError(f"bad cost {cols[2]!r}", path, lineno) from None
            defined[a, b] = True
    if header is None:
        raise FormatError("missing #I/#D/#label header", path)
    try:
        return CostMatrix(header["I"], header["D"], sub, label=header["label"], defined=defined)
    except ValueError as e:
        raise FormatError(str(e), path) from None


def _parse_header(line, path, lineno):
    fields = {}
    for part in line.split("\t"):
        if not part.startswith("#") or "=" not in part:
            raise FormatError(f"malformed header field {part!r}", path, lineno)
        key, value = part[1:].split("=", 1)
        fields[key] = value
    if set(fields) != {"I", "D", "label"}:
        raise FormatError("header must carry exactly #I, #D and #label", path, lineno)
    try:
        return {"I": float(fields["I"]), "D": float(fields["D"]), "label": fields["label"]}
    except ValueError:
        raise FormatError("non-numeric I/D in header", path, lineno) from None
