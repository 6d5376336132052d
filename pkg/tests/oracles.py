"""Independent reference implementations used only by the tests.

The edit-distance oracle does not run a DP.  Any edit script between
``ref`` (length m) and ``hyp`` (length n) pairs up ``k`` reference positions
with ``k`` hypothesis positions in order (matches and substitutions); every
other position is a deletion or an insertion.  Enumerating all such
order-preserving partial matchings and taking the cheapest one gives the
exact minimum.  With dyadic costs (multiples of 1/8) every sum is exact in
floating point, so results can be compared with ``==``.
"""
from functools import lru_cache
from itertools import combinations, product

import numpy as np


@lru_cache(maxsize=None)
def matchings(m, n):
    """All order-preserving partial matchings as ``(k, ref_idx, hyp_idx)`` arrays."""
    out = []
    for k in range(min(m, n) + 1):
        for ri in combinations(range(m), k):
            for hj in combinations(range(n), k):
                out.append((k, ri, hj))
    return tuple(out)


def oracle_distance(ref, hyp, sub, ins, dele):
    m, n = len(ref), len(hyp)
    best = None
    for k, ri, hj in matchings(m, n):
        c = (m - k) * dele + (n - k) * ins + sum(sub[ref[i], hyp[j]] for i, j in zip(ri, hj))
        if best is None or c < best:
            best = c
    return best


def all_sequences(alphabet, max_len):
    """Every sequence over ``range(alphabet)`` up to ``max_len``, grouped by length."""
    out = {}
    for m in range(max_len + 1):
        rows = list(product(range(alphabet), repeat=m))
        out[m] = np.array(rows, dtype=np.int64).reshape(len(rows), m)
    return out


def oracle_block(refs, hyps, sub, ins, dele):
    """Vectorised oracle for equal-length blocks: ``refs`` is (R, m), ``hyps`` is (H, n)."""
    m, n = refs.shape[1], hyps.shape[1]
    sub = np.asarray(sub, dtype=np.float64)
    # pair[r, h, i, j] = sub[refs[r, i], hyps[h, j]]
    pair = sub[refs[:, None, :, None], hyps[None, :, None, :]]
    best = np.full((refs.shape[0], hyps.shape[0]), np.inf)
    for k, ri, hj in matchings(m, n):
        c = np.full(best.shape, (m - k) * dele + (n - k) * ins)
        for i, j in zip(ri, hj):
            c = c + pair[:, :, i, j]
        np.minimum(best, c, out=best)
    return best


def dyadic_matrix(rng, n, lo=0, hi=15):
    """Random substitution table with entries in {lo/8, ..., hi/8} and a zero diagonal."""
    sub = rng.integers(lo, hi + 1, size=(n, n)) / 8.0
    np.fill_diagonal(sub, 0.0)
    return sub



@lru_cache(maxsize=None)
def _padded(m, n):
    """Matchings of (m, n) as padded index arrays plus a validity mask."""
    ms = matchings(m, n)
    width = max(min(m, n), 1)
    ri = np.zeros((len(ms), width), dtype=np.int64)
    hj = np.zeros((len(ms), width), dtype=np.int64)
    mask = np.zeros((len(ms), width), dtype=bool)
    ks = np.zeros(len(ms), dtype=np.int64)
    for row, (k, r, h) in enumerate(ms):
        ri[row, :k], hj[row, :k], mask[row, :k], ks[row] = r, h, True, k
    return ks, ri, hj, mask


def oracle_distance_np(ref, hyp, sub, ins, dele):
    """Same minimum as :func:`oracle_distance`, vectorised over matchings."""
    m, n = len(ref), len(hyp)
    ks, ri, hj, mask = _padded(m, n)
    ref = np.asarray(ref, dtype=np.int64).reshape(-1)
    hyp = np.asarray(hyp, dtype=np.int64).reshape(-1)
    if m == 0 or n == 0:
        return m * dele + n * ins
    pair = np.where(mask, np.asarray(sub)[ref[ri], hyp[hj]], 0.0)
    return float(np.min((m - ks) * dele + (n - ks) * ins + pair.sum(axis=1)))
