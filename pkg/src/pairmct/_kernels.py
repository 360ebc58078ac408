"""Numba kernels for the permutation loops.

One compiled loop per resampling scheme. Each loop regenerates the resample
from the counter-based stream (same draws as :mod:`pairmct._rng`), evaluates
the statistic and tallies it against the observed value, so resampled
statistics never have to be materialised.

Pooled ranks are invariant under both resampling groups (sign flips only swap
which component a value belongs to; shuffles only relabel groups), so they are
computed once per call and only the internal ranks are recomputed.
"""

import numba as nb
import numpy as np

from ._rng import SHUFFLE_OFFSET
from ._stat_ids import MUNZEL_BF, MUNZEL_F, PAIRED_T, SCHEME_OF, SIGN_FLIP, TIE_RTOL, TML, WELCH, WMW, WSR

_opts = dict(nogil=True, cache=True)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U63 = np.uint64(63)


@nb.njit(**_opts)
def mix64(z):
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


@nb.njit(**_opts)
def stream_key(seed, index):
    return mix64(seed ^ mix64((np.uint64(index) + _ONE) * _GOLDEN))


@nb.njit(**_opts)
def draw(key, j):
    return mix64(key + (np.uint64(j) + _ONE) * _GOLDEN)


@nb.njit(**_opts)
def mid_ranks(x):
    n = x.shape[0]
    out = np.empty(n)
    order = np.argsort(x, kind="mergesort")
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            out[order[k]] = avg
        i = j + 1
    return out


@nb.njit(**_opts)
def _ratio(num, den, degenerate):
    if degenerate:
        if num > 0:
            return np.inf
        if num < 0:
            return -np.inf
        return 0.0
    return num / den


@nb.njit(**_opts)
def _mean(x):
    n = x.shape[0]
    x0 = x[0]
    s = 0.0
    for i in range(n):
        s += x[i] - x0
    return x0 + s / n


@nb.njit(**_opts)
def _ss(x, m):
    s = 0.0
    for i in range(x.shape[0]):
        s += (x[i] - m) ** 2
    return s


@nb.njit(**_opts)
def _constant(x):
    for i in range(1, x.shape[0]):
        if x[i] != x[0]:
            return False
    return True


@nb.njit(**_opts)
def t_ratio(d):
    """Studentised mean sqrt(n) * mean / sd, the common core of several statistics."""
    n = d.shape[0]
    m = _mean(d)
    return _ratio(m * np.sqrt(n), np.sqrt(_ss(d, m) / (n - 1)), _constant(d))


@nb.njit(**_opts)
def welch(a, b):
    n1 = a.shape[0]
    n2 = b.shape[0]
    m1 = _mean(a)
    m2 = _mean(b)
    q = _ss(a, m1) / (n1 - 1) / n1 + _ss(b, m2) / (n2 - 1) / n2
    return _ratio(m1 - m2, np.sqrt(q), _constant(a) and _constant(b))


@nb.njit(**_opts)
def _bm_from_ranks(ra, rb, a, b):
    # ra, rb: pooled ranks of a, b.
    n1 = a.shape[0]
    n2 = b.shape[0]
    M = n1 + n2
    p1 = ra - mid_ranks(a)
    p2 = rb - mid_ranks(b)
    s1 = _ss(p1, _mean(p1)) / (n1 - 1)
    s2 = _ss(p2, _mean(p2)) / (n2 - 1)
    num = np.sqrt(n1 * n2 / M) * (rb.sum() / n2 - ra.sum() / n1)
    return _ratio(num, np.sqrt(M * (s1 / n2 + s2 / n1)), _constant(p1) and _constant(p2))


@nb.njit(**_opts)
def _exceeds(v, t):
    if t == np.inf:
        return v == np.inf
    if t == -np.inf:
        return True
    return v >= t - TIE_RTOL * max(1.0, abs(t))


@nb.njit(**_opts)
def _tally(counts, v, t):
    if _exceeds(v, t):
        counts[0] += 1
    if _exceeds(-v, -t):
        counts[1] += 1
    if _exceeds(abs(v), abs(t)):
        counts[2] += 1


@nb.njit(**_opts)
def _flip_stat(stat_id, x1, x2, r1, r2, flips, y1, y2, work):
    """Statistic on the sign-flipped complete block.

    ``r1``/``r2`` are the pooled ranks of x1/x2 for rank statistics, or the
    absolute-difference ranks and signs for WSR.
    """
    n = x1.shape[0]
    if stat_id == PAIRED_T:
        for g in range(n):
            d = x1[g] - x2[g]
            work[g] = -d if flips[g] else d
        return t_ratio(work)
    if stat_id == MUNZEL_F:
        for g in range(n):
            d = r2[g] - r1[g]
            work[g] = -d if flips[g] else d
        return t_ratio(work)
    if stat_id == WSR:
        # r1: ranks among nonzero |delta| (0 for zeros), r2: sign of delta.
        num = 0.0
        den = 0.0
        nz = 0
        for g in range(n):
            s = -r2[g] if flips[g] else r2[g]
            num += s * r1[g]
            if r2[g] != 0.0:
                den += r1[g] * r1[g]
                nz += 1
        return _ratio(num, np.sqrt(den), nz == 0)
    # MUNZEL_BF
    q1 = np.empty(n)
    q2 = np.empty(n)
    for g in range(n):
        if flips[g]:
            y1[g] = x2[g]
            y2[g] = x1[g]
            q1[g] = r2[g]
            q2[g] = r1[g]
        else:
            y1[g] = x1[g]
            y2[g] = x2[g]
            q1[g] = r1[g]
            q2[g] = r2[g]
    i1 = mid_ranks(y1)
    i2 = mid_ranks(y2)
    for g in range(n):
        work[g] = ((q2[g] - i2[g]) - (q1[g] - i1[g])) / n
    return t_ratio(work)


@nb.njit(**_opts)
def _flip_prepare(stat_id, x1, x2):
    n = x1.shape[0]
    r1 = np.zeros(n)
    r2 = np.zeros(n)
    if stat_id == MUNZEL_F or stat_id == MUNZEL_BF:
        r = mid_ranks(np.concatenate((x1, x2)))
        r1[:] = r[:n]
        r2[:] = r[n:]
    elif stat_id == WSR:
        absd = np.abs(x1 - x2)
        zeros = 0
        for g in range(n):
            if absd[g] == 0.0:
                zeros += 1
        r = mid_ranks(absd)
        for g in range(n):
            d = x1[g] - x2[g]
            r1[g] = r[g] - zeros
            r2[g] = 1.0 if d > 0 else (-1.0 if d < 0 else 0.0)
    return r1, r2


@nb.njit(**_opts)
def _shuffle_stat(stat_id, ga, gb, ra, rb, s0):
    n1 = ga.shape[0]
    n2 = gb.shape[0]
    if stat_id == WELCH:
        return welch(ga, gb)
    if stat_id == WMW:
        M = n1 + n2
        num = np.sqrt(n1 * n2) * (rb.sum() / n2 - ra.sum() / n1)
        return _ratio(num, np.sqrt(s0 * M), s0 == 0.0)
    return _bm_from_ranks(ra, rb, ga, gb)


@nb.njit(**_opts)
def _shuffle_apply(key, pooled, pranks, n1, ga, gb, ra, rb):
    M = pooled.shape[0]
    keys = np.empty(M, dtype=np.uint64)
    for i in range(M):
        keys[i] = draw(key, SHUFFLE_OFFSET + i)
    order = np.argsort(keys, kind="mergesort")
    for i in range(n1):
        ga[i] = pooled[order[i]]
        ra[i] = pranks[order[i]]
    for i in range(M - n1):
        gb[i] = pooled[order[n1 + i]]
        rb[i] = pranks[order[n1 + i]]


@nb.njit(**_opts)
def _rank_spread(pranks):
    M = pranks.shape[0]
    c = (M + 1) / 2.0
    s = 0.0
    for i in range(M):
        s += (pranks[i] - c) ** 2
    return s / (M - 1)


@nb.njit(**_opts)
def count_sign_flip(stat_id, x1, x2, seed, start, stop, t_obs, out):
    n = x1.shape[0]
    r1, r2 = _flip_prepare(stat_id, x1, x2)
    counts = np.zeros(3, dtype=np.int64)
    flips = np.empty(n, dtype=np.bool_)
    y1 = np.empty(n)
    y2 = np.empty(n)
    work = np.empty(n)
    keep = out.shape[0] > 0
    for b in range(start, stop):
        key = stream_key(seed, b)
        for g in range(n):
            flips[g] = (draw(key, g) >> _U63) == _ONE
        v = _flip_stat(stat_id, x1, x2, r1, r2, flips, y1, y2, work)
        _tally(counts, v, t_obs)
        if keep:
            out[b - start] = v
    return counts


@nb.njit(**_opts)
def count_shuffle(stat_id, a, b, seed, start, stop, t_obs, out):
    n1 = a.shape[0]
    M = n1 + b.shape[0]
    pooled = np.concatenate((a, b))
    pranks = mid_ranks(pooled)
    s0 = _rank_spread(pranks)
    counts = np.zeros(3, dtype=np.int64)
    ga = np.empty(n1)
    gb = np.empty(M - n1)
    ra = np.empty(n1)
    rb = np.empty(M - n1)
    keep = out.shape[0] > 0
    for i in range(start, stop):
        key = stream_key(seed, i)
        _shuffle_apply(key, pooled, pranks, n1, ga, gb, ra, rb)
        v = _shuffle_stat(stat_id, ga, gb, ra, rb, s0)
        _tally(counts, v, t_obs)
        if keep:
            out[i - start] = v
    return counts


@nb.njit(**_opts)
def count_combined(x1, x2, a, b, seed, start, stop, t_obs, out):
    """Weighted paired-t / Welch statistic under joint flips and shuffles."""
    n = x1.shape[0]
    n1 = a.shape[0]
    M = n1 + b.shape[0]
    weight = 2.0 * n / (2 * n + M)
    wc = np.sqrt(weight)
    wi = np.sqrt(1.0 - weight)
    pooled = np.concatenate((a, b))
    pranks = np.zeros(M)
    counts = np.zeros(3, dtype=np.int64)
    ga = np.empty(n1)
    gb = np.empty(M - n1)
    ra = np.empty(n1)
    rb = np.empty(M - n1)
    work = np.empty(n)
    keep = out.shape[0] > 0
    for i in range(start, stop):
        key = stream_key(seed, i)
        for g in range(n):
            d = x1[g] - x2[g]
            work[g] = -d if (draw(key, g) >> _U63) == _ONE else d
        _shuffle_apply(key, pooled, pranks, n1, ga, gb, ra, rb)
        v = wc * t_ratio(work) + wi * welch(ga, gb)
        if np.isnan(v):
            v = 0.0
        _tally(counts, v, t_obs)
        if keep:
            out[i - start] = v
    return counts


def count_exceed(stat_id, x1, x2, a, b, seed, start, stop, t_obs, keep=False):
    """Same contract as :func:`pairmct._batched.count_exceed`."""
    seed = np.uint64(int(seed) & ((1 << 64) - 1))
    out = np.empty(stop - start if keep else 0)
    f64 = lambda v: np.ascontiguousarray(v, dtype=np.float64)  # noqa: E731
    t_obs = float(t_obs)
    if stat_id == TML:
        counts = count_combined(f64(x1), f64(x2), f64(a), f64(b), seed, start, stop, t_obs, out)
    elif SCHEME_OF[stat_id] == SIGN_FLIP:
        counts = count_sign_flip(stat_id, f64(x1), f64(x2), seed, start, stop, t_obs, out)
    else:
        counts = count_shuffle(stat_id, f64(a), f64(b), seed, start, stop, t_obs, out)
    return counts, (out if keep else None)

