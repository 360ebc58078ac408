"""Vectorised numpy kernels.

Every statistic here takes blocks with a leading resample axis, shape
``(B, k)``, and returns one value per row. The public functions in
:mod:`pairmct.statistics` call these with ``B == 1``; the permutation engine
calls them on whole chunks of resamples when numba is disabled.
"""

import numpy as np

from . import _rng
from ._stat_ids import (BM, COMBINED, MUNZEL_BF, MUNZEL_F, PAIRED_T, POOLED_SHUFFLE,
                        SCHEME_OF, SIGN_FLIP, TIE_RTOL, TML, WELCH, WMW, WSR)

CHUNK = 2048


def mid_ranks_rows(x):
    """Mid-ranks along the last axis of a 2-d array (sort, then average tie blocks)."""
    x = np.asarray(x, dtype=np.float64)
    B, n = x.shape
    order = np.argsort(x, axis=1, kind="stable")
    s = np.take_along_axis(x, order, axis=1)
    pos = np.broadcast_to(np.arange(1, n + 1, dtype=np.float64), (B, n))
    starts = np.ones((B, n), dtype=bool)
    starts[:, 1:] = s[:, 1:] != s[:, :-1]
    ends = np.ones((B, n), dtype=bool)
    ends[:, :-1] = starts[:, 1:]
    first = np.maximum.accumulate(np.where(starts, pos, 0.0), axis=1)
    last = np.minimum.accumulate(np.where(ends, pos, n + 1.0)[:, ::-1], axis=1)[:, ::-1]
    out = np.empty_like(x)
    np.put_along_axis(out, order, 0.5 * (first + last), axis=1)
    return out


def _mean(x):
    # Shift by the first column so that constant rows average exactly.
    x0 = x[:, :1]
    return x0[:, 0] + (x - x0).mean(axis=1)


def _ss(x, m):
    return ((x - m[:, None]) ** 2).sum(axis=1)


def _constant(x):
    return x.max(axis=1) == x.min(axis=1)


def _ratio(num, den, degenerate):
    """num/den, mapping degenerate rows to +-inf by the sign of num (0 when num == 0)."""
    out = np.where(num > 0, np.inf, np.where(num < 0, -np.inf, 0.0))
    ok = ~degenerate
    out[ok] = num[ok] / den[ok]
    return out


def paired_t(d):
    n = d.shape[1]
    m = _mean(d)
    var = _ss(d, m) / (n - 1)
    return _ratio(m * np.sqrt(n), np.sqrt(var), _constant(d))


def welch(a, b):
    """Welch statistic and Welch-Satterthwaite degrees of freedom."""
    n1, n2 = a.shape[1], b.shape[1]
    m1, m2 = _mean(a), _mean(b)
    q1 = _ss(a, m1) / (n1 - 1) / n1
    q2 = _ss(b, m2) / (n2 - 1) / n2
    degenerate = _constant(a) & _constant(b)
    value = _ratio(m1 - m2, np.sqrt(q1 + q2), degenerate)
    with np.errstate(invalid="ignore", divide="ignore"):
        df = (q1 + q2) ** 2 / (q1**2 / (n1 - 1) + q2**2 / (n2 - 1))
    return value, np.where(degenerate, np.nan, df)


def wsr(delta):
    absd = np.abs(delta)
    zeros = (absd == 0).sum(axis=1)
    r = mid_ranks_rows(absd) - zeros[:, None]
    sgn = np.sign(delta)
    num = (sgn * r).sum(axis=1)
    den = np.sqrt(((sgn != 0) * r**2).sum(axis=1))
    return _ratio(num, den, zeros == delta.shape[1])


def _rank_means(r, n1):
    return r[:, :n1].mean(axis=1), r[:, n1:].mean(axis=1)


def wmw(a, b):
    n1, n2 = a.shape[1], b.shape[1]
    M = n1 + n2
    r = mid_ranks_rows(np.concatenate([a, b], axis=1))
    rbar1, rbar2 = _rank_means(r, n1)
    s0 = ((r - (M + 1) / 2.0) ** 2).sum(axis=1) / (M - 1)
    num = np.sqrt(n1 * n2) * (rbar2 - rbar1)
    return _ratio(num, np.sqrt(s0 * M), s0 == 0)


def munzel_f(x1, x2):
    n = x1.shape[1]
    r = mid_ranks_rows(np.concatenate([x1, x2], axis=1))
    return paired_t(r[:, n:] - r[:, :n])


def munzel_bf(x1, x2):
    n = x1.shape[1]
    r = mid_ranks_rows(np.concatenate([x1, x2], axis=1))
    z = ((r[:, n:] - mid_ranks_rows(x2)) - (r[:, :n] - mid_ranks_rows(x1))) / n
    return paired_t(z)


def bm(a, b):
    """Rank statistic for the unpaired block, with the placement variance as printed.

    The variance uses ``M * (S1^2 / n2 + S2^2 / n1)``; it differs from the usual
    Brunner-Munzel scaling by the constant factor ``n1 * n2``, which permutation
    calibration does not see.
    """
    n1, n2 = a.shape[1], b.shape[1]
    M = n1 + n2
    r = mid_ranks_rows(np.concatenate([a, b], axis=1))
    # R - R_internal - Rbar + (n+1)/2 == P - Pbar for placements P = R - R_internal.
    p1 = r[:, :n1] - mid_ranks_rows(a)
    p2 = r[:, n1:] - mid_ranks_rows(b)
    s1 = _ss(p1, _mean(p1)) / (n1 - 1)
    s2 = _ss(p2, _mean(p2)) / (n2 - 1)
    rbar1, rbar2 = _rank_means(r, n1)
    num = np.sqrt(n1 * n2 / M) * (rbar2 - rbar1)
    return _ratio(num, np.sqrt(M * (s1 / n2 + s2 / n1)), _constant(p1) & _constant(p2))


def combine_weighted(t_c, t_i, a):
    """sqrt(a) * t_c + sqrt(1 - a) * t_i, with opposite infinities collapsing to 0."""
    with np.errstate(invalid="ignore"):
        v = np.sqrt(a) * t_c + np.sqrt(1.0 - a) * t_i
    return np.where(np.isnan(v), 0.0, v)


def tml(x1, x2, a, b):
    n_c = x1.shape[1]
    weight = 2.0 * n_c / (2 * n_c + a.shape[1] + b.shape[1])
    return combine_weighted(paired_t(x1 - x2), welch(a, b)[0], weight)


def statistic_rows(stat_id, x1, x2, a, b):
    """Evaluate statistic ``stat_id`` on blocks with a leading resample axis."""
    if stat_id == PAIRED_T:
        return paired_t(x1 - x2)
    if stat_id == WSR:
        return wsr(x1 - x2)
    if stat_id == MUNZEL_F:
        return munzel_f(x1, x2)
    if stat_id == MUNZEL_BF:
        return munzel_bf(x1, x2)
    if stat_id == WELCH:
        return welch(a, b)[0]
    if stat_id == WMW:
        return wmw(a, b)
    if stat_id == BM:
        return bm(a, b)
    if stat_id == TML:
        return tml(x1, x2, a, b)
    raise ValueError(f"unknown statistic id {stat_id}")


def _exceeds(v, t):
    if np.isposinf(t):
        return v == np.inf
    if np.isneginf(t):
        return np.ones(v.shape, dtype=bool)
    return v >= t - TIE_RTOL * max(1.0, abs(t))


def tally(stats, t_obs):
    """Counts of resampled values at least as extreme as ``t_obs``.

    Returns ``[#(T >= t), #(T <= t), #(|T| >= |t|)]``.
    """
    return np.array([
        np.count_nonzero(_exceeds(stats, t_obs)),
        np.count_nonzero(_exceeds(-stats, -t_obs)),
        np.count_nonzero(_exceeds(np.abs(stats), abs(t_obs))),
    ], dtype=np.int64)


def resample_rows(scheme, keys, x1, x2, a, b):
    """Materialise the resamples for the given stream keys."""
    B = len(keys)
    if scheme in (SIGN_FLIP, COMBINED):
        f = _rng.flip_bits(keys, len(x1))
        y1 = np.where(f, x2, x1)
        y2 = np.where(f, x1, x2)
    else:
        y1 = np.broadcast_to(x1, (B, len(x1)))
        y2 = np.broadcast_to(x2, (B, len(x2)))
    if scheme in (POOLED_SHUFFLE, COMBINED):
        pooled = np.concatenate([a, b])
        perm = pooled[_rng.shuffle_order(keys, len(pooled))]
        g1, g2 = perm[:, :len(a)], perm[:, len(a):]
    else:
        g1 = np.broadcast_to(a, (B, len(a)))
        g2 = np.broadcast_to(b, (B, len(b)))
    return y1, y2, g1, g2


def count_exceed(stat_id, x1, x2, a, b, seed, start, stop, t_obs, keep=False):
    """Tally resamples ``start .. stop-1`` of statistic ``stat_id``.

    Returns ``(counts, stats)`` where ``stats`` is ``None`` unless ``keep``.
    """
    scheme = SCHEME_OF[stat_id]
    x1, x2, a, b = (np.asarray(v, dtype=np.float64) for v in (x1, x2, a, b))
    counts = np.zeros(3, dtype=np.int64)
    kept = []
    for lo in range(start, stop, CHUNK):
        hi = min(lo + CHUNK, stop)
        keys = _rng.stream_keys(seed, np.arange(lo, hi))
        stats = statistic_rows(stat_id, *resample_rows(scheme, keys, x1, x2, a, b))
        counts += tally(stats, t_obs)
        if keep:
            kept.append(stats)
    if not keep:
        return counts, None
    return counts, (np.concatenate(kept) if kept else np.empty(0))
