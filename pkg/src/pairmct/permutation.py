"""Resampling schemes and permutation p-values.

Three schemes:

* ``sign_flip`` - swap the two components of each complete pair with
  probability 1/2;
* ``pooled_shuffle`` - reassign the pooled one-sided values to the two groups
  uniformly at random, keeping the group sizes;
* ``combined`` - both at once, on the respective blocks.

Resample ``b`` of a plan draws from the counter-based stream ``(seed, b)``, so
p-values do not depend on evaluation order, chunking, thread count or kernel
backend.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _batched, _rng
from . import statistics as st
from ._accel import get_backend
from ._stat_ids import (BM, COMBINED, MUNZEL_BF, MUNZEL_F, PAIRED_T, POOLED_SHUFFLE,
                        SCHEME_OF, SIGN_FLIP, TML, WELCH, WMW, WSR)
from .data import PairedSample
from .statistics import Sidedness, StatValue

SCHEMES = {"sign_flip": SIGN_FLIP, "pooled_shuffle": POOLED_SHUFFLE, "combined": COMBINED}


@dataclass(frozen=True)
class PermutationPlan:
    scheme: str = "sign_flip"
    B: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEMES)}")
        if int(self.B) < 1:
            raise ValueError("B must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def with_scheme(self, scheme: str) -> "PermutationPlan":
        return PermutationPlan(scheme, self.B, self.seed)


@dataclass(frozen=True)
class _Registered:
    stat_id: int
    compute: Callable[[PairedSample], StatValue]


REGISTRY = {
    "paired_t": _Registered(PAIRED_T, lambda s: st.paired_t(s.complete)),
    "wilcoxon_signed_rank": _Registered(WSR, lambda s: st.wilcoxon_signed_rank(s.complete)),
    "munzel_f": _Registered(MUNZEL_F, lambda s: st.munzel_f(s.complete)),
    "munzel_bf": _Registered(MUNZEL_BF, lambda s: st.munzel_bf(s.complete)),
    "welch": _Registered(WELCH, lambda s: st.welch(s.first_only, s.second_only)),
    "wmw": _Registered(WMW, lambda s: st.wmw(s.first_only, s.second_only)),
    "brunner_munzel": _Registered(BM, lambda s: st.brunner_munzel(s.first_only, s.second_only)),
    "tml": _Registered(TML, st.tml),
}

_SCHEME_NAMES = {v: k for k, v in SCHEMES.items()}


def native_scheme(name: str) -> str:
    """Resampling scheme that matches a registered statistic."""
    return _SCHEME_NAMES[SCHEME_OF[REGISTRY[name].stat_id]]


# -- resamplers ---------------------------------------------------------------

def _flips(rng, n):
    if isinstance(rng, np.random.Generator):
        return rng.random(n) < 0.5
    return np.asarray(rng.flips(n), dtype=bool)


def _permutation(rng, m):
    return np.asarray(rng.permutation(m))


def sign_flip_resample(complete, rng) -> np.ndarray:
    """Swap ``(x1, x2) -> (x2, x1)`` independently per pair with probability 1/2.

    ``rng`` is a :class:`~pairmct._rng.ResampleStream`, a
    ``numpy.random.Generator``, or anything with a ``flips(n)`` method.
    """
    pairs = np.asarray(complete, dtype=np.float64).reshape(-1, 2)
    f = _flips(rng, len(pairs))
    return np.where(f[:, None], pairs[:, ::-1], pairs)


def pooled_shuffle_resample(first_only, second_only, rng):
    """Uniform relabelling of the pooled one-sided values; group sizes kept."""
    a = np.asarray(first_only, dtype=np.float64).reshape(-1)
    b = np.asarray(second_only, dtype=np.float64).reshape(-1)
    pooled = np.concatenate([a, b])[_permutation(rng, a.size + b.size)]
    return pooled[: a.size], pooled[a.size:]


def resample(sample: PairedSample, scheme: str, rng) -> PairedSample:
    complete, first, second = sample.complete, sample.first_only, sample.second_only
    if scheme in ("sign_flip", "combined"):
        complete = sign_flip_resample(complete, rng)
    if scheme in ("pooled_shuffle", "combined"):
        first, second = pooled_shuffle_resample(first, second, rng)
    return PairedSample(complete, first, second, dropped=sample.dropped)


# -- p-values -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PermutationResult:
    statistic: StatValue
    plan: PermutationPlan
    side: Sidedness
    counts: dict
    p_values: dict
    diagnostics: tuple = ()
    resampled: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p_value(self) -> float:
        return self.p_values[self.side]


def _value(v):
    return v.value if isinstance(v, StatValue) else float(v)


def _as_stat(v, name):
    if isinstance(v, StatValue):
        return v
    v = float(v)
    return StatValue(name, v, degenerate=not np.isfinite(v))


def _split_range(B, workers):
    edges = np.linspace(0, B, workers + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _generic_counts(fn, sample, plan, t_obs, start, stop, keep):
    stats = np.empty(stop - start)
    for b in range(start, stop):
        stats[b - start] = _value(fn(resample(sample, plan.scheme, _rng.ResampleStream(plan.seed, b))))
    return _batched.tally(stats, t_obs), (stats if keep else None)


def permutation_test(statistic: Union[str, Callable], sample: PairedSample,
                     plan: PermutationPlan, side="two_sided", *, keep: bool = False,
                     workers: int = 1, backend: Optional[str] = None) -> PermutationResult:
    """Monte-Carlo permutation test of ``statistic`` on ``sample``.

    ``statistic`` is a registered name (see ``REGISTRY``; runs in the compiled
    kernels) or any callable ``PairedSample -> StatValue | float`` (evaluated
    resample by resample in Python). The p-value counts the observed value:
    ``(1 + #{T_b >= T_obs}) / (B + 1)`` for ``greater``, mirrored for ``less``
    and on ``|T|`` for ``two_sided``.
    """
    side = Sidedness.parse(side)
    B, seed = int(plan.B), int(plan.seed)
    if isinstance(statistic, str):
        reg = REGISTRY[statistic]
        if SCHEMES[plan.scheme] != SCHEME_OF[reg.stat_id]:
            raise ValueError(f"{statistic} must be resampled with {native_scheme(statistic)}, "
                             f"not {plan.scheme}")
        observed = reg.compute(sample)
        kern = get_backend(backend)

        def run(lo, hi):
            return kern.count_exceed(reg.stat_id, sample.x1, sample.x2, sample.first_only,
                                     sample.second_only, seed, lo, hi, observed.value, keep)
    else:
        observed = _as_stat(statistic(sample), getattr(statistic, "__name__", "statistic"))

        def run(lo, hi):
            return _generic_counts(statistic, sample, plan, observed.value, lo, hi, keep)

    ranges = _split_range(B, max(1, int(workers)))
    if len(ranges) > 1:
        with ThreadPoolExecutor(len(ranges)) as pool:
            parts = list(pool.map(lambda r: run(*r), ranges))
    else:
        parts = [run(0, B)]
    total = sum(p[0] for p in parts)
    kept = np.concatenate([p[1] for p in parts]) if keep else None

    counts = {Sidedness.GREATER: int(total[0]), Sidedness.LESS: int(total[1]),
              Sidedness.TWO_SIDED: int(total[2])}
    p_values = {s: (1.0 + c) / (B + 1.0) for s, c in counts.items()}
    diagnostics = []
    if observed.degenerate:
        diagnostics.append("observed statistic degenerate")
        if counts[Sidedness.GREATER] == B and counts[Sidedness.LESS] == B:
            diagnostics.append("all resamples tie the degenerate observed value; p = 1 by convention")
    return PermutationResult(observed, plan, side, counts, p_values, tuple(diagnostics), kept)


def permutation_p(statistic, sample: PairedSample, plan: PermutationPlan, side="two_sided",
                  **kwargs) -> float:
    return permutation_test(statistic, sample, plan, side, **kwargs).p_value


def exhaustive_sign_flip_p(statistic, complete, side="greater", max_n: int = 20) -> float:
    """Exact sign-flip p-value over all ``2**n_c`` flip patterns.

    ``statistic`` is a registered complete-block statistic name or a callable
    on an ``(n_c, 2)`` array returning a ``StatValue`` or a float.
    """
    side = Sidedness.parse(side)
    pairs = np.asarray(complete, dtype=np.float64).reshape(-1, 2)
    n = len(pairs)
    if n > max_n:
        raise ValueError(f"exhaustive enumeration limited to n_c <= {max_n}, got {n}")
    patterns = np.array(list(itertools.product([False, True], repeat=n)), dtype=bool).reshape(-1, n)
    y1 = np.where(patterns, pairs[:, 1], pairs[:, 0])
    y2 = np.where(patterns, pairs[:, 0], pairs[:, 1])
    if isinstance(statistic, str):
        stat_id = REGISTRY[statistic].stat_id
        if SCHEME_OF[stat_id] != SIGN_FLIP:
            raise ValueError(f"{statistic} is not a complete-block statistic")
        t_obs = REGISTRY[statistic].compute(PairedSample(pairs, [], [])).value
        values = _batched.statistic_rows(stat_id, y1, y2, None, None)
    else:
        t_obs = _value(statistic(pairs))
        values = np.array([_value(statistic(np.column_stack([u, v]))) for u, v in zip(y1, y2)])
    counts = _batched.tally(np.asarray(values, dtype=np.float64), t_obs)
    col = {Sidedness.GREATER: 0, Sidedness.LESS: 1, Sidedness.TWO_SIDED: 2}[side]
    return float(counts[col]) / len(values)
