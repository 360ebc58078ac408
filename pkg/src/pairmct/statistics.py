"""Test statistics for the complete and the incomplete block, and their
asymptotic calibration.

Statistics on complete pairs take an ``(n_c, 2)`` array (or a sequence of
pairs); statistics on the incomplete block take the two one-sided samples.
Orientation: mean-type statistics grow with ``x1 - x2``; rank statistics
(WMW, Munzel, Brunner-Munzel) grow when the second component / group tends
to larger values, i.e. with the WMW effect ``p``.

A statistic whose variance estimate is zero is *degenerate*: its value is
``+inf``/``-inf`` by the sign of the numerator, or 0 when the numerator is 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats as _sps

from . import _batched
from .data import PairedSample
from .ranking import two_group_ranks


class Sidedness(str, enum.Enum):
    GREATER = "greater"
    LESS = "less"
    TWO_SIDED = "two_sided"

    @classmethod
    def parse(cls, side) -> "Sidedness":
        if isinstance(side, cls):
            return side
        aliases = {"two": "two_sided", "two-sided": "two_sided", "both": "two_sided",
                   "g": "greater", "l": "less"}
        return cls(aliases.get(str(side).lower(), str(side).lower()))

    def mirrored(self) -> "Sidedness":
        if self is Sidedness.GREATER:
            return Sidedness.LESS
        if self is Sidedness.LESS:
            return Sidedness.GREATER
        return self


@dataclass(frozen=True)
class StatValue:
    name: str
    value: float
    df: Optional[float] = None
    effect: Optional[float] = None
    degenerate: bool = False

    def __post_init__(self):
        if self.df is not None and not self.df > 0:
            raise ValueError(f"df must be positive, got {self.df}")
        if not self.degenerate and not math.isfinite(self.value):
            raise ValueError(f"{self.name}: non-finite value {self.value} without degenerate flag")


def _pairs(complete, min_n=2):
    x = np.asarray(complete, dtype=np.float64)
    if x.size == 0:
        x = x.reshape(0, 2)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("complete pairs must have shape (n_c, 2)")
    if x.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} complete pairs, got {x.shape[0]}")
    return x[:, 0], x[:, 1]


def _group(values, min_n, what):
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size < min_n:
        raise ValueError(f"{what} needs at least {min_n} observations, got {x.size}")
    return x


def _row(x):
    return np.asarray(x, dtype=np.float64)[None, :]


def paired_t(complete) -> StatValue:
    """Paired t statistic on ``D = x1 - x2``, with ``n_c - 1`` degrees of freedom."""
    x1, x2 = _pairs(complete)
    d = x1 - x2
    value = float(_batched.paired_t(_row(d))[0])
    return StatValue("paired_t", value, df=len(d) - 1.0, effect=float(d.mean()),
                     degenerate=bool(d.max() == d.min()))


def welch(first_only, second_only) -> StatValue:
    """Welch statistic with Welch-Satterthwaite degrees of freedom."""
    a = _group(first_only, 2, "first-only sample")
    b = _group(second_only, 2, "second-only sample")
    value, df = _batched.welch(_row(a), _row(b))
    degenerate = bool(a.max() == a.min() and b.max() == b.min())
    return StatValue("welch", float(value[0]), df=None if degenerate else float(df[0]),
                     effect=float(a.mean() - b.mean()), degenerate=degenerate)


def wilcoxon_signed_rank(complete) -> StatValue:
    """Standardised signed-rank statistic ``(R+ - R-) / sqrt(sum R_g^2)``.

    Zero differences are discarded; ranks of ``|x1 - x2|`` are mid-ranks.
    """
    x1, x2 = _pairs(complete, min_n=1)
    delta = x1 - x2
    value = float(_batched.wsr(_row(delta))[0])
    return StatValue("wilcoxon_signed_rank", value, degenerate=bool(np.all(delta == 0)))


def wmw(first_only, second_only) -> StatValue:
    """Wilcoxon-Mann-Whitney statistic with the tie-corrected variance.

    ``effect`` is the rank estimate of ``P(X1 < X2) + P(X1 = X2) / 2``.
    """
    a = _group(first_only, 1, "first-only sample")
    b = _group(second_only, 1, "second-only sample")
    if a.size + b.size < 2:
        raise ValueError("need at least two pooled observations")
    value = float(_batched.wmw(_row(a), _row(b))[0])
    ranks = two_group_ranks(a, b)
    effect = (ranks.pooled_g2.mean() - ranks.pooled_g1.mean()) / ranks.size + 0.5
    pooled = np.concatenate([a, b])
    return StatValue("wmw", value, effect=float(effect),
                     degenerate=bool(pooled.max() == pooled.min()))


def munzel_f(complete) -> StatValue:
    """Paired rank statistic for ``F1 = F2``: studentised mean of ``R2g - R1g``.

    Ranks are pooled mid-ranks over all ``2 n_c`` values. Reference is
    ``t(n_c - 1)``.
    """
    x1, x2 = _pairs(complete)
    ranks = two_group_ranks(x1, x2)
    d = ranks.pooled_g2 - ranks.pooled_g1
    value = float(_batched.paired_t(_row(d))[0])
    return StatValue("munzel_f", value, df=len(d) - 1.0,
                     effect=float(d.mean() / (2 * len(d)) + 0.5),
                     degenerate=bool(d.max() == d.min()))


def munzel_bf(complete) -> StatValue:
    """Paired nonparametric Behrens-Fisher statistic ``sqrt(n_c) Zbar / s_c``.

    ``Z_g`` is the difference of the placements of ``x2_g`` and ``x1_g``
    divided by ``n_c``; ``effect`` is the paired estimate of ``p``.
    """
    x1, x2 = _pairs(complete)
    n = len(x1)
    ranks = two_group_ranks(x1, x2)
    p1, p2 = ranks.placements()
    z = (p2 - p1) / n
    value = float(_batched.paired_t(_row(z))[0])
    effect = (ranks.pooled_g2.mean() - ranks.pooled_g1.mean()) / (2 * n) + 0.5
    return StatValue("munzel_bf", value, effect=float(effect),
                     degenerate=bool(z.max() == z.min()))


def brunner_munzel(first_only, second_only) -> StatValue:
    """Rank statistic for the unpaired Behrens-Fisher problem.

    ``sqrt(n1 n2 / M) (Rbar2 - Rbar1) / s`` with
    ``s^2 = M (S1^2 / n2 + S2^2 / n1)`` and ``S_j^2`` the empirical variance
    of the placements of group ``j``. ``effect`` is ``(Rbar2 - Rbar1)/M + 1/2``.
    """
    a = _group(first_only, 2, "first-only sample")
    b = _group(second_only, 2, "second-only sample")
    value = float(_batched.bm(_row(a), _row(b))[0])
    ranks = two_group_ranks(a, b)
    p1, p2 = ranks.placements()
    effect = (ranks.pooled_g2.mean() - ranks.pooled_g1.mean()) / ranks.size + 0.5
    return StatValue("brunner_munzel", value, effect=float(effect),
                     degenerate=bool(p1.max() == p1.min() and p2.max() == p2.min()))


def wmw_effect_direct(first_only, second_only) -> float:
    """``mean over all (x, y) of 1{x < y} + 1{x == y}/2``, by direct comparison."""
    a = _group(first_only, 1, "first-only sample")
    b = _group(second_only, 1, "second-only sample")
    less = (a[:, None] < b[None, :]).sum()
    ties = (a[:, None] == b[None, :]).sum()
    return float((less + 0.5 * ties) / (a.size * b.size))


def tml_weight(n_c: int, n_1: int, n_2: int) -> float:
    """Weight ``a = 2 n_c / (n + n_c)`` of the paired part."""
    n = n_c + n_1 + n_2
    return 2.0 * n_c / (n + n_c)


def tml(sample: PairedSample) -> StatValue:
    """Weighted sum ``sqrt(a) T_t + sqrt(1 - a) T_w`` of paired t and Welch."""
    t_c = paired_t(sample.complete)
    t_i = welch(sample.first_only, sample.second_only)
    a = tml_weight(sample.n_c, sample.n_1, sample.n_2)
    value = float(_batched.combine_weighted(np.array([t_c.value]), np.array([t_i.value]), a)[0])
    return StatValue("tml", value, effect=a, degenerate=t_c.degenerate or t_i.degenerate)


def tail_probabilities(stat: StatValue, reference: str = "normal", df=None) -> dict:
    """One- and two-sided p-values of ``stat`` under a normal or t reference.

    A degenerate statistic with value 0 gets p = 1 on every side.
    """
    v = stat.value
    if stat.degenerate and v == 0:
        return {Sidedness.GREATER: 1.0, Sidedness.LESS: 1.0, Sidedness.TWO_SIDED: 1.0}
    if reference == "normal":
        dist = _sps.norm
    elif reference == "t":
        df = stat.df if df is None else df
        if math.isinf(v):
            dist = _sps.norm  # tails are 0/1 for any df
        elif df is None or not df > 0 or not math.isfinite(df):
            raise ValueError(f"invalid degrees of freedom for t reference: {df}")
        else:
            dist = _sps.t(df)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    upper = float(dist.sf(v))
    lower = float(dist.cdf(v))
    return {
        Sidedness.GREATER: upper,
        Sidedness.LESS: lower,
        Sidedness.TWO_SIDED: min(1.0, 2.0 * min(upper, lower)),
    }


def asymptotic_p(stat: StatValue, reference: str = "normal", side="two_sided", df=None) -> float:
    return tail_probabilities(stat, reference, df)[Sidedness.parse(side)]
