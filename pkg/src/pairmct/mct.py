"""Multiplication-combination tests.

The complete pairs and the one-sided values are tested separately, at levels
``alpha1`` and ``alpha2`` with ``alpha1 * alpha2 = alpha``; the combined test
rejects only when both components reject. Under MCAR the two blocks are
independent, so the combined test has level ``alpha`` (exact when both
components are exact).

Direction convention for one-sided tests: ``greater`` means the first
component is larger for the mean and shift hypotheses, and ``p > 1/2`` (second
component stochastically larger) for the distribution and effect hypotheses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from . import statistics as st
from .data import DEFAULT_POLICY, MinCountPolicy, PairedSample, validate
from .permutation import PermutationPlan, native_scheme, permutation_test
from .statistics import Sidedness, StatValue

DEFAULT_ALPHA = 0.05
SMALL_N = 30


class LayoutError(ValueError):
    """The sample has too few observations in some block."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("sample layout violates minimum counts: "
                         + ", ".join(str(v) for v in self.violations))


class Hypothesis(str, enum.Enum):
    MU_ASYMPTOTIC = "mu_asymptotic"
    MU_PERMUTATION = "mu_permutation"
    SHIFT_W = "shift_W"
    DISTRIBUTION_F = "distribution_F"
    BF_P = "bf_p"

    @classmethod
    def parse(cls, name) -> "Hypothesis":
        if isinstance(name, cls):
            return name
        aliases = {
            "mu-asym": cls.MU_ASYMPTOTIC, "phi_tw": cls.MU_ASYMPTOTIC,
            "mu-perm": cls.MU_PERMUTATION, "phi_mu": cls.MU_PERMUTATION,
            "shift": cls.SHIFT_W, "shift_w": cls.SHIFT_W, "phi_w": cls.SHIFT_W,
            "dist": cls.DISTRIBUTION_F, "distribution_f": cls.DISTRIBUTION_F, "phi_f": cls.DISTRIBUTION_F,
            "bf-p": cls.BF_P, "phi_p": cls.BF_P,
        }
        key = str(name)
        return aliases.get(key.lower()) or cls(key)


# -- alpha split --------------------------------------------------------------

@dataclass(frozen=True)
class AlphaSplit:
    strategy: str
    alpha: float
    alpha1: float
    alpha2: float
    gamma: float

    def __post_init__(self):
        if not (0 < self.alpha1 < 1 and 0 < self.alpha2 < 1):
            raise ValueError(f"component levels must lie in (0, 1): {self.alpha1}, {self.alpha2}")
        if abs(self.alpha1 * self.alpha2 - self.alpha) > 1e-12:
            raise ValueError("alpha1 * alpha2 must equal alpha")


STRATEGIES = ("equal_sqrt", "prop_n", "prop_N", "explicit")


def split_alpha(strategy: str, alpha: float, n_c: int = 0, n_1: int = 0, n_2: int = 0,
                gamma: Optional[float] = None) -> AlphaSplit:
    """Split ``alpha`` into ``alpha**gamma`` and ``alpha**(1 - gamma)``.

    ``equal_sqrt``: gamma = 1/2; ``prop_n``: gamma = n_c / n;
    ``prop_N``: gamma = 2 n_c / N; ``explicit``: gamma as given.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = n_c + n_1 + n_2
    if strategy == "equal_sqrt":
        gamma = 0.5
    elif strategy in ("prop_n", "prop_N"):
        if min(n_c, n_1, n_2) < 0 or n == 0:
            raise ValueError("counts must be >= 0 with at least one subject")
        gamma = n_c / n if strategy == "prop_n" else 2 * n_c / (n + n_c)
    elif strategy == "explicit":
        if gamma is None:
            raise ValueError("explicit split needs gamma")
    else:
        raise ValueError(f"unknown split strategy {strategy!r}")
    gamma = float(gamma)
    if not 0 < gamma < 1:
        raise ValueError(f"split exponent must lie in (0, 1), got {gamma}")
    return AlphaSplit(strategy, alpha, alpha**gamma, alpha ** (1.0 - gamma), gamma)


# -- outcomes -----------------------------------------------------------------

@dataclass(frozen=True)
class TestOutcome:
    method: str
    statistic: StatValue
    p_value: float
    level: float
    reject: bool
    side: Sidedness
    calibration: str
    reference: Optional[str] = None
    B: Optional[int] = None
    seed: Optional[int] = None
    p_values: dict = field(default_factory=dict, compare=False)
    orientation: int = 1
    diagnostics: tuple = ()

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.reject != (self.p_value <= self.level):
            raise ValueError("reject must equal p_value <= level")

    @property
    def direction(self) -> int:
        """Sign of the observed effect in the hypothesis' convention (0 if none)."""
        v = self.statistic.value * self.orientation
        return (v > 0) - (v < 0)


@dataclass(frozen=True)
class MctOutcome:
    complete_part: TestOutcome
    incomplete_part: TestOutcome
    split: AlphaSplit
    reject: bool
    hypothesis: Optional[str] = None
    diagnostics: tuple = ()


def combine(c: TestOutcome, i: TestOutcome, split: AlphaSplit,
            hypothesis: Optional[str] = None) -> MctOutcome:
    """Reject iff both component tests reject at their split levels."""
    if not math.isclose(c.level, split.alpha1, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"complete-part level {c.level} != alpha1 {split.alpha1}")
    if not math.isclose(i.level, split.alpha2, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"incomplete-part level {i.level} != alpha2 {split.alpha2}")
    notes = [f"complete_part: {d}" for d in c.diagnostics]
    notes += [f"incomplete_part: {d}" for d in i.diagnostics]
    reject = bool(c.reject and i.reject)
    if (reject and c.side is Sidedness.TWO_SIDED and c.direction * i.direction < 0):
        notes.append("components reject in opposite directions")
    return MctOutcome(c, i, split, reject, hypothesis, tuple(notes))


# -- component tests ----------------------------------------------------------

def _oriented(pv, orientation):
    if orientation > 0:
        return dict(pv)
    return {Sidedness.GREATER: pv[Sidedness.LESS], Sidedness.LESS: pv[Sidedness.GREATER],
            Sidedness.TWO_SIDED: pv[Sidedness.TWO_SIDED]}


def _degenerate_note(stat):
    return ("statistic degenerate (zero variance estimate)",) if stat.degenerate else ()


def asymptotic_component(stat: StatValue, reference: str, side, level: float,
                         orientation: int = 1) -> TestOutcome:
    side = Sidedness.parse(side)
    pv = _oriented(st.tail_probabilities(stat, reference), orientation)
    p = pv[side]
    return TestOutcome(stat.name, stat, p, level, p <= level, side, "asymptotic",
                       reference=reference if reference == "normal" else f"t({stat.df:.6g})",
                       p_values=pv, orientation=orientation, diagnostics=_degenerate_note(stat))


def permutation_component(name: str, sample: PairedSample, plan: PermutationPlan, side,
                          level: float, orientation: int = 1, **kwargs) -> TestOutcome:
    side = Sidedness.parse(side)
    tested = side if orientation > 0 else side.mirrored()
    res = permutation_test(name, sample, plan.with_scheme(native_scheme(name)), tested, **kwargs)
    p = res.p_value
    return TestOutcome(name, res.statistic, p, level, p <= level, side, "permutation",
                       B=plan.B, seed=plan.seed, p_values=_oriented(res.p_values, orientation),
                       orientation=orientation, diagnostics=res.diagnostics)


def _check_layout(sample, policy):
    violations = validate(sample, policy)
    if violations:
        raise LayoutError(violations)


def run_mct(hypothesis, sample: PairedSample, side="two_sided", split=None,
            plan: Optional[PermutationPlan] = None, *, alpha: float = DEFAULT_ALPHA,
            small_n: int = SMALL_N, policy: MinCountPolicy = DEFAULT_POLICY,
            **perm_kwargs) -> MctOutcome:
    """Run one of the five multiplication-combination tests.

    Parameters
    ----------
    hypothesis : Hypothesis or str
        ``mu_asymptotic`` (paired t + Welch, t references),
        ``mu_permutation`` (same statistics, sign-flip / pooled-shuffle
        calibration), ``shift_W`` (signed rank + WMW), ``distribution_F``
        (paired Munzel rank test + WMW), ``bf_p`` (paired and unpaired
        Behrens-Fisher rank statistics, both permutation-calibrated).
    split : AlphaSplit, str or None
        Component levels; a strategy name is resolved against the sample's
        counts. Defaults to ``equal_sqrt`` at ``alpha``.
    plan : PermutationPlan
        ``B`` and ``seed`` for permutation components; the scheme is chosen
        per component.
    small_n : int
        Signed-rank / WMW components use permutation calibration below this
        block size, normal reference at or above it.
    """
    hyp = Hypothesis.parse(hypothesis)
    side = Sidedness.parse(side)
    _check_layout(sample, policy)
    if split is None:
        split = split_alpha("equal_sqrt", alpha)
    elif isinstance(split, str):
        split = split_alpha(split, alpha, sample.n_c, sample.n_1, sample.n_2)
    plan = plan or PermutationPlan()
    a1, a2 = split.alpha1, split.alpha2
    first, second = sample.first_only, sample.second_only
    M = sample.n_1 + sample.n_2

    def perm(name, level, orientation=1):
        return permutation_component(name, sample, plan, side, level, orientation, **perm_kwargs)

    def wmw_part(orientation):
        if M < small_n:
            return perm("wmw", a2, orientation)
        return asymptotic_component(st.wmw(first, second), "normal", side, a2, orientation)

    if hyp is Hypothesis.MU_ASYMPTOTIC:
        c = asymptotic_component(st.paired_t(sample.complete), "t", side, a1)
        welch = st.welch(first, second)
        if welch.degenerate:
            i = asymptotic_component(welch, "normal", side, a2)
        else:
            i = asymptotic_component(welch, "t", side, a2)
    elif hyp is Hypothesis.MU_PERMUTATION:
        c = perm("paired_t", a1)
        i = perm("welch", a2)
    elif hyp is Hypothesis.SHIFT_W:
        if sample.n_c < small_n:
            c = perm("wilcoxon_signed_rank", a1)
        else:
            c = asymptotic_component(st.wilcoxon_signed_rank(sample.complete), "normal", side, a1)
        # WMW grows with the second group; the shift direction is x1 > x2.
        i = wmw_part(-1)
    elif hyp is Hypothesis.DISTRIBUTION_F:
        c = asymptotic_component(st.munzel_f(sample.complete), "t", side, a1)
        i = wmw_part(1)
    else:
        c = perm("munzel_bf", a1)
        i = perm("brunner_munzel", a2)
    return combine(c, i, split, hyp.value)


def run_tml(sample: PairedSample, side="two_sided", alpha: float = DEFAULT_ALPHA,
            plan: Optional[PermutationPlan] = None, *, policy: MinCountPolicy = DEFAULT_POLICY,
            **perm_kwargs) -> TestOutcome:
    """Weighted paired-t/Welch competitor, permutation-calibrated at full level ``alpha``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _check_layout(sample, policy)
    plan = (plan or PermutationPlan()).with_scheme("combined")
    return permutation_component("tml", sample, plan, side, alpha, **perm_kwargs)
