"""Monte-Carlo type-I error study.

Pairs are generated as ``mu + Sigma^{1/2} (e1, e2)'`` with i.i.d. standardised
errors, each component is then deleted independently with probability ``r``
(MCAR), and a test is run at ``alpha = 0.05`` on the resulting layout.

Replication ``i`` draws everything from ``numpy.random.default_rng([base_seed, i])``,
so an estimate depends only on its configuration and ``base_seed``, never on
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _rng
from .data import DEFAULT_POLICY, MinCountPolicy, PairedSample, validate
from .mct import DEFAULT_ALPHA, AlphaSplit, Hypothesis, run_mct, run_tml, split_alpha
from .permutation import PermutationPlan

ERROR_LAWS = ("normal", "exponential_std", "lognormal_std", "cauchy")
TESTS = tuple(h.value for h in Hypothesis) + ("tml", "synthetic")

_LN_MEAN = math.exp(0.5)
_LN_SD = math.sqrt((math.e - 1.0) * math.e)


def sigma_1(rho: float) -> np.ndarray:
    """Homoscedastic setting ``[[1, rho], [rho, 1]]``."""
    return np.array([[1.0, rho], [rho, 1.0]])


def sigma_2(rho: float) -> np.ndarray:
    """Heteroscedastic setting ``[[1, sqrt(2) rho], [sqrt(2) rho, 2]]``."""
    c = math.sqrt(2.0) * rho
    return np.array([[1.0, c], [c, 2.0]])


SIGMAS = {"s1": sigma_1, "s2": sigma_2}


def sqrt2x2(sigma) -> np.ndarray:
    """Symmetric PSD square root of a 2x2 covariance matrix (closed form)."""
    s = np.asarray(sigma, dtype=np.float64)
    if s.shape != (2, 2) or not np.allclose(s, s.T, rtol=0, atol=1e-12):
        raise ValueError("sigma must be a symmetric 2x2 matrix")
    tr = s[0, 0] + s[1, 1]
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if det < -1e-12 or min(s[0, 0], s[1, 1]) < 0:
        raise ValueError("sigma has a negative eigenvalue")
    root_det = math.sqrt(max(det, 0.0))
    t = math.sqrt(tr + 2.0 * root_det)
    if t == 0.0:
        return np.zeros((2, 2))
    return (s + root_det * np.eye(2)) / t


def gen_errors(law: str, count: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. errors with mean 0 and variance 1 (Cauchy is left unstandardised)."""
    if law == "normal":
        return rng.standard_normal(count)
    if law == "exponential_std":
        return rng.standard_exponential(count) - 1.0
    if law == "lognormal_std":
        return (rng.lognormal(0.0, 1.0, count) - _LN_MEAN) / _LN_SD
    if law == "cauchy":
        return rng.standard_cauchy(count)
    raise ValueError(f"unknown error law {law!r}; expected one of {ERROR_LAWS}")


@dataclass(frozen=True)
class GenSpec:
    n: int = 20
    error_law: str = "normal"
    sigma: tuple = ((1.0, 0.0), (0.0, 1.0))
    mu: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.error_law not in ERROR_LAWS:
            raise ValueError(f"unknown error law {self.error_law!r}")
        object.__setattr__(self, "sigma", tuple(tuple(float(v) for v in row) for row in self.sigma))
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        sqrt2x2(self.sigma)  # validates

    @classmethod
    def from_rho(cls, n, error_law="normal", setting="s1", rho=0.0, mu=(0.0, 0.0)):
        return cls(n, error_law, SIGMAS[setting](rho), mu)


def gen_pairs(spec: GenSpec, rng: np.random.Generator) -> np.ndarray:
    root = sqrt2x2(spec.sigma)
    eps = gen_errors(spec.error_law, 2 * spec.n, rng).reshape(spec.n, 2)
    return np.asarray(spec.mu) + eps @ root.T


@dataclass(frozen=True)
class MissingSpec:
    r: float = 0.1
    policy: MinCountPolicy = DEFAULT_POLICY
    max_redraws: int = 1000

    def __post_init__(self):
        if not 0 <= self.r < 1:
            raise ValueError("missing probability r must lie in [0, 1)")
        if self.max_redraws < 1:
            raise ValueError("max_redraws must be positive")


class MaskExhausted(RuntimeError):
    """No analysable missingness mask within ``max_redraws`` attempts."""


def _mask_sample(pairs, observed):
    both = observed[:, 0] & observed[:, 1]
    only1 = observed[:, 0] & ~observed[:, 1]
    only2 = observed[:, 1] & ~observed[:, 0]
    return PairedSample(pairs[both], pairs[only1, 0], pairs[only2, 1],
                        dropped=int(np.count_nonzero(~observed.any(axis=1))))


def apply_mcar(pairs, spec: MissingSpec, rng: np.random.Generator):
    """Delete each value independently with probability ``r``.

    The mask (not the data) is redrawn until the layout satisfies
    ``spec.policy``. Returns ``(sample, redraws)``.
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    for attempt in range(spec.max_redraws + 1):
        observed = rng.random(pairs.shape) >= spec.r
        sample = _mask_sample(pairs, observed)
        if not validate(sample, spec.policy):
            return sample, attempt
    raise MaskExhausted(f"no admissible mask after {spec.max_redraws} redraws")


@dataclass(frozen=True)
class SizeEstimate:
    test: str
    gen: Optional[GenSpec]
    miss: Optional[MissingSpec]
    n_sim: int
    B: int
    base_seed: int
    alpha: float
    rejections: int = 0
    completed: int = 0
    skipped: int = 0
    redraw_count: int = 0
    status: str = "ok"
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def rate(self) -> float:
        return self.rejections / self.completed if self.completed else float("nan")

    @property
    def mc_stderr(self) -> float:
        if not self.completed:
            return float("nan")
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.completed)


def _needs_incomplete(test):
    return test != "synthetic"


def _replicate(test, gen, miss, B, base_seed, i, alpha, split, side, backend):
    """One replication: returns (rejected, redraws) or None if skipped."""
    rng = np.random.default_rng([base_seed, i])
    pairs = gen_pairs(gen, rng)
    try:
        sample, redraws = apply_mcar(pairs, miss, rng)
    except MaskExhausted:
        return None
    plan = PermutationPlan("sign_flip", B, int(rng.integers(0, 2**63)))
    if test == "tml":
        out = run_tml(sample, side, alpha, plan, policy=miss.policy, backend=backend)
    else:
        out = run_mct(test, sample, side, split, plan, alpha=alpha, policy=miss.policy,
                      backend=backend)
    return out.reject, redraws


def _synthetic(n_sim, base_seed, alpha, split):
    # Independent Uniform(0, 1) p-values for exact component tests.
    # Data-dependent strategies have no counts here; only fixed splits apply.
    s = split if isinstance(split, AlphaSplit) else split_alpha("equal_sqrt", alpha)
    u = _rng.uniforms(_rng.stream_keys(base_seed, np.arange(n_sim)), 0, 2)
    return int(np.count_nonzero((u[:, 0] <= s.alpha1) & (u[:, 1] <= s.alpha2)))


def estimate_size(test: str, gen: Optional[GenSpec] = None, miss: Optional[MissingSpec] = None,
                  n_sim: int = 2000, B: int = 500, base_seed: int = 0, *,
                  alpha: float = DEFAULT_ALPHA, split: str = "equal_sqrt", side="two_sided",
                  workers: int = 1, backend: Optional[str] = None) -> SizeEstimate:
    """Estimate the rejection rate of ``test`` over ``n_sim`` replications.

    ``test`` is a hypothesis name of :func:`pairmct.mct.run_mct`, ``"tml"``,
    or ``"synthetic"`` (independent uniform component p-values, no data).
    """
    if test != "synthetic":
        test = Hypothesis.parse(test).value if test != "tml" else test
    gen = gen or GenSpec()
    miss = miss or MissingSpec()
    base = dict(test=test, gen=gen, miss=miss, n_sim=n_sim, B=B, base_seed=base_seed, alpha=alpha)
    if test == "synthetic":
        return SizeEstimate(**base, rejections=_synthetic(n_sim, base_seed, alpha, split),
                            completed=n_sim)
    if miss.r == 0 and _needs_incomplete(test):
        return SizeEstimate(**base, status="inapplicable")

    def run(lo, hi):
        return [_replicate(test, gen, miss, B, base_seed, i, alpha, split, side, backend)
                for i in range(lo, hi)]

    workers = max(1, int(workers))
    if workers > 1:
        edges = np.linspace(0, n_sim, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            chunks = pool.map(lambda e: run(*e), zip(edges[:-1], edges[1:]))
            results = [r for chunk in chunks for r in chunk]
    else:
        results = run(0, n_sim)
    done = [r for r in results if r is not None]
    return SizeEstimate(**base, rejections=sum(int(r[0]) for r in done), completed=len(done),
                        skipped=n_sim - len(done), redraw_count=sum(r[1] for r in done))
