"""Partially observed matched pairs.

Records are routed into three blocks by observation pattern: complete pairs,
values seen only in the first component, values seen only in the second.
Missingness is encoded by placement; the stored arrays never contain NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


class InvalidSampleError(ValueError):
    """Raised for malformed input records (NaN in an observed slot, wrong arity)."""


def _readonly(values, shape):
    arr = np.array(values, dtype=np.float64).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PairedSample:
    complete: np.ndarray
    first_only: np.ndarray
    second_only: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        complete = _readonly(self.complete, (-1, 2))
        first = _readonly(self.first_only, (-1,))
        second = _readonly(self.second_only, (-1,))
        for name, arr in (("complete", complete), ("first_only", first), ("second_only", second)):
            if np.isnan(arr).any():
                raise InvalidSampleError(f"NaN stored in {name}; encode missingness by placement")
        object.__setattr__(self, "complete", complete)
        object.__setattr__(self, "first_only", first)
        object.__setattr__(self, "second_only", second)

    @property
    def n_c(self) -> int:
        return self.complete.shape[0]

    @property
    def n_1(self) -> int:
        return self.first_only.shape[0]

    @property
    def n_2(self) -> int:
        return self.second_only.shape[0]

    @property
    def n(self) -> int:
        """Number of subjects."""
        return self.n_c + self.n_1 + self.n_2

    @property
    def N(self) -> int:
        """Number of observed values."""
        return 2 * self.n_c + self.n_1 + self.n_2

    @property
    def x1(self) -> np.ndarray:
        return self.complete[:, 0]

    @property
    def x2(self) -> np.ndarray:
        return self.complete[:, 1]

    def counts(self) -> dict:
        return {"n_c": self.n_c, "n_1": self.n_1, "n_2": self.n_2, "n": self.n, "N": self.N}

    def __repr__(self):
        return (f"PairedSample(n_c={self.n_c}, n_1={self.n_1}, n_2={self.n_2}, "
                f"dropped={self.dropped})")


@dataclass(frozen=True)
class MinCountPolicy:
    min_nc: int = 2
    min_n1: int = 2
    min_n2: int = 2

    def __post_init__(self):
        if min(self.min_nc, self.min_n1, self.min_n2) < 0:
            raise ValueError("policy minima must be >= 0")


DEFAULT_POLICY = MinCountPolicy()


@dataclass(frozen=True)
class Violation:
    count: str
    observed: int
    required: int

    def __str__(self):
        return f"{self.count}={self.observed} < {self.required}"


def _is_missing(v) -> bool:
    return v is None


def build_sample(records: Iterable[Sequence[Optional[float]]]) -> PairedSample:
    """Route raw ``(x1, x2)`` records into a :class:`PairedSample`.

    ``None`` marks a missing component. Records missing both components are
    dropped and counted in ``dropped``. A NaN in a non-missing slot is an error.
    """
    complete, first, second = [], [], []
    dropped = 0
    for k, rec in enumerate(records):
        if len(rec) != 2:
            raise InvalidSampleError(f"record {k} has {len(rec)} fields, expected 2")
        a, b = rec
        for v in (a, b):
            if not _is_missing(v) and math.isnan(float(v)):
                raise InvalidSampleError(f"record {k} contains NaN; use None for missing")
        miss_a, miss_b = _is_missing(a), _is_missing(b)
        if not miss_a and not miss_b:
            complete.append((float(a), float(b)))
        elif not miss_a:
            first.append(float(a))
        elif not miss_b:
            second.append(float(b))
        else:
            dropped += 1
    return PairedSample(complete, first, second, dropped=dropped)


def from_arrays(x1, x2) -> PairedSample:
    """Build a sample from two equal-length arrays with NaN marking missing values."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise InvalidSampleError("x1 and x2 must be 1-d arrays of equal length")
    o1, o2 = ~np.isnan(x1), ~np.isnan(x2)
    both = o1 & o2
    return PairedSample(
        np.column_stack([x1[both], x2[both]]),
        x1[o1 & ~o2],
        x2[o2 & ~o1],
        dropped=int(np.count_nonzero(~o1 & ~o2)),
    )


def validate(sample: PairedSample, policy: MinCountPolicy = DEFAULT_POLICY) -> list:
    """Counts below the policy minima; an empty list means the layout is usable."""
    out = []
    for name, got, need in (("n_c", sample.n_c, policy.min_nc),
                            ("n_1", sample.n_1, policy.min_n1),
                            ("n_2", sample.n_2, policy.min_n2)):
        if got < need:
            out.append(Violation(name, got, need))
    return out
