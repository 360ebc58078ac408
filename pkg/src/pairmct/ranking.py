"""Mid-ranks, pooled ranks and internal (within-group) ranks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._batched import mid_ranks_rows


def _as_values(values, what="values"):
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError(f"{what} must be non-empty")
    if np.isnan(x).any():
        raise ValueError(f"{what} contain NaN")
    return x


def mid_ranks(values) -> np.ndarray:
    """Ranks 1..n in input order, ties sharing the mean of their positions.

    >>> mid_ranks([10, 20, 20, 30]).tolist()
    [1.0, 2.5, 2.5, 4.0]
    """
    return mid_ranks_rows(_as_values(values)[None, :])[0]


@dataclass(frozen=True, eq=False)
class RankSet:
    """Pooled and internal mid-ranks of a two-group layout."""

    pooled_g1: np.ndarray
    pooled_g2: np.ndarray
    internal_g1: np.ndarray
    internal_g2: np.ndarray

    @property
    def size(self) -> int:
        return len(self.pooled_g1) + len(self.pooled_g2)

    def placements(self):
        """Pooled minus internal rank: how many of the other group each value beats."""
        return self.pooled_g1 - self.internal_g1, self.pooled_g2 - self.internal_g2


def two_group_ranks(g1, g2) -> RankSet:
    a = _as_values(g1, "group 1")
    b = _as_values(g2, "group 2")
    pooled = mid_ranks(np.concatenate([a, b]))
    return RankSet(pooled[: a.size], pooled[a.size:], mid_ranks(a), mid_ranks(b))
