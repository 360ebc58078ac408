import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from pairmct.ranking import mid_ranks, two_group_ranks


def naive_ranks(x):
    x = np.asarray(x, dtype=float)
    return np.array([(x < v).sum() + 0.5 * ((x == v).sum() + 1) for v in x])


values = hs.lists(hs.integers(-5, 5).map(float), min_size=1, max_size=30)


class TestMidRanks:
    def test_ties(self):
        assert mid_ranks([10, 20, 20, 30]).tolist() == [1.0, 2.5, 2.5, 4.0]

    def test_all_equal(self):
        assert mid_ranks([3, 3, 3]).tolist() == [2.0, 2.0, 2.0]

    def test_empty_and_nan(self):
        with pytest.raises(ValueError):
            mid_ranks([])
        with pytest.raises(ValueError):
            mid_ranks([1.0, np.nan])

    @settings(max_examples=200, deadline=None)
    @given(values)
    def test_matches_quadratic_oracle(self, x):
        np.testing.assert_allclose(mid_ranks(x), naive_ranks(x))

    @settings(max_examples=100, deadline=None)
    @given(values)
    def test_rank_sum(self, x):
        n = len(x)
        assert mid_ranks(x).sum() == pytest.approx(n * (n + 1) / 2)


class TestTwoGroupRanks:
    def test_layout(self):
        r = two_group_ranks([1, 3], [2, 4])
        assert r.pooled_g1.tolist() == [1, 3]
        assert r.pooled_g2.tolist() == [2, 4]
        assert r.internal_g1.tolist() == [1, 2]
        assert r.size == 4

    @settings(max_examples=100, deadline=None)
    @given(values, values)
    def test_placements_count_other_group(self, a, b):
        p1, p2 = two_group_ranks(a, b).placements()
        a, b = np.asarray(a), np.asarray(b)
        expect1 = (b[None, :] < a[:, None]).sum(1) + 0.5 * (b[None, :] == a[:, None]).sum(1)
        expect2 = (a[None, :] < b[:, None]).sum(1) + 0.5 * (a[None, :] == b[:, None]).sum(1)
        np.testing.assert_allclose(p1, expect1)
        np.testing.assert_allclose(p2, expect2)
