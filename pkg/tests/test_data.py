import math

import numpy as np
import pytest

from pairmct.data import (DEFAULT_POLICY, InvalidSampleError, MinCountPolicy, PairedSample,
                          build_sample, from_arrays, validate)


class TestBuildSample:
    def test_routes_records(self):
        s = build_sample([(1, 2), (3, None), (None, 4), (None, None), (5, 6)])
        assert (s.n_c, s.n_1, s.n_2, s.dropped) == (2, 1, 1, 1)
        assert s.complete.tolist() == [[1, 2], [5, 6]]
        assert s.first_only.tolist() == [3]
        assert s.second_only.tolist() == [4]

    def test_counts(self):
        s = build_sample([(1, 2), (3, 4), (5, None), (None, 6), (None, 7)])
        assert s.counts() == {"n_c": 2, "n_1": 1, "n_2": 2, "n": 5, "N": 7}

    def test_nan_rejected(self):
        with pytest.raises(InvalidSampleError):
            build_sample([(1, math.nan)])

    def test_wrong_arity(self):
        with pytest.raises(InvalidSampleError):
            build_sample([(1, 2, 3)])

    def test_empty(self):
        s = build_sample([])
        assert s.n == 0 and s.N == 0
        assert s.complete.shape == (0, 2)


class TestPairedSample:
    def test_arrays_are_read_only(self):
        s = build_sample([(1, 2), (3, None)])
        with pytest.raises(ValueError):
            s.complete[0, 0] = 9
        with pytest.raises(ValueError):
            s.first_only[0] = 9

    def test_nan_in_block_rejected(self):
        with pytest.raises(InvalidSampleError):
            PairedSample([[1, np.nan]], [], [])

    def test_from_arrays_matches_build(self):
        x1 = np.array([1, 2, np.nan, 4, np.nan])
        x2 = np.array([5, np.nan, 7, 8, np.nan])
        s = from_arrays(x1, x2)
        assert (s.n_c, s.n_1, s.n_2, s.dropped) == (2, 1, 1, 1)
        assert s.x1.tolist() == [1, 4] and s.x2.tolist() == [5, 8]

    def test_from_arrays_shape_mismatch(self):
        with pytest.raises(InvalidSampleError):
            from_arrays([1, 2], [1])


class TestValidate:
    def test_default_policy(self):
        assert DEFAULT_POLICY == MinCountPolicy(2, 2, 2)

    def test_ok(self):
        s = build_sample([(1, 2), (3, 4), (5, None), (6, None), (None, 7), (None, 8)])
        assert validate(s) == []

    def test_violations_listed(self):
        s = build_sample([(1, 2), (5, None), (None, 7), (None, 8)])
        v = validate(s)
        assert [(x.count, x.observed, x.required) for x in v] == [("n_c", 1, 2), ("n_1", 1, 2)]

    def test_custom_policy(self):
        s = build_sample([(1, 2), (3, 4)])
        assert validate(s, MinCountPolicy(2, 0, 0)) == []

    def test_negative_policy(self):
        with pytest.raises(ValueError):
            MinCountPolicy(-1, 2, 2)
