import math

import numpy as np
import pytest

from pairmct import PairedSample, PermutationPlan, build_sample, exhaustive_sign_flip_p, permutation_test
from pairmct import _rng
from pairmct import statistics as st
from pairmct._accel import HAVE_NUMBA
from pairmct.permutation import (REGISTRY, native_scheme, pooled_shuffle_resample, resample,
                                 sign_flip_resample)
from pairmct.statistics import Sidedness

from .conftest import random_sample

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


class TestPlan:
    def test_validation(self):
        with pytest.raises(ValueError):
            PermutationPlan("bogus")
        with pytest.raises(ValueError):
            PermutationPlan(B=0)
        with pytest.raises(ValueError):
            PermutationPlan(seed=-1)

    def test_scheme_mismatch(self, sample):
        with pytest.raises(ValueError):
            permutation_test("welch", sample, PermutationPlan("sign_flip", 10))

    def test_native_schemes(self):
        assert native_scheme("paired_t") == "sign_flip"
        assert native_scheme("brunner_munzel") == "pooled_shuffle"
        assert native_scheme("tml") == "combined"


class TestResamplers:
    def test_sign_flip_preserves_pairs(self, rng):
        x = rng.normal(size=(8, 2))
        y = sign_flip_resample(x, rng)
        np.testing.assert_allclose(np.sort(y, axis=1), np.sort(x, axis=1))

    def test_pooled_shuffle_preserves_multiset(self, rng):
        a, b = pooled_shuffle_resample([1, 2, 3], [4, 5], _rng.ResampleStream(1, 0))
        assert len(a) == 3 and len(b) == 2
        assert sorted(np.concatenate([a, b]).tolist()) == [1, 2, 3, 4, 5]

    def test_resample_combined(self, sample):
        out = resample(sample, "combined", _rng.ResampleStream(3, 2))
        assert (out.n_c, out.n_1, out.n_2) == (sample.n_c, sample.n_1, sample.n_2)


class TestBackends:
    @pytest.mark.parametrize("name", sorted(REGISTRY))
    def test_kernel_matches_generic_loop(self, name, rng):
        s = random_sample(rng, n=24, ties=True)
        plan = PermutationPlan(native_scheme(name), 300, 99)
        generic = permutation_test(REGISTRY[name].compute, s, plan, keep=True)
        for backend in BACKENDS:
            res = permutation_test(name, s, plan, keep=True, backend=backend)
            assert res.counts == generic.counts
            np.testing.assert_allclose(res.resampled, generic.resampled, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_chunking_and_workers_invariant(self, backend, sample):
        plan = PermutationPlan("combined", 5001, 4)
        one = permutation_test("tml", sample, plan, backend=backend)
        many = permutation_test("tml", sample, plan, workers=3, backend=backend)
        assert one.counts == many.counts

    def test_deterministic(self, sample):
        plan = PermutationPlan("pooled_shuffle", 500, 8)
        assert permutation_test("wmw", sample, plan).p_values == permutation_test("wmw", sample, plan).p_values


class TestPValues:
    def test_bounds_and_sides(self, sample):
        B = 199
        res = permutation_test("paired_t", sample, PermutationPlan("sign_flip", B, 1))
        for p in res.p_values.values():
            assert 1 / (B + 1) <= p <= 1
        # each resample is >= or <= the observed value (ties count in both)
        assert res.counts[Sidedness.GREATER] + res.counts[Sidedness.LESS] >= B

    def test_side_selection(self, sample):
        res = permutation_test("paired_t", sample, PermutationPlan("sign_flip", 99, 1), "less")
        assert res.p_value == res.p_values[Sidedness.LESS]

    def test_degenerate_all_tie(self):
        s = build_sample([(1, 1), (2, 2), (3, 3)])
        res = permutation_test("paired_t", s, PermutationPlan("sign_flip", 50, 0))
        assert res.p_values[Sidedness.TWO_SIDED] == 1.0
        assert any("p = 1" in d for d in res.diagnostics)

    def test_infinite_observed(self):
        s = build_sample([(2, 1), (3, 2), (4, 3)])
        res = permutation_test("paired_t", s, PermutationPlan("sign_flip", 2000, 0), "greater")
        # only the identity pattern (probability 1/8) reproduces +inf
        assert res.p_value == pytest.approx(1 / 8, abs=0.02)

    def test_callable_statistic_float(self, sample):
        res = permutation_test(lambda s: float(np.mean(s.x1 - s.x2)), sample,
                               PermutationPlan("sign_flip", 200, 2))
        assert 0 < res.p_value <= 1


class TestExhaustive:
    def test_symmetric_counts(self):
        pairs = [(1, 0), (2, 0), (3, 0)]
        # sums of +-1, +-2, +-3: only +6 reaches the observed mean difference
        assert exhaustive_sign_flip_p(lambda x: float((x[:, 0] - x[:, 1]).sum()), pairs) == 1 / 8

    def test_named_matches_callable(self, rng):
        x = rng.normal(size=(7, 2))
        for name, fn in (("paired_t", st.paired_t), ("munzel_bf", st.munzel_bf)):
            for side in ("greater", "less", "two_sided"):
                assert exhaustive_sign_flip_p(name, x, side) == exhaustive_sign_flip_p(fn, x, side)

    def test_monte_carlo_agrees(self, rng):
        x = rng.normal(size=(8, 2))
        exact = exhaustive_sign_flip_p("paired_t", x, "two_sided")
        B = 20000
        mc = permutation_test("paired_t", PairedSample(x, [], []),
                              PermutationPlan("sign_flip", B, 17)).p_value
        assert abs(mc - exact) < 4 * math.sqrt(exact * (1 - exact) / B) + 1 / B

    def test_limits(self):
        with pytest.raises(ValueError):
            exhaustive_sign_flip_p("paired_t", np.zeros((21, 2)))
        with pytest.raises(ValueError):
            exhaustive_sign_flip_p("welch", np.zeros((3, 2)))
