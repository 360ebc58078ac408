import math

import mpmath
import numpy as np
import pytest

from pairmct import build_sample
from pairmct import statistics as st
from pairmct.statistics import Sidedness, StatValue


def t_sf_quad(x, df):
    """Upper tail of Student's t by numerical integration of the density."""
    c = mpmath.gamma((df + 1) / 2) / (mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / 2))
    dens = lambda u: c * (1 + u * u / df) ** (-(df + 1) / 2)
    return float(mpmath.quad(dens, [x, mpmath.inf]))


class TestHandValues:
    def test_paired_t(self):
        s = st.paired_t([(1, 0), (2, 0), (3, 0)])
        assert s.value == pytest.approx(2 * math.sqrt(3), abs=1e-9)
        assert s.df == 2

    def test_welch(self):
        s = st.welch([1, 3], [2, 6])
        assert s.value == pytest.approx(-2 / math.sqrt(5), abs=1e-9)
        assert s.df == pytest.approx(25 / 17, abs=1e-9)

    def test_wsr(self):
        assert st.wilcoxon_signed_rank([(1, 0), (2, 0), (3, 0)]).value == pytest.approx(6 / math.sqrt(14))
        # zero differences are dropped before ranking
        assert st.wilcoxon_signed_rank([(1, 1), (2, 0)]).value == pytest.approx(1.0)

    def test_wmw(self):
        s = st.wmw([1, 2], [3, 4])
        assert s.value == pytest.approx(1.5492, abs=1e-4)
        assert s.effect == 1.0

    def test_munzel_f(self):
        # ranks of (1,3),(2,4): D = (2, 2) is constant
        s = st.munzel_f([(1, 3), (2, 4)])
        assert s.degenerate and s.value == math.inf
        assert st.munzel_f([(1, 3), (2, 4), (5, 6)]).value == pytest.approx(5.0)

    def test_munzel_bf(self):
        s = st.munzel_bf([(1, 4), (3, 2)])
        assert s.value == pytest.approx(1.0, abs=1e-9)
        assert s.effect == pytest.approx(0.75)
        assert st.munzel_bf([(1, 3), (4, 2)]).value == 0.0

    def test_munzel_bf_constant_z(self):
        # Z = (0.5, 0.5): positive mean, zero spread
        s = st.munzel_bf([(1, 2), (3, 4)])
        assert s.degenerate and s.value == math.inf

    def test_brunner_munzel(self):
        s = st.brunner_munzel([1, 3], [2, 4])
        assert s.value == pytest.approx(0.7071, abs=1e-4)
        assert s.effect == pytest.approx(0.75)

    def test_brunner_munzel_separated(self):
        s = st.brunner_munzel([1, 2], [3, 4])
        assert s.degenerate and s.value == math.inf and s.effect == 1.0

    def test_tml_weight(self):
        assert st.tml_weight(3, 2, 2) == pytest.approx(0.6)
        assert st.tml_weight(0, 2, 2) == 0.0


class TestDegenerate:
    def test_constant_differences(self):
        s = st.paired_t([(2, 1), (3, 2)])
        assert s.degenerate and s.value == math.inf
        assert st.paired_t([(1, 1), (2, 2)]).value == 0.0

    def test_welch_constant_groups(self):
        s = st.welch([1, 1], [2, 2])
        assert s.degenerate and s.value == -math.inf and s.df is None

    def test_wsr_all_zero(self):
        s = st.wilcoxon_signed_rank([(1, 1), (2, 2)])
        assert s.degenerate and s.value == 0.0

    def test_zero_degenerate_has_p_one(self):
        pv = st.tail_probabilities(StatValue("x", 0.0, degenerate=True))
        assert set(pv.values()) == {1.0}

    def test_infinite_value_tails(self):
        pv = st.tail_probabilities(StatValue("x", math.inf, df=3, degenerate=True), "t")
        assert pv[Sidedness.GREATER] == 0.0 and pv[Sidedness.LESS] == 1.0

    def test_statvalue_validation(self):
        with pytest.raises(ValueError):
            StatValue("x", math.inf)
        with pytest.raises(ValueError):
            StatValue("x", 1.0, df=0)


class TestPreconditions:
    @pytest.mark.parametrize("fn", [st.paired_t, st.munzel_f, st.munzel_bf])
    def test_complete_needs_two(self, fn):
        with pytest.raises(ValueError):
            fn([(1, 2)])

    @pytest.mark.parametrize("fn", [st.welch, st.brunner_munzel])
    def test_groups_need_two(self, fn):
        with pytest.raises(ValueError):
            fn([1], [2, 3])


class TestInvariances:
    def test_swap_components_negates(self, rng):
        x = rng.normal(size=(12, 2))
        for fn in (st.paired_t, st.wilcoxon_signed_rank, st.munzel_f, st.munzel_bf):
            assert fn(x[:, ::-1]).value == pytest.approx(-fn(x).value)

    def test_swap_groups_negates(self, rng):
        a, b = rng.normal(size=7), rng.normal(size=9)
        for fn in (st.welch, st.wmw, st.brunner_munzel):
            assert fn(b, a).value == pytest.approx(-fn(a, b).value)

    def test_rank_statistics_monotone_invariant(self, rng):
        a, b = rng.normal(size=8), rng.normal(size=6)
        x = rng.normal(size=(10, 2))
        for fn in (st.wmw, st.brunner_munzel):
            assert fn(np.exp(a), np.exp(b)).value == pytest.approx(fn(a, b).value)
        for fn in (st.munzel_f, st.munzel_bf, st.wilcoxon_signed_rank):
            assert fn(3 * x + 1).value == pytest.approx(fn(x).value)

    def test_shift_stable_mean(self):
        x = np.array([(1e9 + 1, 1e9), (1e9 + 2, 1e9), (1e9 + 3, 1e9)])
        assert st.paired_t(x).value == pytest.approx(2 * math.sqrt(3), rel=1e-9)


class TestEffects:
    def test_wmw_effect_matches_direct(self, rng):
        for _ in range(50):
            a = rng.integers(0, 4, rng.integers(2, 10)).astype(float)
            b = rng.integers(0, 4, rng.integers(2, 10)).astype(float)
            direct = st.wmw_effect_direct(a, b)
            assert abs(st.wmw(a, b).effect - direct) <= 1e-12
            assert abs(st.brunner_munzel(a, b).effect - direct) <= 1e-12

    def test_paired_z_mean_identity(self, rng):
        from pairmct.ranking import two_group_ranks

        for _ in range(20):
            x = np.round(rng.normal(size=(9, 2)), 1)
            r = two_group_ranks(x[:, 0], x[:, 1])
            p1, p2 = r.placements()
            zbar = ((p2 - p1) / 9).mean()
            assert zbar == pytest.approx(2 * (st.munzel_bf(x).effect - 0.5))


class TestTailProbabilities:
    @pytest.mark.parametrize("x,df", [(3.4641016151377544, 2), (-0.7, 5.5), (1.2, 1.4705882352941178)])
    def test_t_tail_against_quadrature(self, x, df):
        pv = st.tail_probabilities(StatValue("t", x, df=df), "t")
        assert pv[Sidedness.GREATER] == pytest.approx(t_sf_quad(x, df), rel=1e-8)
        assert pv[Sidedness.TWO_SIDED] == pytest.approx(2 * t_sf_quad(abs(x), df), rel=1e-8)

    def test_hand_p_value(self):
        p = st.asymptotic_p(st.paired_t([(1, 0), (2, 0), (3, 0)]), "t", "greater")
        assert p == pytest.approx(0.03709, abs=1e-5)

    def test_normal_sides_sum(self):
        pv = st.tail_probabilities(StatValue("z", 0.4))
        assert pv[Sidedness.GREATER] + pv[Sidedness.LESS] == pytest.approx(1.0)

    def test_bad_reference(self):
        with pytest.raises(ValueError):
            st.tail_probabilities(StatValue("z", 0.4), "chi2")
        with pytest.raises(ValueError):
            st.tail_probabilities(StatValue("z", 0.4), "t")

    def test_sidedness_parse(self):
        assert Sidedness.parse("two") is Sidedness.TWO_SIDED
        assert Sidedness.parse("GREATER").mirrored() is Sidedness.LESS
        with pytest.raises(ValueError):
            Sidedness.parse("up")


class TestTml:
    def test_combination(self):
        s = build_sample([(1, 0), (2, 0), (4, 0), (1, None), (3, None), (None, 2), (None, 6)])
        a = st.tml_weight(3, 2, 2)
        expect = math.sqrt(a) * st.paired_t(s.complete).value + math.sqrt(1 - a) * st.welch(
            s.first_only, s.second_only).value
        assert st.tml(s).value == pytest.approx(expect)
