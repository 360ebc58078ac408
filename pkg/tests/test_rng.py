import numpy as np
import pytest

from pairmct import _rng
from pairmct._accel import HAVE_NUMBA


class TestCounterStreams:
    def test_mix64_reference_value(self):
        # splitmix64 output for state 0: first step of the reference generator.
        assert int(_rng.mix64(np.uint64(0x9E3779B97F4A7C15))) == 0xE220A8397B1DCDAF

    def test_keys_depend_on_seed_and_index(self):
        k = _rng.stream_keys(1, np.arange(4))
        assert len(set(k.tolist())) == 4
        assert not np.array_equal(k, _rng.stream_keys(2, np.arange(4)))

    def test_draws_are_order_free(self):
        keys = _rng.stream_keys(7, np.arange(10))
        whole = _rng.draws(keys, 0, 5)
        np.testing.assert_array_equal(whole[3:6], _rng.draws(_rng.stream_keys(7, [3, 4, 5]), 0, 5))
        np.testing.assert_array_equal(whole[:, 2:], _rng.draws(keys, 2, 3))

    def test_shuffle_is_permutation(self):
        order = _rng.shuffle_order(_rng.stream_keys(3, np.arange(50)), 9)
        assert (np.sort(order, axis=1) == np.arange(9)).all()

    def test_flip_frequency(self):
        bits = _rng.flip_bits(_rng.stream_keys(0, np.arange(2000)), 50)
        assert abs(bits.mean() - 0.5) < 0.01

    def test_uniforms_range_and_moments(self):
        u = _rng.uniforms(_rng.stream_keys(5, np.arange(20000)), 0, 5).ravel()
        assert u.min() >= 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 0.005
        assert abs(u.var() - 1 / 12) < 0.002

    def test_resample_stream(self):
        s = _rng.ResampleStream(9, 4)
        assert s.flips(6).dtype == bool
        assert sorted(s.permutation(5).tolist()) == [0, 1, 2, 3, 4]
        np.testing.assert_array_equal(s.random(3), _rng.ResampleStream(9, 4).random(3))

    @pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
    def test_kernel_copy_in_sync(self):
        from pairmct import _kernels

        keys = _rng.stream_keys(123456789, np.arange(5))
        for i, key in enumerate(keys):
            assert _kernels.stream_key(np.uint64(123456789), i) == key
            for j in range(4):
                assert _kernels.draw(key, j) == _rng.draws(keys[i:i + 1], j, 1)[0, 0]
