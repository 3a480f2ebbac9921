import numpy as np
import pytest
from numpy.random import Philox
from scipy.special import ndtri

from amlmc.randomness import (
    ORACLE_STREAM,
    PATH_STREAM,
    BrownianSlice,
    StreamKey,
    antithetic_swap,
    coarse_increment,
    draw_slice,
    draw_slices,
    philox4x64,
    standard_normals,
)


class TestPhiloxCore:
    def test_known_answer_vectors(self):
        # Random123 test vectors for the 10-round 4x64 block function
        cases = [
            ((0, 0, 0, 0), (0, 0),
             (0x16554D9ECA36314C, 0xDB20FE9D672D0FDC,
              0xD7E772CEE186176B, 0x7E68B68AEC7BA23B)),
            (((1 << 64) - 1,) * 4, ((1 << 64) - 1,) * 2,
             (0x87B092C3013FE90B, 0x438C3C67BE8D0224,
              0x9CC7D7C69CD777B6, 0xA09CAEBF594F0BA0)),
            ((0x243F6A8885A308D3, 0x13198A2E03707344,
              0xA4093822299F31D0, 0x082EFA98EC4E6C89),
             (0x452821E638D01377, 0xBE5466CF34E90C6C),
             (0xA528F45403E61D95, 0x38C72DBD566E9788,
              0xA5A1610E72FD18B5, 0x57BD43B5E52B7FE6)),
        ]
        for ctr, key, want in cases:
            args = [np.array([c], dtype=np.uint64) for c in ctr]
            got = tuple(int(o[0]) for o in philox4x64(*args, *key))
            assert got == want

    def test_matches_numpy_philox(self):
        # numpy's Philox is the independent reference; it increments its
        # 256-bit counter before producing each 4-word block
        rng = np.random.default_rng(1234)
        for _ in range(100):
            key = rng.integers(0, 1 << 64, 2, dtype=np.uint64)
            ctr = rng.integers(0, (1 << 63), 4, dtype=np.uint64)
            want = Philox(key=key, counter=ctr).random_raw(12)
            c0 = ctr[0] + np.uint64(1) + np.arange(3, dtype=np.uint64)
            ones = np.ones(3, dtype=np.uint64)
            got = np.stack(
                philox4x64(c0, ctr[1] * ones, ctr[2] * ones, ctr[3] * ones,
                           int(key[0]), int(key[1])), axis=-1).ravel()
            assert np.array_equal(want, got)


class TestStreamKey:
    def test_validation(self):
        StreamKey(seed=0, level=0, sample_index=0, step_index=0)
        StreamKey(seed=(1 << 64) - 1, level=30, sample_index=10, step_index=5)
        with pytest.raises(ValueError):
            StreamKey(seed=-1, level=0, sample_index=0, step_index=0)
        with pytest.raises(ValueError):
            StreamKey(seed=1 << 64, level=0, sample_index=0, step_index=0)
        with pytest.raises(ValueError):
            StreamKey(seed=0, level=-1, sample_index=0, step_index=0)
        with pytest.raises(ValueError):
            StreamKey(seed=0, level=0, sample_index=0, step_index=-1)


class TestDrawSlice:
    def test_deterministic_repeat(self):
        key = StreamKey(seed=99, level=3, sample_index=17, step_index=2)
        a = draw_slice(key, 0.5, np.eye(2))
        b = draw_slice(key, 0.5, np.eye(2))
        assert np.array_equal(a.delta_first, b.delta_first)
        assert np.array_equal(a.delta_second, b.delta_second)

    def test_independent_of_batch_composition(self):
        full = draw_slices(7, 2, np.arange(100), 4, 0.25, np.eye(3))
        part = draw_slices(7, 2, np.arange(40, 60), 4, 0.25, np.eye(3))
        assert np.array_equal(full.delta_first[40:60], part.delta_first)
        assert np.array_equal(full.delta_second[40:60], part.delta_second)

    def test_distinct_keys_differ(self):
        base = dict(seed=1, level=1, sample_index=1, step_index=1)
        ref = draw_slice(StreamKey(**base), 0.5, np.eye(2))
        for field_name, bumped in (("seed", 2), ("level", 2),
                                   ("sample_index", 2), ("step_index", 2)):
            other = draw_slice(StreamKey(**{**base, field_name: bumped}),
                               0.5, np.eye(2))
            assert not np.array_equal(ref.delta_first, other.delta_first)

    def test_streams_are_disjoint(self):
        a = standard_normals(5, 1, [0], 0, 8, stream=PATH_STREAM)
        b = standard_normals(5, 1, [0], 0, 8, stream=ORACLE_STREAM)
        assert not np.array_equal(a, b)

    def test_rejects_nonpositive_dt(self):
        key = StreamKey(seed=0, level=0, sample_index=0, step_index=0)
        with pytest.raises(ValueError):
            draw_slice(key, 0.0, np.eye(2))

    def test_half_increment_variance(self):
        # each half ~ Normal(0, dt/2); sample variance of n draws has
        # standard error ~ var * sqrt(2/(n-1))
        n, dt = 100_000, 0.25
        s = draw_slices(2024, 0, np.arange(n), 0, dt, np.eye(2))
        target = dt / 2.0
        se = target * np.sqrt(2.0 / (n - 1))
        for half in (s.delta_first, s.delta_second):
            for j in range(2):
                assert abs(half[:, j].var(ddof=1) - target) < 3 * se

    def test_mean_within_4_stderr(self):
        n, dt = 100_000, 0.125
        s = draw_slices(77, 1, np.arange(n), 3, dt, np.eye(2))
        se = np.sqrt(dt / 2.0 / n)
        assert np.all(np.abs(s.delta_first.mean(axis=0)) < 4 * se)
        assert np.all(np.abs(s.delta_second.mean(axis=0)) < 4 * se)

    def test_correlated_drivers(self):
        rho = 0.5
        omega = np.array([[1.0, rho], [rho, 1.0]])
        chol = np.linalg.cholesky(omega)
        n = 100_000
        s = draw_slices(31337, 0, np.arange(n), 0, 0.5, chol)
        se = (1 - rho ** 2) / np.sqrt(n)
        for half in (s.delta_first, s.delta_second):
            corr = np.corrcoef(half[:, 0], half[:, 1])[0, 1]
            assert abs(corr - rho) < 3 * se
            # diagonal of the covariance should still be dt/2
            var_se = 0.25 * np.sqrt(2.0 / (n - 1))
            assert np.all(np.abs(half.var(axis=0, ddof=1) - 0.25) < 4 * var_se)

    def test_normals_match_inverse_cdf_construction(self):
        # draws are ndtri of (word >> 12 + 1/2) * 2^-52 with Philox words
        z = standard_normals(11, 2, [3], 4, 4)
        nb = 1  # 4 values -> one block
        c0 = np.array([4 * nb], dtype=np.uint64)
        words = np.stack(
            philox4x64(c0, np.array([3], dtype=np.uint64),
                       np.zeros(1, dtype=np.uint64),
                       np.zeros(1, dtype=np.uint64), 11, 2), axis=-1).ravel()
        u = ((words >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52
        assert np.array_equal(z.ravel(), ndtri(u))


class TestSliceOps:
    def test_coarse_increment_examples(self):
        s = BrownianSlice(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert np.array_equal(coarse_increment(s), [1.0, 1.0])
        z = BrownianSlice(np.zeros(2), np.zeros(2))
        assert np.array_equal(coarse_increment(z), [0.0, 0.0])
        a = BrownianSlice(np.array([0.7]), np.array([-0.7]))
        assert np.array_equal(coarse_increment(a), [0.0])

    def test_swap_definition(self):
        s = BrownianSlice(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        w = antithetic_swap(s)
        assert np.array_equal(w.delta_first, [3.0, 4.0])
        assert np.array_equal(w.delta_second, [1.0, 2.0])

    def test_swap_involution_and_sum_preserved(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            s = BrownianSlice(rng.normal(size=3), rng.normal(size=3))
            w = antithetic_swap(antithetic_swap(s))
            assert np.array_equal(w.delta_first, s.delta_first)
            assert np.array_equal(w.delta_second, s.delta_second)
            # a + b == b + a exactly in IEEE-754
            assert np.array_equal(coarse_increment(s),
                                  coarse_increment(antithetic_swap(s)))
