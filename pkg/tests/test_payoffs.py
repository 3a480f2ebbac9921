import numpy as np
import pytest

from amlmc.models import builtin
from amlmc.payoffs import (
    PayoffError,
    PayoffSpec,
    builtin_payoff,
    correction_sample,
    member_payoffs,
    payoff_names,
)
from amlmc.randomness import BrownianSlice
from amlmc.schemes import TripleState, coupled_coarse_step, simulate_triple_path


class TestBuiltinPayoffs:
    def test_min_of_two_call_values(self):
        p = builtin_payoff("min_of_two_call", strike=1.0)
        assert p(np.array([1.5, 1.2])) == pytest.approx(0.2)
        assert p(np.array([0.5, 2.0])) == 0.0
        batch = p(np.array([[1.5, 1.2], [0.5, 2.0], [2.0, 2.0]]))
        assert np.allclose(batch, [0.2, 0.0, 1.0])

    def test_european_call_kink(self):
        p = builtin_payoff("european_call", strike=1.0)
        assert p(np.array([1.0])) == 0.0
        assert p(np.array([1.25])) == pytest.approx(0.25)

    def test_asian_call_definition(self):
        p = builtin_payoff("asian_call", strike=1.0)
        assert p.kind == "asian"
        assert p(np.array([1.3, 0.0])) == pytest.approx(0.3)

    def test_smoothness_metadata(self):
        assert builtin_payoff("smooth_quadratic_capped").smoothness == "smooth"
        assert builtin_payoff("asian_smooth").smoothness == "smooth"
        for name in ("european_call", "min_of_two_call", "asian_call"):
            assert builtin_payoff(name).smoothness == "lipschitz_piecewise"

    def test_unknown_name(self):
        with pytest.raises(PayoffError) as err:
            builtin_payoff("nope")
        for name in payoff_names():
            assert name in str(err.value)

    def test_declared_lipschitz_bound_holds_on_sampled_pairs(self):
        p = builtin_payoff("smooth_quadratic_capped", center=1.0, cap=1.0)
        rng = np.random.default_rng(4)
        x = rng.normal(loc=1.0, scale=1.5, size=(500, 2))
        y = rng.normal(loc=1.0, scale=1.5, size=(500, 2))
        gaps = np.abs(p.evaluator(x) - p.evaluator(y))
        dists = np.linalg.norm(x - y, axis=1)
        assert np.all(gaps <= p.lipschitz_bound * dists * (1 + 1e-12))

    def test_capped_quadratic_derivative_bounds_are_tight(self):
        # max |phi'| = sqrt(2 cap) e^{-1/2} and max |phi''| = 2, so the
        # declared bounds should match a dense numeric scan
        cap = 1.7
        p = builtin_payoff("smooth_quadratic_capped", center=0.0, cap=cap,
                           dim=1)
        s = np.linspace(-6, 6, 400_001)
        phi = cap * (1.0 - np.exp(-s * s / cap))
        d1 = np.gradient(phi, s)
        d2 = np.gradient(d1, s)
        assert np.max(np.abs(d1)) == pytest.approx(p.lipschitz_bound, rel=1e-4)
        assert np.max(np.abs(d2)) == pytest.approx(p.hessian_bound, rel=1e-3)


class TestCorrectionSample:
    def _degenerate_path(self, value):
        class Path:
            xf = xa = xc = np.array([value])
            asian_f = asian_a = asian_c = np.array([value])
        return Path()

    def test_identical_inputs_give_zero(self):
        p = builtin_payoff("min_of_two_call", strike=1.0)
        path = self._degenerate_path([1.4, 1.2])
        assert correction_sample(p, path) == pytest.approx(0.0, abs=0.0)

    def test_linear_payoff_correction_vanishes(self):
        # payoff = second state component: the per-path average identity
        # makes the correction pure roundoff
        linear = PayoffSpec(name="x2", kind="european", smoothness="smooth",
                            evaluator=lambda x: x[:, 1],
                            lipschitz_bound=1.0, hessian_bound=0.0)
        m = builtin("clark_cameron")
        path = simulate_triple_path(m, 4, np.arange(4000), seed=3)
        y = correction_sample(linear, path)
        scale = np.max(np.abs(path.xf[:, 1]))
        assert np.max(np.abs(y)) < 1e3 * np.spacing(scale)

    def test_quadratic_payoff_correction_identity(self):
        # for P = x2^2 the correction reduces algebraically to
        # (xf2 - xa2)^2 / 4, in particular it is non-negative
        quad = PayoffSpec(name="x2sq", kind="european", smoothness="smooth",
                          evaluator=lambda x: x[:, 1] ** 2,
                          lipschitz_bound=None, hessian_bound=2.0)
        m = builtin("clark_cameron")
        path = simulate_triple_path(m, 3, np.arange(4000), seed=5)
        y = correction_sample(quad, path)
        expected = 0.25 * (path.xf[:, 1] - path.xa[:, 1]) ** 2
        assert np.allclose(y, expected, rtol=1e-6, atol=1e-13)
        assert np.all(y >= -1e-13)

    def test_asian_kind_uses_averages(self):
        p_asian = builtin_payoff("asian_call", strike=0.0)
        m = builtin("geometric_multi")
        path = simulate_triple_path(m, 2, np.arange(200), seed=6)
        fine, coarse = member_payoffs(p_asian, path)
        assert np.allclose(coarse, path.asian_c[:, 0])
        assert np.allclose(fine, 0.5 * (path.asian_f[:, 0] + path.asian_a[:, 0]))

    def test_smooth_payoff_per_path_bound(self):
        # |1/2 (P(Xf) + P(Xa)) - P(Xc)| <=
        #   L1 ||(Xf + Xa)/2 - Xc|| + L2/4 ||Xf - Xa||^2  on every path
        p = builtin_payoff("smooth_quadratic_capped", center=1.0, cap=1.0)
        m = builtin("noncommutative_test")
        path = simulate_triple_path(m, 3, np.arange(20_000), seed=7)
        corr = np.abs(correction_sample(p, path))
        mean_gap = np.linalg.norm(0.5 * (path.xf + path.xa) - path.xc, axis=1)
        twin_gap = np.linalg.norm(path.xf - path.xa, axis=1)
        bound = (p.lipschitz_bound * mean_gap
                 + 0.25 * p.hessian_bound * twin_gap ** 2)
        assert np.all(corr <= bound * (1 + 1e-9) + 1e-15)


class TestAsianWeights:
    def test_two_step_hand_case(self):
        # constant unit diffusion, no drift: states are exact prefix sums of
        # the increments, so the integrals can be written out by hand
        m = builtin("constant_diffusion", matrix=((1.0, 0.0), (0.0, 1.0)))
        dt = 0.5
        s1 = BrownianSlice(np.array([[0.2, 0.0]]), np.array([[0.1, 0.0]]))
        s2 = BrownianSlice(np.array([[-0.4, 0.0]]), np.array([[0.3, 0.0]]))
        state = TripleState.initial(m, 1)
        state = coupled_coarse_step(m, state, s1, dt)
        state = coupled_coarse_step(m, state, s2, dt)

        # coarse path: 0 -> 0.3 -> 0.2; trapezoid: (0.15 + 0.25) * 0.5
        assert state.asian_c[0, 0] == pytest.approx(0.5 * (0.15 + 0.25))
        # fine path knots: 0, 0.2, 0.3, -0.1, 0.2 at spacing 0.25
        knots = [0.0, 0.2, 0.3, -0.1, 0.2]
        trap = sum(0.25 * 0.5 * (a + b) for a, b in zip(knots, knots[1:]))
        assert state.asian_f[0, 0] == pytest.approx(trap)
        # per coarse step the fine weights are (1, 2, 1)/4
        step1 = 0.25 * (knots[0] + 2 * knots[1] + knots[2]) * dt
        step2 = 0.25 * (knots[2] + 2 * knots[3] + knots[4]) * dt
        assert state.asian_f[0, 0] == pytest.approx(step1 + step2)
