import numpy as np
import pytest

from signalmfg import casestudy
from signalmfg.meanfield import aggregate
from signalmfg.model import (
    NONZERO_SIGNALS,
    SIGNALS,
    AdmissibleInterval,
    Population,
    Signal,
    Strategy,
    admissible_interval,
)
from signalmfg.quad import Quadrature, expect_outer
from signalmfg.response import (
    best_response,
    best_response_nagent,
    context_from_stats,
    maximize_concave_1d,
    relative_utility,
    target_no_signal,
    target_signal,
)
from signalmfg.signals import conditional_prob

MERTON = 4.0 / 9.0  # 0.08 / (2 * 0.09) for the case-study market


def mf_context(pop, strat, q, type_index=0):
    return context_from_stats(pop.types[type_index], aggregate(pop, strat, q), q)


class TestRelativeUtility:
    def test_no_concern(self):
        assert relative_utility(2.0, 5.0, alpha=2.0, theta=0.0) == pytest.approx(-0.5)

    def test_concern_direction(self):
        # alpha > 1: a richer peer average lowers utility
        lo = relative_utility(1.0, 1.0, alpha=2.0, theta=0.5)
        hi = relative_utility(1.0, 2.0, alpha=2.0, theta=0.5)
        assert hi < lo

    def test_low_risk_aversion_sign(self):
        assert relative_utility(1.0, 1.0, alpha=0.5, theta=0.3) > 0


class TestTargetNoSignal:
    def test_quadratic_closed_form(self, quad128):
        # lam = 0, theta = 0: value is phi*kappa - alpha/2 * sigma0^2 * phi^2
        m = casestudy.default_market(lam=0.0)
        pop = Population([casestudy.investor(m, theta=0.0, weight=1.0)])
        ctx = mf_context(pop, Strategy.zeros(1), quad128)
        assert target_no_signal(MERTON, ctx) == pytest.approx(0.0177777777777778, abs=1e-15)

    def test_zero_position_zero_value(self, quad128):
        m = casestudy.default_market(lam=0.0)
        pop = Population([casestudy.investor(m, theta=0.0, weight=1.0)])
        ctx = mf_context(pop, Strategy.zeros(1), quad128)
        assert target_no_signal(0.0, ctx) == 0.0

    def test_neutral_environment_vanishes_at_zero(self, ref_pop, quad128):
        # u(1, 1)-subtraction keeps the jump integrand zero at phi = 0
        ctx = mf_context(ref_pop, Strategy.zeros(2), quad128)
        assert target_no_signal(0.0, ctx) == pytest.approx(0.0, abs=1e-14)

    def test_refinement_oracle(self, ref_pop):
        # dense-grid/high-node evaluation agrees with default settings
        coarse_ctx = mf_context(ref_pop, Strategy.constant(2, 0.5), Quadrature.standard_normal(128, 8.0))
        fine_ctx = mf_context(ref_pop, Strategy.constant(2, 0.5), Quadrature.standard_normal(512, 10.0))
        assert target_no_signal(0.5, coarse_ctx) == pytest.approx(
            target_no_signal(0.5, fine_ctx), abs=1e-7
        )

    def test_array_evaluation_matches_scalar(self, ref_pop, quad128):
        ctx = mf_context(ref_pop, Strategy.constant(2, 0.4), quad128)
        grid = np.linspace(0.0, 0.9, 7)
        vals = target_no_signal(grid, ctx)
        assert vals == pytest.approx([target_no_signal(float(p), ctx) for p in grid])


class TestTargetSignal:
    def test_zero_in_neutral_environment(self, ref_pop, quad128):
        ctx = mf_context(ref_pop, Strategy.zeros(2), quad128)
        for z in NONZERO_SIGNALS:
            assert target_signal(0.0, z, ctx) == pytest.approx(0.0, abs=1e-14)

    def test_rho_zero_mirror_symmetry(self, quad128):
        pop = Population([casestudy.investor(rho=0.0, weight=1.0)])
        ctx = mf_context(pop, Strategy.constant(1, 0.3), quad128)
        for z in (Signal.POS_HALF, Signal.POS_ONE, Signal.POS_INF):
            assert target_signal(0.4, z, ctx) == pytest.approx(
                target_signal(0.4, z.mirrored(), ctx), abs=1e-10
            )

    def test_posterior_weights_integrate_to_one(self, ref_pop, quad128):
        t = ref_pop.types[0]
        from signalmfg.quad import normal_prob
        from signalmfg.signals import signal_interval

        for z in NONZERO_SIGNALS:
            mass = expect_outer(lambda x: conditional_prob(z, x, t.rho), quad128)
            assert mass / normal_prob(signal_interval(z)) == pytest.approx(1.0, abs=1e-8)

    def test_null_signal_rejected(self, ref_pop, quad128):
        ctx = mf_context(ref_pop, Strategy.zeros(2), quad128)
        with pytest.raises(ValueError):
            target_signal(0.1, Signal.NONE, ctx)


class TestMaximizeConcave1d:
    def test_quadratic_vertex(self):
        x, v = maximize_concave_1d(lambda x: -((x - 0.3) ** 2), AdmissibleInterval(0.0, 1.0), 1e-10)
        assert x == pytest.approx(0.3, abs=1e-9)
        assert v == pytest.approx(0.0, abs=1e-15)

    def test_boundary_maximum(self):
        x, _ = maximize_concave_1d(lambda x: x, AdmissibleInterval(0.0, 1.0), 1e-10)
        assert x == pytest.approx(1.0, abs=1e-9)

    def test_merton_vertex(self):
        # localization is flatness-limited: sqrt(ulp(f*) / curvature) ~ 5e-9 here
        x, _ = maximize_concave_1d(lambda x: 0.08 * x - 0.09 * x * x, AdmissibleInterval(0.0, 1.0), 1e-10)
        assert x == pytest.approx(MERTON, abs=2e-8)

    def test_tol_validated(self):
        with pytest.raises(ValueError):
            maximize_concave_1d(lambda x: -x * x, AdmissibleInterval(0.0, 1.0), 0.0)

    def test_non_finite_objective(self):
        with pytest.raises(ValueError, match="finite"):
            maximize_concave_1d(lambda x: float("nan"), AdmissibleInterval(0.0, 1.0), 1e-8)


class TestBestResponse:
    def test_degenerate_jumps_give_clipped_merton_everywhere(self, quad128):
        # eta identically zero: signals are uninformative, Merton for every signal
        m = casestudy.default_market(kappa_hat=0.0, sigma_hat=0.0)
        pop = Population([casestudy.investor(m, theta=0.0, weight=1.0)])
        out = best_response(pop, Strategy.zeros(1), quad128)
        assert out.table == pytest.approx(np.full((1, 7), MERTON), abs=1e-9)

    def test_merton_env_independent_bit_for_bit(self, quad128):
        m = casestudy.default_market(lam=0.0)
        pop = Population([casestudy.investor(m, theta=0.0), casestudy.investor(m, theta=0.0)])
        a = best_response(pop, Strategy.zeros(2), quad128)
        b = best_response(pop, Strategy.constant(2, 0.9), quad128)
        assert np.array_equal(a.table, b.table)
        assert a.table == pytest.approx(np.full((2, 7), MERTON), abs=1e-9)

    def test_no_drift_no_jumps_no_concern(self, quad128):
        m = casestudy.default_market(lam=0.0, kappa=0.0, r=0.0)
        pop = Population([casestudy.investor(m, theta=0.0, weight=1.0)])
        out = best_response(pop, Strategy.constant(1, 0.5), quad128)
        assert out.table == pytest.approx(np.zeros((1, 7)), abs=1e-9)

    def test_admissibility_closure(self, ref_pop, quad128):
        rng = np.random.default_rng(0)
        hi = 1.0 - ref_pop.types[0].eps_b
        for _ in range(3):
            env = Strategy(rng.uniform(0.0, hi, size=(2, 7)))
            out = best_response(ref_pop, env, quad128)
            assert np.all(out.table >= 0.0) and np.all(out.table <= hi)

    def test_grid_oracle_on_reference(self, ref_pop, quad128):
        # coarse grid scan plus local refinement brackets each maximizer to 1e-4
        env = Strategy.constant(2, 0.5)
        stats = aggregate(ref_pop, env, quad128)
        out = best_response(ref_pop, env, quad128)
        for i, t in enumerate(ref_pop.types):
            ctx = context_from_stats(t, stats, quad128)
            iv = admissible_interval(t)
            for z in SIGNALS:
                f = (
                    (lambda p: target_no_signal(p, ctx))
                    if z is Signal.NONE
                    else (lambda p: target_signal(p, z, ctx))
                )
                grid = np.linspace(iv.lo, iv.hi, 10_001)
                best = grid[int(np.argmax(f(grid)))]
                assert out.position(i, z) == pytest.approx(best, abs=1e-4)

    def test_signal_symmetry_rho_zero(self, quad128):
        pop = Population([casestudy.investor(rho=0.0, weight=1.0)])
        out = best_response(pop, Strategy.constant(1, 0.4), quad128)
        for z in (Signal.POS_HALF, Signal.POS_ONE, Signal.POS_INF):
            assert out.position(0, z) == pytest.approx(out.position(0, z.mirrored()), abs=1e-8)

    def test_concern_raises_default_position(self, ref_pop, quad128):
        # argmax of the no-signal target is nondecreasing in theta at fixed stats
        stats = aggregate(ref_pop, Strategy.constant(2, 0.5), quad128)
        assert stats.sigma0pi_bar > 0
        args = []
        for theta in (0.0, 0.25, 0.5, 0.75, 1.0):
            t = casestudy.investor(theta=theta)
            ctx = context_from_stats(t, stats, quad128)
            phi, _ = maximize_concave_1d(
                lambda p: target_no_signal(p, ctx), admissible_interval(t), 1e-10
            )
            args.append(phi)
        assert all(b >= a - 1e-9 for a, b in zip(args, args[1:]))

    def test_sampled_concavity(self, ref_pop, quad128):
        ctx = mf_context(ref_pop, Strategy.constant(2, 0.5), quad128)
        iv = admissible_interval(ref_pop.types[0])
        grid = np.linspace(iv.lo, iv.hi, 21)
        for z in SIGNALS:
            f = (
                (lambda p: target_no_signal(p, ctx))
                if z is Signal.NONE
                else (lambda p: target_signal(p, z, ctx))
            )
            vals = f(grid)
            second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
            assert np.max(second) <= 1e-10


class TestNAgentResponse:
    def test_theta_zero_matches_mean_field(self, quad128):
        # without concern the peer environment is irrelevant in both modes
        types = [casestudy.investor(theta=0.0), casestudy.investor(theta=0.0)]
        nag = best_response_nagent(types, Strategy.constant(2, 0.7), quad128)
        pop = Population(types)
        mf = best_response(pop, Strategy.constant(2, 0.7), quad128)
        assert np.array_equal(nag.table, mf.table)

    def test_many_players_approach_mean_field(self, quad128):
        t = casestudy.investor()
        env = Strategy.constant(60, 0.5)
        nag = best_response_nagent([t] * 60, env, quad128)
        pop = Population([casestudy.investor(weight=1.0)])
        mf = best_response(pop, Strategy.constant(1, 0.5), quad128)
        assert np.max(np.abs(nag.table[0] - mf.table[0])) < 5e-3

    def test_needs_two_players(self, quad128):
        with pytest.raises(ValueError):
            best_response_nagent([casestudy.investor()], Strategy.zeros(1), quad128)
