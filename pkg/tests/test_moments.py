"""Lifetimes, χ, long-run limits, stationary law and moment frontiers."""

import math

import numpy as np
import pytest

from conftest import make_black_scholes, make_cir
from errors import DomainError, NonconvergenceError, NotInX, PreconditionError
from mechanisms import BranchingMechanism, CBITCLModel, ImmigrationMechanism
from moments import (
    LifetimeClass,
    _root,
    chi,
    critical_moments,
    lee_beta,
    lifetime,
    long_run_cumulant,
    moment_domain_full,
    stationary_laplace,
    wing_slopes,
    xi_asymptotic,
)
from riccati import solve_riccati


# ═══════════════════════════════════════════════════════════════════════════
# χ and lifetimes
# ═══════════════════════════════════════════════════════════════════════════

class TestLifetime:
    @pytest.mark.parametrize("u3", [0.0, 0.5, 1.0])
    def test_alpha_cir_frontier_inside(self, alpha_cir, u3):
        result = lifetime(alpha_cir, 0.0, 0.0, u3)
        assert result.is_infinite
        assert result.classification is LifetimeClass.BELOW_CHI

    @pytest.mark.parametrize("u3", [-0.01, 1.01])
    def test_alpha_cir_frontier_outside(self, alpha_cir, u3):
        result = lifetime(alpha_cir, 0.0, 0.0, u3)
        assert result.value == 0.0
        assert result.chi == -math.inf

    def test_cir_chi_is_larger_root(self, cir):
        assert chi(cir, 0.0, 0.0) == pytest.approx(2.0 * 2.0 / 0.09, rel=1e-14)

    def test_cir_closed_form(self, cir):
        u1 = 2.0 * (2.0 * 2.0 / 0.09)
        expected = math.log(0.09 * u1 / (0.09 * u1 - 4.0)) / 2.0
        assert lifetime(cir, u1, 0.0, 0.0).value == pytest.approx(expected, rel=1e-8)

    def test_below_chi_is_infinite(self, heston):
        assert lifetime(heston, 1.0, 0.0, 0.5).is_infinite

    def test_linear_branching_never_explodes(self):
        model = CBITCLModel(x0=0.1, immigration=ImmigrationMechanism(0.1), branching=BranchingMechanism(-0.5))
        result = lifetime(model, 50.0, 1.0, 0.0)
        assert result.is_infinite
        assert result.classification is LifetimeClass.BELOW_CHI

    def test_empty_sublevel_set(self, cir):
        # g(x) = 0.045x² − 2x + 30 has no real root
        assert chi(cir, 30.0, 0.0) == -math.inf

    def test_rejects_complex(self, cir):
        with pytest.raises(DomainError):
            lifetime(cir, 1j, 0.0, 0.0)

    def test_rejects_u1_outside_domain(self, alpha_cir):
        with pytest.raises(DomainError):
            lifetime(alpha_cir, 0.5, 0.0, 0.0)

    def test_to_dict(self, cir):
        d = lifetime(cir, 0.0, 0.0, 0.0).to_dict()
        assert d["value"] == math.inf
        assert d["classification"] == "BelowChi"


class TestMomentDomainFull:
    def test_stable_inside_and_outside(self, alpha_cir):
        assert moment_domain_full(alpha_cir, 0.0, 0.5)
        assert not moment_domain_full(alpha_cir, 0.0, 1.5)

    def test_quadratic_branching_is_never_full(self, cir):
        assert not moment_domain_full(cir, -10.0, 0.0)

    def test_linear_branching(self, black_scholes):
        assert moment_domain_full(black_scholes, 0.0, 1.0)


# ═══════════════════════════════════════════════════════════════════════════
# Long-run limits
# ═══════════════════════════════════════════════════════════════════════════

class TestAsymptotic:
    @pytest.mark.parametrize(
        "fixture, lo, hi",
        [("heston", -3.0, 3.0), ("alpha_cir", 0.05, 0.95), ("tempered_cgmy", -1.2, 2.2)],
    )
    def test_residual_vanishes(self, fixture, lo, hi, request):
        model = request.getfixturevalue(fixture)
        for u in np.linspace(lo, hi, 20):
            xi = xi_asymptotic(model, u).xi
            residual = model.phi(xi) + model.cross * u * xi + model.xi(u)
            assert abs(residual) < 1e-10

    def test_riccati_settles_on_xi(self, alpha_cir):
        for u in (0.2, 0.5, 0.8):
            sol = solve_riccati(alpha_cir, 0.0, 0.0, u, 25.0)
            assert sol.v_final == pytest.approx(xi_asymptotic(alpha_cir, u).xi, abs=1e-4)

    @pytest.mark.parametrize("u", [-3.0, -0.5, 1.5, 2.5])
    def test_positive_noise_exponent(self, heston, u):
        # Ξ(u) > 0: ξ is the smaller root, reached from V(0) = 0 from below.
        assert heston.xi(u) > 0.0
        xi = xi_asymptotic(heston, u).xi
        assert 0.0 < xi < chi(heston, 0.0, u)
        assert abs(heston.phi(xi) + heston.cross * u * xi + heston.xi(u)) < 1e-10
        assert solve_riccati(heston, 0.0, 0.0, u, 25.0).v_final == pytest.approx(xi, abs=1e-6)

    def test_positive_noise_exponent_with_jumps(self, tempered_cgmy):
        for u in (-1.0, 1.8):
            xi = xi_asymptotic(tempered_cgmy, u).xi
            assert 0.0 < xi <= chi(tempered_cgmy, 0.0, u)

    def test_failed_root_search_is_numerical(self):
        with pytest.raises(NonconvergenceError):
            _root(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_cumulant_is_psi_of_xi(self, heston):
        result = xi_asymptotic(heston, 0.5)
        assert result.cumulant == pytest.approx(0.08 * result.xi, rel=1e-14)
        assert result.xi < 0.0

    def test_martingale_argument_is_zero(self, heston):
        result = xi_asymptotic(heston, 1.0)
        assert result.xi == 0.0 and result.cumulant == 0.0

    def test_not_in_x(self, alpha_cir):
        with pytest.raises(NotInX):
            xi_asymptotic(alpha_cir, 1.2)

    def test_needs_positive_mean_reversion(self):
        model = make_cir(b=-0.5)
        with pytest.raises(PreconditionError):
            xi_asymptotic(model, 0.5)

    def test_long_run_cumulant_matches_solver(self, heston):
        result = long_run_cumulant(heston, 0.5, horizon=200.0)
        assert result.horizon == 200.0
        assert result.solver_rate == pytest.approx(result.rate, rel=1e-2)

    def test_long_run_cumulant_without_horizon(self, heston):
        result = long_run_cumulant(heston, 0.5)
        assert result.solver_rate is None


class TestStationary:
    @pytest.mark.parametrize("lam", [-0.5, -5.0, -40.0])
    def test_cir_gamma_law(self, cir, lam):
        b, sigma, beta = 2.0, 0.3, 0.08
        expected = (1.0 - sigma ** 2 * lam / (2.0 * b)) ** (-2.0 * beta / sigma ** 2)
        assert stationary_laplace(cir, lam) == pytest.approx(expected, rel=1e-8)

    def test_zero(self, alpha_cir):
        assert stationary_laplace(alpha_cir, 0.0) == 1.0

    def test_positive_argument(self, cir):
        with pytest.raises(DomainError):
            stationary_laplace(cir, 0.1)

    def test_needs_positive_mean_reversion(self):
        model = CBITCLModel(x0=0.1, immigration=ImmigrationMechanism(0.1), branching=BranchingMechanism(-1.0, 0.3))
        with pytest.raises(PreconditionError):
            stationary_laplace(model, -1.0)


# ═══════════════════════════════════════════════════════════════════════════
# Moment frontier and wings
# ═══════════════════════════════════════════════════════════════════════════

class TestCriticalMoments:
    def test_black_scholes_has_all_moments(self):
        assert critical_moments(make_black_scholes(), 0.0, 1.0, 1.0) == (math.inf, math.inf)

    def test_alpha_cir_is_pinned(self, alpha_cir):
        assert critical_moments(alpha_cir, 0.0, 1.0, 1.0) == (1.0, 0.0)

    def test_heston_is_finite(self, heston):
        p_plus, q_plus = critical_moments(heston, 0.0, 1.0, 1.0)
        assert 1.0 < p_plus < math.inf
        assert 0.0 < q_plus < math.inf

    def test_heston_frontier_decreases_with_maturity(self, heston):
        short, _ = critical_moments(heston, 0.0, 1.0, 0.5)
        long, _ = critical_moments(heston, 0.0, 1.0, 2.0)
        assert short > long

    def test_rejects_nonpositive_maturity(self, heston):
        with pytest.raises(DomainError):
            critical_moments(heston, 0.0, 1.0, 0.0)


class TestWings:
    def test_lee_beta_limits(self):
        assert lee_beta(0.0) == 2.0
        assert lee_beta(math.inf) == 0.0
        assert lee_beta(1.0) == pytest.approx(2.0 - 4.0 * (math.sqrt(2.0) - 1.0), rel=1e-14)

    def test_lee_beta_is_decreasing(self):
        values = [lee_beta(p) for p in (0.0, 0.1, 1.0, 10.0, 1e3)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("T", [0.5, 1.0, 2.0])
    def test_alpha_cir_slopes(self, alpha_cir, T):
        slopes = wing_slopes(alpha_cir, 0.0, 1.0, T)
        assert slopes.right == pytest.approx(2.0 / T, rel=1e-12)
        assert slopes.left == pytest.approx(2.0 / T, rel=1e-12)

    def test_black_scholes_slopes_vanish(self):
        slopes = wing_slopes(make_black_scholes(), 0.0, 1.0, 1.0)
        assert slopes.to_dict() == {"left": 0.0, "right": 0.0, "p_plus": math.inf, "q_plus": math.inf}
