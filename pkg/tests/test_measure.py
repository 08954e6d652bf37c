"""Esscher transforms, closure of the parametric families and the martingale criterion."""

import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from conftest import gbm_noise, make_cir
from errors import DomainError, FamilyClosureError, MartingaleToleranceWarning
from measure import (
    EsscherSpec,
    esscher_density,
    esscher_transform,
    exponential_compensator,
    is_exp_martingale,
    martingale_drift,
    small_jump_tilt_correction,
    tilted_exponents,
)
from mechanisms import (
    CGMY,
    BranchingMechanism,
    CBITCLModel,
    ImmigrationMechanism,
    NoiseExponent,
    StablePositive,
    TemperedStablePositive,
)
from model_config import model_to_dict


def flat_parameters(model: CBITCLModel) -> dict:
    """Numeric model parameters keyed by dotted path; family tags are folded into the key."""
    flat = {}

    def walk(prefix, node):
        if isinstance(node, dict):
            tag = node.get("family", "")
            for key, value in node.items():
                if key != "family":
                    walk(f"{prefix}.{tag}:{key}" if tag else f"{prefix}.{key}", value)
        elif node is not None and not isinstance(node, str):
            flat[prefix] = float(node)

    walk("model", model_to_dict(model))
    return flat


# ═══════════════════════════════════════════════════════════════════════════
# Tilt parameters
# ═══════════════════════════════════════════════════════════════════════════

class TestEsscherSpec:
    def test_positive_zeta_outside_stable_domain(self, alpha_cir):
        with pytest.raises(DomainError):
            EsscherSpec(alpha_cir, zeta=0.5, lam=1.0)

    def test_lambda_outside_noise_domain(self, tempered_cgmy):
        with pytest.raises(DomainError):
            EsscherSpec(tempered_cgmy, zeta=0.0, lam=3.5)

    def test_drift_of_price_tilt(self, heston):
        # Φ(0) = 0 and Ξ(1) = 0
        assert EsscherSpec(heston, 0.0, 1.0).drift == 0.0

    def test_compensator_broadcasts(self, heston):
        spec = EsscherSpec(heston, zeta=-0.5, lam=0.5)
        t = np.array([0.0, 1.0, 2.0])
        y = np.array([0.0, 0.04, 0.1])
        out = exponential_compensator(heston, spec, t, y)
        np.testing.assert_allclose(out, t * spec.psi_zeta + y * spec.drift, rtol=1e-15)
        assert out[0] == 0.0

    def test_compensator_rejects_negative_time(self, heston):
        with pytest.raises(DomainError):
            exponential_compensator(heston, EsscherSpec(heston), -1.0, 0.0)

    def test_density_is_one_for_identity(self, heston):
        density = esscher_density(heston, EsscherSpec(heston), 1.0, np.array([0.1, 0.2]), 0.1, np.array([0.3, -1.0]))
        np.testing.assert_array_equal(density, [1.0, 1.0])


# ═══════════════════════════════════════════════════════════════════════════
# Parameter map
# ═══════════════════════════════════════════════════════════════════════════

class TestEsscherTransform:
    def test_identity_returns_same_model(self, tempered_cgmy):
        assert esscher_transform(tempered_cgmy, EsscherSpec(tempered_cgmy)) is tempered_cgmy

    @pytest.mark.parametrize("u1", [-1.0, 0.3, 1.0, complex(-0.2, 1.5)])
    @pytest.mark.parametrize("u3", [-1.0, 0.4, 2.0, complex(0.1, -2.0)])
    def test_tilted_exponents_match(self, tempered_cgmy, u1, u3):
        spec = EsscherSpec(tempered_cgmy, zeta=-0.5, lam=0.5)
        tilted = esscher_transform(tempered_cgmy, spec)
        lam_shift, psi_shift = tilted_exponents(tempered_cgmy, spec, u1, u3)
        assert abs(tilted.lam(u1, u3) - lam_shift) <= 1e-10 * max(1.0, abs(lam_shift))
        assert abs(tilted.psi(u1) - psi_shift) <= 1e-10 * max(1.0, abs(psi_shift))

    def test_tilted_exponents_match_with_correlation(self):
        model = make_cir(rho=-0.7)
        spec = EsscherSpec(model, zeta=0.8, lam=-0.3)
        tilted = esscher_transform(model, spec)
        for u1, u3 in [(-2.0, 1.0), (0.5, -0.5), (1.5, 2.5)]:
            lam_shift, psi_shift = tilted_exponents(model, spec, u1, u3)
            assert tilted.lam(u1, u3) == pytest.approx(lam_shift, rel=1e-12, abs=1e-13)
            assert tilted.psi(u1) == pytest.approx(psi_shift, rel=1e-12, abs=1e-13)

    def test_stable_becomes_tempered(self, alpha_cir):
        theta = 1.3
        tilted = esscher_transform(alpha_cir, EsscherSpec(alpha_cir, zeta=-theta))
        pi = tilted.branching.pi
        assert isinstance(pi, TemperedStablePositive)
        assert pi.theta == theta
        original = alpha_cir.branching.pi
        assert pi.c_alpha == pytest.approx(original.c_alpha * original.eta ** original.alpha, rel=1e-15)
        for x in (0.01, 0.5, 3.0):
            assert pi.density(x) == pytest.approx(math.exp(-theta * x) * original.density(x), rel=1e-13)

    def test_tempered_at_theta_becomes_stable(self):
        model = CBITCLModel(
            x0=0.04,
            immigration=ImmigrationMechanism(0.08),
            branching=BranchingMechanism(2.0, 0.3, TemperedStablePositive(1.5, 2.0)),
            noise=gbm_noise(),
        )
        tilted = esscher_transform(model, EsscherSpec(model, zeta=2.0))
        assert isinstance(tilted.branching.pi, StablePositive)
        assert tilted.branching.pi.density(0.7) == pytest.approx(model.branching.pi.density(0.7) * math.exp(1.4))

    def test_cgmy_parameters_shift(self, tempered_cgmy):
        tilted = esscher_transform(tempered_cgmy, EsscherSpec(tempered_cgmy, lam=1.0))
        gamma = tilted.noise.gamma
        assert (gamma.g, gamma.m, gamma.y) == (5.0, 2.0, 1.5)
        assert gamma.c == tempered_cgmy.noise.gamma.c

    def test_cgmy_closure_fails_at_m(self, tempered_cgmy):
        with pytest.raises(FamilyClosureError):
            esscher_transform(tempered_cgmy, EsscherSpec(tempered_cgmy, lam=3.0))

    def test_small_jump_correction_matches_quadrature(self):
        gamma = CGMY(g=4.0, m=3.0, y=1.5)
        for lam in (-2.0, 0.5, 2.5):
            def integrand(z):
                return z * math.expm1(lam * z) * gamma.density(z)

            left, _ = integrate.quad(integrand, -1.0, 0.0, epsabs=1e-13, epsrel=1e-11, limit=200)
            right, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=200)
            assert small_jump_tilt_correction(gamma, lam) == pytest.approx(left + right, rel=1e-8)

    def test_small_jump_correction_without_jumps(self):
        assert small_jump_tilt_correction(None, 0.7) == 0.0

    @pytest.mark.parametrize(
        "fixture, first, second",
        [
            ("tempered_cgmy", (-0.3, 0.2), (-0.2, 0.3)),
            ("heston", (0.5, -0.4), (0.3, 0.9)),
            ("alpha_cir", (-0.4, 0.0), (-0.6, 0.5)),
        ],
    )
    def test_tilts_compose(self, fixture, first, second, request):
        model = request.getfixturevalue(fixture)
        once = esscher_transform(model, EsscherSpec(model, first[0] + second[0], first[1] + second[1]))
        step = esscher_transform(model, EsscherSpec(model, *first))
        twice = esscher_transform(step, EsscherSpec(step, *second))
        expected, actual = flat_parameters(once), flat_parameters(twice)
        assert actual.keys() == expected.keys()
        for key, value in expected.items():
            assert actual[key] == pytest.approx(value, rel=1e-9, abs=1e-12), key


# ═══════════════════════════════════════════════════════════════════════════
# Martingale criterion
# ═══════════════════════════════════════════════════════════════════════════

class TestMartingale:
    def test_gbm_drift(self):
        assert martingale_drift(NoiseExponent(0.0, 1.0)) == -0.5

    def test_cgmy_drift_zeroes_xi_at_one(self, tempered_cgmy):
        assert abs(tempered_cgmy.xi(1.0)) < 1e-14

    def test_drift_requires_one_in_domain(self):
        with pytest.raises(DomainError):
            martingale_drift(NoiseExponent(0.0, 0.0, CGMY(g=4.0, m=0.5, y=1.5)))

    def test_exact_martingale(self, heston):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert is_exp_martingale(heston)

    def test_not_a_martingale(self):
        model = CBITCLModel(x0=0.04, noise=NoiseExponent(0.1, 1.0))
        assert not is_exp_martingale(model)

    def test_one_outside_domain(self):
        model = CBITCLModel(x0=0.04, noise=NoiseExponent(0.0, 0.0, CGMY(g=4.0, m=0.5, y=1.5)))
        assert not is_exp_martingale(model)

    def test_tolerance_warning(self):
        model = CBITCLModel(x0=0.04, noise=NoiseExponent(-0.5 - 1e-15, 1.0))
        with pytest.warns(MartingaleToleranceWarning):
            assert is_exp_martingale(model)
