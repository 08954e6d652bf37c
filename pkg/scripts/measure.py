# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Esscher-type changes of probability.

For W_t = ζ(X_t − X0) + λZ_t the exponential compensator is

    K_t = tΨ(ζ) + Y_t (Φ(ζ) + ζλρσ_Xσ_Z + Ξ(λ))

and dP′/dP = e^{W_T − K_T} turns a CBITCL model into another CBITCL model
whose parameters are given in closed form by `esscher_transform`. Tilts that
would leave the supported jump families are refused.

Usage:
    from measure import EsscherSpec, esscher_transform

    spec = EsscherSpec(model, zeta=-0.5, lam=0.5)
    tilted = esscher_transform(model, spec)
"""

import logging
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from errors import DomainError, FamilyClosureError, MartingaleToleranceWarning, PreconditionError
from mechanisms import (
    CGMY,
    BranchingMechanism,
    CBITCLModel,
    ImmigrationMechanism,
    NoiseExponent,
    PositiveFamily,
    Scalar,
    StablePositive,
    TemperedStablePositive,
    check_assumption_lipschitz,
    tail_power_integral,
)

logger = logging.getLogger(__name__)

MARTINGALE_TOL = 1e-14


@dataclass(frozen=True)
class EsscherSpec:
    """Tilt (ζ, λ) attached to the model it is valid for.

    Ψ(ζ) and c are read from the model on each access.
    """

    model: CBITCLModel
    zeta: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "zeta", float(self.zeta))
        object.__setattr__(self, "lam", float(self.lam))
        info = self.model.domain_info()
        if not info.in_dx(self.zeta):
            raise DomainError(f"zeta={self.zeta} is outside D_X (upper {info.dx_upper})")
        if not info.in_dz(self.lam):
            raise DomainError(f"lambda={self.lam} is outside D_Z [{info.dz_lower}, {info.dz_upper}]")

    @property
    def psi_zeta(self) -> float:
        return float(self.model.psi(self.zeta))

    @property
    def drift(self) -> float:
        """c = Φ(ζ) + ζλρσ_Xσ_Z + Ξ(λ)."""
        m = self.model
        return float(m.phi(self.zeta)) + self.zeta * self.lam * m.cross + float(m.xi(self.lam))

    @property
    def is_identity(self) -> bool:
        return self.zeta == 0.0 and self.lam == 0.0


def _spec_for(model: CBITCLModel, spec: EsscherSpec) -> EsscherSpec:
    if spec.model is model or spec.model == model:
        return spec
    return EsscherSpec(model, spec.zeta, spec.lam)


def exponential_compensator(model: CBITCLModel, spec: EsscherSpec, t, y):
    """K_t = tΨ(ζ) + Y_t c. Accepts scalars or arrays for t and y."""
    spec = _spec_for(model, spec)
    if np.any(np.asarray(t) < 0.0) or np.any(np.asarray(y) < 0.0):
        raise DomainError("exponential_compensator: t and y must be >= 0")
    return t * spec.psi_zeta + y * spec.drift


def esscher_density(model: CBITCLModel, spec: EsscherSpec, T: float, x_T, y_T, z_T):
    """e^{W_T − K_T} evaluated on terminal states (scalars or arrays)."""
    spec = _spec_for(model, spec)
    w = spec.zeta * (np.asarray(x_T) - model.x0) + spec.lam * np.asarray(z_T)
    return np.exp(w - exponential_compensator(model, spec, T, np.asarray(y_T)))


# =============================================================================
# Parameter map
# =============================================================================

def _tilt_positive(family: Optional[PositiveFamily], zeta: float, role: str) -> Optional[PositiveFamily]:
    """e^{ζx} μ(dx) for a one-sided family."""
    if family is None or zeta == 0.0:
        return family
    if isinstance(family, TemperedStablePositive):
        if zeta < family.theta:
            return TemperedStablePositive(family.alpha, family.theta - zeta, family.c_alpha)
        if zeta == family.theta:
            return StablePositive(family.alpha, 1.0, family.c_alpha)
        raise FamilyClosureError(f"{role}: zeta={zeta} exceeds the tempering θ={family.theta}")
    if family.eta == 0.0:
        return family
    if zeta < 0.0:
        return TemperedStablePositive(family.alpha, -zeta, family.density_scale)
    raise FamilyClosureError(f"{role}: a stable measure admits no tilt with zeta={zeta} > 0")


def _tilt_cgmy(gamma: Optional[CGMY], lam: float) -> Optional[CGMY]:
    if gamma is None or lam == 0.0:
        return gamma
    if not -gamma.g < lam < gamma.m:
        raise FamilyClosureError(
            f"noise: lambda={lam} must lie strictly inside (−G, M)=({-gamma.g}, {gamma.m})"
        )
    return CGMY(gamma.c, gamma.g + lam, gamma.m - lam, gamma.y)


def small_jump_tilt_correction(gamma: Optional[CGMY], lam: float) -> float:
    """∫_{|z|<1} z(e^{λz} − 1) γ(dz) for −G < λ < M.

    The full integral is the derivative of the compensated exponent; the
    |z| ≥ 1 part reduces to upper incomplete gamma functions.
    """
    if gamma is None or lam == 0.0:
        return 0.0
    c, g, m, y = gamma.c, gamma.g, gamma.m, gamma.y
    full = gamma.compensated_exponent_prime(lam)
    big_positive = c * (tail_power_integral(y, m - lam) - tail_power_integral(y, m))
    big_negative = -c * (tail_power_integral(y, g + lam) - tail_power_integral(y, g))
    return float(full - big_positive - big_negative)


def esscher_transform(model: CBITCLModel, spec: EsscherSpec) -> CBITCLModel:
    """The model under dP′/dP = e^{W_T − K_T}.

    Raises:
        FamilyClosureError: a tilted measure leaves its parametric family
        PreconditionError: the Lipschitz assumption fails
    """
    spec = _spec_for(model, spec)
    if not check_assumption_lipschitz(model):
        raise PreconditionError("esscher_transform: ∫₁^∞ x e^{(ψ∧φ)x} π(dx) diverges")
    if spec.is_identity:
        return model
    zeta, lam = spec.zeta, spec.lam
    br, im, no = model.branching, model.immigration, model.noise

    # Closure is checked before any parameter is computed.
    nu_t = _tilt_positive(im.nu, zeta, "immigration")
    pi_t = _tilt_positive(br.pi, zeta, "branching")
    gamma_t = _tilt_cgmy(no.gamma, lam)

    b_x = br.b
    if zeta != 0.0:
        b_x = b_x - zeta * br.sigma ** 2 - float(br.jump_part_prime(zeta))
    if lam != 0.0:
        b_x = b_x - lam * model.cross

    b_z = no.b
    if zeta != 0.0:
        b_z = b_z + zeta * model.cross
    if lam != 0.0:
        b_z = b_z + lam * no.sigma ** 2 + small_jump_tilt_correction(no.gamma, lam)

    tilted = replace(
        model,
        immigration=ImmigrationMechanism(im.beta, nu_t),
        branching=BranchingMechanism(b_x, br.sigma, pi_t),
        noise=NoiseExponent(b_z, no.sigma, gamma_t),
    )
    logger.debug("esscher (%s, %s): b_X %s -> %s, b_Z %s -> %s", zeta, lam, br.b, b_x, no.b, b_z)
    return tilted


def tilted_exponents(model: CBITCLModel, spec: EsscherSpec, u1: Scalar, u3: Scalar) -> Tuple[Scalar, Scalar]:
    """(Λ(ζ + u1, λ + u3) − Λ(ζ, λ), Ψ(ζ + u1) − Ψ(ζ)).

    These equal the transformed model's Λ(u1, u3) and Ψ(u1).
    """
    spec = _spec_for(model, spec)
    zeta, lam = spec.zeta, spec.lam
    lam_shift = model.lam(zeta + u1, lam + u3) - model.lam(zeta, lam)
    psi_shift = model.psi(zeta + u1) - model.psi(zeta)
    return lam_shift, psi_shift


# =============================================================================
# Martingale criterion
# =============================================================================

def martingale_drift(noise: NoiseExponent) -> float:
    """The b_Z for which Ξ(1) = 0."""
    if noise.upper < 1.0:
        raise DomainError(f"martingale_drift: 1 ∉ D_Z (M={noise.upper})")
    return -(0.5 * noise.sigma ** 2 + float(noise.jump_part(1.0)))


def is_exp_martingale(model: CBITCLModel) -> bool:
    """Whether exp(Z) is a martingale: 1 ∈ D_Z and Ξ(1) = 0."""
    if not check_assumption_lipschitz(model):
        return False
    if not model.domain_info().in_dz(1.0):
        return False
    value = float(model.xi(1.0))
    if value == 0.0:
        return True
    if abs(value) < MARTINGALE_TOL:
        warnings.warn(
            f"Ξ(1)={value:.3e} is zero only up to floating-point tolerance",
            MartingaleToleranceWarning,
            stacklevel=2,
        )
        return True
    return False
