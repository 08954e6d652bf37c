# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Parametric mechanism families of a CBITCL model.

A model CBITCL(X0, Ψ, Φ, Ξ, ρ) is assembled from

    Ψ(u) = βu + ∫(e^{ux} − 1) ν(dx)                        immigration
    Φ(u) = −b_X u + σ_X²u²/2 + ∫(e^{ux} − 1 − ux) π(dx)     branching
    Ξ(u) = b_Z u + σ_Z²u²/2 + ∫(e^{uz} − 1 − uz1_{|z|<1}) γ(dz)   noise

and the correlation ρ between the Brownian parts of X and Z. Lévy measures
are closed-form parametric families only:

    StablePositive          C η^α x^{−1−α} on (0, ∞)
    TemperedStablePositive  C e^{−θx} x^{−1−α} on (0, ∞)
    CGMY                    C e^{−M z} z^{−1−Y} (z > 0), C e^{−G|z|} |z|^{−1−Y} (z < 0)

The one-sided families take α ∈ (1, 2) as the branching measure π and
α ∈ (0, 1) as the immigration measure ν (which needs ∫₀¹ x ν(dx) < ∞).

Every exponent accepts real or complex arguments. Real input returns a float;
complex input returns a complex number computed with principal-branch powers.

Usage:
    from mechanisms import CBITCLModel, ImmigrationMechanism, ...

    model = CBITCLModel(x0=0.04, immigration=..., branching=..., noise=..., rho=-0.5)
    model.lam(-1.0, 0.5)
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import special

from errors import ConfigError, DomainError, EndpointDerivativeUnavailable

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]

INF = math.inf


# =============================================================================
# Special functions
# =============================================================================

@lru_cache(maxsize=256)
def neg_gamma(alpha: float) -> float:
    """Γ(−α) for α ∈ (0, 1) ∪ (1, 2) via the recurrence Γ(s + 1) = sΓ(s)."""
    if 1.0 < alpha < 2.0:
        return special.gamma(2.0 - alpha) / ((-alpha) * (1.0 - alpha))
    if 0.0 < alpha < 1.0:
        return special.gamma(1.0 - alpha) / (-alpha)
    raise DomainError(f"Γ(−α) requested for unsupported α={alpha}")


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Non-normalized Γ(s, x) = ∫_x^∞ t^{s−1}e^{−t}dt for s > −2, x > 0.

    scipy only covers s > 0, so negative orders are lowered by
    Γ(s, x) = (Γ(s + 1, x) − x^s e^{−x}) / s.
    """
    if x <= 0.0:
        if s > 0.0:
            return float(special.gamma(s))
        return INF
    if s > 0.0:
        return float(special.gammaincc(s, x) * special.gamma(s))
    if s == 0.0:
        return float(special.exp1(x))
    return (upper_incomplete_gamma(s + 1.0, x) - x ** s * math.exp(-x)) / s


def lower_incomplete_gamma(s: float, x: float) -> float:
    """Non-normalized γ(s, x) = ∫_0^x t^{s−1}e^{−t}dt for s > 0."""
    if x <= 0.0:
        return 0.0
    return float(special.gammainc(s, x) * special.gamma(s))


def _scalar(u) -> Scalar:
    if isinstance(u, (complex, np.complexfloating)):
        return complex(u)
    return float(u)


def _check_upper(u: Scalar, upper: float, closed: bool, what: str) -> None:
    re = u.real
    if math.isnan(re):
        raise DomainError(f"{what}: argument is NaN")
    if re > upper or (re == upper and not closed):
        bracket = "]" if closed else ")"
        raise DomainError(
            f"{what}: Re(u)={re} outside the effective domain (−∞, {upper}{bracket}"
        )


# =============================================================================
# Lévy measure families
# =============================================================================

def _default_constant(alpha: float) -> float:
    return 1.0 / abs(neg_gamma(alpha))


def _check_alpha(alpha: float, name: str) -> None:
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise ConfigError(f"{name}: alpha={alpha} must lie in (0, 1) or (1, 2)", location="alpha")


@dataclass(frozen=True)
class StablePositive:
    """One-sided α-stable measure C η^α x^{−1−α} dx on (0, ∞)."""

    alpha: float
    eta: float = 1.0
    c_alpha: Optional[float] = None

    family = "stable"

    def __post_init__(self):
        _check_alpha(self.alpha, "StablePositive")
        if self.eta < 0.0:
            raise ConfigError(f"StablePositive: eta={self.eta} must be >= 0", location="eta")
        if self.c_alpha is None:
            object.__setattr__(self, "c_alpha", _default_constant(self.alpha))
        elif self.c_alpha <= 0.0:
            raise ConfigError(f"StablePositive: c_alpha={self.c_alpha} must be > 0", location="c_alpha")

    @property
    def compensated(self) -> bool:
        return self.alpha > 1.0

    @property
    def density_scale(self) -> float:
        return self.c_alpha * self.eta ** self.alpha

    @property
    def upper(self) -> float:
        return 0.0

    def density(self, x: float) -> float:
        return self.density_scale * x ** (-1.0 - self.alpha) if x > 0.0 else 0.0

    def kernel(self, u: Scalar) -> Scalar:
        # C Γ(−α)(−ηu)^α
        return self.c_alpha * neg_gamma(self.alpha) * (-self.eta * u) ** self.alpha

    def kernel_prime(self, u: Scalar) -> Scalar:
        if u == 0 and self.alpha < 1.0:
            return INF
        return -self.eta * self.alpha * self.c_alpha * neg_gamma(self.alpha) * (
            (-self.eta * u) ** (self.alpha - 1.0)
        )


@dataclass(frozen=True)
class TemperedStablePositive:
    """Tempered one-sided stable measure C e^{−θx} x^{−1−α} dx on (0, ∞)."""

    alpha: float
    theta: float
    c_alpha: Optional[float] = None

    family = "tempered_stable"

    def __post_init__(self):
        _check_alpha(self.alpha, "TemperedStablePositive")
        if not self.theta > 0.0:
            raise ConfigError(f"TemperedStablePositive: theta={self.theta} must be > 0", location="theta")
        if self.c_alpha is None:
            object.__setattr__(self, "c_alpha", _default_constant(self.alpha))
        elif self.c_alpha <= 0.0:
            raise ConfigError(
                f"TemperedStablePositive: c_alpha={self.c_alpha} must be > 0", location="c_alpha"
            )

    @property
    def compensated(self) -> bool:
        return self.alpha > 1.0

    @property
    def density_scale(self) -> float:
        return self.c_alpha

    @property
    def upper(self) -> float:
        return self.theta

    def density(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return self.c_alpha * math.exp(-self.theta * x) * x ** (-1.0 - self.alpha)

    def kernel(self, u: Scalar) -> Scalar:
        # C Γ(−α)((θ − u)^α − θ^α)
        a, th = self.alpha, self.theta
        return self.c_alpha * neg_gamma(a) * ((th - u) ** a - th ** a)

    def kernel_prime(self, u: Scalar) -> Scalar:
        a, th = self.alpha, self.theta
        if u == th and a < 1.0:
            return INF
        return -a * self.c_alpha * neg_gamma(a) * (th - u) ** (a - 1.0)


@dataclass(frozen=True)
class CGMY:
    """Two-sided CGMY measure with Y ∈ (1, 2); default C = 1/Γ(−Y)."""

    c: Optional[float] = None
    g: float = 1.0
    m: float = 1.0
    y: float = 1.5

    family = "cgmy"

    def __post_init__(self):
        if not (1.0 < self.y < 2.0):
            raise ConfigError(f"CGMY: Y={self.y} must lie in (1, 2)", location="y")
        if not self.g > 0.0:
            raise ConfigError(f"CGMY: G={self.g} must be > 0", location="g")
        if not self.m > 0.0:
            raise ConfigError(f"CGMY: M={self.m} must be > 0", location="m")
        if self.c is None:
            object.__setattr__(self, "c", 1.0 / neg_gamma(self.y))
        elif self.c <= 0.0:
            raise ConfigError(f"CGMY: C={self.c} must be > 0", location="c")

    def density(self, z: float) -> float:
        if z > 0.0:
            return self.c * math.exp(-self.m * z) * z ** (-1.0 - self.y)
        if z < 0.0:
            return self.c * math.exp(-self.g * -z) * (-z) ** (-1.0 - self.y)
        return 0.0

    def compensated_exponent(self, u: Scalar) -> Scalar:
        """∫(e^{uz} − 1 − uz) γ(dz)."""
        c, g, m, y = self.c, self.g, self.m, self.y
        return c * neg_gamma(y) * (
            (m - u) ** y - m ** y + (g + u) ** y - g ** y + u * y * (m ** (y - 1.0) - g ** (y - 1.0))
        )

    def compensated_exponent_prime(self, u: Scalar) -> Scalar:
        """∫z(e^{uz} − 1) γ(dz)."""
        c, g, m, y = self.c, self.g, self.m, self.y
        return c * neg_gamma(y) * y * (
            -((m - u) ** (y - 1.0)) + (g + u) ** (y - 1.0) + m ** (y - 1.0) - g ** (y - 1.0)
        )

    def big_jump_mean(self) -> float:
        """∫_{|z|≥1} z γ(dz)."""
        return self.c * (tail_power_integral(self.y, self.m) - tail_power_integral(self.y, self.g))


def tail_power_integral(y: float, k: float) -> float:
    """∫_1^∞ z^{−y} e^{−kz} dz = k^{y−1} Γ(1 − y, k), k > 0."""
    return k ** (y - 1.0) * upper_incomplete_gamma(1.0 - y, k)


PositiveFamily = Union[StablePositive, TemperedStablePositive]
LevyMeasureSpec = Union[None, StablePositive, TemperedStablePositive, CGMY]


# =============================================================================
# Mechanisms
# =============================================================================

@dataclass(frozen=True)
class ImmigrationMechanism:
    """Ψ(u) = βu + ∫(e^{ux} − 1) ν(dx)."""

    beta: float = 0.0
    nu: Optional[PositiveFamily] = None

    def __post_init__(self):
        if self.beta < 0.0:
            raise ConfigError(f"immigration: beta={self.beta} must be >= 0", location="immigration.beta")
        if self.nu is not None:
            if not isinstance(self.nu, (StablePositive, TemperedStablePositive)):
                raise ConfigError("immigration: nu must be a one-sided family", location="immigration.nu")
            if self.nu.alpha >= 1.0:
                raise ConfigError(
                    f"immigration: nu.alpha={self.nu.alpha} must lie in (0, 1) for ∫₀¹ x ν(dx) < ∞",
                    location="immigration.nu.alpha",
                )

    @property
    def upper(self) -> float:
        return INF if self.nu is None else self.nu.upper

    def psi(self, u) -> Scalar:
        u = _scalar(u)
        _check_upper(u, self.upper, True, "Ψ")
        value = self.beta * u
        if self.nu is not None:
            value = value + self.nu.kernel(u)
        return value

    def psi_prime(self, u) -> float:
        u = _scalar(u)
        _check_upper(u, self.upper, True, "Ψ′")
        value = self.beta
        if self.nu is not None:
            jump = self.nu.kernel_prime(u)
            if jump == INF:
                raise EndpointDerivativeUnavailable(
                    f"Ψ′: ∫x e^{{ux}} ν(dx) diverges at u={u}"
                )
            value = value + jump
        return value


@dataclass(frozen=True)
class BranchingMechanism:
    """Φ(u) = −b_X u + σ_X²u²/2 + ∫(e^{ux} − 1 − ux) π(dx)."""

    b: float = 0.0
    sigma: float = 0.0
    pi: Optional[PositiveFamily] = None

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ConfigError(f"branching: sigma={self.sigma} must be >= 0", location="branching.sigma")
        if self.pi is not None:
            if not isinstance(self.pi, (StablePositive, TemperedStablePositive)):
                raise ConfigError("branching: pi must be a one-sided family", location="branching.pi")
            if self.pi.alpha <= 1.0:
                raise ConfigError(
                    f"branching: pi.alpha={self.pi.alpha} must lie in (1, 2)",
                    location="branching.pi.alpha",
                )

    @property
    def upper(self) -> float:
        return INF if self.pi is None else self.pi.upper

    def jump_part(self, u: Scalar) -> Scalar:
        """∫(e^{ux} − 1 − ux) π(dx), without the domain check."""
        if self.pi is None:
            return 0.0
        return self.pi.kernel(u) - u * self.pi.kernel_prime(0.0)

    def jump_part_prime(self, u: Scalar) -> Scalar:
        """∫x(e^{ux} − 1) π(dx), without the domain check."""
        if self.pi is None:
            return 0.0
        return self.pi.kernel_prime(u) - self.pi.kernel_prime(0.0)

    def phi(self, u) -> Scalar:
        u = _scalar(u)
        _check_upper(u, self.upper, True, "Φ")
        return -self.b * u + 0.5 * self.sigma ** 2 * u * u + self.jump_part(u)

    def phi_prime(self, u) -> Scalar:
        u = _scalar(u)
        _check_upper(u, self.upper, True, "Φ′")
        return -self.b + self.sigma ** 2 * u + self.jump_part_prime(u)


@dataclass(frozen=True)
class NoiseExponent:
    """Ξ(u) = b_Z u + σ_Z²u²/2 + ∫(e^{uz} − 1 − uz1_{|z|<1}) γ(dz)."""

    b: float = 0.0
    sigma: float = 0.0
    gamma: Optional[CGMY] = None

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ConfigError(f"noise: sigma={self.sigma} must be >= 0", location="noise.sigma")
        if self.gamma is not None and not isinstance(self.gamma, CGMY):
            raise ConfigError("noise: gamma must be CGMY or none", location="noise.gamma")

    @property
    def lower(self) -> float:
        return -INF if self.gamma is None else -self.gamma.g

    @property
    def upper(self) -> float:
        return INF if self.gamma is None else self.gamma.m

    def check(self, u: Scalar, what: str = "Ξ") -> None:
        if math.isnan(u.real):
            raise DomainError(f"{what}: argument is NaN")
        if u.real < self.lower or u.real > self.upper:
            raise DomainError(
                f"{what}: Re(u)={u.real} outside D_Z=[{self.lower}, {self.upper}]"
            )

    def jump_part(self, u: Scalar) -> Scalar:
        """∫(e^{uz} − 1 − uz1_{|z|<1}) γ(dz)."""
        if self.gamma is None:
            return 0.0
        return self.gamma.compensated_exponent(u) + u * self.gamma.big_jump_mean()

    def xi(self, u) -> Scalar:
        u = _scalar(u)
        self.check(u)
        return self.b * u + 0.5 * self.sigma ** 2 * u * u + self.jump_part(u)

    def xi_prime(self, u) -> Scalar:
        u = _scalar(u)
        self.check(u, "Ξ′")
        value = self.b + self.sigma ** 2 * u
        if self.gamma is not None:
            value = value + self.gamma.compensated_exponent_prime(u) + self.gamma.big_jump_mean()
        return value


# =============================================================================
# Model and domains
# =============================================================================

@dataclass(frozen=True)
class DomainInfo:
    """Effective domains: D_X = (−∞, ψ∧φ], D_Z = [lower, upper]."""

    psi: float
    phi: float
    dx_upper: float
    dx_closed: bool
    dz_lower: float
    dz_upper: float
    dz_lower_closed: bool
    dz_upper_closed: bool

    def in_dx(self, u: float) -> bool:
        return u < self.dx_upper or (u == self.dx_upper and self.dx_closed)

    def in_dz(self, u: float) -> bool:
        lower_ok = u > self.dz_lower or (u == self.dz_lower and self.dz_lower_closed)
        upper_ok = u < self.dz_upper or (u == self.dz_upper and self.dz_upper_closed)
        return lower_ok and upper_ok

    def to_dict(self) -> dict:
        return {
            "psi": self.psi,
            "phi": self.phi,
            "D_X": {"upper": self.dx_upper, "closed": self.dx_closed},
            "D_Z": {
                "lower": self.dz_lower,
                "upper": self.dz_upper,
                "lower_closed": self.dz_lower_closed,
                "upper_closed": self.dz_upper_closed,
            },
        }


@dataclass(frozen=True)
class CBITCLModel:
    """CBITCL(X0, Ψ, Φ, Ξ, ρ)."""

    x0: float
    immigration: ImmigrationMechanism = field(default_factory=ImmigrationMechanism)
    branching: BranchingMechanism = field(default_factory=BranchingMechanism)
    noise: NoiseExponent = field(default_factory=NoiseExponent)
    rho: float = 0.0

    def __post_init__(self):
        if self.x0 < 0.0:
            raise ConfigError(f"initial_state: x0={self.x0} must be >= 0", location="initial_state.x0")
        if not -1.0 <= self.rho <= 1.0:
            raise ConfigError(f"correlation: rho={self.rho} must lie in [−1, 1]", location="correlation.rho")

    @property
    def cross(self) -> float:
        """ρσ_Xσ_Z."""
        return self.rho * self.branching.sigma * self.noise.sigma

    def psi(self, u) -> Scalar:
        return self.immigration.psi(u)

    def phi(self, u) -> Scalar:
        return self.branching.phi(u)

    def phi_prime(self, u) -> Scalar:
        return self.branching.phi_prime(u)

    def xi(self, u) -> Scalar:
        return self.noise.xi(u)

    def lam(self, u1, u2) -> Scalar:
        """Λ(u1, u2) = Φ(u1) + ρσ_Xσ_Z u1u2 + Ξ(u2)."""
        u1, u2 = _scalar(u1), _scalar(u2)
        return self.phi(u1) + self.cross * u1 * u2 + self.xi(u2)

    def domain_info(self) -> DomainInfo:
        return domain_info(self)

    def check_x(self, u: Scalar, what: str = "D_X") -> None:
        """Raise unless Re(u) ∈ D_X."""
        info = self.domain_info()
        _check_upper(_scalar(u), info.dx_upper, info.dx_closed, what)

    def check_z(self, u: Scalar, what: str = "D_Z") -> None:
        self.noise.check(_scalar(u), what)


# =============================================================================
# Module-level operations
# =============================================================================

def eval_psi(mech: ImmigrationMechanism, u) -> Scalar:
    return mech.psi(u)


def eval_phi(mech: BranchingMechanism, u) -> Scalar:
    return mech.phi(u)


def eval_phi_prime(mech: BranchingMechanism, u) -> Scalar:
    return mech.phi_prime(u)


def eval_xi(mech: NoiseExponent, u) -> Scalar:
    return mech.xi(u)


def eval_lambda(model: CBITCLModel, u1, u2) -> Scalar:
    return model.lam(u1, u2)


def domain_info(model: CBITCLModel) -> DomainInfo:
    """Closed-form effective domains of a model."""
    psi = model.immigration.upper
    phi = model.branching.upper
    dx_upper = min(psi, phi)
    # Every finite endpoint of the supported families is attained.
    dx_closed = dx_upper < INF
    gamma = model.noise.gamma
    return DomainInfo(
        psi=psi,
        phi=phi,
        dx_upper=dx_upper,
        dx_closed=dx_closed,
        dz_lower=-INF if gamma is None else -gamma.g,
        dz_upper=INF if gamma is None else gamma.m,
        dz_lower_closed=gamma is not None,
        dz_upper_closed=gamma is not None,
    )


def check_assumption_lipschitz(model: CBITCLModel) -> bool:
    """Whether ∫₁^∞ x e^{(ψ∧φ)x} π(dx) < ∞.

    Tempered families cancel the exponential exactly at θ and leave
    x^{−α}, stable families have ψ∧φ = 0 with a finite first moment
    of the big jumps. Both are integrable for α ∈ (1, 2).
    """
    info = model.domain_info()
    if info.dx_upper == INF or model.branching.pi is None:
        return True
    pi = model.branching.pi
    if isinstance(pi, StablePositive):
        return pi.alpha > 1.0
    return info.dx_upper <= pi.theta and pi.alpha > 1.0
