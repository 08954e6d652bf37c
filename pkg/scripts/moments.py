# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Exponential moments of (X, Y, Z): lifetimes, long-run limits and wings.

For a real triple (u1, u2, u3) let

    g(x) = Φ(x) + u2 + ρσ_Xσ_Z u3 x + Ξ(u3),   x ∈ D_X = (−∞, ψ∧φ]

g is convex. With χ = sup{x ∈ D_X : g(x) ≤ 0} (−∞ for an empty set) the
lifetime of E[exp(u1 X_T + u2 Y_T + u3 Z_T)] is

    +∞                              if u1 ≤ χ
    ∫_{u1}^{ψ∧φ} dx / g(x)          otherwise

Usage:
    from moments import chi, lifetime, xi_asymptotic, wing_slopes

    lifetime(model, 0.0, 0.0, 1.01).value
    wing_slopes(model, zeta=0.0, lam=1.0, T=1.0)
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

from scipy import integrate, optimize

from errors import DomainError, NonconvergenceError, NotInX, PreconditionError, QuadratureError
from mechanisms import INF, CBITCLModel

logger = logging.getLogger(__name__)

CHI_XTOL = 1e-12
MAX_BRACKET_WIDTH = 1e12
LIFETIME_EPSREL = 1e-9
MOMENT_CAP = 1e6
MOMENT_XTOL = 1e-12


class LifetimeClass(str, Enum):
    BELOW_CHI = "BelowChi"
    ABOVE_CHI = "AboveChi"


@dataclass(frozen=True)
class LifetimeResult:
    """Lifetime of one exponential moment and the χ it was classified by."""

    value: float
    classification: LifetimeClass
    chi: float

    @property
    def is_infinite(self) -> bool:
        return self.value == INF

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {"value": self.value, "classification": self.classification.value, "chi": self.chi}


@dataclass(frozen=True)
class AsymptoticResult:
    """ξ(u) = lim V(t, 0, 0, u) and the cumulant rate Ψ(ξ(u))."""

    xi: float
    cumulant: float

    def to_dict(self) -> Dict[str, Any]:
        return {"xi": self.xi, "cumulant": self.cumulant}


@dataclass(frozen=True)
class LongRunCumulant:
    rate: float
    solver_rate: Optional[float] = None
    horizon: Optional[float] = None


@dataclass(frozen=True)
class WingSlopes:
    """Limiting slopes of implied variance σ²(T, k)/|k| in log-strike."""

    left: float
    right: float
    p_plus: float
    q_plus: float

    def to_dict(self) -> Dict[str, Any]:
        return {"left": self.left, "right": self.right, "p_plus": self.p_plus, "q_plus": self.q_plus}


# =============================================================================
# Riccati right-hand side at real arguments
# =============================================================================

def _rhs(model: CBITCLModel, u2: float, u3: float) -> Tuple[Callable, Callable]:
    """g(x) and g′(x) for fixed (u2, u3)."""
    shift = u2 + model.xi(u3)
    slope = model.cross * u3
    branching = model.branching

    def g(x: float) -> float:
        return branching.phi(x) + slope * x + shift

    def g_prime(x: float) -> float:
        return branching.phi_prime(x) + slope

    return g, g_prime


def _quadratic_coefficients(model: CBITCLModel, u2: float, u3: float) -> Tuple[float, float, float]:
    """g(x) = a x² + s x + c for a jump-free branching mechanism."""
    a = 0.5 * model.branching.sigma ** 2
    s = -model.branching.b + model.cross * u3
    c = u2 + model.xi(u3)
    return a, s, c


def _root(f: Callable, a: float, b: float, **kwargs) -> float:
    """brentq on [a, b]; scipy bracket and iteration failures become NonconvergenceError."""
    try:
        return optimize.brentq(f, a, b, **kwargs)
    except (ValueError, RuntimeError) as e:
        raise NonconvergenceError(f"root search on [{a}, {b}] failed: {e}") from e


def _check_real(name: str, value: float) -> float:
    if isinstance(value, complex):
        raise DomainError(f"{name}={value}: lifetimes are defined for real arguments only")
    value = float(value)
    if math.isnan(value):
        raise DomainError(f"{name} is NaN")
    return value


# =============================================================================
# χ and lifetimes
# =============================================================================

def chi(model: CBITCLModel, u2: float, u3: float) -> float:
    """sup{x ∈ D_X : Φ(x) + u2 + ρσ_Xσ_Z u3 x + Ξ(u3) ≤ 0}, −∞ if empty."""
    u2 = _check_real("u2", u2)
    u3 = _check_real("u3", u3)
    model.check_z(u3, "chi: u3")
    e = model.domain_info().dx_upper

    if e == INF:
        a, s, c = _quadratic_coefficients(model, u2, u3)
        if a == 0.0:
            if s > 0.0:
                return -c / s
            if s < 0.0:
                return INF
            return INF if c <= 0.0 else -INF
        disc = s * s - 4.0 * a * c
        if disc < 0.0:
            return -INF
        q = -0.5 * (s + math.copysign(math.sqrt(disc), s))
        roots = [q / a] + ([c / q] if q != 0.0 else [])
        return max(roots)

    g, g_prime = _rhs(model, u2, u3)
    if g(e) <= 0.0:
        return e
    if g_prime(e) <= 0.0:
        # g is nonincreasing to the left of e and positive at e.
        return -INF

    right, width = e, 1.0
    while width <= MAX_BRACKET_WIDTH:
        left = e - width
        g_left = g(left)
        if g_left <= 0.0:
            return _root(g, left, right, xtol=CHI_XTOL)
        if g_prime(left) <= 0.0:
            # Minimum of g lies in [left, right].
            res = optimize.minimize_scalar(
                g, bounds=(left, right), method="bounded", options={"xatol": CHI_XTOL}
            )
            if res.fun > 0.0:
                return -INF
            return _root(g, res.x, right, xtol=CHI_XTOL)
        right = left
        width *= 2.0
    return -INF


def lifetime(model: CBITCLModel, u1: float, u2: float, u3: float) -> LifetimeResult:
    """Explosion time of E[exp(u1 X_T + u2 Y_T + u3 Z_T)].

    Raises:
        DomainError: u1 ∉ D_X or u3 ∉ D_Z
        QuadratureError: the lifetime integral did not converge
    """
    u1 = _check_real("u1", u1)
    model.check_x(u1, "lifetime: u1")
    c = chi(model, u2, u3)
    if u1 <= c:
        return LifetimeResult(INF, LifetimeClass.BELOW_CHI, c)

    e = model.domain_info().dx_upper
    if u1 == e:
        return LifetimeResult(0.0, LifetimeClass.ABOVE_CHI, c)

    g, _ = _rhs(model, float(u2), float(u3))
    if e == INF:
        a, _, _ = _quadratic_coefficients(model, float(u2), float(u3))
        if a == 0.0:
            # Linear g: V grows at most exponentially and never explodes.
            return LifetimeResult(INF, LifetimeClass.BELOW_CHI, c)

        def integrand(s: float) -> float:
            one_minus = 1.0 - s
            if one_minus <= 0.0:
                return 1.0 / a
            x = u1 + s / one_minus
            return 1.0 / (g(x) * one_minus * one_minus)

        lo, hi = 0.0, 1.0
    else:
        def integrand(x: float) -> float:
            return 1.0 / g(x)

        lo, hi = u1, e

    out = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=LIFETIME_EPSREL, limit=500, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3 and abserr > 1e3 * LIFETIME_EPSREL * abs(value):
        raise QuadratureError(f"lifetime quadrature stalled: {out[3]} (estimate {value}, error {abserr})")
    logger.debug("lifetime(%s, %s, %s) = %.12g (chi=%.12g)", u1, u2, u3, value, c)
    return LifetimeResult(value, LifetimeClass.ABOVE_CHI, c)


def moment_domain_full(model: CBITCLModel, u2: float, u3: float) -> bool:
    """Whether every u1 ∈ D_X has infinite lifetime for this (u2, u3).

    Decided by the endpoint inequality g(ψ∧φ) ≤ 0, read as a limit when
    ψ∧φ = +∞.
    """
    u2 = _check_real("u2", u2)
    u3 = _check_real("u3", u3)
    model.check_z(u3, "moment_domain_full: u3")
    info = model.domain_info()
    nu = model.immigration.nu
    if nu is not None and info.psi <= info.phi:
        if not math.isfinite(nu.kernel(info.psi)):
            raise PreconditionError(f"immigration exponent is infinite at ψ={info.psi}")

    e = info.dx_upper
    if e == INF:
        a, s, c = _quadratic_coefficients(model, u2, u3)
        if a > 0.0:
            return False
        return s < 0.0 or (s == 0.0 and c <= 0.0)
    g, _ = _rhs(model, u2, u3)
    return bool(g(e) <= 0.0)


# =============================================================================
# Long-run behaviour
# =============================================================================

def xi_asymptotic(model: CBITCLModel, u: float) -> AsymptoticResult:
    """ξ(u): left root of Φ(x) + ρσ_Xσ_Z u x + Ξ(u) and the rate Ψ(ξ(u)).

    Raises:
        PreconditionError: b_X <= 0
        NotInX: χ(0, u) < 0
        NonconvergenceError: the root search failed
    """
    u = _check_real("u", u)
    model.check_z(u, "xi_asymptotic: u")
    if not model.branching.b > 0.0:
        raise PreconditionError(f"xi_asymptotic needs b_X > 0, got b_X={model.branching.b}")
    c = chi(model, 0.0, u)
    if c < 0.0:
        raise NotInX(f"u={u}: χ(u)={c} < 0, no long-run limit")

    xi_u = model.xi(u)
    if xi_u == 0.0:
        return AsymptoticResult(0.0, 0.0)

    h, _ = _rhs(model, 0.0, u)
    if xi_u < 0.0:
        # h(0) < 0: the root lies to the left of 0.
        inside, outside, width = 0.0, None, 1.0
        while width <= MAX_BRACKET_WIDTH:
            if h(-width) > 0.0:
                outside = -width
                break
            inside = -width
            width *= 2.0
        if outside is None:
            raise PreconditionError(f"u={u}: V(t, 0, 0, u) decreases without bound")
    else:
        # h(0) > 0 and χ ≥ 0: the sublevel set lies in (0, χ].
        outside = 0.0
        inside = c
        if c == INF:
            inside = 1.0
            while h(inside) > 0.0:
                inside *= 2.0
                if inside > MAX_BRACKET_WIDTH:
                    raise PreconditionError(f"u={u}: no finite root of the stationary equation")
        elif h(inside) >= 0.0:
            # h(χ) = 0 up to round-off would let the search land on the larger root.
            # The minimum of the convex h lies between the two roots.
            res = optimize.minimize_scalar(
                h, bounds=(0.0, c), method="bounded", options={"xatol": CHI_XTOL * max(1.0, c)}
            )
            inside = float(res.x)
            if h(inside) > 0.0:
                # Double root: the sublevel set is the single point χ.
                return AsymptoticResult(c, float(model.psi(c)))
    root = _root(h, outside, inside, xtol=1e-15, rtol=4 * 2.220446049250313e-16, maxiter=500)
    return AsymptoticResult(root, float(model.psi(root)))


def long_run_cumulant(model: CBITCLModel, u: float, horizon: Optional[float] = None) -> LongRunCumulant:
    """lim (1/t) log E[e^{u Z_t}] = Ψ(ξ(u)); optionally (1/t)U(t, 0, 0, u) for comparison."""
    result = xi_asymptotic(model, u)
    if horizon is None:
        return LongRunCumulant(result.cumulant)
    from riccati import solve_riccati

    sol = solve_riccati(model, 0.0, 0.0, u, horizon)
    return LongRunCumulant(result.cumulant, sol.u_final / sol.stop_time, sol.stop_time)


def stationary_laplace(model: CBITCLModel, lam: float) -> float:
    """E[e^{λX_∞}] = exp(∫_λ^0 Ψ(x)/Φ(x) dx) for λ ≤ 0 under b_X > 0."""
    lam = _check_real("lam", lam)
    if lam > 0.0:
        raise DomainError(f"stationary_laplace: lam={lam} must be <= 0")
    if not model.branching.b > 0.0:
        raise PreconditionError(f"stationary law needs b_X > 0, got b_X={model.branching.b}")
    if lam == 0.0:
        return 1.0

    def ratio(x: float) -> float:
        if x == 0.0:
            return 0.0
        return float(model.psi(x)) / float(model.phi(x))

    value, _ = integrate.quad(ratio, lam, 0.0, epsabs=1e-13, epsrel=1e-10, limit=200)
    return math.exp(value)


# =============================================================================
# Moment frontier of the log price and Lee wings
# =============================================================================

def log_price_drift(model: CBITCLModel, zeta: float, lam: float) -> float:
    """c = Φ(ζ) + ζλρσ_Xσ_Z + Ξ(λ), the Y-coefficient of the compensator."""
    return float(model.phi(zeta)) + zeta * lam * model.cross + float(model.xi(lam))


def _moment_finite(model: CBITCLModel, zeta: float, lam: float, c: float, T: float, p: float) -> bool:
    """Whether E[S_T^p] < ∞ for log S = λZ + ζ(X − X0) − K."""
    info = model.domain_info()
    if not (info.in_dx(p * zeta) and info.in_dz(p * lam)):
        return False
    return lifetime(model, p * zeta, -p * c, p * lam).value > T


def critical_moments(model: CBITCLModel, zeta: float, lam: float, T: float) -> Tuple[float, float]:
    """(p⁺, q⁺) with p⁺ = sup{p : E[S_T^p] < ∞}, q⁺ = sup{q : E[S_T^{−q}] < ∞}.

    Orders beyond MOMENT_CAP are reported as +∞.
    """
    if not T > 0.0:
        raise DomainError(f"T={T} must be > 0")
    c = log_price_drift(model, zeta, lam)

    def finite(p: float) -> bool:
        return _moment_finite(model, zeta, lam, c, T, p)

    def frontier(sign: float, known: float) -> float:
        lo, hi = known, max(2.0 * known, 1.0)
        while finite(sign * hi):
            lo = hi
            hi *= 2.0
            if hi > MOMENT_CAP:
                return INF
        while hi - lo > MOMENT_XTOL * max(1.0, lo):
            mid = 0.5 * (lo + hi)
            if finite(sign * mid):
                lo = mid
            else:
                hi = mid
        return lo

    # E[S_T] = 1 and E[S_T^0] = 1, so [0, 1] is always admissible.
    p_plus = frontier(1.0, 1.0)
    q_plus = frontier(-1.0, 0.0)
    logger.debug("critical moments at T=%s: p+=%s q+=%s", T, p_plus, q_plus)
    return p_plus, q_plus


def lee_beta(p: float) -> float:
    """β(p) = 2 − 4(√(p² + p) − p), decreasing from 2 at p = 0 to 0 at ∞."""
    if p == INF:
        return 0.0
    # √(p² + p) − p = p / (√(p² + p) + p) avoids cancellation for large p.
    return 2.0 - 4.0 * (p / (math.sqrt(p * p + p) + p) if p > 0.0 else 0.0)


def wing_slopes(model: CBITCLModel, zeta: float, lam: float, T: float) -> WingSlopes:
    """Lee's moment formula applied to the critical exponents of S_T."""
    p_plus, q_plus = critical_moments(model, zeta, lam, T)
    right = lee_beta(p_plus - 1.0) / T
    left = lee_beta(q_plus) / T
    return WingSlopes(left=left, right=right, p_plus=p_plus, q_plus=q_plus)
