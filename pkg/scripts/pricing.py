# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Log-price model, characteristic function and Fourier call prices.

The discounted price is S = exp(log S) with

    log S_t = λZ_t + ζ(X_t − X0) − K_t,   K_t = tΨ(ζ) + Y_t c,
    c = Φ(ζ) + ζλρσ_Xσ_Z + Ξ(λ)

so S0 = 1 and S is a martingale. Calls are priced with the damped contour
formula (damping α ∈ (−1, 0), z = x − αi, k = log K):

    E[(S_T − K)^+] = φ_T(−i) + (1/π) ∫_0^∞ Re(e^{−izk} φ_T(z − i) / (−z(z − i))) dx

Usage:
    from pricing import LogPriceSpec, price_call, implied_vol

    spec = LogPriceSpec(model, zeta=0.0, lam=1.0)
    result = price_call(spec, T=1.0, K=1.0)
    implied_vol(result.price, 1.0, 1.0)
"""

import cmath
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy import stats as spst

from errors import ConfigError, DomainError, LifetimeExceeded, OutOfBounds, PriceClampWarning, QuadratureError
from measure import EsscherSpec
from mechanisms import CBITCLModel
from moments import lifetime
from riccati import SolverConfig, solve_riccati
from simulate import PathSet

logger = logging.getLogger(__name__)

DEFAULT_DAMPING = -0.5


@dataclass(frozen=True)
class QuadConfig:
    """Panel layout and tolerances of the Fourier quadrature."""

    first_panel: float = 10.0
    epsrel: float = 1e-10
    epsabs: float = 1e-13
    stop_rtol: float = 1e-12
    stop_atol: float = 1e-14
    max_panels: int = 48
    tail_fail: float = 1e-8
    quad_limit: int = 200

    def __post_init__(self):
        if not self.first_panel > 0.0:
            raise ConfigError("quadrature: first_panel must be > 0", location="quadrature.first_panel")
        if not (self.epsrel > 0.0 and self.epsabs >= 0.0):
            raise ConfigError("quadrature: tolerances must be positive", location="quadrature.epsrel")
        if self.max_panels < 2:
            raise ConfigError("quadrature: max_panels must be >= 2", location="quadrature.max_panels")


@dataclass(frozen=True)
class LogPriceSpec:
    """Base model with the tilt (ζ, λ) that defines log S."""

    model: CBITCLModel
    zeta: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        # Validates (ζ, λ) against the effective domains.
        EsscherSpec(self.model, self.zeta, self.lam)

    @property
    def esscher(self) -> EsscherSpec:
        return EsscherSpec(self.model, self.zeta, self.lam)

    @property
    def drift(self) -> float:
        return self.esscher.drift

    @property
    def psi_zeta(self) -> float:
        return self.esscher.psi_zeta


@dataclass(frozen=True)
class PriceResult:
    price: float
    damping: float
    panels: int
    err_estimate: float

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "price": self.price,
            "damping": self.damping,
            "panels": self.panels,
            "err_estimate": self.err_estimate,
        }


# =============================================================================
# Characteristic function
# =============================================================================

def char_fn_logS(spec: LogPriceSpec, t: float, u, cfg: Optional[SolverConfig] = None) -> complex:
    """φ_t(u) = E[exp(iu log S_t)] on the analytic strip and beyond where moments exist.

    Raises:
        LifetimeExceeded: Im(u) ∉ [−1, 0] and E[S_t^{−Im u}] is infinite
    """
    u = complex(u)
    if u == 0 or t == 0.0:
        return 1.0 + 0j
    if not t > 0.0:
        raise DomainError(f"t={t} must be >= 0")
    model = spec.model
    c = spec.drift
    iu = 1j * u
    u1, u2, u3 = iu * spec.zeta, -iu * c, iu * spec.lam

    p = -u.imag
    if not 0.0 <= p <= 1.0:
        info = model.domain_info()
        if not (info.in_dx(p * spec.zeta) and info.in_dz(p * spec.lam)):
            raise LifetimeExceeded(f"E[S^{p}] is infinite: exponent outside the effective domain")
        if lifetime(model, p * spec.zeta, -p * c, p * spec.lam).value <= t:
            raise LifetimeExceeded(f"E[S_{t}^{p}] is infinite: lifetime does not exceed t={t}")

    sol = solve_riccati(model, u1, u2, u3, t, cfg)
    if not sol.completed:
        raise LifetimeExceeded(f"Riccati solution stopped ({sol.status.value}) at t={sol.stop_time:.12g}")
    x0 = model.x0
    return cmath.exp(-iu * spec.zeta * x0 - iu * t * spec.psi_zeta + sol.u_final + sol.v_final * x0)


def call_integrand(spec: LogPriceSpec, T: float, log_strike: float, damping: float, x: float,
                   phi: Optional[complex] = None, cfg: Optional[SolverConfig] = None) -> complex:
    """e^{−izk} φ_T(z − i) / (−z(z − i)) at z = x − αi, before taking the real part."""
    z = complex(x, -damping)
    if phi is None:
        phi = char_fn_logS(spec, T, z - 1j, cfg)
    return cmath.exp(-1j * z * log_strike) * phi / (-z * (z - 1j))


# =============================================================================
# Call prices
# =============================================================================

def price_call(
    spec: LogPriceSpec,
    T: float,
    K: float,
    damping: float = DEFAULT_DAMPING,
    quad: Optional[QuadConfig] = None,
    cfg: Optional[SolverConfig] = None,
) -> PriceResult:
    """European call on S with unit numéraire.

    Raises:
        DomainError: damping ∉ (−1, 0), K <= 0 or T <= 0
        QuadratureError: the panel sequence did not settle
    """
    quad = quad or QuadConfig()
    if not -1.0 < damping < 0.0:
        raise DomainError(f"damping={damping} must lie strictly inside (−1, 0)")
    if not K > 0.0:
        raise DomainError(f"strike K={K} must be > 0")
    if not T > 0.0:
        raise DomainError(f"maturity T={T} must be > 0")

    k = math.log(K)
    cache: Dict[float, complex] = {}

    def integrand(x: float) -> float:
        z = complex(x, -damping)
        phi = cache.get(x)
        if phi is None:
            phi = char_fn_logS(spec, T, z - 1j, cfg)
            cache[x] = phi
        return call_integrand(spec, T, k, damping, x, phi=phi).real

    acc = 0.0
    err = 0.0
    lo, width = 0.0, quad.first_panel
    panels = 0
    small_in_row = 0
    contribution = math.inf
    while panels < quad.max_panels:
        hi = lo + width
        contribution, abserr = integrate.quad(
            integrand, lo, hi, epsabs=quad.epsabs, epsrel=quad.epsrel, limit=quad.quad_limit
        )
        panels += 1
        acc += contribution
        err += abserr
        logger.debug("panel %d [%g, %g]: %.3e (err %.1e)", panels, lo, hi, contribution, abserr)
        if abs(contribution) < max(quad.stop_rtol * abs(acc), quad.stop_atol):
            small_in_row += 1
            if small_in_row == 2:
                break
        else:
            small_in_row = 0
        lo = hi
        if panels > 1:
            width *= 2.0
    else:
        if not abs(contribution) <= quad.tail_fail:
            raise QuadratureError(
                f"call quadrature did not settle after {panels} panels (last panel {contribution:.3e})"
            )
        err += abs(contribution)

    raw = 1.0 + acc / math.pi
    err_estimate = err / math.pi
    lower, upper = max(1.0 - K, 0.0), 1.0
    price = min(max(raw, lower), upper)
    if abs(price - raw) > err_estimate:
        warnings.warn(
            f"call price {raw:.3e} clamped to [{lower:.3e}, {upper:.3e}] beyond its error estimate {err_estimate:.1e}",
            PriceClampWarning,
            stacklevel=2,
        )
    return PriceResult(price=price, damping=damping, panels=panels, err_estimate=err_estimate)


# =============================================================================
# Black–Scholes inversion
# =============================================================================

def black_call(K: float, T: float, sigma: float) -> float:
    """Black–Scholes call on a unit forward."""
    if sigma <= 0.0:
        return max(1.0 - K, 0.0)
    std = sigma * math.sqrt(T)
    d1 = -math.log(K) / std + 0.5 * std
    d2 = d1 - std
    return float(spst.norm.cdf(d1) - K * spst.norm.cdf(d2))


def _black_otm(K: float, T: float, sigma: float) -> Tuple[float, float]:
    """Out-of-the-money price (call for K >= 1, put for K < 1) and vega."""
    std = sigma * math.sqrt(T)
    d1 = -math.log(K) / std + 0.5 * std
    d2 = d1 - std
    if K >= 1.0:
        price = spst.norm.cdf(d1) - K * spst.norm.cdf(d2)
    else:
        price = K * spst.norm.cdf(-d2) - spst.norm.cdf(-d1)
    vega = spst.norm.pdf(d1) * math.sqrt(T)
    return float(price), float(vega)


def implied_vol(price: float, K: float, T: float, rtol: float = 1e-10, max_iter: int = 200) -> float:
    """Black–Scholes implied volatility of a call on a unit forward.

    Safeguarded Newton iterations on the out-of-the-money side with a
    bisection fallback.

    Raises:
        OutOfBounds: price outside (max(1 − K, 0), 1)
    """
    if not (K > 0.0 and T > 0.0):
        raise DomainError(f"K={K} and T={T} must be > 0")
    lower, upper = max(1.0 - K, 0.0), 1.0
    if not lower < price < upper:
        raise OutOfBounds(f"call price {price} outside the open no-arbitrage interval ({lower}, {upper})")
    target = price if K >= 1.0 else price - (1.0 - K)
    if target <= 0.0:
        raise OutOfBounds(f"out-of-the-money value {target} is not positive")

    lo, hi = 0.0, 1.0
    while _black_otm(K, T, hi)[0] < target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e4:
            raise OutOfBounds(f"implied volatility above {hi} for price {price}")
    sigma = 0.5 * (lo + hi)
    for _ in range(max_iter):
        value, vega = _black_otm(K, T, sigma)
        diff = value - target
        if diff > 0.0:
            hi = sigma
        else:
            lo = sigma
        step = diff / vega if vega > 0.0 else math.inf
        candidate = sigma - step
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - sigma) <= rtol * candidate or hi - lo <= rtol * sigma:
            return candidate
        sigma = candidate
    return sigma


def implied_smile(
    spec: LogPriceSpec,
    T: float,
    log_strikes: Sequence[float],
    damping: float = DEFAULT_DAMPING,
    quad: Optional[QuadConfig] = None,
) -> List[Dict[str, float]]:
    """Rows (k, K, price, iv, iv²/|k|) for CSV export; iv is NaN where inversion fails."""
    rows = []
    for k in log_strikes:
        K = math.exp(k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PriceClampWarning)
            result = price_call(spec, T, K, damping, quad)
        try:
            iv = implied_vol(result.price, K, T)
        except OutOfBounds:
            iv = math.nan
        slope = iv * iv / abs(k) if k != 0.0 else math.nan
        rows.append({"k": k, "K": K, "price": result.price, "iv": iv, "slope": slope})
    return rows


# =============================================================================
# Monte Carlo counterparts
# =============================================================================

def log_price_paths(spec: LogPriceSpec, paths: PathSet) -> np.ndarray:
    """log S on the recorded grid of a PathSet."""
    comp = paths.times[None, :] * spec.psi_zeta + paths.Y * spec.drift
    return spec.lam * paths.Z + spec.zeta * (paths.X - spec.model.x0) - comp


def mc_call_price(spec: LogPriceSpec, paths: PathSet, K: float) -> Tuple[float, float]:
    """Monte Carlo call price at the last recorded time and its standard error."""
    s_T = np.exp(log_price_paths(spec, paths)[:, -1])
    payoff = np.maximum(s_T - K, 0.0)
    return float(payoff.mean()), float(payoff.std(ddof=1) / math.sqrt(payoff.size))
