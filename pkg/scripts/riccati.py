# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Extended Riccati system and the joint Fourier–Laplace transform of (X, Y, Z).

    V′(t) = Φ(V) + u2 + ρσ_Xσ_Z u3 V + Ξ(u3),   V(0) = u1
    U′(t) = Ψ(V),                               U(0) = 0

    E[exp(u1 X_T + u2 Y_T + u3 Z_T)] = exp(U(T) + V(T)X0)   (unconditional)

The system is integrated with an embedded Cash–Karp 5(4) Runge–Kutta pair
and PI step control. U is advanced with the same weights applied to the
Ψ(V) stage values. Real and complex argument triples share one code path.

A step whose stages or endpoint leave D_X is retried from the last accepted
point with half the step, until the step drops below exit_resolution; the
solution then stops with LEFT_DOMAIN and stop_time at that point, so the exit
time is known to within exit_resolution.

Usage:
    from riccati import solve_riccati, transform

    sol = solve_riccati(model, -1.0, 0.0, 0.0, horizon=2.0)
    sol.status, sol.V[-1], sol.U[-1]
    transform(model, 1.0, -1.0, 0.0, 0.0)
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, DomainError, LifetimeExceeded, NonconvergenceError, PreconditionError
from mechanisms import CBITCLModel, Scalar, check_assumption_lipschitz

logger = logging.getLogger(__name__)


# Cash–Karp 5(4): stage matrix, 5th-order weights, and b5 − b4. The
# right-hand side is autonomous, so the nodes are not needed.
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_B = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_E = (-277 / 64512, 0.0, 6925 / 370944, -6925 / 202752, -277 / 14336, 277 / 7084)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and limits of the Riccati integrator."""

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    blowup_threshold: float = 1e8
    exit_resolution: float = 1e-12
    max_steps: int = 200_000

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ConfigError("solver: rtol and atol must be > 0", location="solver.rtol")
        if not self.max_step > 0.0:
            raise ConfigError("solver: max_step must be > 0", location="solver.max_step")
        if not self.exit_resolution > 0.0:
            raise ConfigError("solver: exit_resolution must be > 0", location="solver.exit_resolution")
        if self.max_steps < 1:
            raise ConfigError("solver: max_steps must be >= 1", location="solver.max_steps")


class RiccatiStatus(str, Enum):
    COMPLETED_HORIZON = "CompletedHorizon"
    BLEW_UP = "BlewUp"
    LEFT_DOMAIN = "LeftDomain"


@dataclass
class RiccatiSolution:
    """V and U on the accepted (or requested) time grid."""

    args: Tuple[Scalar, Scalar, Scalar]
    times: np.ndarray
    V: np.ndarray
    U: np.ndarray
    status: RiccatiStatus
    stop_time: float
    steps: int = 0
    rejected: int = 0

    @property
    def completed(self) -> bool:
        return self.status is RiccatiStatus.COMPLETED_HORIZON

    @property
    def v_final(self) -> Scalar:
        return self.V[-1].item()

    @property
    def u_final(self) -> Scalar:
        return self.U[-1].item()

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""

        def enc(x):
            x = complex(x)
            return x.real if x.imag == 0.0 else [x.real, x.imag]

        return {
            "args": [enc(a) for a in self.args],
            "status": self.status.value,
            "stop_time": self.stop_time,
            "steps": self.steps,
            "rejected": self.rejected,
            "t": self.times.tolist(),
            "V": [enc(v) for v in self.V],
            "U": [enc(u) for u in self.U],
        }


def _is_complex(*values) -> bool:
    return any(isinstance(v, (complex, np.complexfloating)) for v in values)


def _norm_args(u1, u2, u3):
    if _is_complex(u1, u2, u3):
        return complex(u1), complex(u2), complex(u3), True
    return float(u1), float(u2), float(u3), False


def solve_riccati(
    model: CBITCLModel,
    u1,
    u2,
    u3,
    horizon: float,
    cfg: Optional[SolverConfig] = None,
    t_eval: Optional[Sequence[float]] = None,
) -> RiccatiSolution:
    """Integrate the extended Riccati system on [0, horizon].

    Args:
        model: CBITCL model
        u1, u2, u3: argument triple; Re(u1) ∈ D_X, Re(u3) ∈ D_Z
        horizon: final time (>= 0)
        cfg: solver configuration
        t_eval: optional increasing times in [0, horizon]; when given, the
            solution is reported on {0} ∪ t_eval instead of the step grid

    Returns:
        RiccatiSolution; status tells whether the horizon was reached

    Raises:
        DomainError: argument outside its effective domain
        NonconvergenceError: step size underflow or step budget exhausted
    """
    cfg = cfg or SolverConfig()
    u1, u2, u3, is_complex = _norm_args(u1, u2, u3)
    if not horizon >= 0.0:
        raise DomainError(f"horizon={horizon} must be >= 0")
    model.check_x(u1, "solve_riccati: u1")
    model.check_z(u3, "solve_riccati: u3")
    if not check_assumption_lipschitz(model):
        raise PreconditionError("solve_riccati: ∫₁^∞ x e^{(ψ∧φ)x} π(dx) diverges")

    info = model.domain_info()
    upper, closed = info.dx_upper, info.dx_closed
    if math.isfinite(upper) and cfg.blowup_threshold <= abs(upper):
        raise ConfigError(
            f"solver: blowup_threshold={cfg.blowup_threshold} must exceed |ψ∧φ|={abs(upper)}",
            location="solver.blowup_threshold",
        )

    shift = model.xi(u3) + u2
    slope = model.cross * u3
    branching, immigration = model.branching, model.immigration

    def inside(v: Scalar) -> bool:
        re = v.real
        return re < upper or (re == upper and closed)

    def rhs(v: Scalar) -> Tuple[Scalar, Scalar]:
        return (
            branching.phi(v) + slope * v + shift,
            immigration.psi(v),
        )

    targets: List[float] = []
    if t_eval is not None:
        targets = [float(t) for t in t_eval if t > 0.0]
        if any(b <= a for a, b in zip(targets, targets[1:])) or (targets and targets[-1] > horizon):
            raise DomainError("t_eval must be strictly increasing within (0, horizon]")
    zero = 0j if is_complex else 0.0
    t, v, u = 0.0, u1, zero
    times, vs, us = [0.0], [v], [u]
    status = RiccatiStatus.COMPLETED_HORIZON
    steps = rejected = 0

    if horizon == 0.0:
        return _pack(u1, u2, u3, times, vs, us, status, 0.0, 0, 0, is_complex)

    f0, _ = rhs(v)
    scale = max(1.0, abs(v))
    h_prop = horizon if abs(f0) == 0.0 else min(horizon, 0.01 * scale / abs(f0))
    h_prop = min(h_prop, cfg.max_step)
    err_prev = 1e-4
    target_idx = 0

    while t < horizon:
        if steps + rejected >= cfg.max_steps:
            raise NonconvergenceError(
                f"solve_riccati: step budget {cfg.max_steps} exhausted at t={t}"
            )
        stop_at = targets[target_idx] if target_idx < len(targets) else horizon
        h = min(h_prop, stop_at - t)
        landing = h == stop_at - t

        kv: List[Scalar] = []
        ku: List[Scalar] = []
        ok = True
        for i in range(6):
            vi = v + h * sum(a * k for a, k in zip(_A[i], kv))
            if not inside(vi):
                ok = False
                break
            fi, gi = rhs(vi)
            kv.append(fi)
            ku.append(gi)
        if ok:
            v_new = v + h * sum(b * k for b, k in zip(_B, kv))
            ok = inside(v_new)

        if not ok:
            # Halve towards the exit time from the last accepted point.
            rejected += 1
            if h < cfg.exit_resolution:
                status = RiccatiStatus.LEFT_DOMAIN
                logger.debug("V left D_X at t=%.15g", t)
                break
            h_prop = 0.5 * h
            continue

        u_new = u + h * sum(b * k for b, k in zip(_B, ku))
        err_v = abs(h * sum(e * k for e, k in zip(_E, kv)))
        err_u = abs(h * sum(e * k for e, k in zip(_E, ku)))
        sc_v = cfg.atol + cfg.rtol * max(abs(v), abs(v_new))
        sc_u = cfg.atol + cfg.rtol * max(abs(u), abs(u_new))
        err = math.sqrt(0.5 * ((err_v / sc_v) ** 2 + (err_u / sc_u) ** 2))

        if not math.isfinite(err) or err > 1.0:
            rejected += 1
            factor = _MIN_FACTOR if not math.isfinite(err) else max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            h_prop = h * factor
            if h_prop < 1e-15 * max(1.0, t):
                raise NonconvergenceError(f"solve_riccati: step size underflow at t={t}")
            continue

        steps += 1
        t = stop_at if landing else t + h
        v, u = v_new, u_new
        if t_eval is None or landing:
            times.append(t)
            vs.append(v)
            us.append(u)
            if landing and target_idx < len(targets):
                target_idx += 1

        if abs(v) > cfg.blowup_threshold:
            fv, _ = rhs(v)
            if (v.conjugate() * fv).real > 0.0:
                status = RiccatiStatus.BLEW_UP
                logger.debug("V exceeded %.3g at t=%.15g", cfg.blowup_threshold, t)
                break

        err_eff = max(err, 1e-10)
        factor = _SAFETY * err_eff ** (-0.7 / 5) * err_prev ** (0.4 / 5)
        factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err, 1e-4)
        h_next = h * factor
        # A step clipped onto a target keeps the larger proposal.
        h_prop = min(cfg.max_step, max(h_next, h_prop) if landing else h_next)

    if status is not RiccatiStatus.COMPLETED_HORIZON and times[-1] != t:
        times.append(t)
        vs.append(v)
        us.append(u)

    logger.debug(
        "riccati (%s, %s, %s): %s at t=%.6g after %d steps (%d rejected)",
        u1, u2, u3, status.value, t, steps, rejected,
    )
    return _pack(u1, u2, u3, times, vs, us, status, t, steps, rejected, is_complex)


def _pack(u1, u2, u3, times, vs, us, status, stop_time, steps, rejected, is_complex) -> RiccatiSolution:
    dtype = complex if is_complex else float
    return RiccatiSolution(
        args=(u1, u2, u3),
        times=np.asarray(times, dtype=float),
        V=np.asarray(vs, dtype=dtype),
        U=np.asarray(us, dtype=dtype),
        status=status,
        stop_time=stop_time,
        steps=steps,
        rejected=rejected,
    )


def transform(
    model: CBITCLModel,
    T: float,
    u1,
    u2,
    u3,
    state: Optional[Tuple[float, float, float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Scalar:
    """E[exp(u1 X_T + u2 Y_T + u3 Z_T)] given (X, Y, Z) = state at time 0.

    Raises:
        LifetimeExceeded: T is not below the lifetime of the real-part triple
    """
    from moments import lifetime

    u1, u2, u3, is_complex = _norm_args(u1, u2, u3)
    x, y, z = state if state is not None else (model.x0, 0.0, 0.0)
    if x < 0.0 or y < 0.0:
        raise DomainError(f"state ({x}, {y}, {z}) must have x >= 0 and y >= 0")
    if not T >= 0.0:
        raise DomainError(f"T={T} must be >= 0")

    result = lifetime(model, u1.real, u2.real, u3.real)
    if T >= result.value and T > 0.0:
        raise LifetimeExceeded(
            f"T={T} reaches the lifetime {result.value:.12g} of ({u1.real}, {u2.real}, {u3.real})"
        )

    sol = solve_riccati(model, u1, u2, u3, T, cfg)
    if not sol.completed:
        raise LifetimeExceeded(
            f"Riccati solution stopped ({sol.status.value}) at t={sol.stop_time:.12g} < T={T}"
        )
    exponent = sol.u_final + sol.v_final * x + u2 * y + u3 * z
    return cmath.exp(exponent) if is_complex else math.exp(exponent)


def char_fn_joint(
    model: CBITCLModel,
    T: float,
    w1,
    w2,
    w3,
    cfg: Optional[SolverConfig] = None,
) -> complex:
    """E[exp(w1 X_T + w2 Y_T + w3 Z_T)] for purely imaginary w1, w2, w3."""
    w = [complex(a) for a in (w1, w2, w3)]
    if any(a.real != 0.0 for a in w):
        raise DomainError(f"char_fn_joint: arguments {w} must be purely imaginary")
    if T == 0.0 or all(a == 0 for a in w):
        return cmath.exp(w[0] * model.x0)
    sol = solve_riccati(model, w[0], w[1], w[2], T, cfg)
    if not sol.completed:
        raise NonconvergenceError(
            f"char_fn_joint: solution stopped ({sol.status.value}) at t={sol.stop_time:.12g}"
        )
    return cmath.exp(sol.u_final + sol.v_final * model.x0)
