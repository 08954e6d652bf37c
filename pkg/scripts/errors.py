# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Exception and warning types shared by every module.

Each exception carries a machine-parsable code and the process exit status
the CLI uses for it:

    E-DOMAIN   exit 1   argument outside an effective domain, failed model
                        precondition, lifetime exceeded, ...
    E-CONFIG   exit 1   unreadable or invalid model / run configuration
    E-NUMERIC  exit 2   step-size underflow, stalled quadrature, RNG failure
"""

from typing import Optional


class CbitclError(Exception):
    """Base class for all library errors."""

    code = "E-DOMAIN"
    exit_status = 1

    def __init__(self, message: str, location: Optional[str] = None):
        super().__init__(message)
        self.location = location

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        result = {"code": self.code, "type": type(self).__name__, "message": str(self)}
        if self.location:
            result["location"] = self.location
        return result


# --- domain family ---------------------------------------------------------

class DomainError(CbitclError, ValueError):
    """An argument lies outside the effective domain of an exponent."""


class EndpointDerivativeUnavailable(DomainError):
    """Φ′ requested at the D_X endpoint where the derivative integral diverges."""


class PreconditionError(DomainError):
    """A model-level assumption required by the operation does not hold."""


class NotInX(DomainError):
    """u is outside {u ∈ D_Z : χ(u) ≥ 0}, so no long-run limit exists."""


class FamilyClosureError(DomainError):
    """An exponential tilt would leave the supported parametric families."""


class LifetimeExceeded(DomainError):
    """The horizon reaches or exceeds the lifetime of the exponential moment."""


class OutOfBounds(DomainError):
    """A price touches or leaves the no-arbitrage bounds."""


# --- numeric family --------------------------------------------------------

class NumericalError(CbitclError):
    code = "E-NUMERIC"
    exit_status = 2


class NonconvergenceError(NumericalError):
    """Adaptive step size underflowed or the step budget ran out."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class RNGError(NumericalError):
    """Random stream could not deliver the requested draws."""


# --- configuration ---------------------------------------------------------

class ConfigError(CbitclError, ValueError):
    code = "E-CONFIG"
    exit_status = 1


# --- warnings --------------------------------------------------------------

class PriceClampWarning(UserWarning):
    """Fourier price was clamped into the no-arbitrage interval by more than its error estimate."""


class MartingaleToleranceWarning(UserWarning):
    """Ξ(1) is not exactly zero but below the floating-point tolerance."""


class SimulationStabilityWarning(UserWarning):
    """Time step is coarse relative to the self-exciting jump intensity."""
