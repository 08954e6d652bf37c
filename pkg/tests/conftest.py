"""Shared fixtures: scripts/ on sys.path and the reference models."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "scripts"))

from measure import martingale_drift  # noqa: E402
from mechanisms import (  # noqa: E402
    CGMY,
    BranchingMechanism,
    CBITCLModel,
    ImmigrationMechanism,
    NoiseExponent,
    StablePositive,
    TemperedStablePositive,
)

WORKSPACE = ROOT / "workspace"

# CIR / Heston parameters shared with workspace/heston.example.json
KAPPA = 2.0
THETA_V = 0.04
XI_V = 0.3
V0 = 0.04


def gbm_noise() -> NoiseExponent:
    """Ξ(u) = u(u − 1)/2."""
    return NoiseExponent(b=-0.5, sigma=1.0)


def make_cir(rho: float = 0.0, x0: float = V0, b: float = KAPPA, sigma: float = XI_V,
             beta: float = KAPPA * THETA_V) -> CBITCLModel:
    return CBITCLModel(
        x0=x0,
        immigration=ImmigrationMechanism(beta),
        branching=BranchingMechanism(b, sigma),
        noise=gbm_noise(),
        rho=rho,
    )


def make_alpha_cir(alpha: float = 1.5, eta: float = 0.2) -> CBITCLModel:
    return CBITCLModel(
        x0=0.04,
        immigration=ImmigrationMechanism(0.08),
        branching=BranchingMechanism(2.0, 0.3, StablePositive(alpha, eta)),
        noise=gbm_noise(),
        rho=0.0,
    )


def make_tempered_cgmy(theta: float = 2.0, g: float = 4.0, m: float = 3.0, y: float = 1.5) -> CBITCLModel:
    gamma = CGMY(g=g, m=m, y=y)
    return CBITCLModel(
        x0=0.04,
        immigration=ImmigrationMechanism(0.08),
        branching=BranchingMechanism(2.0, 0.3, TemperedStablePositive(1.5, theta)),
        noise=NoiseExponent(martingale_drift(NoiseExponent(0.0, 0.0, gamma)), 0.0, gamma),
        rho=0.0,
    )


def make_black_scholes(variance: float = 0.04) -> CBITCLModel:
    """Deterministic clock X ≡ variance, so log S is Gaussian with that variance per unit time."""
    return CBITCLModel(
        x0=variance,
        immigration=ImmigrationMechanism(variance),
        branching=BranchingMechanism(1.0, 0.0),
        noise=gbm_noise(),
        rho=0.0,
    )


@pytest.fixture
def cir():
    return make_cir()


@pytest.fixture
def heston():
    return make_cir(rho=-0.7)


@pytest.fixture
def alpha_cir():
    return make_alpha_cir()


@pytest.fixture
def tempered_cgmy():
    return make_tempered_cgmy()


@pytest.fixture
def black_scholes():
    return make_black_scholes()


@pytest.fixture
def workspace():
    return WORKSPACE
