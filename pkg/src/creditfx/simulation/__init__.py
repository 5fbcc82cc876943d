"""Monte-Carlo oracle: path simulation of the jump diffusion and the CIR++ short rate.

Deterministic by construction: per-path RNG streams derived from
(seed, path index) make results independent of chunking and worker count.
A compiled kernel is selected at import when available; set
CREDITFX_PURE_PYTHON=1 to force the pure-Python fallback.
"""
from ._engine import (
    DiscountEstimates,
    PathBundle,
    SimConfig,
    backend_name,
    simulate_cir,
    simulate_xy,
)
from .payoffs import (
    ZERO_TOL,
    AtomIndicator,
    CascadedPayoff,
    CdsLegs,
    DefaultAt,
    DelayedRecovery,
    McEstimate,
    RecoveryGivenDefault,
    SimpleRecovery,
    SurvivalProfile,
    mc_estimate,
)

__all__ = [
    "SimConfig",
    "PathBundle",
    "DiscountEstimates",
    "simulate_xy",
    "simulate_cir",
    "backend_name",
    "mc_estimate",
    "McEstimate",
    "ZERO_TOL",
    "SimpleRecovery",
    "DelayedRecovery",
    "AtomIndicator",
    "CascadedPayoff",
    "SurvivalProfile",
    "DefaultAt",
    "RecoveryGivenDefault",
    "CdsLegs",
]
