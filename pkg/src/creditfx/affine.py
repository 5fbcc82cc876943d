"""Conditional transforms of the jump diffusion and CIR++ discount bonds."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CurveRangeError  # noqa: F401  (re-exported for callers)
from .riccati import AjdParams, TailLimit, riccati_limit_u_to_neg_inf, transform

__all__ = [
    "ShiftFunction",
    "CirPpParams",
    "ProcessState",
    "laplace",
    "atom_mass_zero",
    "cir_pp_bond",
    "cir_ab",
    "restricted_transform",
]


@dataclass(frozen=True)
class ShiftFunction:
    """Deterministic short-rate shift f1 + f2 t + f3 e^{-t}.

    The basis {1, t, e^{-t}} spans level, slope and curvature and has analytic
    antiderivatives, so bond prices never need quadrature.
    """

    f1: float = 0.0
    f2: float = 0.0
    f3: float = 0.0

    def __call__(self, t: float) -> float:
        return self.f1 + self.f2 * t + self.f3 * math.exp(-t)

    def integral(self, T: float) -> float:
        """integral_0^T shift(t) dt, exact."""
        return self.f1 * T + 0.5 * self.f2 * T * T + self.f3 * (1.0 - math.exp(-T))

    @property
    def at_zero(self) -> float:
        return self.f1 + self.f3


@dataclass(frozen=True)
class CirPpParams:
    """CIR++ short rate r_t = x_t + shift(t), dx = (b_x - beta_x x) dt + sigma_x sqrt(x) dW."""

    r0: float
    b_x: float
    beta_x: float
    sigma_x: float
    shift: ShiftFunction = ShiftFunction()

    def __post_init__(self):
        for name in ("b_x", "beta_x", "sigma_x"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if not math.isfinite(self.r0):
            raise ValueError("r0 must be finite")
        if 2.0 * self.b_x < self.sigma_x * self.sigma_x:
            raise ValueError(
                f"Feller condition violated: 2*b_x={2 * self.b_x} < sigma_x^2={self.sigma_x**2}"
            )

    @property
    def x0_state(self) -> float:
        """Initial value of the square-root factor, x_0 = r_0 - shift(0)."""
        return self.r0 - self.shift.at_zero


@dataclass(frozen=True)
class ProcessState:
    """Current state (x, y) of the jump diffusion at time t."""

    x: float = 0.0
    y: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.x < 0.0 or self.y < 0.0:
            raise ValueError(f"state must be nonnegative, got ({self.x}, {self.y})")
        if self.t < 0.0:
            raise ValueError("time must be nonnegative")


def _affine_exp(phi: float, psi_x: float, psi_y: float, x: float, y: float) -> float:
    """exp(phi + x psi_x + y psi_y) with the convention 0 * (-inf) = 0."""
    if math.isinf(psi_x):
        if x > 0.0:
            return 0.0
        return math.exp(phi + y * psi_y)
    return math.exp(phi + x * psi_x + y * psi_y)


def laplace(p: AjdParams, s: ProcessState, T: float, u: float, v: float) -> float:
    """E[e^{u X_T + v Y_T} | state s] for real u, v <= 0; value in (0, 1]."""
    if T < s.t:
        raise ValueError(f"T={T} precedes state time {s.t}")
    tr = transform(p, u, v, T - s.t)
    return _affine_exp(tr.phi, tr.psi_x, tr.psi_y, s.x, s.y)


def restricted_transform(p: AjdParams, s: ProcessState, T: float, v: float) -> float:
    """E[e^{v Y_T} 1{X_T = 0} | state s], via the u -> -inf transform limit."""
    if T < s.t:
        raise ValueError(f"T={T} precedes state time {s.t}")
    lim = riccati_limit_u_to_neg_inf(p, v, T - s.t)
    return _affine_exp(lim.phi, lim.psi_x, lim.psi_y, s.x, s.y)


def atom_mass_zero(p: AjdParams, s: ProcessState, T: float) -> float:
    """Q[X_T = 0 | state s], the probability of full liquidity at T.

    Riemann-Lebesgue: the atom mass is the u -> -inf limit of the transform.
    From x > 0 it is positive only when sigma_x > 0 (the diffusion can be
    reabsorbed at zero); with sigma_x = 0 the state never returns.
    """
    return restricted_transform(p, s, T, 0.0)


def cir_ab(c: CirPpParams, T: float) -> tuple[float, float]:
    """CIR factor loadings: A without the shift terms, and B, at horizon T."""
    beta, sigma = c.beta_x, c.sigma_x
    lam = math.sqrt(beta * beta + 2.0 * sigma * sigma)
    em1 = math.expm1(lam * T)
    denom = (lam + beta) * em1 + 2.0 * lam
    a_cir = -(2.0 * c.b_x / (sigma * sigma)) * math.log(
        2.0 * lam * math.exp(0.5 * (lam + beta) * T) / denom
    )
    b = 2.0 * em1 / denom
    return a_cir, b


def cir_pp_bond(c: CirPpParams, T: float) -> float:
    """Zero-coupon bond P(0,T) = exp(-A(0,T) - B(0,T) r_0) in the CIR++ model.

    A includes the shift contribution -shift(0) B(0,T) + integral_0^T shift(u) du,
    evaluated analytically per basis function.
    """
    if T < 0.0:
        raise ValueError("maturity must be nonnegative")
    if T == 0.0:
        return 1.0
    a_cir, b = cir_ab(c, T)
    a = a_cir - c.shift.at_zero * b + c.shift.integral(T)
    return math.exp(-a - b * c.r0)
