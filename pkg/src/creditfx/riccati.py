"""Generalized Riccati system for the two-factor jump diffusion.

The driving process is

    dX = sigma_X sqrt(X) dW^X + dJ^X,    dY = sigma_Y sqrt(Y) dW^Y + dJ^Y,

where joint jumps arrive with intensity m + mu_X X + mu_Y Y and sizes are drawn
from a fixed measure nu on [0,inf)^2.  Conditional Laplace transforms are
exponential-affine,

    E[e^{u X_T + v Y_T} | X_t=x, Y_t=y] = exp(phi + x psi_X + y psi_Y),

with (phi, psi_X, psi_Y) solving

    phi'   = m kappa(psi_X, psi_Y),            phi(0)   = 0,
    psi_X' = sigma_X^2/2 psi_X^2 + mu_X kappa, psi_X(0) = u,
    psi_Y' = sigma_Y^2/2 psi_Y^2 + mu_Y kappa, psi_Y(0) = v,

and kappa(a, b) = integral (e^{a x + b y} - 1) nu(dx, dy).  Everything here is
evaluated at real exponents u, v <= 0, which is all that pricing needs and
keeps the solutions globally defined.

Closed forms are used where they exist (regimes (a) and (b) below); everything
else integrates numerically with adaptive step control.  The u -> -inf limits
(mass of the atom of X at zero) are evaluated through the bounded substitution
eta = 1/psi_X, which removes the stiffness of the raw system at large |u|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import exp1, expi

from .errors import BlowUpError, ConvergenceError, UnsupportedRegimeError

__all__ = [
    "ExponentialJumps",
    "DiracJumps",
    "JumpMeasure",
    "AjdParams",
    "TransformResult",
    "TailLimit",
    "jump_transform",
    "solve_riccati_closed",
    "solve_riccati_numeric",
    "riccati_limit_u_to_neg_inf",
    "transform",
]

# Escape threshold for the blow-up guard; on u, v <= 0 it is never reached.
_BLOWUP = 1e12
_ODE_RTOL = 1e-10
_ODE_ATOL = 1e-12
# Extrapolation schedule for u -> -inf: u = -2^k, successive values must agree
# to this tolerance before the limit is accepted.
_LIMIT_TOL = 1e-10
_LIMIT_KMAX = 40


@dataclass(frozen=True)
class ExponentialJumps:
    """Jump sizes exponential with rate lam_x in x, identically zero in y."""

    lam_x: float

    def __post_init__(self):
        if not (self.lam_x > 0.0 and math.isfinite(self.lam_x)):
            raise ValueError(f"lam_x must be positive and finite, got {self.lam_x}")


@dataclass(frozen=True)
class DiracJumps:
    """Deterministic jump sizes (j_x, j_y); j_x > 0 so the recovery can depreciate."""

    j_x: float
    j_y: float = 0.0

    def __post_init__(self):
        if not (self.j_x > 0.0 and math.isfinite(self.j_x)):
            raise ValueError(f"j_x must be positive and finite, got {self.j_x}")
        if not (self.j_y >= 0.0 and math.isfinite(self.j_y)):
            raise ValueError(f"j_y must be nonnegative and finite, got {self.j_y}")


JumpMeasure = Union[ExponentialJumps, DiracJumps]


@dataclass(frozen=True)
class AjdParams:
    """Full parameter set of the (X, Y) jump diffusion plus the observation delay h."""

    sigma_x: float
    sigma_y: float
    m: float
    mu_x: float
    mu_y: float
    jumps: JumpMeasure
    x0: float = 0.0
    y0: float = 0.0
    h: float = 0.25

    def __post_init__(self):
        checks = [
            ("sigma_x", self.sigma_x, self.sigma_x >= 0.0),
            ("sigma_y", self.sigma_y, self.sigma_y >= 0.0),
            ("m", self.m, self.m > 0.0),
            ("mu_x", self.mu_x, self.mu_x >= 0.0),
            ("mu_y", self.mu_y, self.mu_y >= 0.0),
            ("x0", self.x0, self.x0 >= 0.0),
            ("y0", self.y0, self.y0 >= 0.0),
            ("h", self.h, self.h > 0.0),
        ]
        for name, value, ok in checks:
            if not (ok and math.isfinite(value)):
                raise ValueError(f"{name} out of range: {value}")
        if not isinstance(self.jumps, (ExponentialJumps, DiracJumps)):
            raise TypeError("jumps must be ExponentialJumps or DiracJumps")


@dataclass(frozen=True)
class TransformResult:
    """Riccati solution (phi, psi_x, psi_y) at one horizon and terminal exponents."""

    phi: float
    psi_x: float
    psi_y: float
    horizon: float
    u: float
    v: float


@dataclass(frozen=True)
class TailLimit:
    """u -> -inf limit of (phi, psi_X, psi_Y); psi_x is -inf when X cannot revisit 0."""

    phi: float
    psi_x: float
    psi_y: float
    horizon: float
    v: float


def jump_transform(nu: JumpMeasure, u: float, v: float) -> float:
    """Evaluate kappa(u, v) = integral (e^{ux+vy} - 1) nu(dx, dy) at real exponents.

    For exponential x-jumps the y-marginal is a Dirac at zero, so
    kappa = u / (lam_x - u) with a pole at u = lam_x; for Dirac jumps
    kappa = e^{u j_x + v j_y} - 1.
    """
    if isinstance(nu, ExponentialJumps):
        if u >= nu.lam_x:
            raise ValueError(f"transform pole: u={u} >= lam_x={nu.lam_x}")
        return u / (nu.lam_x - u)
    return math.expm1(u * nu.j_x + v * nu.j_y)


def _kappa_tail(nu: JumpMeasure, eta: float, psi_y: float) -> float:
    """kappa(1/eta, psi_y) for eta <= 0, continuous at eta = 0 where it equals -1."""
    if isinstance(nu, ExponentialJumps):
        return 1.0 / (nu.lam_x * eta - 1.0)
    if eta == 0.0:
        return -1.0
    return math.expm1(nu.j_x / eta + nu.j_y * psi_y)


def _psi_quadratic(t: float, w: float, sigma: float) -> float:
    # solves psi' = sigma^2/2 psi^2, psi(0) = w; w <= 0 keeps the denominator >= 1
    return w / (1.0 - 0.5 * sigma * sigma * t * w)


def _moving_exp_integral(t: float, w: float, sigma: float, j: float) -> float:
    """integral_0^t exp(j * psi(s; w, sigma)) ds with psi the pure-quadratic solution.

    Reduces to the exponential integral Ei after substituting xi = psi(s).
    """
    if w == 0.0 or sigma == 0.0 or j == 0.0:
        return t * math.exp(j * w)

    def g(xi: float) -> float:
        return -math.exp(j * xi) / xi + j * expi(j * xi)

    a = 0.5 * sigma * sigma
    return (g(_psi_quadratic(t, w, sigma)) - g(w)) / a


def _regime_b_psi_y(t: float, v: float, sigma_y: float, mu_y: float, k: float) -> float:
    """Solve psi_y' = sigma_y^2/2 psi_y^2 + mu_y k with constant k <= 0, psi_y(0) = v.

    The paper's tan/arctan expressions at imaginary argument; evaluated in the real
    tanh/artanh representation, which is bounded on v <= 0.
    """
    c = mu_y * k
    if sigma_y == 0.0:
        return v + c * t
    if c == 0.0:
        return _psi_quadratic(t, v, sigma_y)
    a = 0.5 * sigma_y * sigma_y
    rho = math.sqrt(-c / a)
    if v == -rho:
        return v
    if v > -rho:
        return -rho * math.tanh(a * rho * t + math.atanh(-v / rho))
    # v < -rho: coth branch, increasing towards the stable root -rho
    return -rho / math.tanh(a * rho * t + math.atanh(-rho / v))


def _check_domain(u: float, v: float) -> None:
    if not (u <= 0.0 and v <= 0.0):
        raise ValueError(f"real-domain evaluation requires u <= 0 and v <= 0, got ({u}, {v})")
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError("u and v must be finite")


def solve_riccati_closed(p: AjdParams, u: float, v: float, t: float) -> TransformResult:
    """Closed-form (phi, psi_X, psi_Y) where the model admits one.

    Supported regimes:
      (a) mu_x = mu_y = 0, any sigma_x (exponential jumps always; Dirac jumps
          whenever at most one of the exponents j_x psi_X(s), j_y psi_Y(s) is
          time-varying);
      (b) mu_x = 0, sigma_x = 0, mu_y > 0 with exponential jumps or Dirac
          jumps with j_y = 0.

    Raises UnsupportedRegimeError otherwise; callers fall back to
    solve_riccati_numeric.
    """
    _check_domain(u, v)
    if t < 0.0:
        raise ValueError("horizon must be nonnegative")
    nu = p.jumps

    if p.mu_x == 0.0 and p.mu_y == 0.0:
        psi_x = _psi_quadratic(t, u, p.sigma_x)
        psi_y = _psi_quadratic(t, v, p.sigma_y)
        if isinstance(nu, ExponentialJumps):
            lam = nu.lam_x
            if u == 0.0:
                phi = 0.0
            elif p.sigma_x == 0.0:
                phi = p.m * t * u / (lam - u)
            else:
                # 2m/(lam sx^2) * log((lam/u - 1)/(lam(1/u - sx^2 t/2) - 1)),
                # rearranged to avoid dividing by u
                s2 = p.sigma_x * p.sigma_x
                phi = (2.0 * p.m / (lam * s2)) * math.log(
                    (lam - u) / (lam - u - 0.5 * lam * s2 * t * u)
                )
        else:
            moving_x = u != 0.0 and p.sigma_x > 0.0
            moving_y = nu.j_y > 0.0 and v != 0.0 and p.sigma_y > 0.0
            if moving_x and moving_y:
                raise UnsupportedRegimeError(
                    "Dirac jumps with both exponents time-varying have no closed form"
                )
            if not moving_x and not moving_y:
                phi = p.m * t * math.expm1(nu.j_x * u + nu.j_y * v)
            elif moving_x:
                const = math.exp(nu.j_y * v)
                phi = p.m * (const * _moving_exp_integral(t, u, p.sigma_x, nu.j_x) - t)
            else:
                const = math.exp(nu.j_x * u)
                phi = p.m * (const * _moving_exp_integral(t, v, p.sigma_y, nu.j_y) - t)
        return TransformResult(phi, psi_x, psi_y, t, u, v)

    regime_b = (
        p.mu_x == 0.0
        and p.sigma_x == 0.0
        and p.mu_y > 0.0
        and (isinstance(nu, ExponentialJumps) or nu.j_y == 0.0)
    )
    if regime_b:
        k = jump_transform(nu, u, 0.0)
        phi = p.m * k * t
        psi_y = _regime_b_psi_y(t, v, p.sigma_y, p.mu_y, k)
        return TransformResult(phi, u, psi_y, t, u, v)

    raise UnsupportedRegimeError(
        "no closed form for mu_x={}, mu_y={}, sigma_x={}, jumps={}".format(
            p.mu_x, p.mu_y, p.sigma_x, nu
        )
    )


def solve_riccati_numeric(p: AjdParams, u: float, v: float, t: float) -> TransformResult:
    """Integrate the Riccati system with an embedded adaptive RK4(5) pair.

    Tolerances rtol=1e-10, atol=1e-12; a terminal event declares blow-up when any
    component reaches 1e12 in magnitude (possible only off the pricing domain).
    """
    if t < 0.0:
        raise ValueError("horizon must be nonnegative")
    if t == 0.0:
        return TransformResult(0.0, u, v, 0.0, u, v)
    nu = p.jumps

    def rhs(_t, w):
        k = jump_transform(nu, w[1], w[2])
        return (
            p.m * k,
            0.5 * p.sigma_x * p.sigma_x * w[1] * w[1] + p.mu_x * k,
            0.5 * p.sigma_y * p.sigma_y * w[2] * w[2] + p.mu_y * k,
        )

    def escape(_t, w):
        return _BLOWUP - float(np.max(np.abs(w)))

    escape.terminal = True

    try:
        sol = solve_ivp(
            rhs,
            (0.0, t),
            (0.0, u, v),
            method="RK45",
            rtol=_ODE_RTOL,
            atol=_ODE_ATOL,
            events=escape,
        )
    except (FloatingPointError, OverflowError, ValueError) as exc:
        raise BlowUpError(t) from exc
    if sol.t_events[0].size:
        raise BlowUpError(float(sol.t_events[0][0]))
    w = sol.y[:, -1]
    if not sol.success:
        # distinguish an escaping/singular trajectory (e.g. the jump-transform
        # pole off the pricing domain) from a genuine step-control failure
        stalled_at = float(sol.t[-1])
        rhs_now = rhs(stalled_at, w)
        singular = (
            not np.all(np.isfinite(w))
            or not all(math.isfinite(r) for r in rhs_now)
            or max(abs(r) for r in rhs_now) > 1e6 * (1.0 + float(np.max(np.abs(w))))
        )
        if singular:
            raise BlowUpError(stalled_at)
        raise ConvergenceError(f"Riccati integration failed: {sol.message}")
    if not np.all(np.isfinite(w)):
        raise BlowUpError(float(sol.t[-1]))
    return TransformResult(float(w[0]), float(w[1]), float(w[2]), t, u, v)


@lru_cache(maxsize=8192)
def _transform_cached(p: AjdParams, u: float, v: float, t: float) -> TransformResult:
    try:
        return solve_riccati_closed(p, u, v, t)
    except UnsupportedRegimeError:
        return solve_riccati_numeric(p, u, v, t)


def transform(p: AjdParams, u: float, v: float, t: float) -> TransformResult:
    """Closed form when available, adaptive numeric integration otherwise (memoized)."""
    _check_domain(u, v)
    return _transform_cached(p, float(u), float(v), float(t))


def _solve_tail(p: AjdParams, eta0: float, v: float, t: float) -> tuple[float, float, float]:
    """Integrate (phi, eta, psi_Y) with eta = 1/psi_X; eta0 = 1/u (0 for the exact limit)."""
    if t == 0.0:
        return 0.0, eta0, v
    nu = p.jumps

    def rhs(_t, w):
        k = _kappa_tail(nu, min(w[1], 0.0), w[2])
        return (
            p.m * k,
            -0.5 * p.sigma_x * p.sigma_x - p.mu_x * w[1] * w[1] * k,
            0.5 * p.sigma_y * p.sigma_y * w[2] * w[2] + p.mu_y * k,
        )

    sol = solve_ivp(
        rhs, (0.0, t), (0.0, eta0, v), method="RK45", rtol=_ODE_RTOL, atol=_ODE_ATOL
    )
    if not sol.success:
        raise ConvergenceError(f"tail integration failed: {sol.message}")
    w = sol.y[:, -1]
    return float(w[0]), float(w[1]), float(w[2])


@lru_cache(maxsize=4096)
def _limit_cached(p: AjdParams, v: float, t: float) -> TailLimit:
    nu = p.jumps

    if t == 0.0:
        # psi_X(0, u) = u -> -inf; phi and psi_Y keep their initial values
        return TailLimit(0.0, -math.inf, v, 0.0, v)

    if p.mu_x == 0.0 and p.mu_y == 0.0:
        psi_y = _psi_quadratic(t, v, p.sigma_y)
        if p.sigma_x == 0.0:
            return TailLimit(-p.m * t, -math.inf, psi_y, t, v)
        s2 = p.sigma_x * p.sigma_x
        psi_x = -2.0 / (s2 * t)
        if isinstance(nu, ExponentialJumps):
            phi = -(2.0 * p.m / (nu.lam_x * s2)) * math.log1p(0.5 * nu.lam_x * s2 * t)
        else:
            if nu.j_y > 0.0 and v != 0.0 and p.sigma_y > 0.0:
                return _limit_extrapolated(p, v, t)
            # integral_0^t exp(-c/s) ds = t e^{-c/t} - c E1(c/t), c = 2 j_x / sigma_x^2
            c = 2.0 * nu.j_x / s2
            tail_int = t * math.exp(-c / t) - c * exp1(c / t)
            const = math.exp(nu.j_y * v)
            phi = p.m * (const * tail_int - t)
        return TailLimit(phi, psi_x, psi_y, t, v)

    regime_b = (
        p.mu_x == 0.0
        and p.sigma_x == 0.0
        and p.mu_y > 0.0
        and (isinstance(nu, ExponentialJumps) or nu.j_y == 0.0)
    )
    if regime_b:
        # kappa -> -1 as u -> -inf, for either jump law
        psi_y = _regime_b_psi_y(t, v, p.sigma_y, p.mu_y, -1.0)
        return TailLimit(-p.m * t, -math.inf, psi_y, t, v)

    return _limit_extrapolated(p, v, t)


def _limit_extrapolated(p: AjdParams, v: float, t: float) -> TailLimit:
    """Numeric limit along u = -2^k, k = 1..40, accepted when successive values agree."""
    prev = None
    for k in range(1, _LIMIT_KMAX + 1):
        u = -(2.0**k)
        phi, eta, psi_y = _solve_tail(p, 1.0 / u, v, t)
        cur = (phi, psi_y)
        if prev is not None and abs(cur[0] - prev[0]) < _LIMIT_TOL and abs(cur[1] - prev[1]) < _LIMIT_TOL:
            psi_x = 1.0 / eta if eta < 0.0 else -math.inf
            return TailLimit(phi, psi_x, psi_y, t, v)
        prev = cur
    raise ConvergenceError(f"u -> -inf extrapolation did not converge by k={_LIMIT_KMAX}")


def riccati_limit_u_to_neg_inf(p: AjdParams, v: float, t: float) -> TailLimit:
    """Limit of (phi, psi_X, psi_Y)(t, u, v) as the real exponent u -> -inf.

    exp(phi + x psi_x + y psi_y) with the convention 0 * (-inf) = 0 is the
    transform of e^{v Y_T} restricted to the event {X_T = 0}.
    """
    if v > 0.0:
        raise ValueError(f"v must be <= 0, got {v}")
    if t < 0.0:
        raise ValueError("horizon must be nonnegative")
    return _limit_cached(p, float(v), float(t))
