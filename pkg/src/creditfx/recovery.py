"""Forward recovery rates and term-structure curve operations.

The defaultable bond pays 1{X_T = 0} + e^{-X_{T+h}} 1{X_T > 0}: either full
liquidity is observed at T, or the post-squeeze recovery becomes known after
the unwinding delay h.  The forward recovery rate F(t,T) = P~(t,T)/P(t,T) is
the conditional expectation of that payoff and decomposes into three
exponential-affine terms (atom mass, a delayed transform, and an
atom-restricted correction), so no Fourier inversion is ever needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .affine import ProcessState, laplace, restricted_transform
from .errors import CurveRangeError
from .riccati import AjdParams, riccati_limit_u_to_neg_inf, transform

__all__ = [
    "Curve",
    "forward_recovery_delayed",
    "forward_recovery_simple",
    "cascaded_value",
    "curve_forward_recovery",
    "curve_rates",
]

_KINDS = ("discount", "recovery", "illiquidity", "rate")


@dataclass(frozen=True, eq=False)
class Curve:
    """A discrete term structure: strictly increasing tenors with an interpolation policy.

    Discount and recovery curves are positive and interpolate log-linearly with
    flat extrapolation beyond the last tenor; querying below the first tenor is
    an error.  Illiquidity and rate curves interpolate linearly (values may
    touch zero or change sign).
    """

    tenors: np.ndarray
    values: np.ndarray
    kind: str = "discount"
    interpolation: str = field(default="")

    def __post_init__(self):
        tenors = np.asarray(self.tenors, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "values", values)
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not self.interpolation:
            default = "loglinear" if self.kind in ("discount", "recovery") else "linear"
            object.__setattr__(self, "interpolation", default)
        if self.interpolation not in ("loglinear", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if tenors.ndim != 1 or tenors.size == 0 or tenors.shape != values.shape:
            raise ValueError("tenors and values must be matching non-empty 1-d arrays")
        if tenors[0] < 0.0 or np.any(np.diff(tenors) <= 0.0):
            raise ValueError("tenors must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        if self.kind in ("discount", "recovery"):
            if np.any(values <= 0.0):
                raise ValueError(f"{self.kind} curve values must be positive")
            if tenors[0] == 0.0 and abs(values[0] - 1.0) > 1e-12:
                raise ValueError(f"{self.kind} curve must equal 1 at tenor 0")
        if self.kind == "recovery" and np.any(values > 1.0 + 1e-12):
            raise ValueError("recovery values must not exceed 1")
        if self.kind == "illiquidity" and np.any(values < 0.0):
            raise ValueError("illiquidity values must be nonnegative")
        if self.interpolation == "loglinear" and np.any(values <= 0.0):
            raise ValueError("log-linear interpolation requires positive values")

    def __call__(self, t):
        """Interpolated value(s) at t; flat beyond the last tenor, error below the first."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self.tenors[0] - 1e-12):
            raise CurveRangeError(
                f"query at {np.min(t_arr):.6g} below first tenor {self.tenors[0]:.6g}"
            )
        t_clipped = np.clip(t_arr, self.tenors[0], self.tenors[-1])
        if self.interpolation == "loglinear":
            out = np.exp(np.interp(t_clipped, self.tenors, np.log(self.values)))
        else:
            out = np.interp(t_clipped, self.tenors, self.values)
        return float(out) if t_arr.ndim == 0 else out

    def sample(self, grid) -> np.ndarray:
        return np.atleast_1d(self(np.asarray(grid, dtype=float)))


def forward_recovery_delayed(p: AjdParams, s: ProcessState, T: float) -> float:
    """F(t,T) under the delayed-observation payoff, from state s; value in (0, 1].

    Three terms: the atom mass at T, the h-delayed transform propagated to T,
    and the same transform restricted to {X_T = 0} (a u -> -inf limit), which
    removes the double count on the atom.
    """
    if T < s.t:
        raise ValueError(f"T={T} precedes state time {s.t}")
    tr_h = transform(p, -1.0, 0.0, p.h)
    phi_h, a, b = tr_h.phi, tr_h.psi_x, tr_h.psi_y

    atom = restricted_transform(p, s, T, 0.0)
    minuend = math.exp(phi_h) * laplace(p, s, T, a, b)
    subtrahend = math.exp(phi_h) * restricted_transform(p, s, T, b)
    return atom + minuend - subtrahend


def forward_recovery_simple(p: AjdParams, x0: float, T: float) -> float:
    """F(0,T) = E[e^{-X_T}] from X_0 = x0 (and Y_0 = p.y0); F(0,0) = e^{-x0}."""
    if T < 0.0:
        raise ValueError("maturity must be nonnegative")
    if x0 < 0.0:
        raise ValueError("x0 must be nonnegative")
    tr = transform(p, -1.0, 0.0, T)
    return math.exp(tr.phi + x0 * tr.psi_x + p.y0 * tr.psi_y)


def cascaded_value(p: AjdParams, s: ProcessState, T1: float, T2: float) -> float:
    """Two-date cascaded payoff value for a schedule T1 < T2 with delay h.

    Pays the delayed-recovery payoff of T2 if the T1 squeeze resolved
    (X_{T1+h} = 0), or e^{-X_{T1+h}} if a squeeze at T1 turned into a default
    (X_{T1} > 0 and X_{T1+h} > 0).  Requires T1 + h <= T2; the reversed
    ordering has no published closed recipe and is rejected.
    """
    h = p.h
    if not (s.t <= T1 < T1 + h <= T2):
        raise ValueError(
            f"need state time <= T1 < T1+h <= T2, got t={s.t}, T1={T1}, h={h}, T2={T2}"
        )
    tr_h = transform(p, -1.0, 0.0, h)
    phi_h, a, b = tr_h.phi, tr_h.psi_x, tr_h.psi_y
    e_phi_h = math.exp(phi_h)
    delta2 = T2 - (T1 + h)

    # Inner block E[payoff(T2) | F_{T1+h}] = sum_k c_k exp(p_k x' + q_k y'); each
    # term is then restricted to {X_{T1+h} = 0}, where exp(p_k * 0) = 1.
    lim0 = riccati_limit_u_to_neg_inf(p, 0.0, delta2)
    tr2 = transform(p, a, b, delta2)
    limb = riccati_limit_u_to_neg_inf(p, b, delta2)
    inner = (
        (math.exp(lim0.phi), lim0.psi_y),
        (e_phi_h * math.exp(tr2.phi), tr2.psi_y),
        (-e_phi_h * math.exp(limb.phi), limb.psi_y),
    )
    resolved = sum(c * restricted_transform(p, s, T1 + h, q) for c, q in inner)

    # E[e^{-X_{T1+h}} 1{X_{T1}>0} 1{X_{T1+h}>0}]
    #   = E[e^{-X} 1{X>0}](T1+h) - E[1{X_{T1}=0} E[e^{-X_{T1+h}} 1{X_{T1+h}>0} | F_{T1}]]
    off_atom = laplace(p, s, T1 + h, -1.0, 0.0) - restricted_transform(p, s, T1 + h, 0.0)
    lim_h0 = riccati_limit_u_to_neg_inf(p, 0.0, h)
    corr = e_phi_h * restricted_transform(p, s, T1, b) - math.exp(
        lim_h0.phi
    ) * restricted_transform(p, s, T1, lim_h0.psi_y)
    return resolved + off_atom - corr


def _common_grid(a: Curve, b: Curve) -> np.ndarray:
    lo = max(a.tenors[0], b.tenors[0])
    hi = min(a.tenors[-1], b.tenors[-1])
    if lo > hi:
        raise CurveRangeError("curves cover disjoint tenor ranges")
    grid = np.union1d(a.tenors, b.tenors)
    return grid[(grid >= lo - 1e-12) & (grid <= hi + 1e-12)]


def curve_forward_recovery(pt: Curve, pd: Curve) -> Curve:
    """Forward recovery curve F = Pd / Pt, the defaultable-to-riskless price ratio."""
    if np.array_equal(pt.tenors, pd.tenors):
        grid = pt.tenors
        ratio = pd.values / pt.values
    else:
        grid = _common_grid(pt, pd)
        ratio = pd.sample(grid) / pt.sample(grid)
    return Curve(grid, ratio, kind="recovery")


def curve_rates(c: Curve) -> Curve:
    """Instantaneous forward rates -d log c / dT by grid-native finite differences.

    Central differences in the interior, one-sided at the ends; exact for
    log-linear data.  Applied to a recovery curve this yields the credit-spread
    term structure.
    """
    if c.tenors.size < 2:
        raise ValueError("need at least two tenors to differentiate")
    logv = np.log(c.values)
    t = c.tenors
    rates = np.empty_like(logv)
    rates[0] = -(logv[1] - logv[0]) / (t[1] - t[0])
    rates[-1] = -(logv[-1] - logv[-2]) / (t[-1] - t[-2])
    if t.size > 2:
        rates[1:-1] = -(logv[2:] - logv[:-2]) / (t[2:] - t[:-2])
    return Curve(t, rates, kind="rate")
