"""Pricing of marketable products: coupon bonds, default probabilities, CDS spreads.

Default semantics: the reference entity defaults at the first schedule date on
which a liquidity squeeze is in force, tau = min{T_i : X_{T_i} > 0}.  Survival
over a period restarts from full recovery, so survival probabilities factor
into per-period atom masses; recovery given default and CDS spreads follow by
recursion.  Discounting is independent of the recovery driver by construction,
which is what lets E[e^{-int r} 1{tau >= T_i}] factor into P(0,T_i) E[1{tau >= T_i}].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affine import ProcessState, atom_mass_zero
from .recovery import Curve, forward_recovery_simple
from .riccati import AjdParams, riccati_limit_u_to_neg_inf, transform

__all__ = [
    "PaymentSchedule",
    "CreditTermSheet",
    "gov_bond_value",
    "corp_bond_value",
    "credit_term_sheet",
    "cds_spread",
    "cds_legs",
]


@dataclass(frozen=True, eq=False)
class PaymentSchedule:
    """Ordered payment dates 0 = T_0 < T_1 < ... < T_n with an annualized coupon."""

    dates: np.ndarray
    coupon: float = 0.0

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype=float)
        object.__setattr__(self, "dates", dates)
        if dates.ndim != 1 or dates.size < 2:
            raise ValueError("schedule needs T_0 = 0 and at least one payment date")
        if dates[0] != 0.0:
            raise ValueError(f"first date must be 0, got {dates[0]}")
        if np.any(np.diff(dates) <= 0.0):
            raise ValueError("dates must be strictly increasing")
        if self.coupon < 0.0:
            raise ValueError("coupon must be nonnegative")

    @classmethod
    def equidistant(cls, maturity: float, periods: int, coupon: float = 0.0) -> "PaymentSchedule":
        if periods < 1 or maturity <= 0.0:
            raise ValueError("need periods >= 1 and maturity > 0")
        dates = np.arange(periods + 1, dtype=float) * (maturity / periods)
        return cls(dates, coupon)

    @property
    def payment_dates(self) -> np.ndarray:
        return self.dates[1:]

    @property
    def accruals(self) -> np.ndarray:
        """Year fractions T_i - T_{i-1}."""
        return np.diff(self.dates)

    @property
    def maturity(self) -> float:
        return float(self.dates[-1])


@dataclass(frozen=True, eq=False)
class CreditTermSheet:
    """Per-date survival probabilities, default probabilities and recovery given default."""

    dates: np.ndarray
    survival: np.ndarray   # Q[tau > T_i]
    pd: np.ndarray         # PD(0, T_i) = 1 - survival
    rgd: np.ndarray        # E[S_{T_i} 1{tau = T_i}]


def gov_bond_value(p_curve: Curve, sched: PaymentSchedule) -> float:
    """Non-defaultable coupon bond: P(0,T_n) + c sum_i (T_i - T_{i-1}) P(0,T_i)."""
    dates = sched.payment_dates
    dfs = p_curve.sample(dates)
    return float(dfs[-1] + sched.coupon * np.sum(sched.accruals * dfs))


def corp_bond_value(pd_curve: Curve, l_curve: Curve, sched: PaymentSchedule) -> float:
    """Defaultable coupon bond: P~(0,T_n) + c sum_i (T_i - T_{i-1}) (P~(0,T_i) + L(0,T_i)).

    The illiquidity curve L enters only through the coupon terms.
    """
    dates = sched.payment_dates
    dfs = pd_curve.sample(dates)
    liq = l_curve.sample(dates)
    return float(dfs[-1] + sched.coupon * np.sum(sched.accruals * (dfs + liq)))


def _require_decoupled_intensity(p: AjdParams) -> None:
    if p.mu_y != 0.0:
        raise ValueError(
            "survival recursion needs a jump intensity independent of Y (mu_y = 0)"
        )


def _period_recovery_factor(p: AjdParams, dt: float) -> float:
    """e^{phi_X(dt, -1)}: expected recovery over one period restarted from X = 0."""
    return math.exp(transform(p, -1.0, 0.0, dt).phi)


def credit_term_sheet(p: AjdParams, x0: float, sched: PaymentSchedule) -> CreditTermSheet:
    """Survival, PD and recovery-given-default vectors on a payment schedule.

    Survival to T_i factors into per-period atom masses (each period restarts
    from full recovery); the first period carries the e^{x0 psi_X-limit}
    prefactor when x0 > 0.  Recovery given default follows the recursion
    rgd_i = e^{phi_X(T_i - T_{i-1}, -1)} surv_{i-1} - surv_i, seeded with
    rgd_1 = F(0,T_1) - surv_1.
    """
    _require_decoupled_intensity(p)
    if x0 < 0.0:
        raise ValueError("x0 must be nonnegative")
    dates = sched.payment_dates
    accruals = sched.accruals
    n = dates.size

    factors = np.empty(n)
    first = riccati_limit_u_to_neg_inf(p, 0.0, float(dates[0]))
    if x0 > 0.0 and math.isinf(first.psi_x):
        factors[0] = 0.0  # sigma_x = 0: a squeezed start never heals
    else:
        factors[0] = math.exp(first.phi + (x0 * first.psi_x if x0 > 0.0 else 0.0))
    for i in range(1, n):
        factors[i] = math.exp(riccati_limit_u_to_neg_inf(p, 0.0, float(accruals[i])).phi)
    survival = np.cumprod(factors)
    pd = 1.0 - survival

    rgd = np.empty(n)
    rgd[0] = forward_recovery_simple(p, x0, float(dates[0])) - survival[0]
    for i in range(1, n):
        rgd[i] = _period_recovery_factor(p, float(accruals[i])) * survival[i - 1] - survival[i]
    return CreditTermSheet(dates.copy(), survival, pd, rgd)


def cds_spread(p_curve: Curve, p: AjdParams, x0: float, sched: PaymentSchedule) -> float:
    """Fair CDS spread equating the premium and protection legs.

        CDS_n = sum_i P(0,T_i)(1 - e^{phi_X(dt_i,-1)}) surv_{i-1}
                / sum_i dt_i P(0,T_i) surv_{i-1}

    with surv_0 = 1; for x0 > 0 the first-period recovery factor is F(0,T_1)
    instead of e^{phi_X(T_1,-1)}.
    """
    _require_decoupled_intensity(p)
    sheet = credit_term_sheet(p, x0, sched)
    dates = sched.payment_dates
    dfs = p_curve.sample(dates)
    accruals = sched.accruals
    surv_prev = np.concatenate(([1.0], sheet.survival[:-1]))

    recovery_factors = np.array(
        [forward_recovery_simple(p, x0, float(dates[0]))]
        + [_period_recovery_factor(p, float(dt)) for dt in accruals[1:]]
    )
    numerator = float(np.sum(dfs * (1.0 - recovery_factors) * surv_prev))
    denominator = float(np.sum(accruals * dfs * surv_prev))
    if denominator <= 0.0:
        raise ZeroDivisionError("degenerate premium leg: no surviving periods")
    return numerator / denominator


def cds_legs(
    p_curve: Curve, sheet: CreditTermSheet, sched: PaymentSchedule, spread: float
) -> tuple[float, float]:
    """Present values of (premium leg at the given spread, protection leg).

    Rebuilt from first principles off the term sheet: the protection payment at
    T_i is E[(1 - S_{T_i}) 1{tau = T_i}] = (pd_i - pd_{i-1}) - rgd_i.
    """
    dates = sched.payment_dates
    dfs = p_curve.sample(dates)
    accruals = sched.accruals
    surv_prev = np.concatenate(([1.0], sheet.survival[:-1]))
    premium = spread * float(np.sum(accruals * dfs * surv_prev))
    default_at = np.diff(np.concatenate(([0.0], sheet.pd)))
    protection = float(np.sum(dfs * (default_at - sheet.rgd)))
    return premium, protection


def survival_probability(p: AjdParams, x0: float, T: float) -> float:
    """Q[X_T = 0] from X_0 = x0: no liquidity squeeze in force at T."""
    return atom_mass_zero(p, ProcessState(x=x0, y=p.y0, t=0.0), T)
