"""Payoff descriptors and the Monte-Carlo estimator.

The zero indicator is X < 1e-12: Euler paths reach exact zero only through
flooring, so with x0 = 0 and no jump the state is exactly zero and the
threshold only matters after a jump, where it approximates absorption of the
driftless square-root diffusion.  This is the dominant Monte-Carlo bias source
(see the dt-refinement study in the tests).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..credit import PaymentSchedule
from ..recovery import Curve
from ._engine import PathBundle

__all__ = [
    "ZERO_TOL",
    "McEstimate",
    "SimpleRecovery",
    "DelayedRecovery",
    "AtomIndicator",
    "CascadedPayoff",
    "SurvivalProfile",
    "DefaultAt",
    "RecoveryGivenDefault",
    "CdsLegs",
    "mc_estimate",
]

ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class McEstimate:
    value: Union[float, np.ndarray]
    standard_error: Union[float, np.ndarray]
    n_samples: int


@dataclass(frozen=True)
class SimpleRecovery:
    """e^{-X_T}: the undelayed expected recovery."""

    maturity: float

    def samples(self, b: PathBundle) -> np.ndarray:
        return np.exp(-b.x_at(self.maturity))


@dataclass(frozen=True)
class DelayedRecovery:
    """1{X_T = 0} + e^{-X_{T+h}} 1{X_T > 0}: recovery observed after the delay h."""

    maturity: float
    delay: float

    def samples(self, b: PathBundle) -> np.ndarray:
        x_t = b.x_at(self.maturity)
        x_th = b.x_at(self.maturity + self.delay)
        return np.where(x_t < ZERO_TOL, 1.0, np.exp(-x_th))


@dataclass(frozen=True)
class AtomIndicator:
    """1{X_T = 0}: full liquidity at T."""

    maturity: float

    def samples(self, b: PathBundle) -> np.ndarray:
        return (b.x_at(self.maturity) < ZERO_TOL).astype(float)


@dataclass(frozen=True)
class CascadedPayoff:
    """Two-date cascade: the T2 delayed payoff if the T1 squeeze healed by T1+h,
    else the post-default recovery e^{-X_{T1+h}}."""

    t1: float
    t2: float
    delay: float

    def samples(self, b: PathBundle) -> np.ndarray:
        x1 = b.x_at(self.t1)
        x1h = b.x_at(self.t1 + self.delay)
        x2 = b.x_at(self.t2)
        x2h = b.x_at(self.t2 + self.delay)
        inner = np.where(x2 < ZERO_TOL, 1.0, np.exp(-x2h))
        resolved = np.where(x1h < ZERO_TOL, inner, 0.0)
        defaulted = np.where((x1 >= ZERO_TOL) & (x1h >= ZERO_TOL), np.exp(-x1h), 0.0)
        return resolved + defaulted


def _squeeze_matrix(b: PathBundle, sched: PaymentSchedule) -> np.ndarray:
    cols = [b.index_of(float(t)) for t in sched.payment_dates]
    return b.x[:, cols] >= ZERO_TOL


def _default_index(squeezed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per path: whether a default happened and the 0-based date index of tau."""
    any_default = squeezed.any(axis=1)
    tau = squeezed.argmax(axis=1)
    return any_default, tau


@dataclass(frozen=True)
class SurvivalProfile:
    """1{tau > T_i} for every schedule date: no squeeze at any date up to T_i."""

    schedule: PaymentSchedule

    def samples(self, b: PathBundle) -> np.ndarray:
        squeezed = _squeeze_matrix(b, self.schedule)
        return 1.0 - np.maximum.accumulate(squeezed, axis=1).astype(float)


@dataclass(frozen=True)
class DefaultAt:
    """1{tau = T_i} for date index i (1-based; None gives the whole profile)."""

    schedule: PaymentSchedule
    index: Optional[int] = None

    def samples(self, b: PathBundle) -> np.ndarray:
        squeezed = _squeeze_matrix(b, self.schedule)
        any_default, tau = _default_index(squeezed)
        if self.index is None:
            out = np.zeros_like(squeezed, dtype=float)
            out[np.nonzero(any_default)[0], tau[any_default]] = 1.0
            return out
        return (any_default & (tau == self.index - 1)).astype(float)


@dataclass(frozen=True)
class RecoveryGivenDefault:
    """e^{-X_{T_i}} 1{tau = T_i} for date index i (1-based; None gives the profile)."""

    schedule: PaymentSchedule
    index: Optional[int] = None

    def samples(self, b: PathBundle) -> np.ndarray:
        squeezed = _squeeze_matrix(b, self.schedule)
        any_default, tau = _default_index(squeezed)
        cols = [b.index_of(float(t)) for t in self.schedule.payment_dates]
        recov = np.exp(-b.x[:, cols])
        if self.index is None:
            mask = np.zeros_like(squeezed, dtype=float)
            mask[np.nonzero(any_default)[0], tau[any_default]] = 1.0
            return recov * mask
        ind = (any_default & (tau == self.index - 1)).astype(float)
        return recov[:, self.index - 1] * ind


@dataclass(frozen=True, eq=False)
class CdsLegs:
    """Per-path protection and premium legs discounted off a curve; the estimate is
    the ratio of means (the fair running spread)."""

    schedule: PaymentSchedule
    discount: Curve

    def ratio_samples(self, b: PathBundle) -> tuple[np.ndarray, np.ndarray]:
        sched = self.schedule
        squeezed = _squeeze_matrix(b, sched)
        any_default, tau = _default_index(squeezed)
        cols = [b.index_of(float(t)) for t in sched.payment_dates]
        dfs = self.discount.sample(sched.payment_dates)
        accr = sched.accruals
        n_dates = len(cols)

        default_at = np.zeros(squeezed.shape, dtype=float)
        default_at[np.nonzero(any_default)[0], tau[any_default]] = 1.0
        loss = 1.0 - np.exp(-b.x[:, cols])
        protection = (default_at * loss * dfs[np.newaxis, :]).sum(axis=1)

        # premium accrues on dates with tau >= T_i, i.e. no default strictly before
        tau_eff = np.where(any_default, tau, n_dates)
        alive = np.arange(n_dates)[np.newaxis, :] <= tau_eff[:, np.newaxis]
        premium = (alive * (accr * dfs)[np.newaxis, :]).sum(axis=1)
        return protection, premium


def _pair_average(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a[0::2] + a[1::2])


def mc_estimate(bundle: PathBundle, payoff) -> McEstimate:
    """Sample mean and standard error of a payoff (antithetic pairs averaged first).

    Ratio payoffs (CdsLegs) use the delta method:
    se(num/den) ~ sd(num_i - r * den_i) / (sqrt(n) * mean(den)).
    """
    anti = bundle.config.antithetic
    if hasattr(payoff, "ratio_samples"):
        num, den = payoff.ratio_samples(bundle)
        if anti:
            num, den = _pair_average(num), _pair_average(den)
        n = num.shape[0]
        mu_d = float(den.mean())
        if mu_d == 0.0:
            raise ZeroDivisionError("premium leg vanished in every sample")
        ratio = float(num.mean()) / mu_d
        resid = num - ratio * den
        se = float(resid.std(ddof=1)) / (math.sqrt(n) * mu_d)
        return McEstimate(value=ratio, standard_error=se, n_samples=n)

    samples = payoff.samples(bundle)
    if anti:
        samples = _pair_average(samples)
    n = samples.shape[0]
    value = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    if samples.ndim == 1:
        return McEstimate(value=float(value), standard_error=float(se), n_samples=n)
    return McEstimate(value=value, standard_error=se, n_samples=n)
