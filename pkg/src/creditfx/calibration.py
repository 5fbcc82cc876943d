"""Non-parametric curve bootstrapping and parametric least-squares fitting.

The three-step snapshot procedure:
  (i)   bootstrap the non-defaultable discount curve from government bond
        quotes by linear least squares (bond prices are linear in the grid
        discount factors);
  (ii)  derive the defaultable curve from CDS quotes through the per-period
        recovery implied by the equidistant spread formula, P~ = F * P;
  (iii) bootstrap the illiquidity premium from corporate bond quotes, which is
        again a linear least-squares problem in the grid L values.

A separate parametric stage fits the short-rate and recovery-driver parameters
to a pair of curves by quasi-Newton minimization of log-price residuals.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .affine import CirPpParams, ShiftFunction, cir_pp_bond
from .errors import CalibrationError
from .recovery import Curve, forward_recovery_simple
from .riccati import AjdParams, ExponentialJumps

__all__ = [
    "BondQuote",
    "CdsQuote",
    "CalibrationResult",
    "master_grid",
    "bootstrap_nondefaultable",
    "defaultable_from_cds",
    "implied_cds_spread",
    "bootstrap_illiquidity",
    "fit_parameters",
    "run_bootstrap",
]

_SNAP_TOL = 1e-6
_RIDGE = 1e-8
# relative singular value below which the design matrix counts as rank-deficient
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class BondQuote:
    """Observed dirty price of a coupon bond (government or corporate)."""

    maturity: float
    coupon: float
    price: float
    kind: str = "government"
    frequency: float = 1.0  # coupon payments per year

    def __post_init__(self):
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.price <= 0.0:
            raise ValueError(f"price must be positive, got {self.price}")
        if self.coupon < 0.0:
            raise ValueError("coupon must be nonnegative")
        if self.kind not in ("government", "corporate"):
            raise ValueError(f"kind must be government or corporate, got {self.kind!r}")
        if self.frequency <= 0.0:
            raise ValueError("frequency must be positive")

    def cashflow_dates(self) -> np.ndarray:
        """Payment dates k/frequency, k = 1..n, ending at the maturity."""
        n = int(round(self.maturity * self.frequency))
        if n < 1 or abs(n / self.frequency - self.maturity) > _SNAP_TOL:
            raise ValueError(
                f"maturity {self.maturity} is not a whole number of coupon periods "
                f"at frequency {self.frequency}"
            )
        return np.arange(1, n + 1, dtype=float) * (self.maturity / n)


@dataclass(frozen=True)
class CdsQuote:
    """Running CDS spread quote with premium payment frequency."""

    maturity: float
    spread: float
    frequency: float = 4.0

    def __post_init__(self):
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.spread < 0.0:
            raise ValueError("spread must be nonnegative")
        if self.frequency <= 0.0:
            raise ValueError("frequency must be positive")
        if self.spread / self.frequency >= 1.0:
            raise ValueError(
                f"spread {self.spread} at frequency {self.frequency} implies a "
                "nonpositive per-period recovery"
            )

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def periods(self) -> int:
        n = int(round(self.maturity * self.frequency))
        if n < 1 or abs(n * self.period - self.maturity) > _SNAP_TOL:
            raise ValueError(
                f"maturity {self.maturity} is not a whole number of periods at "
                f"frequency {self.frequency}"
            )
        return n


@dataclass
class CalibrationResult:
    """Bootstrapped curves with per-quote pricing residuals and optional fitted parameters."""

    p_curve: Optional[Curve] = None
    pd_curve: Optional[Curve] = None
    l_curve: Optional[Curve] = None
    residuals: dict = field(default_factory=dict)
    params: Optional[dict] = None


def master_grid(quotes: Sequence, spacing: float = 0.25) -> np.ndarray:
    """Union of all quote cashflow dates snapped to an equidistant lattice.

    Dates must sit within 1e-6 years of a multiple of `spacing`.
    """
    dates: set[float] = set()
    for q in quotes:
        if isinstance(q, BondQuote):
            qdates = q.cashflow_dates()
        else:
            qdates = np.arange(1, q.periods + 1, dtype=float) * q.period
        for d in qdates:
            k = round(d / spacing)
            if abs(k * spacing - d) > _SNAP_TOL:
                raise ValueError(
                    f"cashflow date {d:.8g} does not sit on the {spacing}-spaced grid"
                )
            dates.add(k * spacing)
    if not dates:
        raise ValueError("no quotes supplied")
    return np.array(sorted(dates))


def _grid_index(grid: np.ndarray, date: float) -> int:
    j = int(np.argmin(np.abs(grid - date)))
    if abs(grid[j] - date) > _SNAP_TOL:
        raise ValueError(f"cashflow date {date:.8g} not on the calibration grid")
    return j


def _solve_least_squares(
    a: np.ndarray, y: np.ndarray, ridge: Optional[float], prior: float = 0.0
) -> np.ndarray:
    """Normal-equation solve; Tikhonov weight applied only on detected rank deficiency.

    The ridge shrinks toward `prior` (par for discount factors, zero for
    illiquidity premia), so unpinned tenors fall back to the no-information value.
    """
    sv = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sv > _RANK_TOL * sv[0])) if sv.size else 0
    if rank == a.shape[1]:
        return np.linalg.solve(a.T @ a, a.T @ y)
    if ridge is None:
        raise CalibrationError("quote set is rank deficient and the regularizer is disabled")
    resid = y - a @ np.full(a.shape[1], prior)
    ata = a.T @ a + ridge * np.eye(a.shape[1])
    return prior + np.linalg.solve(ata, a.T @ resid)


def bootstrap_nondefaultable(
    quotes: Sequence[BondQuote],
    grid: np.ndarray,
    ridge: Optional[float] = _RIDGE,
) -> tuple[Curve, np.ndarray]:
    """Step (i): least-squares discount factors P(0,T_j) on the grid from bond quotes.

    Model prices are linear in the grid values (coupon accruals plus the
    principal at maturity), so the fit solves the normal equations; a Tikhonov
    weight of 1e-8 is added only for rank-deficient quote sets (pass
    ridge=None to disable and fail instead).

    Returns the fitted curve and the per-quote residuals (model - quoted).
    """
    quotes = list(quotes)
    if not quotes:
        raise ValueError("need at least one government bond quote")
    grid = np.asarray(grid, dtype=float)
    a = np.zeros((len(quotes), grid.size))
    y = np.empty(len(quotes))
    for qi, q in enumerate(quotes):
        dates = q.cashflow_dates()
        accruals = np.diff(np.concatenate(([0.0], dates)))
        for d, acc in zip(dates, accruals):
            a[qi, _grid_index(grid, d)] += q.coupon * acc
        a[qi, _grid_index(grid, q.maturity)] += 1.0
        y[qi] = q.price
    values = _solve_least_squares(a, y, ridge, prior=1.0)
    bad = np.nonzero(values <= 0.0)[0]
    if bad.size:
        raise CalibrationError(
            f"fitted discount factors nonpositive at tenors {grid[bad].tolist()}"
        )
    curve = Curve(grid, values, kind="discount")
    return curve, a @ values - y


def defaultable_from_cds(
    cds: Sequence[CdsQuote], p_curve: Curve, grid: np.ndarray
) -> Curve:
    """Step (ii): defaultable discount curve P~ = F * P from CDS quotes.

    Each quote pins the per-period recovery F(0, Delta) = 1 - spread * Delta;
    the recovery-curve node at the quote maturity compounds it over the quote's
    n periods, (1 - s Delta)^n (exact for single-period quotes), with
    log-linear interpolation between nodes anchored at F(0,0) = 1.
    """
    cds = sorted(cds, key=lambda q: q.maturity)
    if not cds:
        raise ValueError("need at least one CDS quote")
    mats = [q.maturity for q in cds]
    if len(set(mats)) != len(mats):
        raise ValueError("duplicate CDS maturities")
    tenors = [0.0]
    values = [1.0]
    for q in cds:
        per_period = 1.0 - q.spread * q.period
        tenors.append(q.maturity)
        values.append(per_period**q.periods)
    f_curve = Curve(np.array(tenors), np.array(values), kind="recovery")
    grid = np.asarray(grid, dtype=float)
    pd_values = f_curve.sample(grid) * p_curve.sample(grid)
    return Curve(grid, pd_values, kind="discount")


def implied_cds_spread(f_curve: Curve, maturity: float, frequency: float) -> float:
    """Invert the step-(ii) convention: the spread a recovery curve implies for a quote.

    Geometric de-compounding: s = (1 - F(0,T)^{1/n}) / Delta with Delta = 1/frequency.
    """
    delta = 1.0 / frequency
    n = int(round(maturity * frequency))
    if n < 1 or abs(n * delta - maturity) > _SNAP_TOL:
        raise ValueError("maturity is not a whole number of periods")
    f_mat = float(f_curve(maturity))
    return (1.0 - f_mat ** (1.0 / n)) / delta


def bootstrap_illiquidity(
    quotes: Sequence[BondQuote],
    pd_curve: Curve,
    grid: np.ndarray,
    ridge: Optional[float] = _RIDGE,
) -> tuple[Curve, np.ndarray]:
    """Step (iii): illiquidity premia L(0,T_j) >= 0 explaining corporate-bond residuals.

    The residual of each quote against its pure-credit model price is linear in
    the grid L values (L enters only through coupon terms); negative fitted
    values are clipped to zero with a warning per clipped tenor.
    """
    quotes = list(quotes)
    if not quotes:
        raise ValueError("need at least one corporate bond quote")
    if all(q.coupon == 0.0 for q in quotes):
        raise CalibrationError(
            "zero-coupon corporate bonds carry no illiquidity information "
            "(L enters only through coupon terms)"
        )
    grid = np.asarray(grid, dtype=float)
    a = np.zeros((len(quotes), grid.size))
    y = np.empty(len(quotes))
    for qi, q in enumerate(quotes):
        dates = q.cashflow_dates()
        accruals = np.diff(np.concatenate(([0.0], dates)))
        credit_price = float(
            pd_curve(q.maturity) + q.coupon * np.sum(accruals * pd_curve.sample(dates))
        )
        for d, acc in zip(dates, accruals):
            a[qi, _grid_index(grid, d)] += q.coupon * acc
        y[qi] = q.price - credit_price
    values = _solve_least_squares(a, y, ridge)
    residuals = a @ values - y
    clipped = np.nonzero(values < 0.0)[0]
    for j in clipped:
        warnings.warn(
            f"illiquidity premium clipped to 0 at tenor {grid[j]:.6g} "
            f"(fitted {values[j]:.3e})",
            stacklevel=2,
        )
    values = np.maximum(values, 0.0)
    return Curve(grid, values, kind="illiquidity"), residuals


_FIT_NAMES = ("r0", "b_x", "beta_x", "sigma_x", "f1", "f2", "f3", "m_x", "lam_x", "sigma_xx")
_FIT_BOUNDS = {
    "r0": (-0.1, 0.5),
    "b_x": (1e-6, 2.0),
    "beta_x": (1e-4, 5.0),
    "sigma_x": (1e-5, 1.5),
    "f1": (-0.5, 0.5),
    "f2": (-0.5, 0.5),
    "f3": (-0.5, 0.5),
    "m_x": (1e-8, 20.0),
    "lam_x": (1e-3, 100.0),
    "sigma_xx": (1e-5, 5.0),
}


def _fit_curves(theta: dict, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cir = CirPpParams(
        r0=theta["r0"],
        b_x=theta["b_x"],
        beta_x=theta["beta_x"],
        sigma_x=theta["sigma_x"],
        shift=ShiftFunction(theta["f1"], theta["f2"], theta["f3"]),
    )
    ajd = AjdParams(
        sigma_x=theta["sigma_xx"],
        sigma_y=0.0,
        m=theta["m_x"],
        mu_x=0.0,
        mu_y=0.0,
        jumps=ExponentialJumps(theta["lam_x"]),
        x0=0.0,
        y0=0.0,
        h=0.25,
    )
    p_model = np.array([cir_pp_bond(cir, float(t)) for t in grid])
    f_model = np.array([forward_recovery_simple(ajd, 0.0, float(t)) for t in grid])
    return p_model, f_model


def fit_parameters(
    p_curve: Curve,
    pd_curve: Curve,
    init: dict,
    frozen: Sequence[str] = (),
    max_iter: int = 400,
) -> CalibrationResult:
    """Least-squares fit of the ten model parameters to a (P, P~) curve pair.

    Minimizes the sum of squared log-price residuals over both curves with
    x0 = 0 and mu_X = 0 (the closed-form regime), using L-BFGS-B with
    finite-difference gradients inside box bounds; the Feller condition is
    enforced by penalty.  Parameter names: r0, b_x, beta_x, sigma_x (short
    rate), f1, f2, f3 (shift), m_x, lam_x, sigma_xx (recovery driver).

    Identifiability of individual parameters is not claimed; the fit targets
    the curve values.  Non-convergence reports best-so-far with a warning.
    """
    if not np.array_equal(p_curve.tenors, pd_curve.tenors):
        raise ValueError("curves must share a tenor grid")
    missing = [k for k in _FIT_NAMES if k not in init]
    if missing:
        raise ValueError(f"init missing parameters: {missing}")
    grid = p_curve.tenors
    log_p = np.log(p_curve.values)
    log_f = np.log(pd_curve.values) - log_p

    free = [k for k in _FIT_NAMES if k not in frozen]

    def unpack(x: np.ndarray) -> dict:
        theta = dict(init)
        theta.update(dict(zip(free, x)))
        return theta

    def objective(x: np.ndarray) -> float:
        theta = unpack(x)
        feller = 2.0 * theta["b_x"] - theta["sigma_x"] ** 2
        if feller < 0.0:
            return 1e6 * (1.0 + feller**2)
        try:
            p_model, f_model = _fit_curves(theta, grid)
        except (ValueError, ArithmeticError):
            return 1e8
        rp = np.log(p_model) - log_p
        rf = np.log(f_model) - log_f
        return float(rp @ rp + rf @ rf)

    x0 = np.array([init[k] for k in free])
    bounds = [_FIT_BOUNDS[k] for k in free]
    res = minimize(
        objective, x0, method="L-BFGS-B", bounds=bounds,
        options={"maxiter": max_iter, "ftol": 1e-18, "gtol": 1e-14, "maxfun": 40 * max_iter},
    )
    if not res.success:
        warnings.warn(f"parameter fit did not fully converge: {res.message}", stacklevel=2)
    theta = unpack(res.x)
    p_model, f_model = _fit_curves(theta, grid)
    residuals = {
        "log_p": np.log(p_model) - log_p,
        "log_f": np.log(f_model) - log_f,
        "norm": math.sqrt(res.fun) if res.fun > 0 else 0.0,
    }
    fitted_p = Curve(grid, p_model, kind="discount")
    fitted_pd = Curve(grid, f_model * p_model, kind="discount")
    return CalibrationResult(
        p_curve=fitted_p, pd_curve=fitted_pd, l_curve=None, residuals=residuals, params=theta
    )


def run_bootstrap(
    gov_quotes: Sequence[BondQuote],
    cds_quotes: Sequence[CdsQuote],
    corp_quotes: Sequence[BondQuote],
    grid: np.ndarray,
) -> CalibrationResult:
    """Steps (i)-(iii) in sequence on a shared grid."""
    if not gov_quotes:
        raise CalibrationError("missing government quotes")
    p_curve, res_gov = bootstrap_nondefaultable(gov_quotes, grid)
    result = CalibrationResult(p_curve=p_curve, residuals={"government": res_gov})
    if cds_quotes:
        result.pd_curve = defaultable_from_cds(cds_quotes, p_curve, grid)
        f_curve = Curve(
            result.pd_curve.tenors,
            result.pd_curve.values / p_curve.values,
            kind="recovery",
        )
        result.residuals["cds"] = np.array(
            [implied_cds_spread(f_curve, q.maturity, q.frequency) - q.spread for q in cds_quotes]
        )
    if corp_quotes:
        if result.pd_curve is None:
            raise CalibrationError("corporate bonds need a defaultable curve (CDS quotes)")
        result.l_curve, res_corp = bootstrap_illiquidity(corp_quotes, result.pd_curve, grid)
        result.residuals["corporate"] = res_corp
    return result
