"""Command-line surface: pricing, calibration, simulation and curve export.

Exit codes: 0 success, 2 input/validation failure, 3 numeric failure,
4 solver failure.  All commands are deterministic given their inputs and
flags; curve CSVs are written with 17 significant digits.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import calibration as cal
from .affine import ProcessState, atom_mass_zero, cir_pp_bond
from .credit import PaymentSchedule, cds_spread, corp_bond_value, credit_term_sheet, gov_bond_value
from .errors import BlowUpError, CalibrationError, ConvergenceError, CurveRangeError
from .io import (
    FLOAT_FMT,
    ParamFileError,
    load_params,
    read_curve_csv,
    read_quotes_csv,
    write_curve_csv,
)
from .recovery import Curve, curve_rates, forward_recovery_delayed, forward_recovery_simple, cascaded_value
from .simulation import (
    AtomIndicator,
    CascadedPayoff,
    DelayedRecovery,
    SimConfig,
    SimpleRecovery,
    backend_name,
    mc_estimate,
    simulate_xy,
)

_EXIT_INPUT = 2
_EXIT_NUMERIC = 3
_EXIT_SOLVER = 4


def _exit_codes(fn):
    """Map library exceptions onto the CLI exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CalibrationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_EXIT_SOLVER)
        except (BlowUpError, ConvergenceError, CurveRangeError, ZeroDivisionError,
                FloatingPointError, OverflowError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_EXIT_NUMERIC)
        except (ParamFileError, ValueError, KeyError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_EXIT_INPUT)

    return wrapper


def _parse_grid(spec: str) -> np.ndarray:
    """Grid spec: either 'start:stop:step' (stop inclusive) or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be start:stop:step, got {spec!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0 or stop < start:
            raise ValueError("grid spec needs step > 0 and stop >= start")
        n = int(round((stop - start) / step))
        grid = start + step * np.arange(n + 1)
        grid = grid[grid <= stop + 1e-12]
    else:
        grid = np.array([float(x) for x in spec.split(",")])
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    return grid


@click.group()
def main():
    """Credit and liquidity term-structure analytics."""


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--grid", "grid_spec", default="0.25:10:0.25", show_default=True,
              help="Tenor grid, start:stop:step or comma list.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_exit_codes
def curve(params_path, grid_spec, out_dir):
    """Write P, F, Ptilde and credit-spread curves as CSV files."""
    parsed = load_params(params_path)
    ajd = parsed.require("ajd")
    cirpp = parsed.require("cirpp")
    grid = _parse_grid(grid_spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    p_vals = np.array([cir_pp_bond(cirpp, float(t)) for t in grid])
    state = ProcessState(x=ajd.x0, y=ajd.y0, t=0.0)
    f_vals = np.array([forward_recovery_delayed(ajd, state, float(t)) for t in grid])
    p_curve = Curve(grid, p_vals, kind="discount")
    f_curve = Curve(grid, f_vals, kind="recovery")
    pd_curve = Curve(grid, f_vals * p_vals, kind="discount")
    write_curve_csv(out / "P.csv", p_curve)
    write_curve_csv(out / "F.csv", f_curve)
    write_curve_csv(out / "Ptilde.csv", pd_curve)
    write_curve_csv(out / "spread.csv", curve_rates(f_curve))
    click.echo(f"wrote P.csv, F.csv, Ptilde.csv, spread.csv to {out}")


def _term_sheet_lines(sheet) -> list[str]:
    lines = ["      T_i        survival              pd             rgd"]
    for t, s, q, r in zip(sheet.dates, sheet.survival, sheet.pd, sheet.rgd):
        lines.append(f"{t:9.4f}  {s:14.10f}  {q:14.10f}  {r:14.10f}")
    return lines


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--product", type=click.Choice(["gov", "corp", "cds"]), required=True)
@click.option("--l-curve", "l_curve_path", type=click.Path(), default=None,
              help="Illiquidity curve CSV for corporate bonds (default: zero).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@_exit_codes
def price(params_path, product, l_curve_path, as_json):
    """Price a bond or CDS off the parametric curves."""
    parsed = load_params(params_path)
    cirpp = parsed.require("cirpp")
    sched = parsed.require("schedule")
    dates = sched.payment_dates
    p_vals = np.array([cir_pp_bond(cirpp, float(t)) for t in dates])
    p_curve = Curve(dates, p_vals, kind="discount")

    result = {"product": product}
    sheet = None
    if product == "gov":
        result["price"] = gov_bond_value(p_curve, sched)
    else:
        ajd = parsed.require("ajd")
        if product == "corp":
            f_vals = np.array(
                [forward_recovery_simple(ajd, ajd.x0, float(t)) for t in dates]
            )
            pd_curve = Curve(dates, f_vals * p_vals, kind="discount")
            if l_curve_path:
                l_curve = read_curve_csv(l_curve_path, kind="illiquidity")
            else:
                l_curve = Curve(dates, np.zeros_like(dates), kind="illiquidity")
            result["price"] = corp_bond_value(pd_curve, l_curve, sched)
        else:
            result["spread"] = cds_spread(p_curve, ajd, ajd.x0, sched)
        sheet = credit_term_sheet(ajd, ajd.x0, sched)
        result["term_sheet"] = {
            "dates": list(sheet.dates),
            "survival": list(sheet.survival),
            "pd": list(sheet.pd),
            "rgd": list(sheet.rgd),
        }

    if as_json:
        click.echo(json.dumps(result, sort_keys=True))
        return
    key = "spread" if product == "cds" else "price"
    click.echo(f"product: {product}")
    click.echo(f"{key}: {result[key]!r}")
    if sheet is not None:
        for line in _term_sheet_lines(sheet):
            click.echo(line)


@main.command()
@click.option("--quotes", "quotes_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["bootstrap", "fit"]), default="bootstrap",
              show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--grid-spacing", default=0.25, show_default=True)
@_exit_codes
def calibrate(quotes_path, mode, out_dir, grid_spacing):
    """Bootstrap P, Ptilde and L from a quotes CSV; optionally fit model parameters."""
    gov, corp, cds = read_quotes_csv(quotes_path)
    if not gov:
        raise CalibrationError("missing government quotes")
    grid = cal.master_grid(gov + corp + cds, spacing=grid_spacing)
    result = cal.run_bootstrap(gov, cds, corp, grid)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_curve_csv(out / "P.csv", result.p_curve)
    if result.pd_curve is not None:
        write_curve_csv(out / "Pd.csv", result.pd_curve)
    if result.l_curve is not None:
        write_curve_csv(out / "L.csv", result.l_curve)
    with open(out / "residuals.csv", "w") as fh:
        fh.write("kind,index,residual\n")
        for kind in ("government", "cds", "corporate"):
            for i, r in enumerate(result.residuals.get(kind, [])):
                fh.write(f"{kind},{i},{FLOAT_FMT % r}\n")

    if mode == "fit":
        if result.pd_curve is None:
            raise CalibrationError("fit mode needs CDS quotes to imply the defaultable curve")
        init = {
            "r0": 0.02, "b_x": 0.04, "beta_x": 0.5, "sigma_x": 0.1,
            "f1": 0.0, "f2": 0.0, "f3": 0.0,
            "m_x": 0.5, "lam_x": 2.0, "sigma_xx": 0.4,
        }
        fit = cal.fit_parameters(result.p_curve, result.pd_curve, init)
        doc = {
            "params": fit.params,
            "residual_norm": fit.residuals["norm"],
        }
        (out / "params.json").write_text(json.dumps(doc, sort_keys=True))
    click.echo(f"calibration written to {out}")


_PAYOFFS = ("simple-recovery", "delayed-recovery", "atom", "cascaded")


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path())
@click.option("--payoff", type=click.Choice(_PAYOFFS), default="simple-recovery",
              show_default=True)
@click.option("--maturity", "-T", "maturity", default=1.0, show_default=True)
@click.option("--t2", default=None, type=float, help="Second date for the cascaded payoff.")
@click.option("--paths", default=100_000, show_default=True)
@click.option("--dt", default=1.0 / 500.0, show_default="1/500")
@click.option("--seed", default=20240901, show_default=True)
@click.option("--antithetic", is_flag=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--dump-paths", "dump_path", type=click.Path(), default=None,
              help="Write path_id,time,X,Y rows for every recorded time.")
@click.option("--json", "as_json", is_flag=True)
@_exit_codes
def simulate(params_path, payoff, maturity, t2, paths, dt, seed, antithetic, workers,
             dump_path, as_json):
    """Monte-Carlo estimate of a payoff with its analytic counterpart and z-score."""
    parsed = load_params(params_path)
    ajd = parsed.require("ajd")
    state = ProcessState(x=ajd.x0, y=ajd.y0, t=0.0)

    if payoff == "simple-recovery":
        desc = SimpleRecovery(maturity)
        analytic = forward_recovery_simple(ajd, ajd.x0, maturity)
        horizon, record = maturity, (maturity,)
    elif payoff == "delayed-recovery":
        desc = DelayedRecovery(maturity, ajd.h)
        analytic = forward_recovery_delayed(ajd, state, maturity)
        horizon, record = maturity + ajd.h, (maturity, maturity + ajd.h)
    elif payoff == "atom":
        desc = AtomIndicator(maturity)
        analytic = atom_mass_zero(ajd, state, maturity)
        horizon, record = maturity, (maturity,)
    else:
        if t2 is None:
            raise ValueError("cascaded payoff needs --t2")
        desc = CascadedPayoff(maturity, t2, ajd.h)
        analytic = cascaded_value(ajd, state, maturity, t2)
        horizon = t2 + ajd.h
        record = (maturity, maturity + ajd.h, t2, t2 + ajd.h)

    cfg = SimConfig(
        n_paths=paths, dt=dt, horizon=horizon, seed=seed, antithetic=antithetic,
        record_times=None if dump_path else record, workers=workers,
        collect_jumps=False,
    )
    bundle = simulate_xy(ajd, cfg)
    est = mc_estimate(bundle, desc)
    se = est.standard_error
    if se > 0.0:
        z = (est.value - analytic) / se
    else:
        z = 0.0 if est.value == analytic else float("inf")

    if dump_path:
        with open(dump_path, "w") as fh:
            fh.write("path_id,time,X,Y\n")
            for i in range(bundle.n_paths):
                for j, t in enumerate(bundle.times):
                    fh.write(
                        f"{i},{FLOAT_FMT % t},{FLOAT_FMT % bundle.x[i, j]},"
                        f"{FLOAT_FMT % bundle.y[i, j]}\n"
                    )

    doc = {
        "payoff": payoff,
        "estimate": est.value,
        "standard_error": se,
        "analytic": analytic,
        "z_score": z,
        "paths": paths,
        "seed": seed,
        "backend": backend_name(),
    }
    if as_json:
        click.echo(json.dumps(doc, sort_keys=True))
    else:
        for key in ("payoff", "estimate", "standard_error", "analytic", "z_score",
                    "paths", "seed", "backend"):
            click.echo(f"{key}: {doc[key]!r}")


if __name__ == "__main__":
    main()
