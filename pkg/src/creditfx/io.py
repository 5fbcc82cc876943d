"""Stable file formats: parameter files (JSON), quote CSVs, curve CSV/JSON.

Curve CSVs carry 17 significant digits (scientific notation) so they
round-trip exactly and can serve as regression fixtures.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .affine import CirPpParams, ShiftFunction
from .calibration import BondQuote, CdsQuote
from .credit import PaymentSchedule
from .recovery import Curve
from .riccati import AjdParams, DiracJumps, ExponentialJumps

__all__ = [
    "ParamFileError",
    "ParsedParams",
    "load_params",
    "read_quotes_csv",
    "write_curve_csv",
    "read_curve_csv",
    "curve_to_json",
    "curve_from_json",
    "FLOAT_FMT",
]

FLOAT_FMT = "%.16e"


class ParamFileError(ValueError):
    """Invalid parameter file; the message carries the offending field path."""


def _get(doc: dict, path: str, required: bool = True, default=None):
    node = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ParamFileError(f"{path}: missing required field")
            return default
        node = node[part]
    return node


def _get_number(doc: dict, path: str, required: bool = True, default=None):
    value = _get(doc, path, required, default)
    if value is default and not required:
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParamFileError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ParamFileError(f"{path}: must be finite")
    return float(value)


def _parse_jump(doc: dict):
    kind = _get(doc, "ajd.jump.type")
    if kind == "exponential":
        return ExponentialJumps(_get_number(doc, "ajd.jump.lambda_x"))
    if kind == "dirac":
        return DiracJumps(
            _get_number(doc, "ajd.jump.j_x"),
            _get_number(doc, "ajd.jump.j_y", required=False, default=0.0),
        )
    raise ParamFileError(f"ajd.jump.type: expected 'exponential' or 'dirac', got {kind!r}")


def _parse_ajd(doc: dict) -> AjdParams:
    try:
        return AjdParams(
            sigma_x=_get_number(doc, "ajd.sigma_x"),
            sigma_y=_get_number(doc, "ajd.sigma_y", required=False, default=0.0),
            m=_get_number(doc, "ajd.m"),
            mu_x=_get_number(doc, "ajd.mu_x", required=False, default=0.0),
            mu_y=_get_number(doc, "ajd.mu_y", required=False, default=0.0),
            jumps=_parse_jump(doc),
            x0=_get_number(doc, "ajd.x0", required=False, default=0.0),
            y0=_get_number(doc, "ajd.y0", required=False, default=0.0),
            h=_get_number(doc, "ajd.h"),
        )
    except ValueError as exc:
        if isinstance(exc, ParamFileError):
            raise
        raise ParamFileError(f"ajd: {exc}") from exc


def _parse_cirpp(doc: dict) -> CirPpParams:
    try:
        return CirPpParams(
            r0=_get_number(doc, "cirpp.r0"),
            b_x=_get_number(doc, "cirpp.b_x"),
            beta_x=_get_number(doc, "cirpp.beta_x"),
            sigma_x=_get_number(doc, "cirpp.sigma_x"),
            shift=ShiftFunction(
                _get_number(doc, "cirpp.shift.f1", required=False, default=0.0),
                _get_number(doc, "cirpp.shift.f2", required=False, default=0.0),
                _get_number(doc, "cirpp.shift.f3", required=False, default=0.0),
            ),
        )
    except ValueError as exc:
        if isinstance(exc, ParamFileError):
            raise
        raise ParamFileError(f"cirpp: {exc}") from exc


def _parse_schedule(doc: dict) -> PaymentSchedule:
    coupon = _get_number(doc, "schedule.coupon", required=False, default=0.0)
    dates = _get(doc, "schedule.dates", required=False)
    try:
        if dates is not None:
            if not isinstance(dates, list):
                raise ParamFileError("schedule.dates: expected a list")
            return PaymentSchedule(np.asarray(dates, dtype=float), coupon)
        maturity = _get_number(doc, "schedule.maturity")
        periods = _get(doc, "schedule.periods")
        if not isinstance(periods, int) or isinstance(periods, bool):
            raise ParamFileError(f"schedule.periods: expected an integer, got {periods!r}")
        return PaymentSchedule.equidistant(maturity, periods, coupon)
    except ValueError as exc:
        if isinstance(exc, ParamFileError):
            raise
        raise ParamFileError(f"schedule: {exc}") from exc


class ParsedParams:
    """Sections of a parameter file; absent sections are None."""

    def __init__(self, ajd: Optional[AjdParams], cirpp: Optional[CirPpParams],
                 schedule: Optional[PaymentSchedule]):
        self.ajd = ajd
        self.cirpp = cirpp
        self.schedule = schedule

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ParamFileError(f"{section}: section is required for this command")
        return value


def load_params(path) -> ParsedParams:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParamFileError(f"cannot read parameter file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParamFileError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParamFileError("top level: expected an object")
    ajd = _parse_ajd(doc) if "ajd" in doc else None
    cirpp = _parse_cirpp(doc) if "cirpp" in doc else None
    schedule = _parse_schedule(doc) if "schedule" in doc else None
    return ParsedParams(ajd, cirpp, schedule)


def read_quotes_csv(path):
    """Parse a quotes CSV (kind,maturity_years,coupon,price,spread,frequency).

    Returns (government bonds, corporate bonds, cds quotes); unused columns may
    be empty.
    """
    gov, corp, cds = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"kind", "maturity_years", "coupon", "price", "spread", "frequency"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(
                f"quotes CSV must have columns {sorted(required)}, got {reader.fieldnames}"
            )
        for line_no, row in enumerate(reader, start=2):
            kind = row["kind"].strip()
            try:
                maturity = float(row["maturity_years"])
                freq = float(row["frequency"]) if row["frequency"].strip() else 1.0
                if kind in ("government", "corporate"):
                    quote = BondQuote(
                        maturity=maturity,
                        coupon=float(row["coupon"]),
                        price=float(row["price"]),
                        kind=kind,
                        frequency=freq,
                    )
                    (gov if kind == "government" else corp).append(quote)
                elif kind == "cds":
                    cds.append(
                        CdsQuote(maturity=maturity, spread=float(row["spread"]), frequency=freq)
                    )
                else:
                    raise ValueError(f"unknown quote kind {kind!r}")
            except ValueError as exc:
                raise ValueError(f"quotes CSV line {line_no}: {exc}") from exc
    if not gov and not corp and not cds:
        raise ValueError("quote file contains no quotes")
    return gov, corp, cds


def write_curve_csv(path, curve: Curve) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tenor_years", "value"])
        for t, v in zip(curve.tenors, curve.values):
            writer.writerow([FLOAT_FMT % t, FLOAT_FMT % v])


def read_curve_csv(path, kind: str = "discount", interpolation: str = "") -> Curve:
    tenors, values = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"tenor_years", "value"} - set(reader.fieldnames):
            raise ValueError("curve CSV must have columns tenor_years,value")
        for row in reader:
            tenors.append(float(row["tenor_years"]))
            values.append(float(row["value"]))
    return Curve(np.array(tenors), np.array(values), kind=kind, interpolation=interpolation)


def curve_to_json(curve: Curve) -> str:
    doc = {
        "kind": curve.kind,
        "interpolation": curve.interpolation,
        "tenors": list(curve.tenors),
        "values": list(curve.values),
    }
    return json.dumps(doc, sort_keys=True)


def curve_from_json(text: str) -> Curve:
    doc = json.loads(text)
    return Curve(
        np.asarray(doc["tenors"], dtype=float),
        np.asarray(doc["values"], dtype=float),
        kind=doc["kind"],
        interpolation=doc.get("interpolation", ""),
    )
