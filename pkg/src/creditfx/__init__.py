"""creditfx: credit and liquidity term-structure analytics.

Defaultable bonds are modelled as converted riskless bonds with a partially
observable conversion (recovery) rate S = e^{-X} driven by a two-factor
affine jump diffusion; discounting uses a shifted square-root (CIR++) short
rate.  The package provides closed-form and numeric Riccati transforms,
forward recovery rates under delayed observation, bond/CDS pricing, curve
bootstrapping, and a deterministic Monte-Carlo oracle with a compiled kernel.
"""
from .affine import (
    CirPpParams,
    ProcessState,
    ShiftFunction,
    atom_mass_zero,
    cir_pp_bond,
    laplace,
)
from .calibration import (
    BondQuote,
    CalibrationResult,
    CdsQuote,
    bootstrap_illiquidity,
    bootstrap_nondefaultable,
    defaultable_from_cds,
    fit_parameters,
    implied_cds_spread,
    master_grid,
    run_bootstrap,
)
from .credit import (
    CreditTermSheet,
    PaymentSchedule,
    cds_legs,
    cds_spread,
    corp_bond_value,
    credit_term_sheet,
    gov_bond_value,
)
from .errors import (
    BlowUpError,
    CalibrationError,
    ConvergenceError,
    CreditFxError,
    CurveRangeError,
    UnsupportedRegimeError,
)
from .recovery import (
    Curve,
    cascaded_value,
    curve_forward_recovery,
    curve_rates,
    forward_recovery_delayed,
    forward_recovery_simple,
)
from .riccati import (
    AjdParams,
    DiracJumps,
    ExponentialJumps,
    TailLimit,
    TransformResult,
    jump_transform,
    riccati_limit_u_to_neg_inf,
    solve_riccati_closed,
    solve_riccati_numeric,
    transform,
)

__version__ = "0.1.0"
