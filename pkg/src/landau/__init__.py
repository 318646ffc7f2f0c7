"""Velocity-space solver and a-priori-estimate harness for the
regularized Landau-Coulomb equation."""

from .grid import (
    ScalarField,
    VelocityGrid,
    build_grid,
    gradient,
    laplacian,
    weighted_integral,
    weighted_lp_norm,
)
from .kernel import KernelFieldSet, kn_eval, projection
from .coefficients import (
    CoefficientField,
    CoercivityEstimate,
    coefficient_bounds_report,
    coercivity_estimate,
    compute_coefficients,
    direct_coefficients,
)
from .initial_data import (
    GaussianComponent,
    InitialDatumSpec,
    mollify_and_floor,
    sample_datum,
)
from .functionals import (
    DiagnosticsRecord,
    conserved_quantities,
    dissipation_double,
    dissipation_single,
    entropy,
    fisher,
    h3_relative,
    record,
)
from .solver import (
    PositivityLostError,
    SolverAbort,
    SolverState,
    StepperConfig,
    advance,
    cfl_dt,
    rhs,
    run,
)
from .estimates import (
    EnvelopeStat,
    OdeBoundParams,
    TimeSeries,
    calibrate_Ck,
    check_dissipation_lower,
    check_entropy_identity,
    check_fisher_monotone,
    check_h3_inequality,
    check_interpolations,
    check_l2_window,
    compute_t1,
    fisher_envelope_stat,
    moment_propagation_check,
    ode_envelope,
    select_t0,
    weak_residual,
)
from .io_cli import (
    RunConfig,
    Snapshot,
    parse_config,
    read_snapshot,
    read_timeseries,
    write_snapshot,
    write_timeseries,
)

__version__ = "0.1.0"
