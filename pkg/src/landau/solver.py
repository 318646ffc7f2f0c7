"""Explicit time integration of the regularized collision equation.

    d_t f = div( A[f] grad f - b[f] f ) + (1/n) Laplacian f

in conservative flux form: face-centered fluxes

    F_i = (A grad f)_i - b_i f + (1/n) d_i f

with face values of A, b, f by arithmetic averaging of the adjacent
cells, the normal gradient by a two-point difference across the face,
and transverse gradients by averaging the cell-centered central
differences. Outer-boundary faces carry zero flux (compact support), so
the discrete total mass of the right-hand side telescopes to zero
exactly.

No positivity clipping and no conservation fixers: the estimates are
the object of study, so scheme defects abort loudly instead of being
masked. Linear second-order stencils for anisotropic cross-derivative
fluxes are not monotone, so steep exponential tails develop bounded
undershoots (measured ~1e-5 relative on the Maxwellian reference run);
the abort threshold sits a decade above that floor and still catches
genuine blowups, which cross it within a few steps. The min_f column of
the diagnostics records the actual dips.
"""

import zlib
from dataclasses import dataclass

import numpy as np

from .coefficients import compute_coefficients
from .estimates import TimeSeries
from .functionals import record
from .grid import ScalarField, build_grid, gradient_values
from .initial_data import mollify_and_floor, sample_datum
from .kernel import SYM_ROWS, KernelFieldSet

POSITIVITY_TOL = 1e-4  # abort when min f < -tol * max f


class PositivityLostError(RuntimeError):
    """Raised when the state develops real negative values."""


@dataclass
class StepperConfig:
    scheme: str = "rk2"          # "explicit_euler" or "rk2"
    cfl_safety: float = 0.5
    max_dt: float = np.inf
    refresh: int = 1             # steps between coefficient recomputation

    def __post_init__(self):
        if self.scheme not in ("explicit_euler", "rk2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.refresh < 1 or self.refresh != int(self.refresh):
            raise ValueError(f"refresh cadence must be a positive integer, got {self.refresh}")


@dataclass
class SolverState:
    t: float
    f: ScalarField
    dt: float = 0.0
    step_count: int = 0
    coeffs: object = None
    coeffs_step: int = -1
    coeffs_fingerprint: int = 0


def _fingerprint(values):
    return zlib.adler32(values.tobytes())


def ensure_coefficients(state, kernels, refresh=1):
    """Fill or refresh the state's coefficient cache per the cadence."""
    stale = (
        state.coeffs is None
        or state.step_count - state.coeffs_step >= refresh
    )
    if stale:
        state.coeffs = compute_coefficients(state.f, kernels)
        state.coeffs_step = state.step_count
        state.coeffs_fingerprint = _fingerprint(state.f.values)
    return state.coeffs


def rhs_values(values, coeffs, n, h):
    """Flux-form right-hand side on a raw value array."""
    inv_n = 0.0 if n == np.inf else 1.0 / float(n)
    out = np.zeros_like(values)
    cell_grads = gradient_values(values, h)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis], hi[axis] = slice(0, -1), slice(1, None)
        lo, hi = tuple(lo), tuple(hi)

        def face(arr):
            return 0.5 * (arr[lo] + arr[hi])

        dfn = (values[hi] - values[lo]) / h
        row = SYM_ROWS[axis]
        flux = (coeffs.A[row[axis]][lo] + coeffs.A[row[axis]][hi]) * 0.5 * dfn
        for j in range(3):
            if j == axis:
                continue
            flux = flux + face(coeffs.A[row[j]]) * face(cell_grads[j])
        flux = flux - face(coeffs.b[axis]) * face(values) + inv_n * dfn

        out[lo] += flux / h
        out[hi] -= flux / h
    return out


def rhs(f, coeffs, n):
    """Conservative right-hand side; discrete mass of the result is 0."""
    if coeffs.grid != f.grid:
        raise ValueError("field and coefficients live on different grids")
    return ScalarField(f.grid, rhs_values(f.values, coeffs, n, f.grid.h))


def cfl_dt(coeffs, n, h, cfl_safety):
    """Parabolic stability step: cfl * h^2 / (6 max lam(A) + 6/n + h max|b|)."""
    _, lam_hi = coeffs.eigenvalue_range()
    lam_max = float(lam_hi.max())
    b_max = float(coeffs.b_norm().max())
    inv6n = 0.0 if n == np.inf else 6.0 / float(n)
    return cfl_safety * h * h / (6.0 * lam_max + inv6n + h * b_max)


def advance(state, stepper, kernels, dt_cap=None):
    """One explicit Euler or Heun step; returns the advanced state.

    Coefficients are recomputed per the refresh cadence; under the
    default cadence of 1 the Heun corrector stage also refreshes them
    from the predicted field.
    """
    grid = state.f.grid
    n = kernels.n
    coeffs = ensure_coefficients(state, kernels, stepper.refresh)
    dt = min(cfl_dt(coeffs, n, grid.h, stepper.cfl_safety), stepper.max_dt)
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    v = state.f.values
    k1 = rhs_values(v, coeffs, n, grid.h)
    if stepper.scheme == "explicit_euler":
        new_values = v + dt * k1
    else:
        predicted = v + dt * k1
        if stepper.refresh == 1:
            coeffs2 = compute_coefficients(ScalarField(grid, predicted), kernels)
        else:
            coeffs2 = coeffs
        k2 = rhs_values(predicted, coeffs2, n, grid.h)
        new_values = v + 0.5 * dt * (k1 + k2)
    vmax = max(float(new_values.max()), 0.0)
    vmin = float(new_values.min())
    if vmin < -POSITIVITY_TOL * vmax:
        raise PositivityLostError(
            f"positivity lost: reduce dt or refine grid "
            f"(min f = {vmin:.3e} at t = {state.t + dt:.6g})"
        )
    return SolverState(
        t=state.t + dt,
        f=ScalarField(grid, new_values),
        dt=dt,
        step_count=state.step_count + 1,
        coeffs=state.coeffs,
        coeffs_step=state.coeffs_step,
        coeffs_fingerprint=state.coeffs_fingerprint,
    )


@dataclass
class RunResult:
    series: TimeSeries
    snapshots: dict  # requested time -> ScalarField (state at first step past it)


class SolverAbort(RuntimeError):
    """Advance failed mid-run; partial outputs are attached."""

    def __init__(self, cause, partial):
        super().__init__(str(cause))
        self.cause = cause
        self.partial = partial


def run(config):
    """Integrate per the run config; returns the time series and snapshots.

    Emits one diagnostics record at t = 0, every `output.every` steps,
    and at t_final; snapshots are taken at the first step boundary past
    each configured time. Deterministic for a fixed config regardless of
    LANDAU_THREADS.
    """
    grid = build_grid(config.grid_n, config.grid_l)
    kernels = KernelFieldSet(grid, config.reg_n)
    f0 = sample_datum(config.init, grid)
    if config.mollify:
        f0 = mollify_and_floor(f0, config.reg_n)
    stepper = StepperConfig(
        scheme=config.scheme, cfl_safety=config.cfl_safety,
        max_dt=config.max_dt, refresh=config.refresh,
    )
    state = SolverState(t=0.0, f=f0)
    coeffs = ensure_coefficients(state, kernels, stepper.refresh)

    def make_record(st):
        c = ensure_coefficients(st, kernels, stepper.refresh)
        return record(st.f, st.t, st.dt, c, config.k_list, config.f_tol)

    records = [make_record(state)]
    snapshots = {}
    pending = sorted(config.snapshot_times)
    while pending and pending[0] <= 1e-12:
        snapshots[pending.pop(0)] = f0.copy()

    t_final = config.t_final
    last_recorded_step = 0
    while state.t < t_final - 1e-12:
        try:
            state = advance(state, stepper, kernels, dt_cap=t_final - state.t)
        except PositivityLostError as err:
            raise SolverAbort(
                err,
                RunResult(TimeSeries(records, config.fingerprint()), snapshots),
            ) from err
        finished = state.t >= t_final - 1e-12
        if state.step_count % config.every == 0 or finished:
            records.append(make_record(state))
            last_recorded_step = state.step_count
        while pending and state.t >= pending[0] - 1e-12:
            snapshots[pending.pop(0)] = state.f.copy()
    if state.step_count != last_recorded_step:
        records.append(make_record(state))
    return RunResult(TimeSeries(records, config.fingerprint()), snapshots)
