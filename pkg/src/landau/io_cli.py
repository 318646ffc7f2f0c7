"""Run configs, CSV time series, binary snapshots, and the CLI.

Config grammar: one `section.key = value` assignment per line, `#`
comments, all keys optional (defaults below). `init.component` may
repeat to build Gaussian mixtures; list values are comma separated.

CSV schema: fixed leading columns, one `l2_<k>` column per configured
weighted norm, fixed trailing columns; values carry 17 significant
digits so the round trip is exact. Comment lines hold the format
version, the deterministic config fingerprint, and a timestamp (the one
line allowed to differ between identical runs).

Snapshot format LCF1: magic "LCF1", u32 version = 1, u32 N, f64 L,
u32 n, f64 t, then N^3 little-endian f64 values with x fastest.

Exit codes: 0 success, 1 estimate/scheme check failure, 2 usage or
config error.
"""

import argparse
import datetime
import os
import re
import struct
import sys
from dataclasses import dataclass

import numpy as np

from . import estimates, functionals
from .estimates import TimeSeries
from .functionals import DiagnosticsRecord
from .grid import ScalarField, build_grid
from .initial_data import GaussianComponent, InitialDatumSpec, mollify_and_floor, sample_datum
from .kernel import KernelFieldSet, check_resolution
from .coefficients import (
    coercivity_estimate,
    compute_coefficients,
    direct_coefficients,
)
from .solver import SolverAbort, run

CSV_VERSION = 1
SNAPSHOT_MAGIC = b"LCF1"
SNAPSHOT_VERSION = 1
_HEADER_FMT = "<4sIIdId"  # magic, version, N, L, n, t
FIXED_LEAD = ("t", "mass", "px", "py", "pz", "energy", "entropy",
              "dissipation", "fisher", "fisher_sqrt")
FIXED_TAIL = ("l3_m3", "h3", "min_f", "max_f", "dt")


class ConfigError(ValueError):
    """Config text violated the grammar or a module constraint."""


# -- run configuration ------------------------------------------------------

DEFAULTS = {
    "grid.N": 32,
    "grid.L": 5.0,
    "reg.n": 4,
    "init.kind": "maxwellian",
    "init.a": None,
    "init.eps": None,
    "init.mollify": False,
    "time.t_final": 1.0,
    "time.cfl_safety": 0.5,
    "time.max_dt": np.inf,
    "stepper.scheme": "rk2",
    "stepper.refresh": 1,
    "output.every": 10,
    "output.snapshot_times": (),
    "output.dir": "out",
    "diagnostics.k_list": (1.5, 2.0, 2.25),
    "diagnostics.f_tol": 1e-14,
}


@dataclass(frozen=True)
class RunConfig:
    grid_n: int
    grid_l: float
    reg_n: int
    init: InitialDatumSpec
    mollify: bool
    t_final: float
    cfl_safety: float
    max_dt: float
    scheme: str
    refresh: int
    every: int
    snapshot_times: tuple
    out_dir: str
    k_list: tuple
    f_tol: float

    def fingerprint(self):
        comps = ";".join(
            f"{c.rho:g}@{c.u[0]:g},{c.u[1]:g},{c.u[2]:g}/T{c.T:g}"
            for c in self.init.components
        )
        init = self.init.kind
        if self.init.kind == "singular_power":
            init += f"(a={self.init.a:g},eps={self.init.eps:g})"
        elif comps:
            init += f"({comps})"
        ks = ",".join(f"{k:g}" for k in self.k_list)
        return (
            f"N={self.grid_n} L={self.grid_l:g} n={self.reg_n} init={init} "
            f"mollify={int(self.mollify)} t_final={self.t_final:g} "
            f"scheme={self.scheme} cfl={self.cfl_safety:g} "
            f"max_dt={self.max_dt:g} refresh={self.refresh} "
            f"every={self.every} k_list={ks} f_tol={self.f_tol:g}"
        )


def _parse_scalar(key, raw, kind):
    try:
        if kind is int:
            v = int(raw)
        elif kind is float:
            v = float(raw)
        elif kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        else:
            return raw
        return v
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}")


def parse_config(text):
    """Parse and validate config text; unknown keys are rejected."""
    values = dict(DEFAULTS)
    components = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key == "init.component":
            parts = raw.replace(",", " ").split()
            if len(parts) != 5:
                raise ConfigError(
                    f"init.component: expected 'rho ux uy uz T', got {raw!r}"
                )
            rho, ux, uy, uz, T = (float(p) for p in parts)
            try:
                components.append(GaussianComponent(rho, (ux, uy, uz), T))
            except ValueError as err:
                raise ConfigError(f"init.component: {err}")
            continue
        if key not in values:
            raise ConfigError(f"unknown key {key!r}")
        if key in ("output.snapshot_times", "diagnostics.k_list"):
            parts = raw.replace(",", " ").split()
            values[key] = tuple(float(p) for p in parts)
        elif key in ("grid.N", "reg.n", "stepper.refresh", "output.every"):
            values[key] = _parse_scalar(key, raw, int)
        elif key in ("grid.L", "time.t_final", "time.cfl_safety", "time.max_dt",
                     "init.a", "init.eps", "diagnostics.f_tol"):
            values[key] = _parse_scalar(key, raw, float)
        elif key == "init.mollify":
            values[key] = _parse_scalar(key, raw, bool)
        else:
            values[key] = raw

    N, L, n = values["grid.N"], values["grid.L"], values["reg.n"]
    if N % 2 != 0 or N < 8:
        raise ConfigError(f"grid.N: N must be even >= 8, got {N}")
    if not (L > 0):
        raise ConfigError(f"grid.L: L must be positive, got {L}")
    if n < 1:
        raise ConfigError(f"reg.n: regularization index must be >= 1, got {n}")
    try:
        check_resolution(build_grid(N, L), n)
    except ValueError as err:
        raise ConfigError(str(err))

    kind = values["init.kind"]
    try:
        if kind == "gaussian" and len(components) != 1:
            raise ValueError("gaussian datum takes exactly one init.component")
        init = InitialDatumSpec(
            kind=kind,
            components=tuple(components),
            a=values["init.a"],
            eps=values["init.eps"],
        )
    except ValueError as err:
        raise ConfigError(f"init: {err}")

    if not (0.0 < values["time.cfl_safety"] <= 1.0):
        raise ConfigError(
            f"time.cfl_safety: must lie in (0, 1], got {values['time.cfl_safety']}"
        )
    if values["time.t_final"] < 0:
        raise ConfigError(f"time.t_final: must be >= 0, got {values['time.t_final']}")
    if not (values["time.max_dt"] > 0):
        raise ConfigError(f"time.max_dt: must be positive, got {values['time.max_dt']}")
    if values["output.every"] < 1:
        raise ConfigError(f"output.every: must be >= 1, got {values['output.every']}")
    if values["stepper.refresh"] < 1:
        raise ConfigError(f"stepper.refresh: must be >= 1, got {values['stepper.refresh']}")
    if values["stepper.scheme"] not in ("explicit_euler", "rk2"):
        raise ConfigError(f"stepper.scheme: unknown scheme {values['stepper.scheme']!r}")
    if values["diagnostics.f_tol"] < 0:
        raise ConfigError(f"diagnostics.f_tol: must be >= 0, got {values['diagnostics.f_tol']}")
    if not values["diagnostics.k_list"]:
        raise ConfigError("diagnostics.k_list: needs at least one weight")

    return RunConfig(
        grid_n=N, grid_l=L, reg_n=n, init=init,
        mollify=values["init.mollify"],
        t_final=values["time.t_final"],
        cfl_safety=values["time.cfl_safety"],
        max_dt=values["time.max_dt"],
        scheme=values["stepper.scheme"],
        refresh=values["stepper.refresh"],
        every=values["output.every"],
        snapshot_times=tuple(values["output.snapshot_times"]),
        out_dir=values["output.dir"],
        k_list=tuple(values["diagnostics.k_list"]),
        f_tol=values["diagnostics.f_tol"],
    )


# -- CSV time series --------------------------------------------------------


def _csv_header(k_list):
    return ",".join(FIXED_LEAD + tuple(f"l2_{k:g}" for k in k_list) + FIXED_TAIL)


def write_timeseries(path, series):
    """Write the series; deterministic except for the timestamp comment."""
    k_list = tuple(sorted(series.records[0].l2_norms))
    lines = [
        f"# landau timeseries v{CSV_VERSION}",
        f"# config: {series.provenance}",
        f"# written: {datetime.datetime.now(datetime.timezone.utc).isoformat()}",
        _csv_header(k_list),
    ]
    for r in series.records:
        vals = (
            [r.t, r.mass, r.px, r.py, r.pz, r.energy, r.entropy,
             r.dissipation, r.fisher, r.fisher_sqrt]
            + [r.l2_norms[k] for k in k_list]
            + [r.l3_m3, r.h3, r.min_f, r.max_f, r.dt]
        )
        lines.append(",".join(f"{v:.17g}" for v in vals))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_timeseries(path):
    """Read a series back; full round trip preserves every value."""
    provenance = ""
    header = None
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("config:"):
                    provenance = body[len("config:"):].strip()
                elif body.startswith("landau timeseries v"):
                    ver = body[len("landau timeseries v"):]
                    if ver.strip() != str(CSV_VERSION):
                        raise ValueError(
                            f"unsupported timeseries version {ver!r}; expected "
                            f"'# landau timeseries v{CSV_VERSION}'"
                        )
                continue
            if header is None:
                header = line.split(",")
                _validate_header(header)
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ValueError(
                    f"line {lineno}: expected {len(header)} values, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as err:
                raise ValueError(f"line {lineno}: {err}")
    if header is None:
        raise ValueError(f"{path}: no header row found")
    k_list = [float(c[len("l2_"):]) for c in header if c.startswith("l2_")]
    records = []
    for row in rows:
        vals = dict(zip(header, row))
        records.append(DiagnosticsRecord(
            t=vals["t"], mass=vals["mass"], px=vals["px"], py=vals["py"],
            pz=vals["pz"], energy=vals["energy"], entropy=vals["entropy"],
            dissipation=vals["dissipation"], fisher=vals["fisher"],
            fisher_sqrt=vals["fisher_sqrt"],
            l2_norms={k: vals[f"l2_{k:g}"] for k in k_list},
            l3_m3=vals["l3_m3"], h3=vals["h3"], min_f=vals["min_f"],
            max_f=vals["max_f"], dt=vals["dt"],
        ))
    return TimeSeries(records, provenance)


def _validate_header(header):
    expected_lead = list(FIXED_LEAD)
    if header[: len(expected_lead)] != expected_lead:
        raise ValueError(
            f"schema error: header must start with {','.join(expected_lead)!r}, "
            f"got {','.join(header[:len(expected_lead)])!r}"
        )
    rest = header[len(expected_lead):]
    k_cols = [c for c in rest if c.startswith("l2_")]
    tail = rest[len(k_cols):]
    if tail != list(FIXED_TAIL):
        missing = [c for c in FIXED_TAIL if c not in rest]
        if missing:
            raise ValueError(f"schema error: missing column {missing[0]!r}")
        raise ValueError(
            f"schema error: trailing columns must be {','.join(FIXED_TAIL)!r}, "
            f"got {','.join(tail)!r}"
        )
    for c in k_cols:
        try:
            float(c[len("l2_"):])
        except ValueError:
            raise ValueError(f"schema error: bad weighted-norm column {c!r}")


# -- binary snapshots --------------------------------------------------------


@dataclass
class Snapshot:
    N: int
    L: float
    n: int
    t: float
    values: np.ndarray

    def to_field(self):
        return ScalarField(build_grid(self.N, self.L), self.values)


def write_snapshot(path, field, n, t):
    """Write one field; payload is x-fastest row-major f64."""
    grid = field.grid
    header = struct.pack(
        _HEADER_FMT, SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.N, grid.L, int(n), float(t)
    )
    payload = np.ascontiguousarray(
        field.values.ravel(order="F"), dtype="<f8"
    ).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path):
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize(_HEADER_FMT))
        if len(header) < struct.calcsize(_HEADER_FMT):
            raise ValueError(f"{path}: truncated header")
        magic, version, N, L, n, t = struct.unpack(_HEADER_FMT, header)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {SNAPSHOT_MAGIC!r}")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = N**3 * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload short: expected N^3 = {N**3} values "
            f"({expected} bytes), got {len(payload)} bytes"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape((N, N, N), order="F")
    return Snapshot(N=N, L=L, n=n, t=t, values=values.copy())


# -- CLI ----------------------------------------------------------------------


def _load_config(path):
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")


def _cmd_run(args):
    config = _load_config(args.config)
    out_dir = args.out or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "timeseries.csv")
    code = 0
    try:
        result = run(config)
    except SolverAbort as err:
        print(f"run aborted: {err}", file=sys.stderr)
        result = err.partial
        code = 1
    write_timeseries(csv_path, result.series)
    for t_snap, f in sorted(result.snapshots.items()):
        write_snapshot(
            os.path.join(out_dir, f"snapshot_{t_snap:.6f}.lcf"), f, config.reg_n, t_snap
        )
    last = result.series.records[-1]
    print(f"wrote {csv_path}: {len(result.series.records)} records, "
          f"t = {last.t:g}, mass = {last.mass:.12g}")
    return code


def _cmd_init(args):
    config = _load_config(args.config)
    grid = build_grid(config.grid_n, config.grid_l)
    f = sample_datum(config.init, grid)
    if config.mollify:
        f = mollify_and_floor(f, config.reg_n)
    write_snapshot(args.out, f, config.reg_n, 0.0)
    print(f"wrote {args.out}: N={grid.N} L={grid.L:g} n={config.reg_n} "
          f"kind={config.init.kind}")
    return 0


def _cmd_info(args):
    path = args.path
    if path.endswith(".csv"):
        series = read_timeseries(path)
        ts = series.ts()
        print(f"timeseries: {len(series.records)} records, "
              f"t in [{ts[0]:g}, {ts[-1]:g}]")
        print(f"config: {series.provenance}")
        return 0
    snap = read_snapshot(path)
    print(f"snapshot: N={snap.N} L={snap.L:g} n={snap.n} t={snap.t:g} "
          f"min={snap.values.min():.6g} max={snap.values.max():.6g}")
    return 0


def _oracle_fields(grid, seed, count):
    """The Maxwellian plus `count` seeded random Gaussian mixtures."""
    rng = np.random.default_rng(seed)
    fields = [sample_datum(InitialDatumSpec(kind="maxwellian"), grid)]
    for _ in range(count):
        comps = []
        for _ in range(rng.integers(1, 4)):
            comps.append(GaussianComponent(
                rho=float(rng.uniform(0.2, 2.0)),
                u=tuple(rng.uniform(-grid.L / 3, grid.L / 3, size=3)),
                T=float(rng.uniform(0.3, 1.2)),
            ))
        fields.append(sample_datum(
            InitialDatumSpec(kind="gaussian_mixture", components=tuple(comps)), grid
        ))
    return fields


def _dissipative_pairs(grid):
    """Separated Gaussian pairs, scaled to the box: strong dissipation,
    so the single-vs-double relative gap is meaningful (near equilibrium
    both forms tend to 0 and their ratio measures nothing)."""
    out = []
    for (dfrac, tfrac) in ((0.30, 0.0512), (0.32, 0.048)):
        d = dfrac * grid.L
        T = tfrac * grid.L**2
        values = (
            np.exp(-((grid.vx - d) ** 2 + grid.vy**2 + grid.vz**2) / (2 * T))
            + np.exp(-((grid.vx + d) ** 2 + grid.vy**2 + grid.vz**2) / (2 * T))
        )
        out.append(ScalarField.distribution(grid, values))
    return out


def oracle_battery(N=8, L=4.0, n=2, seed=0, mixtures=5):
    """FFT-vs-direct coefficient agreement and the dissipation cross-check.

    Returns (max relative coefficient discrepancy, max relative gap
    between the single- and double-form dissipation).
    """
    grid = build_grid(N, L)
    kernels = KernelFieldSet(grid, n)
    max_coeff = 0.0
    max_diss = 0.0
    for f in _oracle_fields(grid, seed, mixtures):
        fast = compute_coefficients(f, kernels)
        slow = direct_coefficients(f, kernels)
        for a, b in ((fast.A, slow.A), (fast.b, slow.b), (fast.c, slow.c)):
            scale = np.abs(b).max()
            if scale > 0:
                max_coeff = max(max_coeff, float(np.abs(a - b).max() / scale))
    for f in _dissipative_pairs(grid):
        d1 = functionals.dissipation_single(f, compute_coefficients(f, kernels))
        d2 = functionals.dissipation_double(f, n)
        max_diss = max(max_diss, abs(d1 - d2) / abs(d2))
    return max_coeff, max_diss


def _cmd_oracle(args):
    max_coeff, max_diss = oracle_battery(N=args.N, L=args.L, n=args.n, seed=args.seed)
    print(f"fft-vs-direct max relative discrepancy: {max_coeff:.3e}")
    print(f"single-vs-double dissipation max relative gap: {max_diss:.3e}")
    ok = max_coeff <= 1e-12 and max_diss <= 0.05
    print("oracle battery:", "pass" if ok else "FAIL")
    return 0 if ok else 1


def _provenance_n(series):
    m = re.search(r"\bn=(\d+)\b", series.provenance)
    return int(m.group(1)) if m else None


def _cmd_check(args):
    series = read_timeseries(args.series)
    ts = series.ts()
    lines = []
    failures = []

    def emit(name, status, **kv):
        parts = [f"check={name}", f"status={status}"]
        parts += [f"{key}={val:.10g}" if isinstance(val, float) else f"{key}={val}"
                  for key, val in kv.items()]
        lines.append(" ".join(parts))
        if status == "fail":
            failures.append(name)

    mass = series.column("mass")
    drift = float(np.abs(mass - mass[0]).max() / abs(mass[0])) if mass[0] != 0 else 0.0
    emit("mass_conservation", "pass" if drift <= 1e-10 else "fail", drift=drift)

    n = args.n or _provenance_n(series)
    inv_n = 1.0 / n if n else 0.0
    if len(ts) >= 2:
        rep = estimates.check_entropy_identity(series, ts[0], ts[-1], inv_n=inv_n)
        emit("entropy_identity", "pass" if rep.normalized <= 1e-2 else "fail",
             normalized=rep.normalized, residual=rep.residual, inv_n=inv_n)

    violations = estimates.check_fisher_monotone(series, tol=1e-6, skip=min(5, len(ts) - 1))
    emit("fisher_monotone", "pass" if not violations else "fail",
         violations=len(violations))

    h3 = series.column("h3")
    h3_floor = -1e-10 * max(1.0, float(np.abs(h3).max()))
    emit("h3_nonnegative", "pass" if h3.min() >= h3_floor else "fail",
         min_h3=float(h3.min()))

    k = args.k
    if len(ts) >= 3 and float(k) in series.records[0].l2_norms:
        rep = estimates.check_l2_window(series, k, float(ts[-1]))
        emit("l2_window", "pass" if rep.passed else "fail", k=float(k),
             t0=rep.t0, Ck=rep.Ck, t1=rep.t1, Y0=rep.Y0,
             sup_Y=rep.sup_Y, bound=rep.bound, C_star=rep.C_star)

    if np.any(ts >= args.tmin):
        stat = estimates.fisher_envelope_stat(series, args.tmin)
        emit("fisher_envelope", "info", t_min=args.tmin, sup=stat.sup,
             argmax_t=stat.argmax_t, monotone_violations=len(stat.violations))

    if ts[-1] <= 1.0 and len(ts) >= 2:
        rep = estimates.moment_propagation_check(series, 2, float(ts[-1]))
        emit("moment_propagation_k2", "pass" if rep.passed else "fail",
             ratio=rep.ratio)

    if args.snapshots:
        paths = sorted(
            os.path.join(args.snapshots, p)
            for p in os.listdir(args.snapshots) if p.endswith(".lcf")
        )
        for path in paths:
            snap = read_snapshot(path)
            f = snap.to_field()
            kernels = KernelFieldSet(f.grid, snap.n)
            est = coercivity_estimate(compute_coefficients(f, kernels))
            emit("coercivity", "pass" if est.c0 > 0 else "fail",
                 t=snap.t, c0=est.c0)

    report = "\n".join(lines) + "\n"
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report)
    print(report, end="")
    print(f"summary: {len(lines)} checks, {len(failures)} failures"
          + (f" ({', '.join(failures)})" if failures else ""))
    return 1 if failures else 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="landau",
        description="Regularized Landau-Coulomb solver and estimate harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override output.dir")

    p = sub.add_parser("check", help="run the estimate harness on a series")
    p.add_argument("series")
    p.add_argument("--report", default=None)
    p.add_argument("--snapshots", default=None, help="directory of .lcf files")
    p.add_argument("--tmin", type=float, default=0.05)
    p.add_argument("--k", type=float, default=2.25)
    p.add_argument("--n", type=int, default=None,
                   help="regularization index (else read from provenance)")

    p = sub.add_parser("oracle", help="tiny-grid oracle battery")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--L", type=float, default=2.5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("init", help="sample an initial datum to a snapshot")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("info", help="print snapshot or series metadata")
    p.add_argument("path")

    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "check": _cmd_check,
        "oracle": _cmd_oracle,
        "init": _cmd_init,
        "info": _cmd_info,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
