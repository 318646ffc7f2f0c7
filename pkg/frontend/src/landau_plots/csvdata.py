"""Reader for the solver's public CSV time-series schema.

Deliberately self-contained: the plotting package consumes only the
documented file format, never solver code, so the solver suite runs
with this package absent and vice versa.
"""

import numpy as np

LEAD = ("t", "mass", "px", "py", "pz", "energy", "entropy",
        "dissipation", "fisher", "fisher_sqrt")
TAIL = ("l3_m3", "h3", "min_f", "max_f", "dt")


class SchemaError(ValueError):
    """The CSV does not follow the documented schema."""


class TimeSeriesData:
    def __init__(self, columns, k_list, provenance):
        self.columns = columns        # name -> np.ndarray
        self.k_list = k_list          # weighted-norm exponents, as strings
        self.provenance = provenance

    def __getitem__(self, name):
        return self.columns[name]

    @property
    def t(self):
        return self.columns["t"]


def read_timeseries(path):
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
                continue
            if header is None:
                header = line.split(",")
                _check_header(header)
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise SchemaError(
                    f"line {lineno}: expected {len(header)} values, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as err:
                raise SchemaError(f"line {lineno}: {err}")
    if header is None:
        raise SchemaError(f"{path}: no header row")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows)
    columns = {name: data[:, i] for i, name in enumerate(header)}
    k_list = [c[len("l2_"):] for c in header if c.startswith("l2_")]
    return TimeSeriesData(columns, k_list, provenance)


def _check_header(header):
    for col in LEAD:
        if col not in header:
            raise SchemaError(f"missing column {col!r}")
    for col in TAIL:
        if col not in header:
            raise SchemaError(f"missing column {col!r}")
    if tuple(header[: len(LEAD)]) != LEAD:
        raise SchemaError(
            f"leading columns must be {','.join(LEAD)}, got {','.join(header[:len(LEAD)])}")
