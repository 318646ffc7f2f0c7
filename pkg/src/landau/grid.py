"""Velocity-space discretization.

Cell-centered cubic lattice on [-L, L]^3 with midpoint quadrature,
Japanese-bracket weights <v>^k = (1 + |v|^2)^(k/2), and second-order
finite differences with a compact-support (zero ghost cell) convention.

All reductions use numpy's pairwise summation in a fixed order, so
functional values do not depend on the worker count.
"""

from dataclasses import dataclass, field

import numpy as np


class VelocityGrid:
    """Cell-centered cubic lattice on [-L, L]^3.

    Parameters
    ----------
    N : int
        Cells per axis. Must be even and >= 8 (symmetry under v -> -v
        and stencil width both require it).
    L : float
        Half-width of the velocity domain.

    The spacing h = 2L/N is always derived from (N, L). Cell centers sit
    at v_i = -L + (i + 1/2) h, so no cell coincides with the origin.
    """

    def __init__(self, N, L):
        if N != int(N) or N % 2 != 0 or N < 8:
            raise ValueError(f"N must be an even integer >= 8, got {N}")
        if not (L > 0):
            raise ValueError(f"L must be positive, got {L}")
        self.N = int(N)
        self.L = float(L)
        self.axis = -self.L + (np.arange(self.N) + 0.5) * self.h
        vx, vy, vz = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        self.vx, self.vy, self.vz = vx, vy, vz
        self.r2 = vx * vx + vy * vy + vz * vz
        self._bracket_cache = {}

    @property
    def h(self):
        return 2.0 * self.L / self.N

    @property
    def cell_volume(self):
        return self.h**3

    def bracket_pow(self, k):
        """<v>^k = (1 + |v|^2)^(k/2) on the whole lattice, cached per k."""
        k = float(k)
        if k not in self._bracket_cache:
            if k == 0.0:
                w = np.ones_like(self.r2)
            else:
                w = (1.0 + self.r2) ** (k / 2.0)
            self._bracket_cache[k] = w
        return self._bracket_cache[k]

    def __eq__(self, other):
        return (
            isinstance(other, VelocityGrid)
            and self.N == other.N
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.N, self.L))

    def __repr__(self):
        return f"VelocityGrid(N={self.N}, L={self.L})"


def build_grid(N, L):
    """Validate (N, L) and return the grid."""
    return VelocityGrid(N, L)


@dataclass
class ScalarField:
    """One real value per cell, axes ordered (x, y, z).

    Values must be finite. Nonnegativity is required for distribution
    data at construction time via `distribution`; the solver monitors
    (and never clips) the sign during time stepping.
    """

    grid: VelocityGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.grid.N,) * 3
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.N,) * 3))

    @classmethod
    def distribution(cls, grid, values):
        """Construct a distribution field; rejects negative entries."""
        f = cls(grid, values)
        if f.values.min() < 0.0:
            raise ValueError(
                f"distribution field has negative entries (min {f.values.min():.3e})"
            )
        return f

    def copy(self):
        return ScalarField(self.grid, self.values.copy())

    @property
    def min(self):
        return float(self.values.min())

    @property
    def max(self):
        return float(self.values.max())


def weighted_integral(f, k):
    """Midpoint quadrature of f(v) <v>^k over the domain.

    Exact quadrature weights h^3 per cell; O(h^2) accurate for smooth
    fields supported away from the boundary.
    """
    return float(np.sum(f.values * f.grid.bracket_pow(k)) * f.grid.cell_volume)


def weighted_lp_norm(f, p, k):
    """Weighted norm (sum |f|^p <v>^(pk) h^3)^(1/p) for p >= 1."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.sum(np.abs(f.values) ** p * f.grid.bracket_pow(p * k))
    return float((s * f.grid.cell_volume) ** (1.0 / p))


def _diff_axis(values, axis, h):
    """Central difference along one axis with zero ghost cells."""
    out = np.empty_like(values)
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    mid = [slice(None)] * 3
    lo[axis], hi[axis], mid[axis] = slice(0, -2), slice(2, None), slice(1, -1)
    out[tuple(mid)] = (values[tuple(hi)] - values[tuple(lo)]) / (2.0 * h)
    first = [slice(None)] * 3
    second = [slice(None)] * 3
    first[axis], second[axis] = 0, 1
    out[tuple(first)] = values[tuple(second)] / (2.0 * h)
    last = [slice(None)] * 3
    nexttolast = [slice(None)] * 3
    last[axis], nexttolast[axis] = -1, -2
    out[tuple(last)] = -values[tuple(nexttolast)] / (2.0 * h)
    return out


def gradient_values(values, h):
    """Raw-array central-difference gradient (zero ghosts)."""
    return tuple(_diff_axis(values, axis, h) for axis in range(3))


def gradient(f):
    """Second-order central-difference gradient, zero ghost cells.

    Returns the three partial derivatives as ScalarFields.
    """
    return tuple(
        ScalarField(f.grid, d) for d in gradient_values(f.values, f.grid.h)
    )


def laplacian_values(values, h):
    """7-point Laplacian stencil with zero ghost cells, on a raw array."""
    out = -6.0 * values
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        mid = [slice(None)] * 3
        lo[axis], hi[axis], mid[axis] = slice(0, -1), slice(1, None), slice(None)
        plus = np.zeros_like(values)
        idx = [slice(None)] * 3
        idx[axis] = slice(0, -1)
        plus[tuple(idx)] += values[tuple(hi)]
        idx[axis] = slice(1, None)
        plus[tuple(idx)] += values[tuple(lo)]
        out = out + plus
    return out / (h * h)


def laplacian(f):
    """7-point Laplacian with zero ghost cells."""
    return ScalarField(f.grid, laplacian_values(f.values, f.grid.h))
