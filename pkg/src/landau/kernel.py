"""Truncated Coulomb kernel and its sampled matrix/vector/scalar fields.

The kernel
    K_n(r) = 1/r                     for r >= 1/n
    K_n(r) = n (3 - (nr)^2) / 2      for r <  1/n
is C^1 at r = 1/n, takes values in [n, 3n/2] on the capped region, and
satisfies K_n(r) <= 1/r everywhere: with s = nr the claim reduces to
s(3 - s^2)/2 <= 1, i.e. (s - 1)^2 (s + 2) >= 0.

From the matrix kernel G(z) = K_n(|z|) P(z), with P the projection onto
z^perp, the divergence structure gives closed forms for the drift and
reaction kernels:
    g(z) = sum_j d_j G_ij(z)  = -2 K_n(r) z / r^2,
    q(z) = sum_ij d_ij G_ij(z) = -(2/r^2) d/dr (r K_n(r))
         = -3n (1 - (nr)^2) / r^2   on 0 < r <= 1/n,  0 beyond.
q integrates to exactly -8 pi; the origin sample is renormalized so the
discrete lattice mass matches that value.

All three kernels are sampled on the padded difference lattice
z in {j h : -N <= j < N}^3 stored in FFT wrap order (j >= 0 first), so
zero-padded circular convolution on the 2N lattice realizes the
free-space convolution exactly for outputs on the primary N^3 block.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# independent entries of a symmetric 3x3 field, fixed component order
SYM_COMPONENTS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
SYM_ROWS = ((0, 3, 4), (3, 1, 5), (4, 5, 2))  # component index of row i


def kn_eval(n, r):
    """Evaluate K_n at radius r (scalar or array). K_n(0) = 1.5 n."""
    r = np.asarray(r, dtype=float)
    s = n * r
    inner = n * (3.0 - s * s) / 2.0
    with np.errstate(divide="ignore"):
        outer = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), np.inf)
    out = np.where(r >= 1.0 / n, outer, inner)
    if out.ndim == 0:
        return float(out)
    return out


def projection(z):
    """P(z) = I - z (x) z / |z|^2, the projector onto the plane z^perp."""
    z = np.asarray(z, dtype=float)
    zz = float(z @ z)
    if zz == 0.0:
        raise ValueError("projection is undefined at z = 0")
    return np.eye(3) - np.outer(z, z) / zz


def offset_coords(N, h):
    """1D lattice offsets j*h for j in {-N..N-1}, stored in wrap order."""
    j = np.arange(2 * N)
    j = np.where(j < N, j, j - 2 * N)
    return j * h


def check_resolution(grid, n):
    """Reject (grid, n) pairs whose truncation region the lattice cannot see.

    The capped region has radius 1/n; once it shrinks below half a cell
    (n h > 2) the sampled drift/reaction kernels alias badly and the
    coefficient fields stop converging in n.
    """
    if n != np.inf and n * grid.h > 2.0:
        raise ValueError(
            f"kernel unresolved: decrease n or refine grid "
            f"(h = {grid.h:g} > 2/n = {2.0 / n:g})"
        )


def _mesh(grid):
    z = offset_coords(grid.N, grid.h)
    zx, zy, zz = np.meshgrid(z, z, z, indexing="ij")
    r = np.sqrt(zx * zx + zy * zy + zz * zz)
    return (zx, zy, zz), r


def a_kernel_field(grid, n):
    """Sample K_n(|z|) P(z) on the padded lattice.

    Returns the 6 independent components in SYM_COMPONENTS order, shape
    (6, 2N, 2N, 2N). The z = 0 sample is (2/3) K_n(0) I, the spherical
    average of P; it affects a single cell of measure h^3.
    """
    zs, r = _mesh(grid)
    K = kn_eval(n, r)
    K = np.where(r > 0, K, 1.5 * n)
    r2safe = np.where(r > 0, r * r, 1.0)
    out = np.empty((6,) + r.shape)
    for m, (i, j) in enumerate(SYM_COMPONENTS):
        pij = (1.0 if i == j else 0.0) - zs[i] * zs[j] / r2safe
        arr = K * pij
        arr[r == 0] = n if i == j else 0.0  # (2/3) * 1.5n on the diagonal
        out[m] = arr
    return out


def b_kernel_field(grid, n):
    """Sample the drift kernel g(z) = -2 K_n(|z|) z / |z|^2, odd in z.

    Returns shape (3, 2N, 2N, 2N); the origin sample is 0.
    """
    zs, r = _mesh(grid)
    K = np.where(r > 0, kn_eval(n, r), 0.0)
    r2safe = np.where(r > 0, r * r, 1.0)
    out = np.empty((3,) + r.shape)
    for i in range(3):
        out[i] = -2.0 * K * zs[i] / r2safe
    return out


def c_kernel_field(grid, n):
    """Sample the reaction kernel q, renormalized to total mass -8 pi.

    q(z) = -3n (1 - (nr)^2)/r^2 on 0 < r <= 1/n, zero beyond. The
    midpoint sample cannot represent the integrable ~ -3n/r^2 spike at
    the origin, so the origin value is set to make sum q h^3 = -8 pi
    exactly (the defining mass of the reaction kernel).

    Returns (q, raw_mass) with raw_mass the off-origin lattice sum.
    """
    check_resolution(grid, n)
    _, r = _mesh(grid)
    r2safe = np.where(r > 0, r * r, 1.0)
    q = np.where(
        (r > 0) & (r <= 1.0 / n),
        -3.0 * n * (1.0 - (n * r) ** 2) / r2safe,
        0.0,
    )
    h3 = grid.cell_volume
    raw_mass = float(q.sum() * h3)
    q[0, 0, 0] = (-8.0 * np.pi - raw_mass) / h3
    return q, raw_mass


class KernelFieldSet:
    """The three sampled kernel fields for one (grid, n) pair.

    Immutable after construction; spectra for the fast convolution path
    are computed lazily and cached. total_c_mass is exactly -8 pi after
    the origin renormalization.
    """

    def __init__(self, grid, n):
        if n != int(n) or n < 1:
            raise ValueError(f"regularization index n must be a positive integer, got {n}")
        check_resolution(grid, n)
        self.grid = grid
        self.n = int(n)
        self.G = a_kernel_field(grid, n)
        self.g = b_kernel_field(grid, n)
        self.q, self.raw_c_mass = c_kernel_field(grid, n)
        self.total_c_mass = float(self.q.sum() * grid.cell_volume)
        self._spectra = None

    def spectra(self):
        """rfftn of all 10 kernel components, in (G0..G5, g0..g2, q) order."""
        if self._spectra is None:
            comps = [self.G[m] for m in range(6)] + [self.g[i] for i in range(3)] + [self.q]
            workers = _worker_count()
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    self._spectra = list(pool.map(np.fft.rfftn, comps))
            else:
                self._spectra = [np.fft.rfftn(c) for c in comps]
        return self._spectra


def _worker_count():
    try:
        return max(1, int(os.environ.get("LANDAU_THREADS", "1")))
    except ValueError:
        return 1


def pad_field(values, N):
    """Zero-pad an N^3 field into the leading block of the 2N lattice."""
    out = np.zeros((2 * N,) * 3)
    out[:N, :N, :N] = values
    return out


def lattice_convolve(kernel_values, field_values, h):
    """Free-space convolution (kernel * f) h^3 via zero-padded FFT.

    kernel_values lives on the (2N)^3 wrap-order difference lattice,
    field_values on the N^3 primary lattice. Differences of primary
    cells span only {-(N-1)..N-1} per axis so the circular product on
    the 2N lattice never wraps.
    """
    N = field_values.shape[0]
    spec = np.fft.rfftn(kernel_values)
    fpad = np.fft.rfftn(pad_field(field_values, N))
    conv = np.fft.irfftn(spec * fpad, s=(2 * N,) * 3, axes=(0, 1, 2))
    return conv[:N, :N, :N] * h**3


def convolve_spectra(spectra, field_values, h):
    """Convolve one field against many precomputed kernel spectra."""
    N = field_values.shape[0]
    fpad = np.fft.rfftn(pad_field(field_values, N))
    h3 = h**3

    def one(spec):
        conv = np.fft.irfftn(spec * fpad, s=(2 * N,) * 3, axes=(0, 1, 2))
        return conv[:N, :N, :N] * h3

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, spectra))
    return [one(spec) for spec in spectra]
