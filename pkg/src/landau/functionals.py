"""Scalar functionals of the distribution.

Conserved quantities, entropy, entropy dissipation in two independent
discretizations (a fast single-integral form using the convolution
coefficients, and the symmetric pair-sum form as a small-grid oracle),
Fisher information in two independent discretizations, weighted norms,
and the weighted relative entropy against the Maxwellian.

Quotients like |grad f|^2 / f are gated at f > f_tol_rel * max f; the
gate threshold is a knob whose sensitivity is itself a diagnostic.
"""

from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np

from .grid import gradient_values, weighted_lp_norm
from .initial_data import maxwellian
from .kernel import SYM_ROWS, kn_eval

F_FLOOR = 1e-300       # below this, x ln x is taken as 0
F_TOL_REL = 1e-14      # default relative gate for quotient integrands


def conserved_quantities(f):
    """(mass, momentum 3-vector, energy) with energy weight |v|^2 / 2."""
    h3 = f.grid.cell_volume
    mass = float(np.sum(f.values) * h3)
    px = float(np.sum(f.values * f.grid.vx) * h3)
    py = float(np.sum(f.values * f.grid.vy) * h3)
    pz = float(np.sum(f.values * f.grid.vz) * h3)
    energy = float(np.sum(f.values * f.grid.r2) * h3 / 2.0)
    return mass, (px, py, pz), energy


def entropy(f, f_floor=F_FLOOR):
    """H(f) = sum f ln f h^3, with x ln x extended by 0 below f_floor."""
    v = f.values
    mask = v > f_floor
    return float(
        np.sum(np.where(mask, v * np.log(np.where(mask, v, 1.0)), 0.0))
        * f.grid.cell_volume
    )


def log_gradient(values, h, tol):
    """The quotient grad f / f as the centered difference of ln f.

    Exact for Gaussian log-densities (ln f quadratic), which removes the
    dominant quotient-discretization error at desk resolutions. Only
    cells above the gate participate; a stencil arm that reaches a gated
    or out-of-domain cell falls back to the one-sided difference on the
    valid side, and cells with no valid neighbor along an axis get 0.

    Returns (xi components, gate mask).
    """
    mask = values > tol
    ln = np.where(mask, np.log(np.where(mask, values, 1.0)), 0.0)
    xi = []
    for axis in range(3):
        up = np.zeros_like(values)
        down = np.zeros_like(values)
        ok_up = np.zeros_like(mask)
        ok_down = np.zeros_like(mask)
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis], hi[axis] = slice(0, -1), slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        up[lo] = ln[hi] - ln[lo]
        ok_up[lo] = mask[hi]
        down[hi] = ln[hi] - ln[lo]
        ok_down[hi] = mask[lo]
        arms = np.where(ok_up, 1, 0) + np.where(ok_down, 1, 0)
        num = np.where(ok_up, up, 0.0) + np.where(ok_down, down, 0.0)
        g = np.where(mask & (arms > 0), num / np.maximum(arms, 1) / h, 0.0)
        xi.append(g)
    return xi, mask


def dissipation_single(f, coeffs, f_tol_rel=F_TOL_REL):
    """Entropy dissipation in coefficient form: int A grad f.grad f / f + int c f.

    The quotient grad f / f is realized through `log_gradient`. The form
    is obtained from the symmetric pair form by integration by parts;
    the identity is checked against `dissipation_double`, never assumed.
    """
    v = f.values
    tol = f_tol_rel * max(v.max(), 0.0)
    xi, mask = log_gradient(v, f.grid.h, tol)
    quad = np.zeros_like(v)
    for i in range(3):
        for j in range(3):
            quad += coeffs.A[SYM_ROWS[i][j]] * xi[i] * xi[j]
    term_a = np.sum(np.where(mask, v, 0.0) * quad) * f.grid.cell_volume
    term_c = np.sum(coeffs.c * v) * f.grid.cell_volume
    return float(term_a + term_c)


def dissipation_double(f, n, f_tol_rel=F_TOL_REL):
    """Symmetric pair-sum entropy dissipation (O(N^6) oracle, N <= 12).

    D = 1/2 sum_{v,w} K_n(|v-w|) f(v) f(w)
        |P(v-w) (xi(v) - xi(w))|^2 h^6,     xi = grad f / f,

    written with the projected difference squared so every term is a sum
    of squares: the result is >= 0 exactly, also in floating point. The
    v = w diagonal carries the zero difference of identical arguments
    and is skipped.
    """
    N = f.grid.N
    if N > 12:
        raise ValueError(f"pair sum is O(N^6); N = {N} > 12 rejected")
    v = f.values
    h = f.grid.h
    tol = f_tol_rel * max(v.max(), 0.0)
    xi, mask = log_gradient(v, h, tol)
    w = np.where(mask, v, 0.0)

    def view(arr, d, shifted):
        sl = tuple(
            slice(max(0, di), N + min(0, di)) if shifted
            else slice(max(0, -di), N - max(0, di))
            for di in d
        )
        return arr[sl]

    total = 0.0
    rng = range(-(N - 1), N)
    h6 = h**6
    for d in product(rng, rng, rng):
        if d == (0, 0, 0):
            continue
        z = np.array(d, dtype=float) * h
        rr = float(np.sqrt(z @ z))
        zhat = z / rr
        k = kn_eval(n, rr)
        dxi = [view(xi[i], d, False) - view(xi[i], d, True) for i in range(3)]
        along = zhat[0] * dxi[0] + zhat[1] * dxi[1] + zhat[2] * dxi[2]
        proj_sq = (
            (dxi[0] - zhat[0] * along) ** 2
            + (dxi[1] - zhat[1] * along) ** 2
            + (dxi[2] - zhat[2] * along) ** 2
        )
        pair_w = view(w, d, False) * view(w, d, True)
        total += 0.5 * k * float(np.sum(pair_w * proj_sq)) * h6
    return total


def fisher(f, f_tol_rel=F_TOL_REL):
    """Fisher information, both discretizations.

    Returns (I, I_sqrt) with I = sum |grad f|^2 / f h^3 over gated cells
    and I_sqrt = sum |grad sqrt(f)|^2 h^3. The two are computed from
    independent difference quotients (of f and of sqrt f), so their
    factor-4 relation is evidence of consistency, not a tautology.
    """
    v = f.values
    h = f.grid.h
    grads = gradient_values(v, h)
    tol = f_tol_rel * max(v.max(), 0.0)
    mask = v > tol
    vsafe = np.where(mask, v, 1.0)
    grad_sq = grads[0] ** 2 + grads[1] ** 2 + grads[2] ** 2
    I = float(np.sum(np.where(mask, grad_sq / vsafe, 0.0)) * f.grid.cell_volume)
    s = np.sqrt(np.maximum(v, 0.0))
    gs = gradient_values(s, h)
    I_sqrt = float(np.sum(gs[0] ** 2 + gs[1] ** 2 + gs[2] ** 2) * f.grid.cell_volume)
    return I, I_sqrt


def h3_relative(f, f_floor=F_FLOOR):
    """Weighted relative entropy against M:

    H3(f | M) = sum (f ln f - f + f |v|^2 + M) <v>^3 h^3.

    Vanishes identically at f = M (ln M = -|v|^2 cell by cell) and is
    nonnegative: the integrand equals M <v>^3 (x ln x - x + 1), x = f/M.
    """
    v = f.values
    grid = f.grid
    mask = v > f_floor
    flogf = np.where(mask, v * np.log(np.where(mask, v, 1.0)), 0.0)
    integrand = (flogf - v + v * grid.r2 + maxwellian(grid)) * grid.bracket_pow(3)
    return float(np.sum(integrand) * grid.cell_volume)


@dataclass
class DiagnosticsRecord:
    """One timestamped row of every tracked functional."""

    t: float
    mass: float
    px: float
    py: float
    pz: float
    energy: float
    entropy: float
    dissipation: float
    fisher: float
    fisher_sqrt: float
    l2_norms: dict = dc_field(default_factory=dict)  # k -> ||f||_{L^2_k}
    l3_m3: float = 0.0
    h3: float = 0.0
    min_f: float = 0.0
    max_f: float = 0.0
    dt: float = 0.0


DEFAULT_K_LIST = (1.5, 2.0, 2.25)


def record(f, t, dt, coeffs, k_list=DEFAULT_K_LIST, f_tol_rel=F_TOL_REL):
    """Assemble the full diagnostics record for one state."""
    mass, (px, py, pz), energy = conserved_quantities(f)
    I, I_sqrt = fisher(f, f_tol_rel)
    return DiagnosticsRecord(
        t=float(t),
        mass=mass,
        px=px,
        py=py,
        pz=pz,
        energy=energy,
        entropy=entropy(f),
        dissipation=dissipation_single(f, coeffs, f_tol_rel),
        fisher=I,
        fisher_sqrt=I_sqrt,
        l2_norms={float(k): weighted_lp_norm(f, 2, k) for k in k_list},
        l3_m3=weighted_lp_norm(f, 3, -3),
        h3=h3_relative(f),
        min_f=f.min,
        max_f=f.max,
        dt=float(dt),
    )
