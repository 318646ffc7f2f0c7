import numpy as np
import pytest
from scipy import integrate

from landau import build_grid, kn_eval, projection
from landau.kernel import (
    KernelFieldSet,
    SYM_COMPONENTS,
    a_kernel_field,
    b_kernel_field,
    c_kernel_field,
    check_resolution,
    lattice_convolve,
    offset_coords,
)


def test_kn_outer_branch():
    assert kn_eval(4, 1.0) == 1.0
    assert kn_eval(2, 3.0) == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_kn_branch_matching():
    # both branches agree in value and slope at r = 1/n
    assert kn_eval(4, 0.25) == pytest.approx(4.0, rel=1e-14)
    eps = 1e-7
    for n in (2, 5, 9):
        r = 1.0 / n
        left = (kn_eval(n, r) - kn_eval(n, r - eps)) / eps
        right = (kn_eval(n, r + eps) - kn_eval(n, r)) / eps
        assert left == pytest.approx(right, rel=1e-5)


def test_kn_origin_in_band():
    for n in (1, 4, 17):
        v = kn_eval(n, 0.0)
        assert v == 1.5 * n
        assert n <= v <= 2 * n
    assert kn_eval(4, 0.0) == 6.0


def test_kn_dominated_by_coulomb():
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(1, 40))
        r = float(rng.uniform(1e-6, 5.0))
        assert kn_eval(n, r) <= 1.0 / r + 1e-15


def test_kn_monotonicity():
    rng = np.random.default_rng(1)
    r = np.sort(rng.uniform(0.0, 3.0, size=200))
    for n in (1, 3, 8):
        vals = kn_eval(n, r)
        assert np.all(np.diff(vals) <= 1e-15)
    for r0 in rng.uniform(0.0, 3.0, size=50):
        vals = [kn_eval(n, float(r0)) for n in range(1, 12)]
        assert np.all(np.diff(vals) >= -1e-15)


def test_projection_basics():
    assert np.allclose(projection((1.0, 0.0, 0.0)), np.diag([0.0, 1.0, 1.0]))
    rng = np.random.default_rng(2)
    for _ in range(25):
        z = rng.standard_normal(3)
        P = projection(z)
        assert np.allclose(P @ z, 0.0, atol=1e-14)
        assert np.allclose(P, P.T)
        assert np.allclose(P @ P, P, atol=1e-14)
        assert np.trace(P) == pytest.approx(2.0, rel=1e-14)
    d = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    expected = np.array([[0.5, -0.5, 0.0], [-0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(projection(d), expected)
    with pytest.raises(ValueError):
        projection((0.0, 0.0, 0.0))


def _full_matrix(G, idx):
    m = np.empty((3, 3))
    for comp, (i, j) in enumerate(SYM_COMPONENTS):
        m[i, j] = m[j, i] = G[comp][idx]
    return m


def test_a_kernel_samples():
    g = build_grid(8, 4.0)  # h = 1, so 1/n = 0.5 < h for n = 2
    G = a_kernel_field(g, 2)
    np.testing.assert_allclose(_full_matrix(G, (1, 0, 0)), np.diag([0.0, 1.0, 1.0]))
    np.testing.assert_allclose(_full_matrix(G, (0, 0, 0)), 2.0 * np.eye(3))
    assert np.trace(_full_matrix(G, (0, 0, 0))) == pytest.approx(6.0)  # 3n


def _symmetric_index(rng, N):
    # skip the j = -N padding plane: it has no positive partner and is
    # never reached by differences of physical cells
    return tuple(int(i) for i in rng.integers(-(N - 1), N, size=3))


def test_a_kernel_even_and_eigenvalue_band():
    g = build_grid(8, 3.0)
    n = 2
    G = a_kernel_field(g, n)
    z = offset_coords(g.N, g.h)
    rng = np.random.default_rng(3)
    for _ in range(60):
        idx = tuple(j % (2 * g.N) for j in _symmetric_index(rng, g.N))
        mirror = tuple((-i) % (2 * g.N) for i in idx)
        np.testing.assert_allclose(_full_matrix(G, idx), _full_matrix(G, mirror))
        r = np.sqrt(z[idx[0]] ** 2 + z[idx[1]] ** 2 + z[idx[2]] ** 2)
        eig = np.linalg.eigvalsh(_full_matrix(G, idx))
        cap = kn_eval(n, r) if r > 0 else 1.5 * n
        assert eig.min() >= -1e-13
        assert eig.max() <= cap + 1e-13


def test_b_kernel_values_and_oddness():
    g = build_grid(8, 4.0)
    gb = b_kernel_field(g, 2)
    np.testing.assert_allclose(
        [gb[i][1, 0, 0] for i in range(3)], [-2.0, 0.0, 0.0], atol=1e-14
    )
    assert all(gb[i][0, 0, 0] == 0.0 for i in range(3))
    rng = np.random.default_rng(4)
    z = offset_coords(g.N, g.h)
    for _ in range(60):
        idx = tuple(j % (2 * g.N) for j in _symmetric_index(rng, g.N))
        mirror = tuple((-i) % (2 * g.N) for i in idx)
        for i in range(3):
            assert gb[i][idx] == pytest.approx(-gb[i][mirror], abs=1e-14)
        r2 = z[idx[0]] ** 2 + z[idx[1]] ** 2 + z[idx[2]] ** 2
        if r2 > 0:
            norm = np.sqrt(sum(gb[i][idx] ** 2 for i in range(3)))
            assert norm <= 2.0 / r2 + 1e-13


def test_c_kernel_radial_integral_oracle():
    n = 3
    val, _ = integrate.quad(lambda r: -3 * n * (1 - (n * r) ** 2) * 4 * np.pi, 0, 1 / n)
    assert val == pytest.approx(-8 * np.pi, rel=1e-12)


def test_c_kernel_mass_renormalized_exactly():
    for (N, L, n) in ((16, 4.0, 2), (32, 4.0, 2), (24, 5.0, 4)):
        g = build_grid(N, L)
        q, _ = c_kernel_field(g, n)
        mass = q.sum() * g.cell_volume
        assert mass == pytest.approx(-8 * np.pi, rel=1e-14)
        assert q.max() <= 0.0


def test_c_kernel_raw_mass_near_limit():
    # off-origin lattice sum approaches -8 pi once the support is resolved
    g = build_grid(64, 2.0)  # h = 1/16 with n = 1
    _, raw = c_kernel_field(g, 1)
    assert abs(raw + 8 * np.pi) / (8 * np.pi) < 0.10


def test_c_kernel_zero_beyond_support():
    g = build_grid(16, 4.0)
    q, _ = c_kernel_field(g, 2)
    z = offset_coords(g.N, g.h)
    zx, zy, zz = np.meshgrid(z, z, z, indexing="ij")
    r = np.sqrt(zx**2 + zy**2 + zz**2)
    assert np.all(q[r > 0.5 + 1e-12] == 0.0)


def test_c_kernel_even():
    g = build_grid(12, 3.0)
    q, _ = c_kernel_field(g, 2)
    rng = np.random.default_rng(5)
    for _ in range(40):
        idx = tuple(j % (2 * g.N) for j in _symmetric_index(rng, g.N))
        mirror = tuple((-i) % (2 * g.N) for i in idx)
        assert q[idx] == q[mirror]


def test_resolution_guard():
    g = build_grid(32, 5.0)  # h = 0.3125
    with pytest.raises(ValueError, match="kernel unresolved"):
        check_resolution(g, 8)
    check_resolution(g, 4)  # n h = 1.25 <= 2 is fine
    with pytest.raises(ValueError, match="kernel unresolved"):
        KernelFieldSet(g, 8)


def _wrap_divergence(comps, axis_comp_idx, h, N):
    """Central difference divergence on the wrap-ordered lattice."""
    out = np.zeros_like(comps[0])
    for axis, ci in enumerate(axis_comp_idx):
        arr = comps[ci]
        out += (np.roll(arr, -1, axis) - np.roll(arr, 1, axis)) / (2 * h)
    return out


def test_divergence_consistency_refines_second_order():
    # div G row ~ g and div g ~ q on a fixed band away from the
    # truncation kink and the origin; error drops ~4x per refinement.
    errs_b, errs_q = {}, {}
    n = 2
    for N in (32, 64):
        g = build_grid(N, 4.0)
        ks = KernelFieldSet(g, n)
        z = offset_coords(g.N, g.h)
        zx, zy, zz = np.meshgrid(z, z, z, indexing="ij")
        r = np.sqrt(zx**2 + zy**2 + zz**2)
        j = np.where(np.arange(2 * N) < N, np.arange(2 * N), np.arange(2 * N) - 2 * N)
        jx, jy, jz = np.meshgrid(j, j, j, indexing="ij")
        interior = (np.abs(jx) < N - 1) & (np.abs(jy) < N - 1) & (np.abs(jz) < N - 1)
        mask = interior & (r > 3.0 / n) & (r < 3.0)
        div_row0 = _wrap_divergence(ks.G, (0, 3, 4), g.h, N)
        errs_b[N] = np.abs(div_row0 - ks.g[0])[mask].max()
        div_g = _wrap_divergence(ks.g, (0, 1, 2), g.h, N)
        errs_q[N] = np.abs(div_g - ks.q)[mask].max()
    assert errs_b[32] / errs_b[64] > 3.0
    assert errs_q[32] / errs_q[64] > 3.0


def test_lattice_convolve_against_loops():
    rng = np.random.default_rng(6)
    g = build_grid(8, 4.0)
    kernel = rng.standard_normal((16, 16, 16))
    field = rng.standard_normal((8, 8, 8))
    fast = lattice_convolve(kernel, field, g.h)
    slow = np.zeros_like(field)
    for ix in range(8):
        for iy in range(8):
            for iz in range(8):
                acc = 0.0
                for jx in range(8):
                    for jy in range(8):
                        for jz in range(8):
                            acc += kernel[(ix - jx) % 16, (iy - jy) % 16, (iz - jz) % 16] * field[jx, jy, jz]
                slow[ix, iy, iz] = acc * g.h**3
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-12)
