import numpy as np
import pytest

from wavelab._numerics import gauss_legendre
from wavelab.cutoffs import annular_bump, annular_cutoff, ball_cutoff, tensor_cutoff
from wavelab.errors import GuardError, RegionError
from wavelab.grid import make_grid
from wavelab.kernels import (
    compute_kernel,
    envelope_constant,
    far_field_and_lowfreq_check,
    lp_norms,
    lp_slope_scan,
    peak_radius,
    plancherel_l2,
    radial_profile,
)
from wavelab.partition import build_partition


@pytest.fixture(scope="module")
def part():
    return build_partition()


@pytest.fixture(scope="module")
def psi():
    return annular_bump()


@pytest.fixture(scope="module")
def grid2():
    return make_grid(2, 1024, 8.0)


def half_inverse(psi, y):
    """(2 pi)^-1 int_0^inf e^{i xi y} psi(xi) d xi by a fixed Gauss rule on [1/2, 2]."""
    t, w = gauss_legendre(400)
    xi = 0.5 + 1.5 * t
    vals = psi.radial_values(xi) * 1.5 * w
    return np.exp(1j * np.outer(y, xi)) @ vals / (2 * np.pi)


def test_one_dimensional_kernel_splits_into_shifted_halves(psi):
    grid = make_grid(1, 4096, 32.0)
    j = 4
    K = compute_kernel(psi, j, grid).samples.samples
    x = grid.axis()
    s = 2.0**j
    # positive frequencies travel to x = -1, negative ones to x = +1
    expected = s * half_inverse(psi, s * (x + 1)) + s * np.conj(half_inverse(psi, s * (x - 1)))
    assert np.max(np.abs(K - expected)) / np.max(np.abs(K)) < 1e-8


@pytest.mark.parametrize("dim, N, X, j", [(1, 1024, 8.0, 5), (2, 512, 8.0, 5), (3, 128, 16.0, 3)])
def test_l2_norm_matches_plancherel(psi, dim, N, X, j):
    K = compute_kernel(psi, j, make_grid(dim, N, X))
    assert lp_norms(K, (2,))[2] == pytest.approx(plancherel_l2(psi, j, dim), rel=1e-10)


def test_grid_and_quadrature_agree(psi, grid2):
    K = compute_kernel(psi, 6, grid2).samples.samples
    rng = np.random.default_rng(0)
    idx = rng.integers(256, 768, size=(100, 2))
    radii = grid2.radius[idx[:, 0], idx[:, 1]]
    quad = radial_profile(psi, 6, radii, 2)
    assert np.max(np.abs(quad - K[idx[:, 0], idx[:, 1]])) / np.max(np.abs(K)) < 1e-6


@pytest.mark.parametrize("dim, N, X, j", [(1, 4096, 32.0, 4), (3, 128, 16.0, 3)])
def test_quadrature_in_other_dimensions(psi, dim, N, X, j):
    grid = make_grid(dim, N, X)
    K = compute_kernel(psi, j, grid)
    Q = compute_kernel(psi, j, grid, method="radial_quadrature")
    assert np.max(np.abs(K.samples.samples - Q.samples.samples)) / np.max(np.abs(K.samples.samples)) < 1e-6


def test_phase_free_kernel_is_a_dilation(psi, grid2):
    j = 5
    K = compute_kernel(psi, j, grid2, phase_on=False).samples.samples
    r = grid2.radius[512, 512:600]
    dilated = 2.0 ** (2 * j) * radial_profile(psi, 0, 2.0**j * r, 2, phase_on=False)
    assert np.max(np.abs(K[512, 512:600] - dilated)) / np.max(np.abs(K)) < 1e-8


def test_kernel_method_errors(part, grid2):
    with pytest.raises(ValueError, match="radial"):
        compute_kernel(tensor_cutoff(part), 2, make_grid(2, 64, 8.0), method="radial_quadrature")
    with pytest.raises(ValueError, match="unknown kernel method"):
        compute_kernel(annular_bump(), 2, grid2, method="spline")
    with pytest.raises(GuardError):
        compute_kernel(annular_bump(), 8, grid2)


def test_envelope_constant_without_weight(psi, grid2):
    K = compute_kernel(psi, 5, grid2)
    assert envelope_constant(K, 0) == np.max(np.abs(K.samples.samples)) * 2.0 ** (-7.5)


def test_envelope_constant_uniform_in_j(psi):
    grid = make_grid(2, 2048, 8.0)
    c3 = []
    for j in range(4, 9):
        K = compute_kernel(psi, j, grid)
        c3.append(envelope_constant(K, 3))
        if j >= 5:
            assert abs(peak_radius(K) - 1.0) < 4 * 2.0**-j
    assert max(c3) / min(c3) < 3


def test_far_field_and_low_frequency_constants(part, psi, grid2):
    ball = ball_cutoff(part)
    checks = [far_field_and_lowfreq_check(ball, j, grid2, part) for j in range(4, 8)]
    far = [c["far_field"] for c in checks]
    low = [c["low_frequency"] for c in checks]
    assert max(far) / min(far) < 3
    assert max(low) / min(low) < 2
    with pytest.raises(RegionError, match="box too small"):
        far_field_and_lowfreq_check(ball, 2, make_grid(2, 64, 4.0), part)


def test_phase_free_far_field_decays(part, grid2):
    # without the phase the dilated kernel concentrates at the origin
    ann = annular_cutoff(part)
    far = [far_field_and_lowfreq_check(ann, j, grid2, part, phase_on=False)["far_field"] for j in range(4, 8)]
    assert all(b < a for a, b in zip(far, far[1:]))
    assert far[-1] < 1e-2 * far[0]


@pytest.mark.parametrize("p, expected, tol", [(1, 0.5, 0.25), (2, 1.0, 0.02), (np.inf, 1.5, 0.15)])
def test_lp_slopes(psi, grid2, p, expected, tol):
    slope, norms = lp_slope_scan(psi, p, range(4, 8), grid2)
    assert slope == pytest.approx(expected, abs=tol)
    assert len(norms) == 4


def test_zero_phase_sup_slope(psi, grid2):
    slope, _ = lp_slope_scan(psi, np.inf, range(4, 8), grid2, phase_on=False)
    assert slope == pytest.approx(2.0, abs=0.1)
    assert slope > 1.5


def test_l1_refused_on_the_line(psi):
    with pytest.raises(ValueError, match="finite complex measure"):
        lp_slope_scan(psi, 1, range(2, 4), make_grid(1, 256, 8.0))


def test_rotational_symmetry(psi, grid2):
    K = np.abs(compute_kernel(psi, 6, grid2).samples.samples)
    c = 512
    for k in range(1, 100, 7):
        # (3k, 4k) and (5k, 0) cells sit at the same radius
        assert K[c + 3 * k, c + 4 * k] == pytest.approx(K[c + 5 * k, c], rel=1e-6, abs=1e-9 * K.max())
        assert K[c + k, c] == pytest.approx(K[c, c - k], rel=1e-12)


def test_cutoff_smoothness_norms(part, psi):
    for cut in (psi, annular_cutoff(part)):
        norms = [cut.cm_norm(M) for M in range(7)]
        assert np.all(np.isfinite(norms))
