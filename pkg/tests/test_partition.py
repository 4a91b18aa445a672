import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavelab.cutoffs import annular_cutoff
from wavelab.partition import build_partition, partition_residual, smooth_step


@pytest.fixture(scope="module")
def part():
    return build_partition()


def test_telescoping_sum_over_all_scales(part):
    xi = np.array([1.3, 0.0])
    total = sum(part.psi(np.linalg.norm(xi) * 2.0**-j) for j in range(-20, 21))
    assert abs(total - 1.0) < 1e-14


def test_example_values(part):
    assert part.psi(3.0) == 0.0
    assert part.phi(0.7) == 1.0
    assert part.evaluate("zeta", np.array([5.0, 0.0])) == 1.0
    assert part.evaluate("psi_j", np.array([0.3, -0.4]), 0) == 1.0
    assert part.evaluate("varphi", np.array([0.0, 2.5])) == 0.0


def test_partial_sum_identity_at_twenty(part):
    r = np.array([20.0])
    total = sum(part.psi_j(j, r) for j in range(6))
    assert abs(total - part.phi_scaled(5, r))[0] < 1e-14
    assert part.phi_scaled(5, r)[0] == part.phi(0.625)


def test_support_of_psi(part):
    r = np.concatenate([np.linspace(0, 0.5, 1001), np.linspace(2, 50, 1001)])
    assert np.max(np.abs(part.psi(r))) <= 1e-14
    inside = np.linspace(0.51, 1.99, 1001)
    assert np.all(part.psi(inside) > 0)


def test_zeta_limits(part):
    assert np.all(part.zeta(np.linspace(0, 1, 101)) == 0.0)
    assert np.all(part.zeta(np.linspace(2, 9, 101)) == 1.0)


def test_residual_on_random_points(part):
    rng = np.random.default_rng(11)
    for k in range(13):
        xi = rng.normal(size=(10_000, 2))
        xi *= (rng.uniform(0, 2.0 ** (k + 1), size=10_000) / np.linalg.norm(xi, axis=1))[:, None]
        assert partition_residual(part, np.linalg.norm(xi, axis=1), k) < 1e-13


def test_pieces_disjoint_beyond_neighbours(part):
    r = np.geomspace(1e-3, 1e5, 20_000)
    for j in range(1, 12):
        for jj in range(j + 2, 14):
            assert np.max(part.psi_j(j, r) * part.psi_j(jj, r)) == 0.0


def test_derivatives_bounded(part):
    psi = annular_cutoff(part)
    norms = [psi.cm_norm(M) for M in range(5)]
    assert all(np.isfinite(norms))
    assert norms == sorted(norms)
    # the fourth finite-difference derivative settles under grid refinement
    assert psi.cm_norm(4, samples=8001) == pytest.approx(norms[4], rel=0.05)


def test_errors(part):
    with pytest.raises(ValueError):
        build_partition(0.0)
    with pytest.raises(ValueError):
        part.psi_j(-1, 1.0)
    with pytest.raises(ValueError):
        part.evaluate("psi_j", np.array([1.0]), -2)
    with pytest.raises(ValueError):
        part.evaluate("chi", np.array([1.0]))


def test_step_is_flat_at_the_ends():
    t = np.array([1e-3, 1 - 1e-3])
    assert smooth_step(t)[0] < 1e-100
    assert 1 - smooth_step(t)[1] < 1e-15


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(0, 1e5, allow_nan=False),
    k=st.integers(0, 12),
    sharpness=st.floats(0.25, 4.0),
)
def test_partition_properties(r, k, sharpness):
    part = build_partition(sharpness)
    vals = [part.psi_j(j, r) for j in range(k + 1)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert abs(sum(vals) - part.phi_scaled(k, r)) < 1e-13
    assert part.phi(r) + part.zeta(r) == pytest.approx(1.0, abs=1e-15)
