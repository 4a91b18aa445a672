import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavelab.cutoffs import ball_cutoff, plateau_cutoff
from wavelab.grid import Region, SpatialField, SpectralField, from_spectral, lp_norm, make_grid, to_spectral
from wavelab.partition import build_partition
from wavelab.suites import oracle_error
from wavelab.symbols import BilinearSymbol, make_symbol
from wavelab.trilinear import (
    apply_bilinear,
    apply_half_wave,
    duality_residual,
    integrate,
    make_triple,
    random_field,
    support_condition,
    trilinear_form,
    wave_symbol,
)


@pytest.fixture(scope="module")
def part():
    return build_partition()


@pytest.fixture(scope="module")
def triple(part):
    ball = ball_cutoff(part)
    return make_triple(ball, ball, plateau_cutoff(4.0, 5.0))


LINE = make_grid(1, 256, 2 * np.pi)


def band_limited(grid, radius, seed):
    rng = np.random.default_rng(seed)
    F = (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)) * (grid.freq_radius <= radius)
    return from_spectral(SpectralField(grid, F))


def test_identity_multiplier_on_the_band():
    grid = make_grid(2, 64, 8.0)
    f = band_limited(grid, 6.0, 0)
    theta = plateau_cutoff(7.0, 8.0)
    out = apply_half_wave(theta, 0, False, f)
    assert np.max(np.abs(out.samples - f.samples)) < 1e-13 * np.max(np.abs(f.samples))
    waved = apply_half_wave(theta, 0, True, f)
    assert lp_norm(waved, 2, Region.whole()) == pytest.approx(lp_norm(f, 2, Region.whole()), rel=1e-12)


def test_phase_cancellation(part):
    grid = make_grid(2, 64, 8.0)
    f = random_field(grid, np.random.default_rng(1))
    theta = ball_cutoff(part)
    back = apply_half_wave(theta, 2, True, apply_half_wave(theta, 2, True, f), sign=-1)
    squared = apply_half_wave(theta, 2, False, apply_half_wave(theta, 2, False, f))
    assert np.max(np.abs(back.samples - squared.samples)) < 1e-12 * np.max(np.abs(f.samples))


@pytest.mark.parametrize("grid", [make_grid(1, 64, 16.0), make_grid(2, 16, 4.0)])
def test_constant_symbol_gives_pointwise_product(grid):
    rng = np.random.default_rng(2)
    f, g = random_field(grid, rng), random_field(grid, rng)
    out = apply_bilinear(make_symbol("constant", dim=grid.dim), f, g)
    assert np.max(np.abs(out.samples - f.samples * g.samples)) < 1e-12 * np.max(np.abs(f.samples * g.samples))


def test_separable_symbol(part):
    grid = make_grid(1, 64, 16.0)
    t1, t2 = ball_cutoff(part), plateau_cutoff(1.0, 3.0)
    sigma = BilinearSymbol(0.0, 1, "separable", lambda xi, eta: t1(xi) * t2(eta))
    rng = np.random.default_rng(3)
    f, g = random_field(grid, rng), random_field(grid, rng)
    out = apply_bilinear(sigma, f, g).samples
    expected = apply_half_wave(t1, 0, False, f).samples * apply_half_wave(t2, 0, False, g).samples
    assert np.max(np.abs(out - expected)) < 1e-12 * np.max(np.abs(expected))


def test_expansion_matches_dense_sum():
    assert oracle_error("sjo", -1.5, 64, 16.0, 0) < 1e-8


def test_holder_bound_and_zero(triple):
    rng = np.random.default_rng(4)
    f, g, h = (random_field(LINE, rng) for _ in range(3))
    val = trilinear_form(triple, 4, True, f, g, h)
    sup = lambda t, u: lp_norm(apply_half_wave(t, 4, True, u), np.inf, Region.whole())  # noqa: E731
    l1 = lp_norm(apply_half_wave(triple.theta3, 4, True, h), 1, Region.whole())
    assert abs(val) <= sup(triple.theta1, f) * sup(triple.theta2, g) * l1
    zero = SpatialField(LINE, np.zeros(LINE.shape))
    assert trilinear_form(triple, 4, True, zero, zero, zero) == 0


def test_trilinear_form_matches_dense_pairing(triple):
    rng = np.random.default_rng(5)
    f, g, h = (random_field(LINE, rng) for _ in range(3))
    dense = integrate(apply_bilinear(wave_symbol(triple, 4, 1), f, g).samples * h.samples, LINE)
    form = trilinear_form(triple, 4, True, f, g, h)
    assert abs(dense - form) < 1e-10 * abs(form)


def test_duality_on_the_line(triple):
    assert duality_residual(triple, 4, LINE, 8, 0) < 1e-10


def test_duality_in_the_plane(triple):
    grid = make_grid(2, 128, 2 * np.pi)
    assert duality_residual(triple, 3, grid, 2, 0) < 1e-10


def test_negative_control(triple):
    bad = make_triple(triple.theta1, triple.theta2, triple.theta3.scaled(0.5))
    assert not bad.support_condition_met
    with pytest.raises(ValueError, match="support condition"):
        duality_residual(bad, 4, LINE, 1, 0)
    assert duality_residual(bad, 4, LINE, 2, 0, require_condition=False) > 1e-6


def test_disjoint_spectrum_gives_zero(triple):
    rng = np.random.default_rng(6)
    f, g = random_field(LINE, rng), random_field(LINE, rng)
    # supp theta1 + supp theta2 reaches 4 * 2^j = 64; keep h between 70 and 80
    band = (LINE.freq_radius > 70) & (LINE.freq_radius < 80)
    h = from_spectral(SpectralField(LINE, to_spectral(random_field(LINE, rng)).samples * band))
    scale = np.prod([lp_norm(u, 2, Region.whole()) for u in (f, g, h)])
    dense = integrate(apply_bilinear(wave_symbol(triple, 4, 1), f, g).samples * h.samples, LINE)
    assert abs(dense) < 1e-12 * scale
    assert abs(trilinear_form(triple, 4, True, f, g, h)) < 1e-12 * scale


def test_support_condition_flag(part):
    ball = ball_cutoff(part)
    assert support_condition(ball, ball, plateau_cutoff(4.0, 5.0))
    assert not support_condition(ball, ball, plateau_cutoff(3.5, 5.0))


def test_grid_mismatch(triple):
    rng = np.random.default_rng(7)
    f = random_field(LINE, rng)
    other = random_field(make_grid(1, 128, 2 * np.pi), rng)
    with pytest.raises(ValueError, match="common grid"):
        trilinear_form(triple, 2, True, f, f, other)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_symmetry_and_linearity(triple, seed, a):
    rng = np.random.default_rng(seed)
    f, g, h, k = (random_field(LINE, rng) for _ in range(4))
    base = trilinear_form(triple, 4, True, f, g, h)
    swapped = make_triple(triple.theta3, triple.theta2, triple.theta1)
    assert trilinear_form(swapped, 4, True, h, g, f) == pytest.approx(base, rel=1e-12)
    combo = SpatialField(LINE, f.samples + a * k.samples)
    lhs = trilinear_form(triple, 4, True, combo, g, h)
    other = trilinear_form(triple, 4, True, k, g, h)
    assert abs(lhs - (base + a * other)) <= 1e-12 * (abs(base) + abs(a * other))
