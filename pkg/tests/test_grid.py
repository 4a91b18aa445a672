import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavelab.errors import GuardError, RegionError
from wavelab.grid import (
    Region,
    SpatialField,
    SpectralField,
    from_spectral,
    lp_norm,
    make_grid,
    spectral_energy,
    to_spectral,
)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return SpatialField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def test_grid_arithmetic():
    g = make_grid(2, 256, 8)
    assert g.spacing == 0.03125
    assert g.nyquist == pytest.approx(100.53096491487338, rel=1e-14)
    assert make_grid(1, 2, 1).spacing == 0.5


@pytest.mark.parametrize(
    "args, message",
    [((2, 255, 8), "power of two"), ((2, 6, 8), "power of two"), ((4, 8, 8), "dim"), ((2, 8, 0), "positive"), ((2, 8, -1.0), "positive")],
)
def test_grid_validation(args, message):
    with pytest.raises(ValueError, match=message):
        make_grid(*args)


def test_fields_reject_bad_samples():
    g = make_grid(1, 8, 1)
    with pytest.raises(ValueError):
        SpatialField(g, np.zeros(4))
    with pytest.raises(ValueError):
        SpatialField(g, np.full(8, np.nan))


def test_fields_are_read_only():
    f = random_field(make_grid(1, 8, 1), 0)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


@pytest.mark.parametrize("dim, N", [(1, 256), (2, 64), (3, 16)])
def test_round_trip(dim, N):
    f = random_field(make_grid(dim, N, 5.0), 1)
    back = from_spectral(to_spectral(f)).samples
    assert np.linalg.norm(back - f.samples) / np.linalg.norm(f.samples) < 1e-12
    F = SpectralField(f.grid, f.samples)
    again = to_spectral(from_spectral(F)).samples
    assert np.linalg.norm(again - F.samples) / np.linalg.norm(F.samples) < 1e-12


def test_gaussian_transform_pair():
    g = make_grid(2, 256, 32)
    f = SpatialField(g, np.exp(-(g.radius**2) / 2))
    F = to_spectral(f).samples
    exact = 2 * np.pi * np.exp(-(g.freq_radius**2) / 2)
    assert np.max(np.abs(F - exact)) / np.max(exact) < 1e-8


def test_lattice_mode_concentrates_on_one_bin():
    g = make_grid(2, 32, 4.0)
    k = (3, -5)
    xs = g.coords()
    phase = sum(ki * g.freq_spacing * x for ki, x in zip(k, xs))
    F = to_spectral(SpatialField(g, np.exp(1j * phase))).samples
    idx = tuple(ki + 16 for ki in k)
    assert F[idx] == pytest.approx(g.box_length**2, rel=1e-12)
    rest = F.copy()
    rest[idx] = 0
    assert np.max(np.abs(rest)) < 1e-10


def test_plancherel():
    f = random_field(make_grid(2, 64, 3.0), 2)
    lhs = lp_norm(f, 2, Region.whole()) ** 2
    assert lhs == pytest.approx(spectral_energy(to_spectral(f)), rel=1e-10)


def test_indicator_area():
    g = make_grid(2, 512, 4.0)
    f = SpatialField(g, (g.radius < 1).astype(float))
    assert lp_norm(f, 1, Region.whole()) == pytest.approx(np.pi, rel=1e-3)
    assert lp_norm(f, np.inf, Region.whole()) == 1.0


def test_empty_region_gives_zero():
    f = random_field(make_grid(2, 16, 4.0), 3)
    assert lp_norm(f, 1, Region.ball(0.0)) == 0.0
    assert lp_norm(f, np.inf, Region.annulus(0.01, 0.02)) == 0.0


def test_region_exceeding_box():
    f = random_field(make_grid(2, 16, 8.0), 3)
    with pytest.raises(RegionError, match="region exceeds box"):
        lp_norm(f, 1, Region.shell(2))
    assert lp_norm(f, 1, Region.shell(1)) > 0


def test_region_validation():
    with pytest.raises(ValueError):
        Region.annulus(2.0, 1.0)
    with pytest.raises(ValueError):
        Region.ball(-1.0)
    with pytest.raises(ValueError):
        Region("square")


def test_offset_ball():
    g = make_grid(2, 256, 8.0)
    f = SpatialField(g, np.ones(g.shape))
    assert lp_norm(f, 1, Region.ball(1.0, center=(1.5, 0.0))) == pytest.approx(np.pi, rel=1e-2)


def test_aliasing_guard():
    g = make_grid(2, 256, 8)
    g.check_band(2.0, 5)  # 64 < 0.9 * 100.5
    with pytest.raises(GuardError, match="aliasing guard"):
        g.check_band(2.0, 6)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r1=st.floats(0.1, 1.5), r2=st.floats(0.1, 1.5), p=st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
def test_norm_monotone_in_region(seed, r1, r2, p):
    f = random_field(make_grid(2, 32, 4.0), seed)
    small, big = sorted((r1, r2))
    assert lp_norm(f, p, Region.ball(small)) <= lp_norm(f, p, Region.ball(big)) + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), cut=st.floats(0.2, 1.7))
def test_l1_additive_over_disjoint_regions(seed, cut):
    f = random_field(make_grid(2, 32, 4.0), seed)
    whole = lp_norm(f, 1, Region.annulus(0.0, 2.0))
    parts = lp_norm(f, 1, Region.annulus(0.0, cut)) + lp_norm(f, 1, Region.annulus(cut, 2.0))
    assert parts == pytest.approx(whole, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 3), scale=st.floats(1e-6, 1e6))
def test_round_trip_property(seed, dim, scale):
    N = {1: 64, 2: 16, 3: 8}[dim]
    f = random_field(make_grid(dim, N, 2.0), seed)
    f = SpatialField(f.grid, f.samples * scale)
    back = from_spectral(to_spectral(f)).samples
    assert np.linalg.norm(back - f.samples) <= 1e-12 * np.linalg.norm(f.samples)
