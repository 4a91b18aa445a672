"""Periodic sampling grids, spatial/spectral fields and region norms.

Transforms follow the convention

    f^(xi) = int exp(-i xi.x) f(x) dx,   f(x) = (2 pi)^(-n) int exp(i xi.x) f^(xi) dxi,

realised on the box [-X/2, X/2)^n with N points per axis as Riemann sums:
the forward transform is h^n times the discrete transform and the inverse is
X^(-n) times the unnormalised inverse sum.  Both lattices are centred, so
frequency index k in [-N/2, N/2) carries the signed frequency 2 pi k / X.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GuardError, RegionError

#: fraction of the Nyquist radius a cutoff support may reach
GUARD_FRACTION = 0.9


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [-X/2, X/2)^n sampled with N points per axis."""

    dim: int
    points_per_axis: int
    box_length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.points_per_axis
        if n < 2 or n & (n - 1):
            raise ValueError("points_per_axis must be a power of two")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def freq_spacing(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def nyquist(self) -> float:
        return np.pi * self.points_per_axis / self.box_length

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> np.ndarray:
        return -0.5 * self.box_length + self.spacing * np.arange(self.points_per_axis)

    def freq_axis(self) -> np.ndarray:
        n = self.points_per_axis
        return self.freq_spacing * np.arange(-n // 2, n // 2)

    def coords(self) -> list[np.ndarray]:
        """Sparse (broadcastable) coordinate arrays, one per axis."""
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij", sparse=True)

    def freqs(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.freq_axis()] * self.dim), indexing="ij", sparse=True)

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the spatial lattice."""
        return _norm(self.coords())

    @cached_property
    def freq_radius(self) -> np.ndarray:
        """|xi| on the frequency lattice."""
        return _norm(self.freqs())

    def check_band(self, support_radius: float, j: float = 0.0) -> None:
        """Refuse multipliers theta(2^-j xi) with supp theta in |xi| <= a near Nyquist."""
        reach = support_radius * 2.0**j
        if reach >= GUARD_FRACTION * self.nyquist:
            raise GuardError(
                f"aliasing guard: support radius {support_radius:g} at j={j:g} reaches "
                f"{reach:.4g} >= {GUARD_FRACTION} x Nyquist {self.nyquist:.4g} "
                f"(N={self.points_per_axis}, X={self.box_length:g})"
            )


def _norm(parts) -> np.ndarray:
    total = 0.0
    for p in parts:
        total = total + p * p
    return np.sqrt(total)


def make_grid(dim: int, points_per_axis: int, box_length: float) -> GridSpec:
    return GridSpec(dim, points_per_axis, box_length)


def _frozen(samples, grid: GridSpec) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.complex128)
    if arr.shape != grid.shape:
        raise ValueError(f"samples have shape {arr.shape}, grid expects {grid.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("field samples must be finite")
    arr = arr.view()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SpatialField:
    """Complex samples at x_k = -X/2 + k h."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, self.grid))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex samples at the centred frequencies 2 pi k / X."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, self.grid))


def to_spectral(f: SpatialField) -> SpectralField:
    g = f.grid
    data = sfft.fftshift(sfft.fftn(sfft.ifftshift(f.samples)))
    data *= g.cell_volume
    return SpectralField(g, data)


def from_spectral(F: SpectralField) -> SpatialField:
    g = F.grid
    data = sfft.fftshift(sfft.ifftn(sfft.ifftshift(F.samples)))
    data /= g.cell_volume
    return SpatialField(g, data)


def apply_multiplier(f: SpatialField, multiplier: np.ndarray) -> SpatialField:
    """Return m(D) f for a multiplier sampled on the centred frequency lattice."""
    spec = sfft.fftn(sfft.ifftshift(f.samples))
    spec *= sfft.ifftshift(multiplier)
    return SpatialField(f.grid, sfft.fftshift(sfft.ifftn(spec, overwrite_x=True)))


def spectral_energy(F: SpectralField) -> float:
    """(2 pi)^-n times the Riemann sum of |F|^2 over the frequency lattice."""
    g = F.grid
    return float(np.sum(np.abs(F.samples) ** 2)) * (g.freq_spacing / (2 * np.pi)) ** g.dim


@dataclass(frozen=True)
class Region:
    """Integration region: ball, annulus, dyadic shell E_k or the whole box.

    Balls are open, annuli and shells are half-open: inner <= |x| < outer.
    """

    kind: str
    radius: float = 0.0
    inner: float = 0.0
    outer: float = 0.0
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("ball", "annulus", "whole"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "ball" and self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if self.kind == "annulus" and not 0 <= self.inner < self.outer:
            raise ValueError("annulus needs 0 <= inner < outer")

    @classmethod
    def ball(cls, radius: float, center=None) -> "Region":
        return cls("ball", radius=float(radius), center=None if center is None else tuple(center))

    @classmethod
    def annulus(cls, inner: float, outer: float) -> "Region":
        return cls("annulus", inner=float(inner), outer=float(outer))

    @classmethod
    def shell(cls, k: int) -> "Region":
        """E_k = {2^k <= |x| < 2^(k+1)}."""
        return cls.annulus(2.0**k, 2.0 ** (k + 1))

    @classmethod
    def whole(cls) -> "Region":
        return cls("whole")

    def extent(self) -> float:
        """Largest coordinate magnitude the region can reach."""
        if self.kind == "ball":
            c = max((abs(v) for v in self.center), default=0.0) if self.center else 0.0
            return c + self.radius
        if self.kind == "annulus":
            return self.outer
        return 0.0

    def mask(self, grid: GridSpec) -> np.ndarray | None:
        """Boolean membership array, or None for the whole box."""
        if self.kind == "whole":
            return None
        if self.extent() > grid.box_length / 2:
            raise RegionError(
                f"region exceeds box: extent {self.extent():g} > X/2 = {grid.box_length / 2:g}"
            )
        if self.kind == "annulus":
            r = grid.radius
            return (r >= self.inner) & (r < self.outer)
        if self.center is None or not any(self.center):
            return grid.radius < self.radius
        shifted = [x - c for x, c in zip(grid.coords(), self.center)]
        return _norm(shifted) < self.radius


def lp_norm(f: SpatialField | np.ndarray, p: float, region: Region, grid: GridSpec | None = None) -> float:
    """Riemann-sum L^p norm of f over a region; p = inf gives the max modulus."""
    if isinstance(f, SpatialField):
        grid, values = f.grid, f.samples
    else:
        if grid is None:
            raise ValueError("grid is required for raw arrays")
        values = f
    if not p >= 1:
        raise ValueError("p must lie in [1, inf]")
    mask = region.mask(grid)
    mod = np.abs(values if mask is None else values[mask])
    if mod.size == 0:
        return 0.0
    if np.isinf(p):
        return float(mod.max())
    if p == 1:
        return float(np.sum(mod)) * grid.cell_volume
    if p == 2:
        return float(np.sqrt(np.sum(mod * mod) * grid.cell_volume))
    return float((np.sum(mod**p) * grid.cell_volume) ** (1.0 / p))
