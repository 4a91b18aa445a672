"""Compactly supported frequency cutoffs theta used by the multiplier operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numerics import central_stencil
from .grid import GridSpec
from .partition import LittlewoodPaley, ramp


@dataclass(frozen=True)
class CutoffDescriptor:
    """A smooth cutoff theta with supp theta in {|xi| <= support_radius}.

    Radial cutoffs evaluate ``profile`` on |xi|.  Tensor cutoffs evaluate the
    product of ``profile`` over the coordinates (``|xi_i|`` each); they are
    not radial and cannot use the radial quadrature path.
    """

    name: str
    profile: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    inner_radius: float = 0.0
    radial: bool = True

    def radial_values(self, r) -> np.ndarray:
        if not self.radial:
            raise ValueError(f"cutoff {self.name!r} is not radial")
        return self.profile(np.asarray(r, dtype=float))

    def __call__(self, xi) -> np.ndarray:
        """Evaluate at vectors xi (coordinates on the last axis)."""
        xi = np.asarray(xi, dtype=float)
        if self.radial:
            return self.profile(np.sqrt(np.sum(xi * xi, axis=-1)))
        out = 1.0
        for i in range(xi.shape[-1]):
            out = out * self.profile(np.abs(xi[..., i]))
        return out

    def on_grid(self, grid: GridSpec, j: float = 0.0, check: bool = True) -> np.ndarray:
        """theta(2^-j xi) over the centred frequency lattice."""
        if check:
            grid.check_band(self.support_radius, j)
        scale = 2.0**-j
        if self.radial:
            return self.profile(grid.freq_radius * scale)
        out = np.ones(grid.shape)
        for f in grid.freqs():
            out = out * self.profile(np.abs(f) * scale)
        return out

    def scaled(self, factor: float, name: str | None = None) -> "CutoffDescriptor":
        """theta(xi / factor): support and inner radius scale by ``factor``."""
        base = self.profile
        return CutoffDescriptor(
            name or f"{self.name}*{factor:g}",
            lambda r: base(np.asarray(r, dtype=float) / factor),
            self.support_radius * factor,
            self.inner_radius * factor,
            self.radial,
        )

    def cm_norm(self, order: int, samples: int = 4001) -> float:
        """Finite-difference estimate of max_{k<=order} sup |d^k profile / dr^k|."""
        r = np.linspace(0.0, self.support_radius * 1.05, samples)
        step = max(1e-2 * self.support_radius, 4 * (r[1] - r[0]))
        best = float(np.max(np.abs(self.profile(np.abs(r)))))
        for k in range(1, order + 1):
            offsets, weights = central_stencil(k)
            deriv = sum(w * self.profile(np.abs(r + o * step)) for o, w in zip(offsets, weights))
            best = max(best, float(np.max(np.abs(deriv))) / step**k)
        return best


def annular_cutoff(part: LittlewoodPaley) -> CutoffDescriptor:
    """psi from the partition: supported in 1/2 <= |xi| <= 2."""
    return CutoffDescriptor("psi", part.psi, 2.0, 0.5)


def ball_cutoff(part: LittlewoodPaley) -> CutoffDescriptor:
    """phi from the partition: 1 on |xi| <= 1, supported in |xi| <= 2."""
    return CutoffDescriptor("phi", part.phi, 2.0)


def plateau_cutoff(one_radius: float, support_radius: float, sharpness: float = 1.0) -> CutoffDescriptor:
    """Radial cutoff equal to 1 on |xi| <= one_radius and 0 beyond support_radius."""
    if not 0 < one_radius < support_radius:
        raise ValueError("need 0 < one_radius < support_radius")

    def profile(r):
        return 1.0 - ramp(r, one_radius, support_radius, sharpness)

    return CutoffDescriptor(f"plateau({one_radius:g},{support_radius:g})", profile, support_radius)


def tensor_cutoff(part: LittlewoodPaley) -> CutoffDescriptor:
    """prod_i phi(xi_i): smooth but not radial; supported in |xi| <= 2 sqrt(n) <= 2 sqrt(3)."""
    return CutoffDescriptor("phi_tensor", part.phi, 2.0 * np.sqrt(3.0), radial=False)


def annular_bump(lo: float = 0.5, hi: float = 2.0, strength: float = 8.0, power: float = 1.0) -> CutoffDescriptor:
    """exp(c - c / (1 - s^2)^a) with s the position across [lo, hi] rescaled to [-1, 1].

    Peaks at 1 in the middle of the annulus and vanishes to infinite order at
    both ends.  Wider and smoother than psi, which keeps the kernel envelope
    constants uniform at moderate j.
    """
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def profile(r):
        s = (np.asarray(r, dtype=float) - mid) / half
        inside = np.abs(s) < 1
        u = np.where(inside, 1.0 - s * s, 1.0)
        return np.where(inside, np.exp(strength - strength / u**power), 0.0)

    return CutoffDescriptor(f"bump({lo:g},{hi:g})", profile, hi, lo)
