"""Dyadic Littlewood-Paley partition of unity.

g is a smooth radial step with g = 1 on |xi| <= 1 and g = 0 on |xi| >= 2.
phi = g, psi(xi) = g(xi) - g(2 xi), zeta = 1 - phi and psi_j = psi(2^-j xi)
for j >= 1, psi_0 = phi.  Because every psi_j is a difference of two dilates
of g, sum_{j<=k} psi_j(xi) = phi(2^-k xi) telescopes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf


def smooth_step(t, sharpness: float = 1.0) -> np.ndarray:
    """C-infinity step from 0 (t <= 0) to 1 (t >= 1).

    S(t) = (1 + erf(b (t - 1/2) / sqrt(t (1 - t)))) / 2 on (0, 1).  Near both
    ends the distance to the limit value is of order exp(-b^2 / (4 t)), so all
    derivatives vanish there, the same flatness as the exp(-1/(t(1-t))) bump.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tt = np.where(inside, t, 0.5)
    y = (tt - 0.5) / np.sqrt(tt * (1.0 - tt))
    val = 0.5 * (1.0 + erf(sharpness * y))
    return np.where(inside, val, np.where(t >= 1, 1.0, 0.0))


def ramp(r, start: float, stop: float, sharpness: float = 1.0) -> np.ndarray:
    """Smooth rise from 0 at r <= start to 1 at r >= stop."""
    return smooth_step((np.asarray(r, dtype=float) - start) / (stop - start), sharpness)


def radial_norm(xi) -> np.ndarray:
    """|xi| over the last axis of an array of vectors."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(np.sum(xi * xi, axis=-1))


@dataclass(frozen=True)
class LittlewoodPaley:
    """Partition pieces evaluated on radii |xi| (all pieces are radial)."""

    sharpness: float = 1.0

    def __post_init__(self):
        if not self.sharpness > 0:
            raise ValueError("sharpness must be positive")

    def step(self, r) -> np.ndarray:
        return 1.0 - ramp(r, 1.0, 2.0, self.sharpness)

    def phi(self, r) -> np.ndarray:
        return self.step(r)

    def psi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.step(r) - self.step(2.0 * r)

    def zeta(self, r) -> np.ndarray:
        return 1.0 - self.step(r)

    def psi_j(self, j: int, r) -> np.ndarray:
        if j < 0:
            raise ValueError("j must be nonnegative")
        if j == 0:
            return self.phi(r)
        return self.psi(np.asarray(r, dtype=float) * 2.0**-j)

    def phi_scaled(self, k: int, r) -> np.ndarray:
        """phi(2^-k xi)."""
        return self.phi(np.asarray(r, dtype=float) * 2.0**-k)

    def evaluate(self, kind: str, xi, j: int = 0) -> np.ndarray:
        """Evaluate a named piece at vectors xi (last axis is the coordinate).

        kind is one of psi_j, varphi, zeta, varphi_scaled (j is the dilation k).
        """
        r = radial_norm(xi)
        if kind == "psi_j":
            return self.psi_j(j, r)
        if kind == "varphi":
            return self.phi(r)
        if kind == "zeta":
            return self.zeta(r)
        if kind == "varphi_scaled":
            if j < 0:
                raise ValueError("j must be nonnegative")
            return self.phi_scaled(j, r)
        raise ValueError(f"unknown partition component {kind!r}")


def build_partition(sharpness: float = 1.0) -> LittlewoodPaley:
    return LittlewoodPaley(sharpness)


def partition_residual(part: LittlewoodPaley, radii, k: int) -> float:
    """max |sum_{j=0}^k psi_j - phi(2^-k .)| over the given radii."""
    radii = np.asarray(radii, dtype=float)
    total = np.zeros_like(radii)
    for j in range(k + 1):
        total += part.psi_j(j, radii)
    return float(np.max(np.abs(total - part.phi_scaled(k, radii))))
