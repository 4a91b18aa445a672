"""Half-wave multipliers, the bilinear operator T_sigma and the trilinear form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import CutoffDescriptor
from .grid import SpatialField, apply_multiplier
from .symbols import BilinearSymbol, ProductSymbolExpansion, apply_bilinear_dense, apply_expansion


@dataclass(frozen=True)
class CutoffTriple:
    theta1: CutoffDescriptor
    theta2: CutoffDescriptor
    theta3: CutoffDescriptor
    support_condition_met: bool


def support_condition(t1: CutoffDescriptor, t2: CutoffDescriptor, t3: CutoffDescriptor, samples: int = 4001) -> bool:
    """Whether theta3(-zeta) = 1 (to 1e-12) on the ball of radius a1 + a2 containing supp t1 + supp t2.

    Radial theta3 is checked on a dense set of radii; tensor theta3 on a dense
    square covering the ball.
    """
    reach = t1.support_radius + t2.support_radius
    if t3.radial:
        vals = t3.radial_values(np.linspace(0.0, reach, samples))
    else:
        ax = np.linspace(-reach, reach, 401)
        pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
        vals = t3(-pts)[np.linalg.norm(pts, axis=-1) <= reach]
    return bool(np.max(np.abs(vals - 1.0)) < 1e-12)


def make_triple(t1: CutoffDescriptor, t2: CutoffDescriptor, t3: CutoffDescriptor) -> CutoffTriple:
    return CutoffTriple(t1, t2, t3, support_condition(t1, t2, t3))


def apply_half_wave(theta: CutoffDescriptor, j: float, phase_on: bool, f: SpatialField, sign: int = 1) -> SpatialField:
    """e^{i sign |D|} theta(2^-j D) f (phase omitted when phase_on is false)."""
    grid = f.grid
    mult = theta.on_grid(grid, j).astype(complex)
    if phase_on:
        mult *= np.exp(1j * sign * grid.freq_radius)
    return apply_multiplier(f, mult)


def apply_bilinear(sigma: BilinearSymbol | ProductSymbolExpansion, f: SpatialField, g: SpatialField, **kwargs) -> SpatialField:
    """T_sigma(f, g): term by term for an expansion, direct double sum for a raw symbol."""
    if isinstance(sigma, ProductSymbolExpansion):
        return apply_expansion(sigma, f, g)
    return apply_bilinear_dense(sigma, f, g, **kwargs)


def integrate(values: np.ndarray, grid) -> complex:
    return complex(np.sum(values) * grid.cell_volume)


def trilinear_form(triple: CutoffTriple, j: float, phase_on: bool, f: SpatialField, g: SpatialField, h: SpatialField) -> complex:
    """int S1 f * S2 g * S3 h dx with S_k = e^{i|D|} theta_k(2^-j D)."""
    if not (f.grid == g.grid == h.grid):
        raise ValueError("trilinear form needs a common grid")
    a = apply_half_wave(triple.theta1, j, phase_on, f).samples
    b = apply_half_wave(triple.theta2, j, phase_on, g).samples
    c = apply_half_wave(triple.theta3, j, phase_on, h).samples
    return integrate(a * b * c, f.grid)


def wave_symbol(triple: CutoffTriple, j: float, dim: int) -> BilinearSymbol:
    """sigma_j(xi, eta) = e^{i(|xi| + |eta| + |xi + eta|)} theta1(2^-j xi) theta2(2^-j eta)."""
    s = 2.0**-j
    t1, t2 = triple.theta1, triple.theta2

    def sigma(xi, eta):
        r1 = np.sqrt(np.sum(xi * xi, axis=-1))
        r2 = np.sqrt(np.sum(eta * eta, axis=-1))
        tot = xi + eta
        r3 = np.sqrt(np.sum(tot * tot, axis=-1))
        return np.exp(1j * (r1 + r2 + r3)) * t1(xi * s) * t2(eta * s)

    support = (t1.support_radius / s, t2.support_radius / s)
    return BilinearSymbol(0.0, dim, "half_wave_triple", sigma, support)


def random_field(grid, rng: np.random.Generator) -> SpatialField:
    return SpatialField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def duality_residual(
    triple: CutoffTriple,
    j: float,
    grid,
    trials: int,
    seed: int,
    require_condition: bool = True,
) -> float:
    """max over random trials of |int T_{sigma_j}(f, g) h - trilinear form| / scale.

    T_{sigma_j} is evaluated by the direct double-frequency sum; scale is
    ||S1 f||_2 ||S2 g||_2 ||S3 h||_2 / sqrt(box volume), a size-matched
    normalisation for the triple product.
    """
    if require_condition and not triple.support_condition_met:
        raise ValueError("support condition theta3(-zeta) = 1 on supp theta1 + supp theta2 is not met")
    sigma = wave_symbol(triple, j, grid.dim)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f, g, h = (random_field(grid, rng) for _ in range(3))
        lhs = integrate(apply_bilinear_dense(sigma, f, g).samples * h.samples, grid)
        rhs = trilinear_form(triple, j, True, f, g, h)
        norms = [
            np.sqrt(np.sum(np.abs(apply_half_wave(t, j, True, u).samples) ** 2) * grid.cell_volume)
            for t, u in ((triple.theta1, f), (triple.theta2, g), (triple.theta3, h))
        ]
        scale = norms[0] * norms[1] * norms[2] / np.sqrt(grid.box_length**grid.dim)
        worst = max(worst, abs(lhs - rhs) / scale)
    return float(worst)
