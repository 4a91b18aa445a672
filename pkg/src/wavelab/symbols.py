"""Bilinear symbols of class S^m_{1,0}(R^{2n}) and their Coifman-Meyer expansion.

A symbol sigma(xi, eta) is split with the dyadic partition into three regions:

* I   (xi dominant):  psi(2^-j xi) phi(2^-j+3 eta),              j >= 3
* II  (eta dominant): phi(2^-j+3 xi) psi(2^-j eta),              j >= 3
* III (comparable):   psi_j(xi) psi_{j-l}(eta), l = -2..2, with psi_0 = phi.

Each block is expanded in a Fourier series over the period box: with
u = 2^-p xi and w = 2^-q eta,

    sigma(xi, eta) W1(u) W2(w) = sum_{a,b} c(a, b) e^{i a.u} e^{i b.w}    on [-pi, pi)^{2n},

where W1, W2 are widened windows equal to 1 on the support of the partition
pieces, so multiplying back by those pieces reproduces the block exactly.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft

from ._numerics import central_stencil
from .errors import CostError, GuardError
from .grid import GridSpec, SpatialField, SpectralField, from_spectral, to_spectral
from .partition import LittlewoodPaley, ramp

SYMBOL_KINDS = ("constant", "sjo", "homogeneous_cut", "random_smooth")
REGIONS = ("I", "II", "III")
DENSE_PAIR_CAP = 2**24


@dataclass(frozen=True)
class BilinearSymbol:
    """sigma(xi, eta) with xi, eta in R^n (coordinates on the last axis).

    ``support`` optionally bounds the support: sigma vanishes unless
    |xi| <= support[0] and |eta| <= support[1].
    """

    order: float
    dim: int
    label: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support: tuple[float, float] | None = None

    def __call__(self, xi, eta) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return self.evaluator(xi, eta)


def _sq(v: np.ndarray) -> np.ndarray:
    return np.sum(v * v, axis=-1)


def make_symbol(kind: str, m: float = 0.0, dim: int = 2, seed: int = 0, terms: int = 6) -> BilinearSymbol:
    """Library symbols of order m <= 0.

    constant: 1.  sjo: (1 + |xi|^2 + |eta|^2)^(m/2).  homogeneous_cut:
    zeta(|(xi, eta)|) (|xi|^2 + |eta|^2)^(m/2).  random_smooth: <zeta>^m times a
    random trigonometric polynomial in zeta / <zeta>.
    """
    if kind not in SYMBOL_KINDS:
        raise ValueError(f"unknown symbol kind {kind!r}; expected one of {SYMBOL_KINDS}")
    if m > 0:
        raise ValueError("library symbols have order m <= 0")
    if kind == "constant":
        return BilinearSymbol(0.0, dim, "constant", lambda xi, eta: np.ones(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1])))
    if kind == "sjo":
        return BilinearSymbol(m, dim, f"sjo({m:g})", lambda xi, eta: (1.0 + _sq(xi) + _sq(eta)) ** (m / 2))
    if kind == "homogeneous_cut":
        part = LittlewoodPaley()

        def hom(xi, eta):
            r2 = _sq(xi) + _sq(eta)
            cut = part.zeta(np.sqrt(r2))
            return np.where(cut > 0, cut * np.where(r2 > 0, r2, 1.0) ** (m / 2), 0.0)

        return BilinearSymbol(m, dim, f"homogeneous_cut({m:g})", hom)
    rng = np.random.default_rng(seed)
    amps = rng.uniform(-1.0, 1.0, terms)
    amps *= 0.5 / np.sum(np.abs(amps))
    freqs = rng.normal(size=(terms, 2 * dim))
    freqs *= rng.uniform(0.5, 3.0, (terms, 1)) / np.linalg.norm(freqs, axis=1, keepdims=True)
    phases = rng.uniform(0.0, 2.0 * np.pi, terms)

    def rand(xi, eta):
        xi, eta = np.broadcast_arrays(xi, eta)
        z = np.concatenate([xi, eta], axis=-1)
        bracket = np.sqrt(1.0 + _sq(z))
        w = z / bracket[..., None]
        wave = np.cos(w @ freqs.T + phases) @ amps
        return bracket**m * (1.0 + wave)

    return BilinearSymbol(m, dim, f"random_smooth({m:g},{seed})", rand)


# --------------------------------------------------------------------------
# seminorms


@dataclass(frozen=True)
class SeminormTable:
    constants: dict  # multi-index tuple -> C_alpha
    per_order: dict  # |alpha| -> max C_alpha
    violations: list  # orders whose weighted derivative grows with the radius

    def __getitem__(self, alpha) -> float:
        return self.constants[tuple(alpha)]


def _sample_points(dim2: int, radius: float, count: int, directions: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    dirs = np.concatenate([np.eye(dim2), rng.normal(size=(directions, dim2))])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.concatenate([[0.0], np.geomspace(0.05, radius, count)])
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim2), np.repeat(radii, len(dirs))


def seminorm_estimate(
    sigma: BilinearSymbol,
    max_order: int,
    radius: float = 1e3,
    count: int = 40,
    directions: int = 6,
    seed: int = 0,
    rel_step: float = 0.02,
) -> SeminormTable:
    """sup |d^alpha sigma(z)| (1 + |z|)^(|alpha| - m) over a log-spaced sample set.

    Mixed partials use tensor products of central difference stencils with
    step rel_step * (1 + |z|).
    """
    if not 0 <= max_order <= 4:
        raise ValueError("max_order must be between 0 and 4")
    n2 = 2 * sigma.dim
    z, r = _sample_points(n2, radius, count, directions, seed)
    step = rel_step * (1.0 + r)
    weight_base = 1.0 + r
    constants, per_order, violations = {}, {}, []
    order_profiles = {}
    for alpha in itertools.product(range(max_order + 1), repeat=n2):
        k = sum(alpha)
        if k > max_order:
            continue
        stencils = [central_stencil(a) for a in alpha]
        total = np.zeros(len(z))
        for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
            w = 1.0
            shift = np.zeros(n2)
            for axis, idx in enumerate(combo):
                w *= stencils[axis][1][idx]
                shift[axis] = stencils[axis][0][idx]
            if w == 0:
                continue
            pts = z + step[:, None] * shift[None, :]
            total = total + w * np.real_if_close(sigma(pts[:, : sigma.dim], pts[:, sigma.dim :]))
        deriv = np.abs(total) / step**k
        weighted = deriv * weight_base ** (k - sigma.order)
        constants[alpha] = float(weighted.max())
        per_order[k] = max(per_order.get(k, 0.0), constants[alpha])
        prof = order_profiles.setdefault(k, np.zeros(len(z)))
        np.maximum(prof, weighted, out=prof)
    for k, prof in order_profiles.items():
        outer = prof[r >= np.sqrt(radius)].max()
        middle = prof[(r >= radius**0.25) & (r < np.sqrt(radius))].max()
        if outer > 4.0 * middle + 1e-12:
            violations.append(f"order violated at |alpha| = {k}")
    return SeminormTable(constants, per_order, violations)


# --------------------------------------------------------------------------
# region masks


def region_masks(part: LittlewoodPaley, xi, eta, j_max: int) -> dict:
    """Masks of regions I, II, III (summed over scales <= j_max) at the given points.

    Their sum is phi(2^-j_max xi) phi(2^-j_max eta).
    """
    rx = np.sqrt(_sq(np.asarray(xi, dtype=float)))
    ry = np.sqrt(_sq(np.asarray(eta, dtype=float)))
    out = {"I": 0.0, "II": 0.0, "III": 0.0}
    for j in range(3, j_max + 1):
        out["I"] = out["I"] + part.psi_j(j, rx) * part.phi_scaled(j - 3, ry)
        out["II"] = out["II"] + part.phi_scaled(j - 3, rx) * part.psi_j(j, ry)
    for j in range(0, j_max + 1):
        for ell in range(-2, 3):
            k = j - ell
            if 0 <= k <= j_max:
                out["III"] = out["III"] + part.psi_j(j, rx) * part.psi_j(k, ry)
    return out


# --------------------------------------------------------------------------
# Coifman-Meyer expansion


@dataclass(frozen=True)
class Windows:
    """Widened periodisation windows: 1 on supp psi = [1/2, 2] resp. supp phi = [0, 2]."""

    inner: tuple[float, float] = (0.1, 0.5)
    outer: tuple[float, float] = (2.0, 3.1)
    sharpness: float = 2.0

    def psi(self, r) -> np.ndarray:
        return ramp(r, *self.inner, self.sharpness) * (1.0 - ramp(r, *self.outer, self.sharpness))

    def phi(self, r) -> np.ndarray:
        return 1.0 - ramp(r, *self.outer, self.sharpness)

    def __call__(self, kind: str, r) -> np.ndarray:
        return self.psi(r) if kind == "psi" else self.phi(r)


@dataclass(frozen=True, eq=False)
class Block:
    """One modulated product block: c(a, b) e^{i a.2^-p xi} e^{i b.2^-q eta} P(2^-p xi) Q(2^-q eta)."""

    region: str
    ell: int
    j: int
    xi_level: int
    eta_level: int
    xi_kind: str  # "psi" or "phi"
    eta_kind: str
    coefficients: np.ndarray  # shape (2A+1,)*2n, index a + A

    @property
    def radius(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2


def _blocks_for(region: str, j_max: int):
    if region == "I":
        for j in range(3, j_max + 1):
            yield 0, j, j, j - 3, "psi", "phi"
    elif region == "II":
        for j in range(3, j_max + 1):
            yield 0, j, j - 3, j, "phi", "psi"
    elif region == "III":
        for j in range(0, j_max + 1):
            for ell in range(-2, 3):
                k = j - ell
                if 0 <= k <= j_max:
                    yield ell, j, j, k, ("psi" if j else "phi"), ("psi" if k else "phi")
    else:
        raise ValueError(f"unknown region {region!r}")


def _box_axis(M: int) -> np.ndarray:
    return (np.arange(M) - M // 2) * (2.0 * np.pi / M)


def block_coefficients(
    sigma: BilinearSymbol,
    xi_level: int,
    eta_level: int,
    xi_kind: str,
    eta_kind: str,
    A: int,
    oversample: int = 4,
    windows: Windows = Windows(),
) -> np.ndarray:
    """Fourier coefficients c(a, b), |a|_inf, |b|_inf <= A, of one block."""
    if oversample < 4:
        raise GuardError(f"period box under-resolved: {oversample * A} samples per axis for A = {A} (need >= {4 * A})")
    n = sigma.dim
    M = oversample * A
    u = _box_axis(M)
    mesh = np.meshgrid(*([u] * (2 * n)), indexing="ij", sparse=True)
    xu = mesh[:n]
    wu = mesh[n:]
    ru = np.sqrt(sum(c * c for c in xu))
    rw = np.sqrt(sum(c * c for c in wu))
    xi = np.stack(np.broadcast_arrays(*[2.0**xi_level * c for c in xu]), axis=-1)
    eta = np.stack(np.broadcast_arrays(*[2.0**eta_level * c for c in wu]), axis=-1)
    values = sigma(xi, eta) * windows(xi_kind, ru) * windows(eta_kind, rw)
    coef = sfft.fftshift(sfft.fftn(sfft.ifftshift(values))) / float(M) ** (2 * n)
    lo, hi = M // 2 - A, M // 2 + A + 1
    return np.ascontiguousarray(coef[(slice(lo, hi),) * (2 * n)])


def slice_coefficients(
    sigma: BilinearSymbol,
    xi_level: int,
    eta_level: int,
    A: int,
    oversample: int = 4,
    eta_samples: int = 64,
    windows: Windows = Windows(),
) -> np.ndarray:
    """Region-I style coefficients c(a, 0) for |a|_inf <= A (psi window on xi, phi on eta).

    c(a, 0) is the xi-transform of the eta-average, computed without the full table.
    """
    if oversample < 4:
        raise GuardError(f"period box under-resolved: {oversample * A} samples per axis for A = {A}")
    n = sigma.dim
    M = oversample * A
    u = _box_axis(M)
    w = _box_axis(eta_samples)
    xu = np.stack(np.meshgrid(*([u] * n), indexing="ij"), axis=-1).reshape(-1, n)
    wu = np.stack(np.meshgrid(*([w] * n), indexing="ij"), axis=-1).reshape(-1, n)
    ww = windows.phi(np.linalg.norm(wu, axis=1))
    eta = 2.0**eta_level * wu
    avg = np.empty(len(xu), dtype=complex)
    step = max(1, 2**22 // len(wu))
    for s in range(0, len(xu), step):
        xi = 2.0**xi_level * xu[s : s + step]
        vals = sigma(xi[:, None, :], eta[None, :, :])
        avg[s : s + step] = (vals * ww[None, :]).mean(axis=1)
    avg = avg.reshape((M,) * n) * windows.psi(np.sqrt(np.sum(xu * xu, axis=1))).reshape((M,) * n)
    coef = sfft.fftshift(sfft.fftn(sfft.ifftshift(avg))) / float(M) ** n
    lo, hi = M // 2 - A, M // 2 + A + 1
    return coef[(slice(lo, hi),) * n]


@dataclass(frozen=True, eq=False)
class ProductSymbolExpansion:
    symbol_label: str
    order: float
    dim: int
    j_max: int
    radius: int
    blocks: list = field(repr=False)
    part: LittlewoodPaley = LittlewoodPaley()

    def piece(self, kind: str, level: int, r) -> np.ndarray:
        if kind == "psi":
            return self.part.psi(np.asarray(r, dtype=float) * 2.0**-level)
        return self.part.phi(np.asarray(r, dtype=float) * 2.0**-level)

    def rows(self):
        """(region, ell, j, a..., b..., re, im) in deterministic order."""
        n = self.dim
        order = {r: i for i, r in enumerate(REGIONS)}
        for blk in sorted(self.blocks, key=lambda b: (order[b.region], b.j, b.ell)):
            A = blk.radius
            for idx in itertools.product(range(2 * A + 1), repeat=2 * n):
                c = blk.coefficients[idx]
                ab = [i - A for i in idx]
                yield (blk.region, blk.ell, blk.j, *ab, float(c.real), float(c.imag))

    def to_csv(self, path) -> None:
        n = self.dim
        header = ["region", "ell", "j"] + [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)] + ["re", "im"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in self.rows():
                w.writerow([*row[:-2], repr(row[-2]), repr(row[-1])])


def cm_decompose(
    sigma: BilinearSymbol,
    part: LittlewoodPaley,
    j_max: int,
    A: int = 16,
    oversample: int = 4,
    regions=REGIONS,
    windows: Windows = Windows(),
) -> ProductSymbolExpansion:
    if A < 1:
        raise ValueError("A must be at least 1")
    if j_max < 3:
        raise ValueError("j_max must be at least 3")
    blocks = []
    for region in regions:
        for ell, j, p, q, kx, ke in _blocks_for(region, j_max):
            coef = block_coefficients(sigma, p, q, kx, ke, A, oversample, windows)
            blocks.append(Block(region, ell, j, p, q, kx, ke, coef))
    return ProductSymbolExpansion(sigma.label, sigma.order, sigma.dim, j_max, A, blocks, part)


def decay_report(expansion: ProductSymbolExpansion, L: float, region: str = "I") -> dict:
    """Best C in |c_j(a, b)| <= C 2^{jm} (1+|a|)^-L (1+|b|)^-L and max |c_j| per j."""
    n = expansion.dim
    best, max_by_j = 0.0, {}
    for blk in expansion.blocks:
        if blk.region != region:
            continue
        A = blk.radius
        ax = np.arange(-A, A + 1, dtype=float)
        grids = np.meshgrid(*([ax] * (2 * n)), indexing="ij", sparse=True)
        na = np.sqrt(sum(g * g for g in grids[:n]))
        nb = np.sqrt(sum(g * g for g in grids[n:]))
        mag = np.abs(blk.coefficients)
        weight = (1.0 + na) ** L * (1.0 + nb) ** L * 2.0 ** (-blk.j * expansion.order)
        best = max(best, float(np.max(mag * weight)))
        max_by_j[blk.j] = max(max_by_j.get(blk.j, 0.0), float(mag.max()))
    return {"constant": best, "max_by_j": dict(sorted(max_by_j.items()))}


def tail_constant(coef_slice: np.ndarray, L: float = 4.0) -> float:
    """max |c(a, 0)| (1 + |a|)^L over the slice."""
    n = coef_slice.ndim
    A = (coef_slice.shape[0] - 1) // 2
    ax = np.arange(-A, A + 1, dtype=float)
    grids = np.meshgrid(*([ax] * n), indexing="ij", sparse=True)
    na = np.sqrt(sum(g * g for g in grids))
    return float(np.max(np.abs(coef_slice) * (1.0 + na) ** L))


def _series(coef: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_{a,b} c(a,b) e^{i a.u} e^{i b.w} at points u (P, n), w (P, n)."""
    A = (coef.shape[0] - 1) // 2
    ax = np.arange(-A, A + 1)
    out = np.broadcast_to(coef, (len(u),) + coef.shape)
    for pts in (u, w):
        for i in range(pts.shape[1]):
            # contract the leading coefficient axis against the phases of one coordinate
            out = np.einsum("pa...,pa->p...", out, np.exp(1j * pts[:, i : i + 1] * ax[None, :]))
    return out


def evaluate_expansion(expansion: ProductSymbolExpansion, xi, eta) -> np.ndarray:
    """Partial sum of the expansion at points (xi, eta) of shape (P, n)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    rx = np.linalg.norm(xi, axis=1)
    ry = np.linalg.norm(eta, axis=1)
    total = np.zeros(len(xi), dtype=complex)
    for blk in expansion.blocks:
        chunk = max(1, 2**22 // blk.coefficients.size)
        cut = expansion.piece(blk.xi_kind, blk.xi_level, rx) * expansion.piece(blk.eta_kind, blk.eta_level, ry)
        live = np.nonzero(cut)[0]
        for s in range(0, len(live), chunk):
            idx = live[s : s + chunk]
            u = xi[idx] * 2.0**-blk.xi_level
            w = eta[idx] * 2.0**-blk.eta_level
            total[idx] += _series(blk.coefficients, u, w) * cut[idx]
    return total


def reconstruct_symbol(expansion: ProductSymbolExpansion, sigma: BilinearSymbol, xi, eta) -> tuple[np.ndarray, float]:
    """Expansion values and max relative error against sigma times the region masks."""
    values = evaluate_expansion(expansion, xi, eta)
    masks = region_masks(expansion.part, xi, eta, expansion.j_max)
    used = {b.region for b in expansion.blocks}
    mask = sum(np.asarray(masks[r]) for r in used)
    target = sigma(np.atleast_2d(xi), np.atleast_2d(eta)) * mask
    scale = np.max(np.abs(target))
    return values, float(np.max(np.abs(values - target)) / scale)


# --------------------------------------------------------------------------
# application to fields


def _modulated_fields(grid: GridSpec, fhat: np.ndarray, kind: str, level: int, A: int, part: LittlewoodPaley) -> np.ndarray:
    """(e^{i a.2^-level D} P(2^-level D) f) for every |a|_inf <= A, stacked on axis 0."""
    n = grid.dim
    r = grid.freq_radius
    piece = part.psi(r * 2.0**-level) if kind == "psi" else part.phi(r * 2.0**-level)
    base = fhat * piece
    ax = np.arange(-A, A + 1)
    freqs = [f * 2.0**-level for f in grid.freqs()]
    out = []
    for a in itertools.product(ax, repeat=n):
        phase = sum(ai * fi for ai, fi in zip(a, freqs))
        out.append(from_spectral(SpectralField(grid, base * np.exp(1j * phase))).samples)
    return np.stack(out)


def apply_expansion(expansion: ProductSymbolExpansion, f: SpatialField, g: SpatialField) -> SpatialField:
    """T_sigma(f, g) term by term: each block is a sum of products of linear multipliers."""
    grid = f.grid
    if g.grid != grid:
        raise ValueError("f and g live on different grids")
    fhat = to_spectral(f).samples
    ghat = to_spectral(g).samples
    total = np.zeros(grid.shape, dtype=complex)
    for blk in expansion.blocks:
        A = blk.radius
        P = _modulated_fields(grid, fhat, blk.xi_kind, blk.xi_level, A, expansion.part)
        Q = _modulated_fields(grid, ghat, blk.eta_kind, blk.eta_level, A, expansion.part)
        C = blk.coefficients.reshape(P.shape[0], Q.shape[0])
        R = C @ Q.reshape(Q.shape[0], -1)
        total += np.sum(P.reshape(P.shape[0], -1) * R, axis=0).reshape(grid.shape)
    return SpatialField(grid, total)


def _lattice_indices(grid: GridSpec, radius: float | None) -> tuple[np.ndarray, np.ndarray]:
    """Centred integer indices (P, n) and flat positions of lattice points with |xi| <= radius."""
    r = grid.freq_radius
    keep = np.ones(grid.shape, dtype=bool) if radius is None else r <= radius * (1 + 1e-12)
    pos = np.nonzero(keep)
    idx = np.stack(pos, axis=-1) - grid.points_per_axis // 2
    return idx, pos


def apply_bilinear_dense(
    sigma: BilinearSymbol, f: SpatialField, g: SpatialField, cap: int = DENSE_PAIR_CAP, chunk: int = 2**20
) -> SpatialField:
    """Direct double-frequency sum: T^(zeta) accumulates sigma(xi, eta) f^(xi) g^(eta) over xi + eta = zeta."""
    grid = f.grid
    if g.grid != grid:
        raise ValueError("f and g live on different grids")
    n, N = grid.dim, grid.points_per_axis
    rx, ry = sigma.support if sigma.support is not None else (None, None)
    ix, px = _lattice_indices(grid, rx)
    iy, py = _lattice_indices(grid, ry)
    pairs = len(ix) * len(iy)
    if pairs > cap:
        raise CostError(f"dense bilinear sum needs {pairs} frequency pairs (cap {cap})")
    fhat = to_spectral(f).samples[px]
    ghat = to_spectral(g).samples[py]
    dxi = grid.freq_spacing
    xi = ix * dxi
    eta = iy * dxi
    acc = np.zeros(N**n, dtype=complex)
    rows = max(1, chunk // max(1, len(iy)))
    strides = N ** np.arange(n - 1, -1, -1)
    for s in range(0, len(ix), rows):
        sl = slice(s, s + rows)
        vals = sigma(xi[sl, None, :], eta[None, :, :]) * fhat[sl, None] * ghat[None, :]
        tot = (ix[sl, None, :] + iy[None, :, :] + N // 2) % N
        flat = (tot @ strides).ravel()
        v = vals.ravel()
        acc += np.bincount(flat, weights=v.real, minlength=N**n)
        acc += 1j * np.bincount(flat, weights=v.imag, minlength=N**n)
    That = acc.reshape(grid.shape) * (dxi / (2.0 * np.pi)) ** n
    return from_spectral(SpectralField(grid, That))
