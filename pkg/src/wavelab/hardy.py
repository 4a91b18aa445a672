"""h^1 atoms and the annulus / ball scans of the trilinear product S_j f * S_j g * S_j h."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import log2_slope
from .cutoffs import CutoffDescriptor
from .errors import GuardError, RegionError
from .grid import GridSpec, Region, SpatialField, SpectralField, from_spectral, make_grid
from .trilinear import apply_half_wave

ATOM_KINDS = ("plateau", "odd_bump", "random_signed", "arc_split")
FAMILIES = ("constant", "random_signs", "random_phase", "aligned")
SPLITS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class AtomSpec:
    """Atom on B(0, r): bounded by r^-n, mean zero when r < 1.

    plateau: indicator of the ball at r = 1; for r < 1 the inner ball of half
    the volume is negative.  odd_bump: smooth bump times x_1 / r.
    random_signed: seeded +-1 per lattice cell.  arc_split: +1 on points of
    the ball within distance 1 of e_1 and -1 elsewhere, so the splitting arc
    is part of the unit circle around e_1 and the wave from it focuses there
    at time 1.
    """

    radius: float
    kind: str = "plateau"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.radius <= 1:
            raise ValueError("atom radius must lie in (0, 1]")
        if self.kind not in ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")


def make_atom(spec: AtomSpec, grid: GridSpec) -> SpatialField:
    r, n = spec.radius, grid.dim
    if r < 4 * grid.spacing:
        raise GuardError(f"atom radius {r:g} is below 4 cells (spacing {grid.spacing:g})")
    if r > grid.box_length / 2:
        raise RegionError("atom does not fit in the box")
    x = grid.coords()
    rad = grid.radius
    inside = rad <= r
    if spec.kind == "plateau":
        if r == 1:
            prof = np.ones(grid.shape)
        else:
            prof = np.where(rad <= r * 2.0 ** (-1.0 / n), -1.0, 1.0)
    elif spec.kind == "odd_bump":
        t = np.minimum(rad / r, 1.0)
        u = np.where(t < 1, 1.0 - t * t, 1.0)
        prof = np.where(t < 1, np.exp(1.0 - 1.0 / u), 0.0) * (x[0] / r)
    elif spec.kind == "random_signed":
        prof = np.random.default_rng(spec.seed).choice([-1.0, 1.0], size=grid.shape)
    else:
        dist = np.sqrt((x[0] - 1.0) ** 2 + sum(c * c for c in x[1:]))
        prof = np.where(dist < 1.0, 1.0, -1.0)
    prof = np.where(inside, np.broadcast_to(prof, grid.shape), 0.0)
    if r < 1:
        prof[inside] -= prof[inside].mean()
    prof *= r**-n / np.max(np.abs(prof))
    return SpatialField(grid, prof)


def min_factor(j: float, r: float) -> float:
    t = 2.0**j * r
    return min(t, 1.0 / t)


def atom_bound(j: float, r: float, dim: int) -> float:
    """2^(j(n+1)/2) min{2^j r, (2^j r)^-1}."""
    return 2.0 ** (j * (dim + 1) / 2) * min_factor(j, r)


def scan_grid(
    j: float, box: float, dim: int, theta: CutoffDescriptor, radius: float | None = None, floor: int = 256, cells: int = 4
) -> GridSpec:
    """Smallest power-of-two lattice passing the aliasing guard with `cells` lattice steps per atom radius."""
    n = floor
    while True:
        g = make_grid(dim, n, box)
        try:
            g.check_band(theta.support_radius, j)
        except GuardError:
            n *= 2
            continue
        if radius is not None and radius < cells * g.spacing:
            n *= 2
            continue
        return g


def atom_sup_scan(
    theta: CutoffDescriptor,
    j_range,
    r_list,
    kind_for=None,
    box: float = 8.0,
    dim: int = 2,
    cells: int = 16,
) -> list[dict]:
    """Rows (j, r, kind, sup, bound, ratio) for ||S_j h||_inf against the atom bound.

    kind_for(r) picks the atom profile; by default r = 1 uses the plateau and
    smaller radii the arc_split atom, the two profiles that realise the bound.
    """
    if kind_for is None:
        kind_for = lambda r: "plateau" if r == 1 else "arc_split"  # noqa: E731
    rows = []
    for j in j_range:
        for r in r_list:
            grid = scan_grid(j, box, dim, theta, r, cells=cells)
            h = make_atom(AtomSpec(r, kind_for(r)), grid)
            sup = float(np.max(np.abs(apply_half_wave(theta, j, True, h).samples)))
            bound = atom_bound(j, r, dim)
            rows.append(dict(n=dim, j=j, r=r, kind=kind_for(r), N=grid.points_per_axis, X=box, sup=sup, bound=bound, ratio=sup / bound))
    return rows


def ratio_spread(rows) -> float:
    ratios = [row["ratio"] for row in rows]
    return max(ratios) / min(ratios)


# f, g families


def family_field(
    name: str,
    grid: GridSpec,
    seed: int,
    theta: CutoffDescriptor | None = None,
    j: float | None = None,
    center: tuple[int, ...] | None = None,
) -> SpatialField:
    """Unit L^inf test functions, defined independently of the lattice resolution.

    random_signs: +-1 on unit cells.  random_phase: e^{i phi} with phi a sum of
    16 random periodic plane waves of frequency at most 2.  aligned: the phase
    of conj(K_j(x* - y)), which maximises |S_j f(x*)|; x* is the lattice index
    `center` (the origin by default).
    """
    rng = np.random.default_rng(seed)
    x = grid.coords()
    X = grid.box_length
    if name == "constant":
        return SpatialField(grid, np.ones(grid.shape))
    if name == "random_signs":
        cells = int(np.ceil(X))
        signs = rng.choice([-1.0, 1.0], size=(cells,) * grid.dim)
        idx = tuple(np.minimum(np.floor(c + X / 2).astype(int), cells - 1) for c in x)
        return SpatialField(grid, signs[idx])
    if name == "random_phase":
        top = int(np.floor(2.0 * X / (2 * np.pi)))
        phi = np.zeros(grid.shape)
        for _ in range(16):
            while True:
                m = rng.integers(-top, top + 1, size=grid.dim)
                if 0 < np.linalg.norm(m) <= top:
                    break
            k = 2 * np.pi * m / X
            phi = phi + rng.uniform(0.5, 1.5) * np.cos(sum(ki * c for ki, c in zip(k, x)) + rng.uniform(0, 2 * np.pi))
        return SpatialField(grid, np.exp(1j * phi))
    if name == "aligned":
        if theta is None or j is None:
            raise ValueError("aligned family needs the cutoff and scale")
        mult = theta.on_grid(grid, j) * np.exp(1j * grid.freq_radius)
        K = from_spectral(SpectralField(grid, mult)).samples
        # the kernel is radial, so K(x* - y) = K(y - x*): K rolled to x*
        if center is not None:
            mid = grid.points_per_axis // 2
            K = np.roll(K, tuple(c - mid for c in center), axis=tuple(range(grid.dim)))
        mod = np.abs(K)
        return SpatialField(grid, np.where(mod > 0, np.conj(K) / np.where(mod > 0, mod, 1.0), 1.0))
    raise ValueError(f"unknown family {name!r}")


def peak_index(values: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(np.argmax(np.abs(values)), values.shape))


def _split(f: SpatialField, radius: float) -> tuple[SpatialField, SpatialField]:
    near = f.grid.radius < radius
    return SpatialField(f.grid, np.where(near, f.samples, 0)), SpatialField(f.grid, np.where(near, 0, f.samples))


def _split_norms(theta, j, f, g, Sh, radius, region: Region) -> dict:
    grid = f.grid
    mask = region.mask(grid)
    parts_f = [apply_half_wave(theta, j, True, p).samples[mask] for p in _split(f, radius)]
    parts_g = [apply_half_wave(theta, j, True, p).samples[mask] for p in _split(g, radius)]
    hm = Sh[mask]
    out = {}
    for a, b in SPLITS:
        out[(a, b)] = float(np.sum(np.abs(parts_f[a] * parts_g[b] * hm))) * grid.cell_volume
    out["all"] = float(np.sum(np.abs((parts_f[0] + parts_f[1]) * (parts_g[0] + parts_g[1]) * hm))) * grid.cell_volume
    return out


def split_label(split) -> str:
    return split if isinstance(split, str) else f"{split[0]}{split[1]}"


def annulus_bound(split, k: int) -> float:
    return {(1, 1): 2.0 ** (-3 * k), (1, 0): 2.0 ** (-2 * k), (0, 1): 2.0 ** (-2 * k), (0, 0): 2.0**-k}[split]


ANNULUS_SLOPES = {(1, 1): -3.0, (1, 0): -2.0, (0, 1): -2.0, (0, 0): -1.0}


def annulus_decay_scan(
    theta: CutoffDescriptor,
    j: float,
    k_range,
    grid: GridSpec,
    atom: AtomSpec,
    families=("constant", "random_signs", "random_phase"),
    seed: int = 0,
) -> list[dict]:
    """||S_j f^a_k * S_j g^b_k * S_j h||_{L^1(E_k)} with the split radius 10 * 2^k."""
    k_range = list(k_range)
    k_max = max(k_range)
    if grid.box_length / 2 <= 10 * 2.0**k_max or grid.box_length < 4 * 2.0 ** (k_max + 1):
        raise RegionError(f"box X = {grid.box_length:g} too small for k = {k_max}: needs X/2 > {10 * 2**k_max}")
    Sh = apply_half_wave(theta, j, True, make_atom(atom, grid)).samples
    rows = []
    for fi, fam in enumerate(families):
        f = family_field(fam, grid, seed + 2 * fi, theta, j, peak_index(Sh))
        g = family_field(fam, grid, seed + 2 * fi + 1, theta, j, peak_index(Sh))
        for k in k_range:
            norms = _split_norms(theta, j, f, g, Sh, 10 * 2.0**k, Region.shell(k))
            for split, val in norms.items():
                bound = annulus_bound(split, k) if split != "all" else float("nan")
                rows.append(dict(n=grid.dim, j=j, k=k, split=split_label(split), family=fam, r=atom.radius, norm=val, bound=bound, ratio=val / bound))
    return rows


def ball_bound(split, j: float, r: float, dim: int) -> float:
    if split == (1, 1):
        return 2.0 ** (j * (dim - 1) / 2)
    if split in ((1, 0), (0, 1)):
        return 2.0 ** (j * dim / 2)
    return atom_bound(j, r, dim)


def ball_growth_scan(
    theta: CutoffDescriptor,
    j_range,
    radius_for,
    kind_for=None,
    families=("random_signs", "random_phase", "aligned"),
    box: float = 44.0,
    dim: int = 2,
    seed: int = 0,
) -> list[dict]:
    """||S_j f^a * S_j g^b * S_j h||_{L^1(B(0,4))} with the split radius 10.

    radius_for(j) gives the atom radius; each j runs on the coarsest lattice
    that passes the guard and resolves the atom.
    """
    if box < 44:
        raise RegionError("ball growth needs X >= 44")
    if kind_for is None:
        kind_for = lambda r: "plateau" if r == 1 else "arc_split"  # noqa: E731
    region = Region.ball(4.0)
    rows = []
    for j in j_range:
        r = radius_for(j)
        grid = scan_grid(j, box, dim, theta, r)
        Sh = apply_half_wave(theta, j, True, make_atom(AtomSpec(r, kind_for(r)), grid)).samples
        for fi, fam in enumerate(families):
            f = family_field(fam, grid, seed + 2 * fi, theta, j, peak_index(Sh))
            g = family_field(fam, grid, seed + 2 * fi + 1, theta, j, peak_index(Sh))
            for split, val in _split_norms(theta, j, f, g, Sh, 10.0, region).items():
                bound = ball_bound(split, j, r, dim) if split != "all" else float("nan")
                rows.append(dict(n=dim, j=j, k=-1, split=split_label(split), family=fam, r=r, norm=val, bound=bound, ratio=val / bound))
    return rows


def envelope_by(rows, key: str, split: str) -> dict:
    """Max over families of the norm, keyed by j or k."""
    out = {}
    for row in rows:
        if row["split"] == split:
            out[row[key]] = max(out.get(row[key], 0.0), row["norm"])
    return dict(sorted(out.items()))


def split_slopes(rows, key: str) -> dict:
    slopes = {}
    for split in SPLITS:
        env = envelope_by(rows, key, split_label(split))
        slopes[split_label(split)] = log2_slope(list(env), list(env.values()))
    return slopes


def weighted_partial_sums(rows, dim: int = 2) -> list[float]:
    """Partial sums over j of 2^(-j(n+1)/2) times the split total (max over families)."""
    totals = {}
    for split in SPLITS:
        for j, v in envelope_by(rows, "j", split_label(split)).items():
            totals[j] = totals.get(j, 0.0) + v
    acc, out = 0.0, []
    for j in sorted(totals):
        acc += 2.0 ** (-j * (dim + 1) / 2) * totals[j]
        out.append(acc)
    return out


def cauchy_increase(partial: list[float]) -> float:
    """Relative growth of the partial sums over the last two terms."""
    return (partial[-1] - partial[-3]) / partial[-3]
