"""Second dyadic decomposition: 2^(-j/2)-separated nets on the sphere and angular pieces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import SphericalVoronoi, cKDTree

from .cutoffs import CutoffDescriptor
from .grid import GridSpec, SpatialField, SpectralField, from_spectral
from .kernels import kernel_multiplier

#: bump radius in units of the net separation
BUMP_REACH = 1.5


@dataclass(frozen=True, eq=False)
class SphericalNet:
    j: int
    dim: int
    points: np.ndarray  # (M, n) unit vectors

    @property
    def separation(self) -> float:
        return 2.0 ** (-self.j / 2)

    def __len__(self) -> int:
        return len(self.points)

    def min_distance(self) -> float:
        if len(self.points) < 2:
            return np.inf
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].min())

    def covering_radius(self, probes: np.ndarray) -> float:
        """Largest distance from a probe point to its nearest net point."""
        d, _ = cKDTree(self.points).query(probes)
        return float(d.max())

    def exact_covering_radius(self) -> float:
        """Covering radius from the farthest points of the sphere.

        n = 2: midpoints of the angular gaps.  n = 3: spherical Voronoi
        vertices, where the distance to the nearest net point is maximal.
        """
        if self.dim == 2:
            ang = np.sort(np.arctan2(self.points[:, 1], self.points[:, 0]))
            gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
            return float(2.0 * np.sin(gaps.max() / 4.0))
        return self.covering_radius(SphericalVoronoi(self.points).vertices)


def _fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _greedy(candidates: np.ndarray, sep: float, chosen: list) -> list:
    tree_pts = list(chosen)
    for c in candidates:
        if tree_pts:
            d = np.min(np.linalg.norm(np.asarray(tree_pts) - c, axis=1))
            if d < sep:
                continue
        tree_pts.append(c)
    return tree_pts


def build_spherical_net(j: int, dim: int) -> SphericalNet:
    """Maximal 2^(-j/2)-separated set on S^(n-1) whose 2^(-j/2)-caps cover the sphere.

    n = 2: equally spaced angles, the fewest for which half the spacing is
    still below the separation.  n = 3: greedy selection from a Fibonacci
    mesh, then any uncovered spherical Voronoi vertex is added until the
    covering radius is below the separation.
    """
    if dim not in (2, 3):
        raise ValueError("spherical nets are built for n = 2 or 3")
    s = 2.0 ** (-j / 2)
    if dim == 2:
        count = int(np.floor(np.pi / (2.0 * np.arcsin(s / 2.0)))) + 1
        angles = 2.0 * np.pi * np.arange(count) / count
        return SphericalNet(j, 2, np.column_stack([np.cos(angles), np.sin(angles)]))
    expected = 4.0 * np.pi / s**2
    chosen = _greedy(_fibonacci_sphere(int(8 * expected) + 64), s, [])
    while True:
        pts = np.asarray(chosen)
        vor = SphericalVoronoi(pts)
        d, _ = cKDTree(pts).query(vor.vertices)
        far = vor.vertices[d >= s]
        if far.size == 0:
            return SphericalNet(j, 3, pts)
        chosen = _greedy(far[np.argsort(-d[d >= s], kind="stable")], s, chosen)


def _bump(t: np.ndarray) -> np.ndarray:
    inside = t < 1
    u = np.where(inside, 1.0 - t * t, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / u), 0.0)


def angular_weights(net: SphericalNet, directions: np.ndarray) -> np.ndarray:
    """chi^nu at unit directions: (M, ...) array of normalised bumps."""
    reach = BUMP_REACH * net.separation
    flat = directions.reshape(-1, net.dim)
    raw = np.stack([_bump(np.linalg.norm(flat - p, axis=1) / reach) for p in net.points])
    total = raw.sum(axis=0)
    if np.any(total <= 0):
        raise ValueError("net does not cover every direction")
    return (raw / total).reshape((len(net),) + directions.shape[:-1])


@dataclass(frozen=True, eq=False)
class AngularPiece:
    index: int
    center: np.ndarray
    multiplier: np.ndarray
    piece: SpatialField
    envelope_constant: float
    spectral_measure: float


@dataclass(frozen=True)
class AngularReport:
    pieces: list
    reconstruction_error: float
    envelope_L: float

    @property
    def envelope_spread(self) -> float:
        c = [p.envelope_constant for p in self.pieces]
        return max(c) / min(c)


def envelope_profile(grid: GridSpec, center: np.ndarray, j: int, L: float) -> np.ndarray:
    """min{(1 + 2^(j/2)|x + xi|)^-L, (1 + 2^j |xi . (x + xi)|)^-L} for the net point xi.

    x + xi is taken as the minimum-image displacement on the periodic box.
    """
    X = grid.box_length
    shifted = [(c + center[i] + X / 2) % X - X / 2 for i, c in enumerate(grid.coords())]
    dist = np.sqrt(sum(s * s for s in shifted))
    along = np.abs(sum(center[i] * s for i, s in enumerate(shifted)))
    return np.minimum((1.0 + 2.0 ** (j / 2) * dist) ** -L, (1.0 + 2.0**j * along) ** -L)


def angular_decompose(
    cutoff: CutoffDescriptor,
    j: int,
    net: SphericalNet,
    grid: GridSpec,
    L: float = 3.0,
    threshold: float = 1e-12,
) -> AngularReport:
    """Pieces f_j^nu = (e^{i|xi|} theta(2^-j xi) chi^nu(xi))^v with envelope constants."""
    if net.j != j:
        raise ValueError(f"net built at j = {net.j} used at j = {j}")
    if net.dim != grid.dim:
        raise ValueError("net and grid dimensions differ")
    base = kernel_multiplier(cutoff, j, grid)
    freqs = np.stack(np.broadcast_arrays(*grid.freqs()), axis=-1)
    r = grid.freq_radius
    directions = freqs / np.where(r > 0, r, 1.0)[..., None]
    directions[r == 0] = net.points[0]
    weights = angular_weights(net, directions)
    whole = from_spectral(SpectralField(grid, base)).samples
    total = np.zeros(grid.shape, dtype=complex)
    scale = 2.0 ** (j * (grid.dim + 1) / 2)
    cell = grid.freq_spacing**grid.dim
    pieces = []
    for nu, center in enumerate(net.points):
        mult = base * weights[nu]
        piece = from_spectral(SpectralField(grid, mult))
        total += piece.samples
        env = envelope_profile(grid, center, j, L)
        const = float(np.max(np.abs(piece.samples) / (scale * env)))
        measure = float(np.count_nonzero(np.abs(mult) > threshold)) * cell
        pieces.append(AngularPiece(nu, center, mult, piece, const, measure))
    err = float(np.linalg.norm(total - whole) / np.linalg.norm(whole))
    return AngularReport(pieces, err, L)
