"""Half-wave kernels K_j = (exp(i|xi|) theta(2^-j xi))^v and their decay laws.

Two independent evaluation paths are provided.  ``grid_fft`` samples the
multiplier on the frequency lattice of a periodic box and inverts it.
``radial_quadrature`` evaluates the radial Fourier integral

    K(r) = (2 pi)^(-n/2) r^(1-n/2) int exp(i rho) theta(rho 2^-j) J_{n/2-1}(r rho) rho^(n/2) d rho

with composite Gauss-Legendre panels, independently of any grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._numerics import log2_slope, panel_rule
from .cutoffs import CutoffDescriptor
from .errors import RegionError
from .grid import GridSpec, Region, SpatialField, from_spectral, lp_norm, SpectralField
from .partition import LittlewoodPaley

METHODS = ("grid_fft", "radial_quadrature")


def _bessel_factor(dim: int, r: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """(2 pi)^(-n/2) r^(1-n/2) J_{n/2-1}(r rho) rho^(n/2) for an (R, 1) x (1, P) broadcast."""
    z = r * rho
    if dim == 1:
        return np.cos(z) / np.pi
    if dim == 2:
        return special.j0(z) * rho / (2.0 * np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(z > 0, np.sin(z) / np.where(z > 0, z, 1.0), 1.0)
    return sinc * rho * rho / (2.0 * np.pi**2)


def radial_profile(
    cutoff: CutoffDescriptor,
    j: float,
    radii,
    dim: int,
    phase_on: bool = True,
    nodes: int = 16,
    chunk: int = 2_000_000,
) -> np.ndarray:
    """Kernel values at the given radii by panel-wise Gauss-Legendre quadrature."""
    if not cutoff.radial:
        raise ValueError(f"radial quadrature needs a radial cutoff, got {cutoff.name!r}")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    scale = 2.0**j
    lo, hi = cutoff.inner_radius * scale, cutoff.support_radius * scale
    r_max = float(radii.max()) if radii.size else 0.0
    panel = min(1.0, 5.0 / (1.0 + r_max))
    rho, w = panel_rule(lo, hi, panel, nodes)
    weights = w * cutoff.radial_values(rho / scale)
    if phase_on:
        weights = weights * np.exp(1j * rho)
    keep = weights != 0
    rho, weights = rho[keep], weights[keep]
    out = np.empty(radii.shape, dtype=complex)
    flat, res = radii.ravel(), out.ravel()
    step = max(1, chunk // max(1, rho.size))
    for s in range(0, flat.size, step):
        block = _bessel_factor(dim, flat[s : s + step, None], rho[None, :])
        res[s : s + step] = block @ weights
    return out


def kernel_multiplier(
    cutoff: CutoffDescriptor,
    j: float,
    grid: GridSpec,
    phase_on: bool = True,
    sign: int = 1,
) -> np.ndarray:
    """exp(i sign |xi|) theta(2^-j xi) on the centred frequency lattice (guarded)."""
    mult = cutoff.on_grid(grid, j).astype(complex)
    if phase_on:
        mult *= np.exp(1j * sign * grid.freq_radius)
    return mult


@dataclass(frozen=True, eq=False)
class WaveKernel:
    j: float
    cutoff: CutoffDescriptor
    phase_on: bool
    samples: SpatialField
    method: str

    @property
    def grid(self) -> GridSpec:
        return self.samples.grid


def compute_kernel(
    cutoff: CutoffDescriptor,
    j: float,
    grid: GridSpec,
    phase_on: bool = True,
    method: str = "grid_fft",
) -> WaveKernel:
    if method == "grid_fft":
        mult = kernel_multiplier(cutoff, j, grid, phase_on)
        samples = from_spectral(SpectralField(grid, mult))
    elif method == "radial_quadrature":
        if not cutoff.radial:
            raise ValueError(f"radial quadrature needs a radial cutoff, got {cutoff.name!r}")
        radii, inverse = np.unique(grid.radius, return_inverse=True)
        values = radial_profile(cutoff, j, radii, grid.dim, phase_on)
        samples = SpatialField(grid, values[inverse].reshape(grid.shape))
    else:
        raise ValueError(f"unknown kernel method {method!r}; expected one of {METHODS}")
    return WaveKernel(j, cutoff, phase_on, samples, method)


def envelope_weight(K: WaveKernel, N: float) -> np.ndarray:
    g = K.grid
    return (1.0 + 2.0**K.j * np.abs(1.0 - g.radius)) ** N * 2.0 ** (-K.j * (g.dim + 1) / 2)


def envelope_constant(K: WaveKernel, N: float) -> float:
    """sup_x |K(x)| (1 + 2^j | 1 - |x| |)^N 2^(-j (n+1)/2) over the grid."""
    return float(np.max(np.abs(K.samples.samples) * envelope_weight(K, N)))


def peak_radius(K: WaveKernel) -> float:
    """|x| at which |K| is largest."""
    idx = np.argmax(np.abs(K.samples.samples))
    return float(K.grid.radius.ravel()[idx])


def far_field_and_lowfreq_check(
    cutoff: CutoffDescriptor,
    j: float,
    grid: GridSpec,
    part: LittlewoodPaley,
    phase_on: bool = True,
) -> dict:
    """Far-field constant of the zeta-cut kernel and low-frequency constant of the phi-cut kernel.

    far = sup_{|x|>2} |(e^{i|xi|} zeta(xi) theta(2^-j xi))^v(x)| |x|^(n+1)
    low = sup_x |(e^{i|xi|} phi(xi) theta(2^-j xi))^v(x)| (1+|x|)^(n+1)
    """
    if grid.box_length < 8:
        raise RegionError("box too small: far-field check needs X >= 8")
    base = kernel_multiplier(cutoff, j, grid, phase_on)
    r = grid.radius
    far_kernel = from_spectral(SpectralField(grid, base * part.zeta(grid.freq_radius))).samples
    low_kernel = from_spectral(SpectralField(grid, base * part.phi(grid.freq_radius))).samples
    outside = r > 2
    n = grid.dim
    far = float(np.max(np.abs(far_kernel[outside]) * r[outside] ** (n + 1)))
    low = float(np.max(np.abs(low_kernel) * (1.0 + r) ** (n + 1)))
    return {"j": j, "far_field": far, "low_frequency": low}


def lp_norms(K: WaveKernel, ps=(1, 2, np.inf)) -> dict:
    whole = Region.whole()
    return {p: lp_norm(K.samples, p, whole) for p in ps}


def lp_slope_scan(
    cutoff: CutoffDescriptor,
    p: float,
    j_range,
    grid: GridSpec,
    phase_on: bool = True,
) -> tuple[float, list[float]]:
    """Least-squares slope of log2 ||K_j||_p against j, plus the per-j norms."""
    if grid.dim == 1 and p == 1 and phase_on:
        raise ValueError(
            "n = p = 1 is refused: exp(i|xi|) is not the Fourier transform of a finite "
            "complex measure on the line, so the L^1 growth law does not apply"
        )
    js = list(j_range)
    norms = [lp_norm(compute_kernel(cutoff, j, grid, phase_on).samples, p, Region.whole()) for j in js]
    return log2_slope(js, norms), norms


def expected_lp_slope(dim: int, p: float) -> float:
    """(n+1)/2 - 1/p."""
    return (dim + 1) / 2 - (0.0 if np.isinf(p) else 1.0 / p)


def cutoff_l2_norm(cutoff: CutoffDescriptor, dim: int) -> float:
    """||theta||_{L^2(R^n)} for a radial cutoff by adaptive quadrature."""
    area = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[dim]

    def integrand(r):
        return float(cutoff.radial_values(r)) ** 2 * r ** (dim - 1)

    pts = np.linspace(cutoff.inner_radius, cutoff.support_radius, 9)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(integrand, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return float(np.sqrt(area * total))


def plancherel_l2(cutoff: CutoffDescriptor, j: float, dim: int) -> float:
    """(2 pi)^(-n/2) 2^(jn/2) ||theta||_2, the exact L^2 norm of K_j on R^n."""
    return (2 * np.pi) ** (-dim / 2) * 2.0 ** (j * dim / 2) * cutoff_l2_norm(cutoff, dim)
