"""Lattice construction behind the necessity of m <= -(n+1)/2 (planar case).

Geometry, with s = delta' 2^-j the lattice step:

* v_mu = s mu for mu in I = {mu in Z^2 : 1/2 < |v_mu| < 3/2};
* cubes Q_nu = v_nu + (0, s]^2;
* shells V (half-width delta 2^-j) and V' (half-width delta 2^-j / 2) around |x| = 1;
* E_mu = V' cap (v_mu + V').

Overlaps <1_{E_mu}, 1_{Q_nu}> are computed by sampling each cube on an S x S
grid of subcell centres.  Every cube is tagged with a bit mask recording which
of its subcell centres lie in V'; the overlap of E_mu with Q_nu is then
|Q| S^-2 popcount(bits[nu] & bits[nu - mu]), an exact integer identity.

The quantity measured is

    LHS = sum_{lambda in I} || sum_{mu in I} 2^{2j} <1_{E_mu}, 1_{Q_nu}> H(lambda, mu, nu) ||_{l^2_nu}

with H(lambda, mu, nu) = int_{Q_nu} G(x - v_lambda) G(x - v_mu) G(x) dx evaluated
by midpoint (or 2 x 2 Gauss) quadrature.  Under the quadrature rule the mu-sum
factorises: sum_mu ov(mu, nu) G(y - v_mu) does not depend on lambda.  These
sums are computed exactly for every nu with angle-sorted prefix sums, using
exact integer tests near the boundary of I.  The lambda-sum is evaluated on a
quarter-turn symmetric sub-lattice of I (two interleaved cosets) and scaled by
its density; the discrepancy between the two cosets is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import log2_slope
from .cutoffs import CutoffDescriptor
from .kernels import radial_profile

#: omega_n = (n - 1) pi / 4 for n = 2
OMEGA_2 = np.pi / 4
DEFAULT_LADDER = tuple(2.0**-k for k in range(0, 7))


# --------------------------------------------------------------------------
# radial kernel tables and the plateau


@dataclass(frozen=True, eq=False)
class RadialTable:
    """Uniformly tabulated radial kernel with linear interpolation."""

    step: float
    values: np.ndarray

    @property
    def r_max(self) -> float:
        return self.step * (self.values.size - 1)

    def __call__(self, r) -> np.ndarray:
        x = np.asarray(r, dtype=float) / self.step
        i = np.minimum(x.astype(np.int64), self.values.size - 2)
        frac = x - i
        return self.values[i] * (1.0 - frac) + self.values[i + 1] * frac


def radial_kernel_table(psi: CutoffDescriptor, j: float, radii, phase_on: bool = True) -> np.ndarray:
    """G_j (or the phase-free F_j) at the given radii in the plane."""
    if not psi.radial:
        raise ValueError("the plateau kernel needs a radial cutoff")
    return radial_profile(psi, j, radii, 2, phase_on)


def tabulate_kernel(
    psi: CutoffDescriptor, j: float, r_max: float, per_scale: int = 256, phase_on: bool = True
) -> RadialTable:
    """Table of G_j on [0, r_max] with spacing 2^-j / per_scale."""
    step = 2.0**-j / per_scale
    count = int(np.ceil(r_max / step)) + 2
    radii = step * np.arange(count)
    return RadialTable(step, radial_kernel_table(psi, j, radii, phase_on))


@dataclass(frozen=True)
class PlateauEstimate:
    omega: float
    c0: float
    delta: float
    j0: int
    deviations: dict
    c0_by_j: dict


def _shell_values(psi: CutoffDescriptor, j: float, delta: float, samples: int = 201) -> np.ndarray:
    """e^{-i w} 2^{-3j/2} G_j on the open shell |1 - |x|| < delta 2^-j."""
    t = np.linspace(-1.0, 1.0, samples)[1:-1]
    radii = 1.0 + delta * 2.0**-j * t
    return radial_kernel_table(psi, j, radii) * np.exp(-1j * OMEGA_2) * 2.0 ** (-1.5 * j)


def plateau_deviation(psi: CutoffDescriptor, j: float, delta: float, c0: float | None = None):
    """(max |e^{-i w} 2^{-3j/2} G_j - c0| / c0, c0) over the shell.

    c0 defaults to the mean real part of the normalised kernel over the shell.
    """
    vals = _shell_values(psi, j, delta)
    if c0 is None:
        c0 = float(vals.real.mean())
    return float(np.max(np.abs(vals - c0)) / c0), c0


def plateau_check(psi: CutoffDescriptor, j_list, ladder=DEFAULT_LADDER, tol: float = 0.1) -> PlateauEstimate:
    """Largest delta on the ladder whose deviation stays <= tol on every j in j_list.

    Deviations are measured against c0 = mean real part over the shell at the
    largest j; j0 is the smallest j from which the bound holds.
    """
    js = sorted(j_list)
    deviations = {}
    for delta in sorted(ladder, reverse=True):
        vals = {j: _shell_values(psi, j, delta) for j in js}
        c0_by_j = {j: float(v.real.mean()) for j, v in vals.items()}
        c0 = c0_by_j[js[-1]]
        devs = {j: float(np.max(np.abs(v - c0)) / c0) for j, v in vals.items()}
        deviations[delta] = devs
        if all(d <= tol for d in devs.values()):
            return PlateauEstimate(OMEGA_2, c0, delta, js[0], deviations, c0_by_j)
    raise RuntimeError(f"no delta in the ladder reaches plateau deviation <= {tol}")


# --------------------------------------------------------------------------
# construction geometry

_ROT = np.array([[0, -1], [1, 0]])


def _rotate(v: np.ndarray, quarter_turns: int) -> np.ndarray:
    out = v
    for _ in range(quarter_turns % 4):
        out = out @ _ROT.T
    return out


@dataclass(frozen=True, eq=False)
class ConstructionData:
    """Planar lattice construction at scale j."""

    j: int
    delta: float
    delta_prime: float
    subcells: int
    step: float
    points: np.ndarray  # (M, 2) int64 lattice indices nu of cubes meeting V'
    bits: np.ndarray  # (M,) uint64 subcell membership masks in V'
    offsets: np.ndarray  # (S^2, 2) subcell centres relative to v_nu
    corner_offsets: np.ndarray  # (4, 2) cube corners relative to v_nu
    quarter_turns: int = 0
    sorted_keys: np.ndarray = field(default=None, repr=False)
    key_rows: np.ndarray = field(default=None, repr=False)

    @property
    def cell_volume(self) -> float:
        return self.step**2

    @property
    def inner_index(self) -> int:
        """1 / (2 s); I is 1/2 < s |mu| < 3/2, i.e. inner^2 < |mu|^2 < (3 inner)^2."""
        return int(round(0.5 / self.step))

    @property
    def shell_half_width(self) -> float:
        return self.delta * 2.0**-self.j

    @property
    def positions(self) -> np.ndarray:
        return self.step * self.points

    @property
    def center_offset(self) -> np.ndarray:
        return self.offsets.mean(axis=0)

    def lookup(self, idx: np.ndarray) -> np.ndarray:
        """Row numbers of lattice indices (or -1 when the cube misses V')."""
        keys = _key(idx)
        pos = np.minimum(np.searchsorted(self.sorted_keys, keys), self.sorted_keys.size - 1)
        return np.where(self.sorted_keys[pos] == keys, self.key_rows[pos], -1)


def _key(idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    return (idx[..., 0] + (1 << 31)) * (1 << 32) + (idx[..., 1] + (1 << 31))


def _ring_candidates(step: float, lo: float, hi: float) -> np.ndarray:
    """All k in Z^2 with lo <= step |k| <= hi."""
    kmax = int(np.ceil(hi / step))
    k1 = np.arange(-kmax, kmax + 1)
    top = np.floor(np.sqrt(np.maximum((hi / step) ** 2 - k1 * k1, 0.0))).astype(np.int64)
    bottom_sq = (lo / step) ** 2 - k1 * k1
    bottom = np.where(bottom_sq > 0, np.ceil(np.sqrt(np.maximum(bottom_sq, 0.0))), 0).astype(np.int64)
    chunks = []
    for a, b, t in zip(k1, bottom, top):
        if b > t:
            continue
        pos = np.arange(b, t + 1)
        col = np.concatenate([-pos[::-1], pos]) if b > 0 else np.arange(-t, t + 1)
        chunks.append(np.column_stack([np.full(col.size, a), col]))
    return np.concatenate(chunks).astype(np.int64)


def _subcell_offsets(step: float, subcells: int, quarter_turns: int) -> np.ndarray:
    centres = (np.arange(subcells) + 0.5) / subcells * step
    off = np.stack(np.meshgrid(centres, centres, indexing="ij"), axis=-1).reshape(-1, 2)
    return _rotate(off, quarter_turns)


def _in_shell(x: np.ndarray, half_width: float) -> np.ndarray:
    r = np.sqrt(np.sum(x * x, axis=-1))
    return np.abs(r - 1.0) < half_width


def build_construction(
    j: int,
    delta: float,
    delta_prime: float,
    subcells: int = 4,
    quarter_turns: int = 0,
    max_ratio: float = 1.0 / 8.0,
) -> ConstructionData:
    """Lattice, cubes meeting V' and their subcell membership masks.

    delta_prime must be at most ``max_ratio`` * delta; the cube diameter is then
    below the half-width of V' so cubes meeting V' stay inside V.
    """
    if delta_prime > max_ratio * delta * (1 + 1e-12):
        raise ValueError(f"delta' = {delta_prime:g} too large for delta = {delta:g} (ratio cap {max_ratio:g})")
    if subcells < 1 or subcells * subcells > 63:
        raise ValueError("subcells must be between 1 and 7")
    step = delta_prime * 2.0**-j
    inner = 0.5 / step
    if abs(inner - round(inner)) > 1e-9:
        raise ValueError("1 / (2 delta' 2^-j) must be an integer so that I is decided exactly")
    half = 0.5 * delta * 2.0**-j
    reach = np.sqrt(2.0) * step
    cand = _ring_candidates(step, 1.0 - half - reach, 1.0 + half + reach)
    cand = _rotate(cand, quarter_turns)
    offsets = _subcell_offsets(step, subcells, quarter_turns)
    base = step * cand.astype(float)
    bits = np.zeros(len(cand), dtype=np.uint64)
    for q, o in enumerate(offsets):
        bits |= _in_shell(base + o, half).astype(np.uint64) << np.uint64(q)
    keep = bits != 0
    cand, bits = cand[keep], bits[keep]
    corners = _rotate(step * np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float), quarter_turns)
    keys = _key(cand)
    order = np.argsort(keys, kind="stable")
    return ConstructionData(j, delta, delta_prime, subcells, step, cand, bits, offsets, corners, quarter_turns, keys[order], order)


def overlap(data: ConstructionData, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """<1_{E_mu}, 1_{Q_nu}> for paired arrays of lattice indices (subcell rule)."""
    mu = np.atleast_2d(mu)
    nu = np.atleast_2d(nu)
    rows_nu = data.lookup(nu)
    rows_k = data.lookup(nu - mu)
    valid = (rows_nu >= 0) & (rows_k >= 0)
    both = np.where(valid, data.bits[rows_nu] & data.bits[rows_k], np.uint64(0))
    return np.bitwise_count(both).astype(float) * data.cell_volume / data.subcells**2


def overlap_area(data: ConstructionData, mu) -> float:
    """|E_mu| as the sum of overlaps over all cubes."""
    mu = np.asarray(mu, dtype=np.int64)
    shifted = data.lookup(data.points - mu)
    ok = shifted >= 0
    count = np.bitwise_count(data.bits[ok] & data.bits[shifted[ok]]).sum()
    return float(count) * data.cell_volume / data.subcells**2


# --------------------------------------------------------------------------
# the mu-sums  W[nu, p] = sum_{mu in I} ov(mu, nu) G(y_p(nu) - v_mu)


def _delta_bounds(r1: np.ndarray, r_lo: float, r_hi: float, tau: float, pad: float = 1e-9):
    """Angular window [lo, hi] outside which |v_nu - v_k| vs tau is decided by angle alone."""
    cand = [np.full_like(r1, r_lo), np.full_like(r1, r_hi)]
    crit = np.sqrt(np.maximum(r1 * r1 - tau * tau, 0.0))
    cand.append(np.clip(crit, r_lo, r_hi))
    angles = []
    for r2 in cand:
        c = (r1 * r1 + r2 * r2 - tau * tau) / (2.0 * r1 * r2)
        angles.append(np.arccos(np.clip(c, -1.0, 1.0)))
    angles = np.stack(angles)
    return angles.min(axis=0) - pad, angles.max(axis=0) + pad


def mu_sums(data: ConstructionData, table: RadialTable, eval_offsets: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """W[nu, p] for every cube nu and each evaluation offset y_p - v_nu.

    Exact: sure-inside angular windows use prefix sums over angle-sorted
    cubes; the thin boundary bands are resolved with integer tests.
    """
    pts = data.points
    m = len(pts)
    nsub = data.subcells**2
    pos = data.positions
    radius = np.sqrt(np.sum(pos * pos, axis=1))
    theta = np.arctan2(pos[:, 1], pos[:, 0])
    order = np.argsort(theta, kind="stable")
    th_sorted = theta[order]
    th_ext = np.concatenate([th_sorted - 2 * np.pi, th_sorted, th_sorted + 2 * np.pi])
    ext_rows = np.tile(order, 3)
    bit_matrix = ((data.bits[:, None] >> np.arange(nsub, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(float)

    inner = data.inner_index
    lo_sq, hi_sq = inner * inner, 9 * inner * inner
    r_lo, r_hi = float(radius.min()), float(radius.max())
    d_lo_a, d_hi_a = _delta_bounds(radius, r_lo, r_hi, 0.5)
    d_lo_b, d_hi_b = _delta_bounds(radius, r_lo, r_hi, 1.5)
    scale = data.cell_volume / nsub

    out = np.zeros((m, len(eval_offsets)), dtype=complex)
    for p, off in enumerate(eval_offsets):
        gk = table(np.sqrt(np.sum((pos + off) ** 2, axis=1)))
        weighted = bit_matrix * gk[:, None]
        prefix = np.zeros((3 * m + 1, nsub), dtype=complex)
        np.cumsum(weighted[ext_rows], axis=0, out=prefix[1:])
        for s0 in range(0, m, chunk):
            sl = slice(s0, min(m, s0 + chunk))
            phi = theta[sl]
            mask = bit_matrix[sl]
            acc = np.zeros(phi.size, dtype=complex)
            # sure-inside windows: delta in [hi_a, lo_b) on both sides
            for sign in (1, -1):
                if sign == 1:
                    a = np.searchsorted(th_ext, phi + d_hi_a[sl], "left")
                    b = np.searchsorted(th_ext, phi + d_lo_b[sl], "left")
                else:
                    a = np.searchsorted(th_ext, phi - d_lo_b[sl], "right")
                    b = np.searchsorted(th_ext, phi - d_hi_a[sl], "right")
                acc += np.einsum("iq,iq->i", prefix[b] - prefix[a], mask)
                # boundary bands: delta in [lo_a, hi_a) and [lo_b, hi_b)
                for lo_d, hi_d in ((d_lo_a, d_hi_a), (d_lo_b, d_hi_b)):
                    if sign == 1:
                        ba = np.searchsorted(th_ext, phi + lo_d[sl], "left")
                        bb = np.searchsorted(th_ext, phi + hi_d[sl], "left")
                    else:
                        ba = np.searchsorted(th_ext, phi - hi_d[sl], "right")
                        bb = np.searchsorted(th_ext, phi - lo_d[sl], "right")
                    counts = np.maximum(bb - ba, 0)
                    total = int(counts.sum())
                    if total == 0:
                        continue
                    owner = np.repeat(np.arange(phi.size), counts)
                    start = np.repeat(ba - np.cumsum(counts) + counts, counts)
                    rows = ext_rows[start + np.arange(total)]
                    nu_rows = owner + s0
                    diff = pts[nu_rows] - pts[rows]
                    dsq = diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1]
                    ok = (dsq > lo_sq) & (dsq < hi_sq)
                    common = np.bitwise_count(data.bits[nu_rows[ok]] & data.bits[rows[ok]]).astype(float)
                    contrib = gk[rows[ok]] * common
                    acc += np.bincount(owner[ok], weights=contrib.real, minlength=phi.size)
                    acc += 1j * np.bincount(owner[ok], weights=contrib.imag, minlength=phi.size)
            out[sl, p] = acc
    return out * scale


def mu_sums_bruteforce(data: ConstructionData, table: RadialTable, eval_offsets: np.ndarray) -> np.ndarray:
    """Direct double loop over cube pairs (small j only)."""
    pts = data.points
    pos = data.positions
    inner = data.inner_index
    out = np.zeros((len(pts), len(eval_offsets)), dtype=complex)
    for i in range(len(pts)):
        diff = pts[i] - pts
        dsq = np.sum(diff * diff, axis=1)
        ok = (dsq > inner * inner) & (dsq < 9 * inner * inner)
        common = np.bitwise_count(data.bits[i] & data.bits[ok]).astype(float)
        for p, off in enumerate(eval_offsets):
            gk = table(np.sqrt(np.sum((pos[ok] + off) ** 2, axis=1)))
            out[i, p] = np.sum(common * gk)
    return out * data.cell_volume / data.subcells**2


# --------------------------------------------------------------------------
# the lambda-sum


def quadrature_rule(data: ConstructionData, rule: str):
    """Evaluation offsets inside Q_nu (relative to v_nu) and weights summing to 1."""
    if rule == "midpoint":
        return data.center_offset[None, :], np.array([1.0])
    if rule == "gauss2":
        g = 0.5 / np.sqrt(3.0)
        local = data.step * np.array([[0.5 - g, 0.5 - g], [0.5 + g, 0.5 - g], [0.5 - g, 0.5 + g], [0.5 + g, 0.5 + g]])
        return _rotate(local, data.quarter_turns), np.full(4, 0.25)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def lambda_samples(data: ConstructionData, target: int) -> tuple[np.ndarray, float, np.ndarray]:
    """Two interleaved cosets of a stride-t sub-lattice of I.

    Returns (lattice indices, weight per sample, coset label).  The union is
    invariant under quarter turns and mu -> -mu.
    """
    inner = data.inner_index
    count_i = np.pi * ((3 * inner) ** 2 - inner**2)
    t = max(2, int(round(np.sqrt(2.0 * count_i / target) / 2.0)) * 2)
    kmax = 3 * inner
    out, labels = [], []
    for label, shift in enumerate((0, t // 2)):
        axis = np.arange(-((kmax // t) + 1) * t + shift, kmax + t, t)
        g1, g2 = np.meshgrid(axis, axis, indexing="ij")
        idx = np.column_stack([g1.ravel(), g2.ravel()]).astype(np.int64)
        dsq = np.sum(idx * idx, axis=1)
        idx = idx[(dsq > inner * inner) & (dsq < 9 * inner * inner)]
        out.append(idx)
        labels.append(np.full(len(idx), label))
    return np.concatenate(out), t * t / 2.0, np.concatenate(labels)


@dataclass(frozen=True)
class LhsResult:
    j: int
    lhs: float
    tail_bound: float
    coset_discrepancy: float
    samples: int
    stride_weight: float
    rule: str
    cubes: int
    envelope_c3: float

    @property
    def tail_fraction(self) -> float:
        return self.tail_bound / self.lhs if self.lhs else 0.0


def kernel_envelope_c3(table: RadialTable, j: int) -> float:
    r = table.step * np.arange(table.values.size)
    return float(np.max(np.abs(table.values) * (1.0 + 2.0**j * np.abs(1.0 - r)) ** 3) * 2.0 ** (-1.5 * j))


def nu_coefficients(data: ConstructionData, table: RadialTable, rule: str = "midpoint"):
    """Per-cube coefficients A[nu, p] with z(lambda, nu) = sum_p A[nu, p] G(y_p(nu) - v_lambda)."""
    offsets, weights = quadrature_rule(data, rule)
    w_sums = mu_sums(data, table, offsets)
    pos = data.positions
    coef = np.empty_like(w_sums)
    for p, off in enumerate(offsets):
        coef[:, p] = weights[p] * table(np.sqrt(np.sum((pos + off) ** 2, axis=1))) * w_sums[:, p]
    coef *= 2.0 ** (2 * data.j) * data.cell_volume
    return offsets, coef


def z_vectors(data, table, offsets, coef, lam_idx, tail_cut=None):
    """z(lambda, nu) rows for the given lambda indices (admissible nu only)."""
    pos = data.positions
    v_lam = data.step * lam_idx.astype(float)
    z = np.zeros((len(lam_idx), len(pos)), dtype=complex)
    ref = pos + data.center_offset
    for p, off in enumerate(offsets):
        y = pos + off
        d = np.sqrt((y[None, :, 0] - v_lam[:, None, 0]) ** 2 + (y[None, :, 1] - v_lam[:, None, 1]) ** 2)
        z += coef[None, :, p] * table(d)
    if tail_cut is not None:
        d = np.sqrt((ref[None, :, 0] - v_lam[:, None, 0]) ** 2 + (ref[None, :, 1] - v_lam[:, None, 1]) ** 2)
        z[np.abs(d - 1.0) >= tail_cut * 2.0**-data.j] = 0
    return z


def evaluate_lhs(
    data: ConstructionData,
    table: RadialTable,
    tail_cut: float | None = 64.0,
    rule: str = "midpoint",
    lambda_target: int = 1024,
    block: int = 16,
    refuse_tail: float = 0.05,
) -> LhsResult:
    """Left side of the l^2 display with a certified bound for the truncated lambda tail."""
    offsets, coef = nu_coefficients(data, table, rule)
    lam, weight, label = lambda_samples(data, lambda_target)
    ref = data.positions + data.center_offset
    c3 = kernel_envelope_c3(table, data.j)
    envelope = c3 * 2.0 ** (1.5 * data.j)
    coef_abs = np.abs(coef).sum(axis=1)
    margin = np.sqrt(2.0) * data.step
    norms = np.zeros(len(lam))
    tails = np.zeros(len(lam))
    for s0 in range(0, len(lam), block):
        sl = slice(s0, s0 + block)
        z = z_vectors(data, table, offsets, coef, lam[sl], None)
        if tail_cut is None:
            norms[sl] = np.sqrt(np.sum(np.abs(z) ** 2, axis=1))
            continue
        v_lam = data.step * lam[sl].astype(float)
        d = np.sqrt((ref[None, :, 0] - v_lam[:, None, 0]) ** 2 + (ref[None, :, 1] - v_lam[:, None, 1]) ** 2)
        gap = np.abs(d - 1.0)
        cut = gap >= tail_cut * 2.0**-data.j
        z[cut] = 0
        norms[sl] = np.sqrt(np.sum(np.abs(z) ** 2, axis=1))
        # envelope |G(x)| <= c3 2^{3j/2} (1 + 2^j |1 - |x||)^-3 at each excluded cube
        env = envelope * (1.0 + 2.0**data.j * np.maximum(gap - margin, 0.0)) ** -3
        bound = np.where(cut, coef_abs[None, :] * env, 0.0)
        tails[sl] = np.sqrt(np.sum(bound**2, axis=1))
    lhs = weight * float(norms.sum())
    tail = weight * float(tails.sum())
    if tail_cut is not None and lhs > 0 and tail > refuse_tail * lhs:
        raise RuntimeError(f"tail bound {tail:.3g} exceeds {refuse_tail:.0%} of the value {lhs:.3g}; increase T")
    halves = [float(norms[label == c].sum()) for c in (0, 1)]
    disc = abs(halves[0] - halves[1]) / max(sum(halves) / 2, 1e-300)
    return LhsResult(data.j, lhs, tail, disc, len(lam), weight, rule, len(data.points), c3)


def growth_slope_and_m_bound(j_values, lhs_values, dim: int = 2) -> dict:
    if len(j_values) < 4:
        raise ValueError("need at least 4 scales for the growth slope")
    s = log2_slope(j_values, lhs_values)
    return {"slope": s, "implied_m": 2 * dim - s, "critical_m": -(dim + 1) / 2, "expected_slope": 2.5 * dim + 0.5}


# --------------------------------------------------------------------------
# random signs


def khintchine_mc_check(z: np.ndarray, trials: int, seed: int) -> dict:
    """Monte Carlo E|sum_nu eps_nu z_nu| against ||z||_2 for each row of z.

    Returns per-row ratios, their standard errors and the aggregate ratio of
    sum_lambda E|.| to sum_lambda ||.||_2.
    """
    if trials < 64:
        raise ValueError("trials must be at least 64")
    rng = np.random.default_rng(seed)
    z = np.atleast_2d(z)
    l2 = np.sqrt(np.sum(np.abs(z) ** 2, axis=1))
    samples = np.empty((trials, z.shape[0]))
    for t in range(trials):
        eps = rng.choice((-1.0, 1.0), size=z.shape[1])
        samples[t] = np.abs(z @ eps)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    return {
        "ratio": mean / l2,
        "stderr": se / l2,
        "aggregate": float(mean.sum() / l2.sum()),
        "aggregate_stderr": float(np.sqrt(np.sum(se**2)) / l2.sum()),
    }


# --------------------------------------------------------------------------
# counting facts


def cube_inside_annulus(data: ConstructionData, idx: np.ndarray, center: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """Whether the closed cubes Q_nu lie inside {inner < |x - center| < outer}."""
    base = data.step * idx.astype(float) - center
    corners = base[:, None, :] + data.corner_offsets[None, :, :]
    far = np.sqrt(np.sum(corners**2, axis=2)).max(axis=1)
    lo = corners.min(axis=1)
    hi = corners.max(axis=1)
    nearest = np.clip(0.0, lo, hi)
    near = np.sqrt(np.sum(nearest**2, axis=1))
    return (far < outer) & (near > inner)


def count_overlapping_mu(data: ConstructionData, nu_rows: np.ndarray) -> np.ndarray:
    """card{mu in I : ov(mu, nu) > 0} for the given cube rows."""
    inner = data.inner_index
    out = np.empty(len(nu_rows), dtype=np.int64)
    for i, row in enumerate(nu_rows):
        diff = data.points[row] - data.points
        dsq = np.sum(diff * diff, axis=1)
        ok = (dsq > inner * inner) & (dsq < 9 * inner * inner)
        out[i] = int(np.count_nonzero(ok & ((data.bits & data.bits[row]) != 0)))
    return out


def count_admissible_nu(data: ConstructionData, lam_idx: np.ndarray) -> np.ndarray:
    """card{nu : Q_nu inside V', Q_nu - v_lambda inside V} per lambda."""
    half = data.shell_half_width
    inside_vp = cube_inside_annulus(data, data.points, np.zeros(2), 1 - half / 2, 1 + half / 2)
    cand = data.points[inside_vp]
    mid = data.step * cand.astype(float) + data.center_offset
    slack = half + np.sqrt(2.0) * data.step
    out = np.empty(len(lam_idx), dtype=np.int64)
    for i, lam in enumerate(lam_idx):
        centre = data.step * lam.astype(float)
        # cubes whose centre is far from the shell cannot lie inside it
        near = np.abs(np.sqrt(np.sum((mid - centre) ** 2, axis=1)) - 1.0) < slack
        out[i] = int(np.count_nonzero(cube_inside_annulus(data, cand[near], centre, 1 - half, 1 + half)))
    return out


def interior_cube_rows(data: ConstructionData) -> np.ndarray:
    half = data.shell_half_width
    ok = cube_inside_annulus(data, data.points, np.zeros(2), 1 - half / 2, 1 + half / 2)
    return np.nonzero(ok)[0]


def middle_indices(data: ConstructionData, count: int, seed: int) -> np.ndarray:
    """Seeded sample of mu in I with 3/4 < |v_mu| < 5/4 (the middle half of the annulus)."""
    rng = np.random.default_rng(seed)
    inner = data.inner_index
    radius = rng.uniform(1.5 * inner, 2.5 * inner, size=count)
    angle = rng.uniform(0.0, 2 * np.pi, size=count)
    return np.rint(np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])).astype(np.int64)


@dataclass(frozen=True)
class CountingFacts:
    j: int
    e_mu_scaled: np.ndarray  # |E_mu| 2^{2j}
    overlap_counts: np.ndarray  # card{mu : ov(mu, nu) > 0} for interior nu
    admissible_counts: np.ndarray  # card{nu : Q_nu in V', Q_nu - v_lambda in V}

    def e_mu_fraction(self, lo: float = 1 / 8, hi: float = 8.0) -> float:
        ok = (self.e_mu_scaled >= lo) & (self.e_mu_scaled <= hi)
        return float(np.mean(ok))


def counting_facts(data: ConstructionData, samples: int = 64, seed: int = 0) -> CountingFacts:
    """|E_mu|, overlap counts and admissible-cube counts on seeded samples."""
    mus = middle_indices(data, samples, seed)
    e_mu = np.array([overlap_area(data, mu) for mu in mus]) * 2.0 ** (2 * data.j)
    interior = interior_cube_rows(data)
    rng = np.random.default_rng(seed + 1)
    rows = rng.choice(interior, size=min(samples, interior.size), replace=False)
    lams = middle_indices(data, samples, seed + 2)
    return CountingFacts(data.j, e_mu, count_overlapping_mu(data, rows), count_admissible_nu(data, lams))
