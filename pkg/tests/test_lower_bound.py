import numpy as np
import pytest

from wavelab import lower_bound as lb
from wavelab.cutoffs import annular_bump, tensor_cutoff
from wavelab.partition import build_partition

PSI = annular_bump()


@pytest.fixture(scope="module")
def small():
    # step 1/32, so I = {16 < |mu| < 48}
    data = lb.build_construction(2, 1.0, 1 / 8)
    return data, lb.tabulate_kernel(PSI, 2, 2.7)


def test_kernel_phase_approaches_the_stationary_value():
    phases = [abs(np.angle(lb.radial_kernel_table(PSI, j, [1.0])[0] * np.exp(-1j * lb.OMEGA_2))) for j in (4, 6, 8, 10)]
    assert all(b < a / 3 for a, b in zip(phases, phases[1:]))
    assert phases[-1] < 1e-3


def test_plateau_kernel_needs_radial_cutoff():
    with pytest.raises(ValueError, match="radial"):
        lb.radial_kernel_table(tensor_cutoff(build_partition()), 4, [1.0])


def test_table_interpolates_the_profile():
    tab = lb.tabulate_kernel(PSI, 5, 1.5)
    r = np.linspace(0.5, 1.4, 37)
    exact = lb.radial_kernel_table(PSI, 5, r)
    assert np.max(np.abs(tab(r) - exact)) < 1e-3 * np.max(np.abs(exact))
    assert tab.r_max >= 1.5


def test_plateau_deviation_grows_with_shell_width():
    for j in (9, 12):
        devs = [lb.plateau_deviation(PSI, j, d)[0] for d in (1 / 64, 1 / 32, 1 / 16, 1 / 8)]
        assert all(b > a for a, b in zip(devs, devs[1:]))
        assert devs[2] <= 0.1 < devs[3]


def test_plateau_check_picks_the_largest_admissible_shell():
    est = lb.plateau_check(PSI, [9, 10, 11, 12])
    assert est.delta == 1 / 16
    assert est.omega == np.pi / 4
    assert max(est.deviations[est.delta].values()) <= 0.1
    assert abs(est.c0_by_j[11] / est.c0_by_j[12] - 1) < 0.05
    with pytest.raises(RuntimeError, match="no delta"):
        lb.plateau_check(PSI, [9], ladder=(1.0, 0.5), tol=1e-3)


def test_construction_validation():
    with pytest.raises(ValueError, match="too large"):
        lb.build_construction(2, 1.0, 0.25)
    with pytest.raises(ValueError, match="integer"):
        lb.build_construction(2, 1.0, 0.09)
    with pytest.raises(ValueError, match="subcells"):
        lb.build_construction(2, 1.0, 1 / 8, subcells=8)


def test_construction_cubes_meet_the_thin_shell(small):
    data, _ = small
    assert data.inner_index == 16
    assert np.all(data.bits != 0)
    centres = data.positions[:, None, :] + data.offsets[None, :, :]
    r = np.sqrt(np.sum(centres**2, axis=2))
    hit = np.abs(r - 1) < data.shell_half_width / 2
    assert np.all(hit.any(axis=1))
    assert np.array_equal(data.lookup(data.points), np.arange(len(data.points)))
    assert data.lookup(np.array([[0, 0]]))[0] == -1


def test_overlaps_bounded_and_reflection_symmetric(small):
    data, _ = small
    rng = np.random.default_rng(0)
    nu = data.points[rng.integers(0, len(data.points), 500)]
    mu = rng.integers(-40, 41, size=(500, 2))
    ov = lb.overlap(data, mu, nu)
    assert np.all((ov >= 0) & (ov <= data.cell_volume))
    # x -> -x maps Q_nu to Q_{-nu-(1,1)} and E_mu to E_{-mu}
    assert np.array_equal(lb.overlap(data, -mu, -nu - 1), ov)
    # E_mu and E_-mu are translates: ov(mu, nu) = ov(-mu, nu - mu)
    assert np.array_equal(lb.overlap(data, -mu, nu - mu), ov)


def test_overlap_area_of_zero_shift_is_the_shell_area(small):
    data, _ = small
    width = data.shell_half_width
    # subcell sampling of the shell |1 - |x|| < width / 2
    assert lb.overlap_area(data, [0, 0]) == pytest.approx(2 * np.pi * width, rel=0.02)


@pytest.mark.parametrize("rule", ["midpoint", "gauss2"])
def test_mu_sums_match_bruteforce(small, rule):
    data, tab = small
    offsets, weights = lb.quadrature_rule(data, rule)
    assert weights.sum() == pytest.approx(1.0)
    fast = lb.mu_sums(data, tab, offsets, chunk=257)
    slow = lb.mu_sums_bruteforce(data, tab, offsets)
    assert np.max(np.abs(fast - slow)) < 1e-12 * np.max(np.abs(slow))


def test_quadrature_rule_errors(small):
    with pytest.raises(ValueError, match="unknown quadrature rule"):
        lb.quadrature_rule(small[0], "simpson")


def test_lambda_samples_are_symmetric(small):
    data, _ = small
    lam, weight, label = lb.lambda_samples(data, 200)
    keys = {tuple(v) for v in lam}
    assert keys == {(-b, a) for a, b in keys}
    assert keys == {(-a, -b) for a, b in keys}
    dsq = np.sum(lam * lam, axis=1)
    assert np.all((dsq > 16**2) & (dsq < 48**2))
    assert set(label) == {0, 1}
    # the weighted sample count estimates card I
    card = np.count_nonzero((lambda k: (k > 16**2) & (k < 48**2))(np.add.outer(np.arange(-48, 49) ** 2, np.arange(-48, 49) ** 2)))
    assert len(lam) * weight == pytest.approx(card, rel=0.05)


def test_lhs_is_invariant_under_a_quarter_turn(small):
    data, tab = small
    turned = lb.build_construction(2, 1.0, 1 / 8, quarter_turns=1)
    a = lb.evaluate_lhs(data, tab, tail_cut=None)
    b = lb.evaluate_lhs(turned, tab, tail_cut=None)
    assert abs(a.lhs / b.lhs - 1) < 1e-10
    assert a.coset_discrepancy < 0.05


def test_lhs_matches_direct_z_norms(small):
    data, tab = small
    res = lb.evaluate_lhs(data, tab, tail_cut=None, lambda_target=64)
    offsets, coef = lb.nu_coefficients(data, tab)
    lam, weight, _ = lb.lambda_samples(data, 64)
    z = lb.z_vectors(data, tab, offsets, coef, lam)
    assert res.lhs == pytest.approx(weight * np.sum(np.linalg.norm(z, axis=1)), rel=1e-12)
    assert res.tail_bound == 0.0


def test_tail_cut_bound_and_refusal(small):
    data, tab = small
    full = lb.evaluate_lhs(data, tab, tail_cut=None)
    cut = lb.evaluate_lhs(data, tab, tail_cut=64.0, refuse_tail=1.0)
    # T 2^-j = 16 exceeds every distance in the construction: nothing is cut
    assert cut.lhs == pytest.approx(full.lhs, rel=1e-12)
    with pytest.raises(RuntimeError, match="increase T"):
        lb.evaluate_lhs(data, tab, tail_cut=0.01, refuse_tail=1e-6)


def test_zero_overlaps_give_zero(small):
    data, tab = small
    empty = lb.build_construction(2, 1.0, 1 / 8, subcells=1)
    cleared = lb.ConstructionData(**{**vars(empty), "bits": np.zeros_like(empty.bits)})
    assert lb.evaluate_lhs(cleared, tab, tail_cut=None).lhs == 0.0


def test_growth_slope():
    js = [4, 5, 6, 7]
    out = lb.growth_slope_and_m_bound(js, [2.0 ** (5.5 * j) for j in js])
    assert out["slope"] == pytest.approx(5.5)
    assert out["implied_m"] == pytest.approx(-1.5)
    assert out["critical_m"] == -1.5
    assert out["expected_slope"] == 5.5
    with pytest.raises(ValueError, match="at least 4"):
        lb.growth_slope_and_m_bound(js[:3], [1, 2, 3])


def test_khintchine_single_entry_is_exact():
    z = np.zeros((3, 10), dtype=complex)
    z[0, 2], z[1, 7], z[2, 0] = 2.0, 1j, -0.5
    out = lb.khintchine_mc_check(z, 64, 0)
    assert np.array_equal(out["ratio"], np.ones(3))
    assert out["aggregate"] == 1.0
    with pytest.raises(ValueError, match="at least 64"):
        lb.khintchine_mc_check(z, 10, 0)


def test_khintchine_ratio_and_error_scaling():
    z = np.random.default_rng(1).normal(size=(4, 200))
    a = lb.khintchine_mc_check(z, 400, 2)
    b = lb.khintchine_mc_check(z, 1600, 3)
    # E|sum eps z| / ||z|| tends to sqrt(2 / pi) for many comparable entries
    assert b["aggregate"] == pytest.approx(np.sqrt(2 / np.pi), abs=0.03)
    assert b["aggregate_stderr"] / a["aggregate_stderr"] == pytest.approx(0.5, abs=0.1)


def test_cube_inside_annulus(small):
    data, _ = small
    idx = np.array([[0, 0], [31, 0], [42, 0]])
    inside = lb.cube_inside_annulus(data, idx, np.zeros(2), 0.9, 1.3)
    assert inside.tolist() == [False, True, False]


def test_counting_facts_small_scale(small):
    data, _ = small
    facts = lb.counting_facts(data, samples=16, seed=0)
    assert facts.j == 2
    assert facts.e_mu_scaled.shape == (16,)
    assert np.all(facts.overlap_counts > 0)
    assert 0.0 <= facts.e_mu_fraction() <= 1.0
    rows = lb.interior_cube_rows(data)
    assert len(rows) > 0
    ov = lb.count_overlapping_mu(data, rows[:5])
    assert np.all(ov > 0) and np.all(ov < len(data.points))
