"""Acceptance gate: every suite at its default configuration.

Each criterion test asserts that all records tagged with it pass and leaves a
one-line verdict that is printed in the terminal summary.  The full run takes
10 to 15 minutes on one core; deselect with ``-m "not acceptance"``.
"""

import time

import pytest

from wavelab import cli
from wavelab.config import DEFAULTS, SUITES, RunConfig
from wavelab.cutoffs import ball_cutoff, plateau_cutoff
from wavelab.grid import make_grid
from wavelab.partition import build_partition
from wavelab.trilinear import duality_residual, make_triple

from conftest import CRITERIA

pytestmark = pytest.mark.acceptance

BUDGET_S = {s: 300.0 for s in SUITES} | {"lowerbound": 900.0}


def full_run(out):
    cfg = RunConfig()
    cfg.values["out"] = str(out)
    return cli.run(cfg, figures=True)


@pytest.fixture(scope="session")
def first(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance_a")
    summary, status = full_run(out)
    return out, summary, status


def records_for(summary, criterion):
    return [r for s in summary["suites"].values() for r in s["records"] if r["criterion"] == criterion]


def verdict(criterion, summary, extra=()):
    """Record the verdict line and return the failing items."""
    recs = records_for(summary, criterion)
    failed = [f"{r['name']}={r['measured']}" for r in recs if not r["pass"]]
    failed += [msg for ok, msg in extra if not ok]
    ok = bool(recs) and not failed
    detail = f"{len(recs)} records" + (f"; failing: {', '.join(failed)}" if failed else "")
    CRITERIA[criterion] = (ok, detail)
    return recs, failed


def runtime(summary, suite):
    return summary["suites"][suite]["runtime_s"]


def test_criterion_1_partition_identities(first):
    _, summary, _ = first
    t = runtime(summary, "partition")
    recs, failed = verdict(1, summary, [(t < 1.0, f"runtime {t:.2f} s")])
    assert recs and not failed


def test_criterion_2_cm_coefficient_decay(first):
    _, summary, _ = first
    t = runtime(summary, "cm")
    recs, failed = verdict(2, summary, [(t < 60.0, f"runtime {t:.1f} s")])
    assert recs and not failed


@pytest.mark.parametrize("criterion", [3, 4, 5, 7, 8, 9, 10, 11, 12])
def test_criterion_records(first, criterion):
    _, summary, _ = first
    recs, failed = verdict(criterion, summary)
    assert recs and not failed, failed


def test_criterion_6_duality(first):
    _, summary, _ = first
    part = build_partition()
    ball = ball_cutoff(part)
    triple = make_triple(ball, ball, plateau_cutoff(4.0, 5.0))
    grid = make_grid(2, DEFAULTS["trilinear.N"], DEFAULTS["trilinear.X"])
    start = time.perf_counter()
    duality_residual(triple, DEFAULTS["trilinear.j"], grid, DEFAULTS["trilinear.trials"], 0)
    t = time.perf_counter() - start
    recs, failed = verdict(6, summary, [(t < 30.0, f"duality runtime {t:.1f} s")])
    assert recs and not failed


def test_suite_runtime_budgets(first):
    _, summary, _ = first
    slow = {s: runtime(summary, s) for s in SUITES if runtime(summary, s) > BUDGET_S[s]}
    assert not slow


def test_status_reflects_records(first):
    _, summary, status = first
    assert status == (1 if summary["failed"] else 0)


def test_criterion_13_determinism(first, tmp_path_factory):
    out_a, _, _ = first
    out_b = tmp_path_factory.mktemp("acceptance_b")
    full_run(out_b)
    names = sorted(p.name for p in out_a.glob("*.csv"))
    differ = [n for n in names if (out_a / n).read_bytes() != (out_b / n).read_bytes()]
    missing = sorted(set(names) ^ {p.name for p in out_b.glob("*.csv")})
    ok = bool(names) and not differ and not missing
    CRITERIA[13] = (ok, f"{len(names)} CSV files" + (f"; differing: {differ + missing}" if not ok else ", byte-identical"))
    assert ok
