"""Acceptance criteria 1-9 at their stated scales.

Each test prints one ``[criterion k] PASS|FAIL`` line (visible without -s)
and asserts the verdicts and the runtime budget.
"""

import time

import pytest

from ppwass.metrics import INF
from ppwass.stein import hard_core_bound, two_runs_bound, two_runs_theorem_bound
from ppwass.verify.experiments import experiment_hard_core, experiment_two_runs
from ppwass.verify.suites import (
    assignment_rows,
    constants_suite,
    hard_core_limit_rows,
    immigration_death_rows,
    metric_axiom_rows,
    metric_spaces,
    statistics_suite,
    stein_scan_rows,
    transport_rows,
    two_runs_mean_rows,
)

pytestmark = pytest.mark.acceptance


def report(capsys, k, title, rows, elapsed, budget):
    failed = [r["name"] for r in rows if r["verdict"] == "fail"]
    ok = not failed and elapsed < budget
    with capsys.disabled():
        status = "PASS" if ok else "FAIL"
        print(f"\n[criterion {k}] {status} {title} ({len(rows)} checks, {elapsed:.1f}s of {budget:g}s)")
        for name in failed:
            print(f"    failed: {name}")
    assert not failed, failed
    assert elapsed < budget


def timed(fn):
    t0 = time.perf_counter()
    rows = fn()
    return rows, time.perf_counter() - t0


def test_criterion_1_assignment_oracle(capsys):
    rows, dt = timed(lambda: assignment_rows(n_matrices=200, max_n=7, seed=101))
    report(capsys, 1, "assignment solvers vs brute force", rows, dt, 10)


def test_criterion_2_metric_suite(capsys):
    def run():
        rows = []
        for k, (label, space) in enumerate(metric_spaces(seed=102).items()):
            rows += metric_axiom_rows(space, label, n_checks=10_000, seed=(102, k))
        return rows

    rows, dt = timed(run)
    report(capsys, 2, "metric axioms on 10^4 pairs/triples per space", rows, dt, 60)


def test_criterion_3_constants(capsys):
    rows, dt = timed(lambda: constants_suite(n_random=50, seed=103))
    report(capsys, 3, "Stein constants", rows, dt, 1)


def test_criterion_4_lipschitz(capsys):
    rows, dt = timed(lambda: statistics_suite(n_pairs=10_000, seed=104, orders=(1.0, 2.0, 3.0)))
    assert len(rows) == 3 * (2 * 7 + 3)
    report(capsys, 4, "Lipschitz suites, 10^4 pairs each", rows, dt, 300)


def test_criterion_5_dual_sandwich(capsys):
    rows, dt = timed(lambda: transport_rows(n_pairs=100, seed=105))
    report(capsys, 5, "dual sandwich and monotone empirical d2", rows, dt, 120)


def test_criterion_6_stein_machinery(capsys):
    rows, dt = timed(lambda: stein_scan_rows(n_functions=20, seed=106, orders=(1.0, 2.0, 5.0, INF)))
    report(capsys, 6, "exact Stein solutions and difference bounds", rows, dt, 300)


def test_criterion_7_two_runs(capsys):
    def run():
        assert two_runs_theorem_bound(400, 0.05, 1.0).bound_capped == pytest.approx(0.0975, abs=1e-12)
        assert two_runs_bound(400, 0.05, 1.0) == pytest.approx(0.178750, abs=1e-12)
        rep = experiment_two_runs(400, 0.05, 1.0, 200, seed=107)
        assert rep.bound["bound_capped"] == pytest.approx(0.0975, abs=1e-12)
        return rep.rows("two_runs")

    rows, dt = timed(run)
    report(capsys, 7, "two-runs corrected d2 vs 0.0975", rows, dt, 600)


def test_criterion_8_hard_core(capsys):
    def run():
        rep = experiment_hard_core(2, 1.1, 0.05, 1.0, 200, seed=108)
        cap = min(hard_core_bound(2, 0.05, rep.extra["lambda_hat"], 1.0), 1.0)
        assert rep.corrected <= cap + 3 * rep.combined_se
        return rep.rows("hard_core")

    rows, dt = timed(run)
    assert any(r["name"] == "hard_core.empty_ball_identity" for r in rows)
    report(capsys, 8, "hard-core identity and corrected d2 vs bound", rows, dt, 1200)


def test_criterion_9_process_laws(capsys):
    def run():
        return (
            immigration_death_rows(n_draws=20_000, t=40.0, seed=109)
            + hard_core_limit_rows(beta=1.1, n_draws=20_000, seed=109)
            + two_runs_mean_rows(400, 0.05, n_draws=20_000, seed=109)
        )

    rows, dt = timed(run)
    report(capsys, 9, "immigration-death, small-r hard-core, two-runs mean", rows, dt, 600)
