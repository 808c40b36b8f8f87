"""Acceptance criteria for the library, one test per criterion.

Every numbered criterion below is asserted with its pinned tolerance and a
wall-clock budget.  Run with ``pytest -v`` to get one pass/fail line per
criterion.  The checks themselves live in ``pathlab.suite`` so the ``suite``
CLI subcommand and this module exercise identical code paths; the assertions
here restate the tolerances explicitly rather than trusting the aggregated
``passed`` flags.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

from pathlab import suite

SEED = 0


def _timed(check, budget_s):
    t0 = time.perf_counter()
    result, extras = check(SEED)
    elapsed = time.perf_counter() - t0
    assert elapsed <= budget_s, f"check took {elapsed:.1f}s, budget {budget_s}s"
    return result, extras


def _report(num, passed):
    print(f"criterion {num:02d}: {'PASS' if passed else 'FAIL'}")
    assert passed


def test_criterion_01_algebra_identities():
    """Concatenation identity on 100 split paths; shuffle identity on 50
    group-like elements over every word pair that fits the truncation."""
    result, _ = _timed(suite.check_algebra, 30)
    assert result["max_chen_error"] <= 1e-12, result
    assert result["max_shuffle_error"] <= 1e-10, result
    assert result["shuffle_pairs"] > 0
    _report(1, result["passed"])


def test_criterion_02_precision_updates():
    result, extras = _timed(suite.check_precision, 60)
    assert result["single_update_rel_error"] <= 1e-12, result
    assert result["drift_rel_error_1000"] <= 1e-10, result
    assert extras["cost_exponent"] <= 2.3, extras
    assert result["cost_exponent_ok"]
    _report(2, result["passed"])


def test_criterion_03_herding_rate():
    """Ten hull targets: squared error under R^2/k at every step up to 200,
    fitted log-log slope at or below -0.8, cross-term non-positive."""
    result, _ = _timed(suite.check_herding, 120)
    assert result["targets"] == 10
    assert result["envelope_ok"], result
    assert result["worst_slope"] <= -0.8, result
    assert result["worst_cross_term"] <= 1e-12, result
    _report(3, result["passed"])


def test_criterion_04_score_drift_gradient():
    result, _ = _timed(suite.check_gradient, 30)
    assert result["states"] == 100
    assert result["max_rel_error"] <= 1e-6, result
    _report(4, result["passed"])


def test_criterion_05_descent():
    """Deterministic runs lose at least 95% of steps monotonically and end
    below a tenth of the initial loss; 90% of 64 noisy seeds fit a negative
    loss slope."""
    result, _ = _timed(suite.check_descent, 300)
    assert result["det_min_frac_nonincreasing"] >= 0.95, result
    assert result["det_max_final_over_initial"] < 0.1, result
    assert result["stoch_negative_slopes"] >= 58, result
    _report(5, result["passed"])


def test_criterion_06_jump_gating():
    result, _ = _timed(suite.check_jumps, 300)
    assert result["min_selected_gain"] >= 0.0, result
    assert result["min_jump_term"] >= 0.0, result
    assert result["zero_gain_gate_ok"], result
    assert result["paired_seeds"] == 32
    assert result["jumps_on_wins"] >= 26, result
    _report(6, result["passed"])


def test_criterion_07_bridge():
    result, _ = _timed(suite.check_bridge, 30)
    assert result["prior_mean_alpha_norm"] <= 1e-8, result
    assert result["two_atom_weight_error"] <= 1e-6, result
    assert result["hull_target_converged"], result
    assert result["hull_target_residual"] <= 1e-6, result
    _report(7, result["passed"])


def test_criterion_08_generalization_bound():
    result, _ = _timed(suite.check_generalization, 300)
    assert result["trials"] == 200
    assert result["satisfaction_rate"] >= 0.93, result
    _report(8, result["passed"])


def test_criterion_09_rademacher_ordering():
    result, _ = _timed(suite.check_rademacher, 60)
    mc = result["mc_estimate"]
    closed = result["closed_form"]
    se = result["mc_standard_error"]
    assert mc <= closed + 3 * se, result
    assert result["single_path_exact"], result
    _report(9, result["passed"])


def test_criterion_10_projection_tail():
    result, _ = _timed(suite.check_projection, 120)
    assert result["monotone"], result
    assert result["tail_bound_ok"], result
    assert result["full_rank_eps"] <= 1e-10, result
    _report(10, result["passed"])


def test_criterion_11_stability_under_stress():
    """Tenfold covariance inflation: bounded particles, finite losses, and
    the energy monitor trips on at most 5% of steps."""
    result, _ = _timed(suite.check_stability, 180)
    assert result["stress_seeds"] == 32
    assert result["max_particle_norm"] <= 1e3, result
    assert result["all_final_losses_finite"], result
    assert result["flag_violation_rate"] <= 0.05, result
    _report(11, result["passed"])


def test_criterion_12_thread_count_reproducibility(tmp_path):
    """The suite CLI run twice with the same seed and different worker
    counts writes byte-identical reports (the timing sidecar is wall-clock
    and exempt)."""
    t0 = time.perf_counter()
    reports = []
    for threads, sub in (("1", "a"), ("4", "b")):
        out = tmp_path / sub
        env = dict(os.environ, PATHLAB_THREADS=threads)
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "pathlab.cli",
                "suite",
                "--seed",
                "3",
                "--out",
                str(out),
                "--no-plots",
            ],
            env=env,
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        reports.append((out / "suite_report.json").read_bytes())
    elapsed = time.perf_counter() - t0
    assert elapsed <= 1800, f"two suite runs took {elapsed:.0f}s"
    assert reports[0] == reports[1], "reports differ across thread counts"
    payload = json.loads(reports[0])
    assert payload["all_passed"]
    _report(12, True)
