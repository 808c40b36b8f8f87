"""Kernel herding tests."""

from __future__ import annotations

import numpy as np
import pytest

from pathlab import geometry, herding, paths, synthgen, tensor
from pathlab.errors import EmptyCandidates, TraceTooShort
from pathlab.geometry import Geometry, PrecisionState


def make_setup(seed=0, m=6, n=40, depth=2):
    params = synthgen.MertonParams(drift=[0.1], vol=[0.4], jump_rate=1.0, jump_std=[0.3])
    ens = synthgen.gen_merton(params, n=n, steps=8, horizon=1.0, seed=seed)
    sigs = [paths.marcus_signature(p, depth) for p in ens]
    basis = geometry.basis_from_series(sigs, m)
    rng = np.random.default_rng(seed + 100)
    a = rng.standard_normal((m, m)) * 0.3
    state = PrecisionState.from_cov(a @ a.T + 0.5 * np.eye(m), ridge=0.01)
    return Geometry(basis, state), ens, sigs


def in_hull_target(geom, sigs, seed=1):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.2, 1.0, len(sigs))
    w /= w.sum()
    feats = geom.features_flat(np.stack([tensor.flatten(s) for s in sigs]))
    return w @ feats, feats


def test_exact_match_single_candidate():
    geom, _, sigs = make_setup()
    res = herding.herd(sigs[3], [sigs[3]], 1, geom)
    assert res.selected == [0]
    assert res.residual <= 1e-10
    assert abs(res.cross_terms[0]) <= 1e-10


def test_tie_break_picks_lowest_index():
    geom, _, sigs = make_setup()
    res = herding.herd(sigs[3], [sigs[5], sigs[5], sigs[5]], 4, geom)
    assert res.selected == [0, 0, 0, 0]


def test_two_point_target_recovered_in_two_steps():
    geom, _, sigs = make_setup(m=4)
    feats = geom.features_flat(np.stack([tensor.flatten(s) for s in sigs[:2]]))
    target_feat = feats.mean(axis=0)
    res = herding.herd(target_feat, sigs[:2], 2, geom)
    assert sorted(res.selected) == [0, 1]
    assert res.error_trace[1] <= 1e-10


def test_error_trace_matches_replay():
    geom, _, sigs = make_setup()
    target_feat, feats = in_hull_target(geom, sigs)
    res = herding.herd(target_feat, sigs, 30, geom)
    prec = geom.state.prec
    running = np.zeros_like(target_feat)
    for j, pick in enumerate(res.selected):
        err_before = target_feat - (running / j if j else 0.0)
        scores = feats @ prec @ err_before
        assert pick == int(np.argmax(scores))
        running += feats[pick]
        e = target_feat - running / (j + 1)
        assert res.error_trace[j] == pytest.approx(
            float(np.sqrt(e @ prec @ e)), abs=1e-12
        )


def test_in_hull_rate_bound_and_cross_terms():
    geom, _, sigs = make_setup()
    target_feat, _ = in_hull_target(geom, sigs)
    res = herding.herd(target_feat, sigs, 60, geom)
    report = herding.herding_rate_report(res)
    assert report.r_bound_satisfied
    assert not report.residual_floor
    assert report.hull_distance <= 1e-6
    assert report.slope <= -0.5
    assert np.all(res.cross_terms <= 1e-12)
    # squared error bound directly
    ks = np.arange(1, res.k + 1)
    assert np.all(res.error_trace**2 <= res.r_max**2 / ks + 1e-12)


def test_rate_report_needs_twenty_steps():
    geom, _, sigs = make_setup()
    target_feat, _ = in_hull_target(geom, sigs)
    res = herding.herd(target_feat, sigs, 19, geom)
    with pytest.raises(TraceTooShort):
        herding.herding_rate_report(res)


def test_residual_floor_flags_collapsed_trace():
    geom, _, sigs = make_setup()
    res = herding.herd(sigs[3], [sigs[3]], 25, geom)
    report = herding.herding_rate_report(res)
    assert report.residual_floor
    assert np.isnan(report.slope)


def test_hull_distance_closed_form():
    prec = np.eye(2)
    feats = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert herding.hull_distance(feats, np.array([0.5, 0.5]), prec) <= 1e-6
    # nearest hull point to (2, 0) is the vertex (1, 0)
    away = herding.hull_distance(feats, np.array([2.0, 0.0]), prec)
    assert away == pytest.approx(1.0, abs=1e-6)


def test_candidate_input_forms_agree():
    geom, ens, sigs = make_setup(n=12)
    target_feat, _ = in_hull_target(geom, sigs)
    r1 = herding.herd(target_feat, ens, 8, geom)
    r2 = herding.herd(target_feat, sigs, 8, geom)
    r3 = herding.herd(target_feat, list(ens.paths), 8, geom)
    assert r1.selected == r2.selected == r3.selected
    np.testing.assert_allclose(r1.error_trace, r2.error_trace, atol=1e-12)


def test_empty_candidates_rejected():
    geom, _, sigs = make_setup()
    with pytest.raises(EmptyCandidates):
        herding.herd(sigs[0], [], 3, geom)
    with pytest.raises(EmptyCandidates):
        herding.herd(sigs[0], sigs, 0, geom)


def test_herding_beats_random_subsets():
    geom, _, sigs = make_setup(n=50)
    target_feat, feats = in_hull_target(geom, sigs)
    res = herding.herd(target_feat, sigs, 25, geom)
    prec = geom.state.prec
    rng = np.random.default_rng(7)
    rand_errs = []
    for _ in range(20):
        idx = rng.integers(0, len(sigs), size=25)
        e = target_feat - feats[idx].mean(axis=0)
        rand_errs.append(float(np.sqrt(e @ prec @ e)))
    assert res.residual < np.mean(rand_errs)
