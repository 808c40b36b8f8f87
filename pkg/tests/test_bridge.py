"""Entropic tilting tests with analytic two-atom fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from pathlab import bridge, geometry, paths, synthgen, tensor
from pathlab.errors import EmptyEnsemble
from pathlab.geometry import Geometry, PrecisionState


def make_geom(seed=0, m=5, depth=2):
    params = synthgen.MertonParams(drift=[0.1], vol=[0.4])
    ens = synthgen.gen_merton(params, n=30, steps=8, horizon=1.0, seed=seed)
    sigs = [paths.marcus_signature(p, depth) for p in ens]
    basis = geometry.basis_from_series(sigs, m)
    state = PrecisionState.from_cov(np.eye(m), ridge=0.1)
    return Geometry(basis, state), ens, sigs


def test_two_atom_weights_analytic():
    geom, _, _ = make_geom(m=2)
    feats = np.array([[1.0, 0.0], [0.0, 1.0]])
    target = 0.75 * feats[0] + 0.25 * feats[1]
    tilt = bridge.solve_bridge(feats, target, geom, tol=1e-8)
    assert tilt.converged
    np.testing.assert_allclose(tilt.weights, [0.75, 0.25], atol=1e-7)
    # discrete KL against the uniform prior
    want_kl = 0.75 * np.log(1.5) + 0.25 * np.log(0.5)
    assert tilt.kl_to_prior == pytest.approx(want_kl, abs=1e-6)


def test_log_partition_bookkeeping():
    geom, _, _ = make_geom(m=2)
    feats = np.array([[1.0, 0.0], [0.0, 1.0]])
    target = 0.6 * feats[0] + 0.4 * feats[1]
    tilt = bridge.solve_bridge(feats, target, geom, tol=1e-8)
    z = np.sum(np.exp(feats @ tilt.alpha))
    assert tilt.log_partition == pytest.approx(np.log(z), abs=1e-9)
    w = np.exp(feats @ tilt.alpha - tilt.log_partition)
    np.testing.assert_allclose(w, tilt.weights, atol=1e-9)


def test_ensemble_prior_in_hull_target_converges():
    geom, ens, sigs = make_geom()
    feats = bridge.prior_features(ens, geom)
    rng = np.random.default_rng(3)
    w = rng.uniform(0.5, 1.0, len(feats))
    w /= w.sum()
    target = w @ feats
    tilt = bridge.solve_bridge(ens, target, geom, tol=1e-8)
    assert tilt.converged
    assert tilt.residual <= 1e-8
    assert tilt.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(tilt.weights >= 0)
    got = bridge.moment_residual(tilt, ens, target, geom)
    assert got <= 1e-8
    assert tilt.kl_to_prior >= 0.0
    assert np.all(np.diff(tilt.residual_trace) <= 0.0)


def test_unreachable_target_reports_best_effort():
    geom, ens, _ = make_geom()
    feats = bridge.prior_features(ens, geom)
    spread = feats.max(axis=0) - feats.min(axis=0)
    target = feats.max(axis=0) + 10.0 * (spread + 1.0)
    tilt = bridge.solve_bridge(ens, target, geom, tol=1e-8, max_iter=200)
    assert not tilt.converged
    assert tilt.residual > 1e-8
    assert np.isfinite(tilt.kl_to_prior)
    assert tilt.weights.sum() == pytest.approx(1.0, abs=1e-10)
    # best effort still moved the mean toward the target
    gap0 = target - feats.mean(axis=0)
    assert tilt.residual < float(np.sqrt(geom.inner(gap0, gap0)))


def test_vertex_target_concentrates_weight():
    geom, ens, _ = make_geom()
    feats = bridge.prior_features(ens, geom)
    j = 7
    tilt = bridge.solve_bridge(ens, feats[j], geom, tol=1e-6, max_iter=2000)
    assert int(np.argmax(tilt.weights)) == j
    assert tilt.weights[j] > 0.5


def test_residual_trace_monotone_on_accepted_iterates():
    geom, _, _ = make_geom(m=2)
    feats = np.array([[1.0, 0.0], [0.0, 1.0]])
    target = 0.7 * feats[0] + 0.3 * feats[1]
    tilt = bridge.solve_bridge(feats, target, geom, tol=1e-8)
    diffs = np.diff(tilt.residual_trace)
    assert np.all(diffs <= 0.0)


def test_mean_target_needs_no_tilt():
    geom, ens, _ = make_geom()
    feats = bridge.prior_features(ens, geom)
    tilt = bridge.solve_bridge(ens, feats.mean(axis=0), geom, tol=1e-8)
    assert tilt.converged
    np.testing.assert_allclose(tilt.alpha, np.zeros(5), atol=1e-12)
    np.testing.assert_allclose(tilt.weights, np.full(len(feats), 1 / len(feats)))
    assert tilt.kl_to_prior == pytest.approx(0.0, abs=1e-12)


def test_iteration_cap_and_shape_checks():
    geom, ens, _ = make_geom()
    feats = bridge.prior_features(ens, geom)
    spread = feats.max(axis=0) + 100.0
    tilt = bridge.solve_bridge(ens, spread, geom, tol=1e-12, max_iter=3)
    assert tilt.iterations == 3
    with pytest.raises(EmptyEnsemble):
        bridge.solve_bridge(ens, np.zeros(4), geom)
    with pytest.raises(EmptyEnsemble):
        bridge.prior_features(np.zeros(5), geom)


def test_feature_matrix_and_ensemble_agree():
    geom, ens, _ = make_geom()
    feats = bridge.prior_features(ens, geom)
    rng = np.random.default_rng(2)
    w = rng.uniform(0.5, 1.0, len(feats))
    w /= w.sum()
    target = w @ feats
    t1 = bridge.solve_bridge(ens, target, geom, tol=1e-8)
    t2 = bridge.solve_bridge(feats, target, geom, tol=1e-8)
    np.testing.assert_allclose(t1.alpha, t2.alpha, atol=1e-10)
    np.testing.assert_allclose(t1.weights, t2.weights, atol=1e-12)
