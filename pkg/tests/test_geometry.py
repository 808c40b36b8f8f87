"""Nystrom basis and precision-state tests."""

from __future__ import annotations

import numpy as np
import pytest

from pathlab import geometry, paths, synthgen, tensor
from pathlab.errors import DenominatorDegenerate, DimensionMismatch, RankDeficient
from pathlab.geometry import Geometry, PrecisionState


def make_basis(seed=0, m=6, depth=2, d=2, n=24):
    params = synthgen.MertonParams(drift=[0.1] * d, vol=[0.3] * d)
    ens = synthgen.gen_merton(params, n=n, steps=8, horizon=1.0, seed=seed)
    sigs = [paths.marcus_signature(p, depth) for p in ens]
    return geometry.basis_from_series(sigs, m), sigs


def test_basis_needs_enough_candidates():
    _, sigs = make_basis(n=8, m=4)
    with pytest.raises(RankDeficient):
        geometry.basis_from_series(sigs[:3], 4)


def test_duplicate_candidates_starve_the_rank():
    base = tensor.exp_level1(np.array([1.0, 0.5]), 2)
    with pytest.raises(RankDeficient):
        geometry.basis_from_series([base] * 10, 6)


def test_greedy_selection_prefers_distinct_anchors():
    basis, _ = make_basis(m=6)
    flats = basis.anchors_flat
    gram = flats @ flats.T
    # selected Gram should be comfortably full rank
    assert np.linalg.matrix_rank(gram, tol=1e-8) == 6
    assert basis.retained == 6


def test_feature_map_preserves_span_inner_products():
    basis, _ = make_basis(m=6)
    rng = np.random.default_rng(3)
    flats = basis.anchors_flat
    for _ in range(10):
        c1 = rng.standard_normal(6)
        c2 = rng.standard_normal(6)
        u, v = c1 @ flats, c2 @ flats
        fu = geometry.project_flats(basis, u[None, :])[0]
        fv = geometry.project_flats(basis, v[None, :])[0]
        assert fu @ fv == pytest.approx(u @ v, rel=1e-8, abs=1e-8)


def test_project_matches_project_flats():
    basis, sigs = make_basis(m=5)
    one = geometry.project(basis, sigs[7])
    many = geometry.project_flats(
        basis, tensor.flatten(sigs[7])[None, :]
    )
    np.testing.assert_allclose(one, many[0], atol=1e-12)


def test_project_checks_alphabet():
    basis, _ = make_basis(m=5, depth=2)
    with pytest.raises(DimensionMismatch):
        geometry.project(basis, tensor.unit(3, 3))


def test_lift_identity_holds_off_span():
    basis, sigs = make_basis(m=5)
    state = PrecisionState.from_cov(np.eye(5), ridge=0.5)
    geom = Geometry(basis, state)
    rng = np.random.default_rng(9)
    # arbitrary series, including ones far from the anchor span
    probes = [sigs[11], sigs[17]]
    levels = tuple(rng.standard_normal(3**k) for k in range(3))
    probes.append(tensor.TensorSeries(2, 3, levels))
    for _ in range(5):
        v = rng.standard_normal(5)
        lifted = geom.lift(v)
        for s in probes:
            lhs = tensor.inner_product(lifted, s)
            rhs = v @ geom.feature(s)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_from_cov_validates_ridge():
    with pytest.raises(DimensionMismatch):
        PrecisionState.from_cov(np.eye(2), ridge=0.0)


def test_sherman_morrison_analytic_diagonal():
    state = PrecisionState.from_cov(np.zeros((2, 2)), ridge=1.0)
    np.testing.assert_allclose(state.prec, np.eye(2), atol=1e-14)
    geometry.covariance_update(state, np.array([1.0, 0.0]), 1.0)
    np.testing.assert_allclose(state.cov, np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(state.prec, np.diag([0.5, 1.0]), atol=1e-13)


def test_update_matches_direct_inverse():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    state = PrecisionState.from_cov(a @ a.T, ridge=0.1)
    for _ in range(20):
        k = rng.standard_normal(4)
        geometry.covariance_update(state, k, 0.05)
    direct = np.linalg.inv(state.cov + 0.1 * np.eye(4))
    np.testing.assert_allclose(state.prec, direct, atol=1e-10)


def test_zero_alpha_update_is_noop():
    state = PrecisionState.from_cov(np.eye(3), ridge=0.2)
    cov0, prec0 = state.cov.copy(), state.prec.copy()
    geometry.covariance_update(state, np.array([1.0, 2.0, 3.0]), 0.0)
    np.testing.assert_array_equal(state.cov, cov0)
    np.testing.assert_allclose(state.prec, prec0, atol=1e-15)


def test_degenerate_downdate_raises():
    state = PrecisionState.from_cov(np.zeros((2, 2)), ridge=1.0)
    with pytest.raises(DenominatorDegenerate):
        geometry.sherman_morrison_update(state.prec, np.array([1.0, 0.0]), -1.0)


def test_update_shape_check():
    state = PrecisionState.from_cov(np.eye(3), ridge=0.1)
    with pytest.raises(DimensionMismatch):
        geometry.covariance_update(state, np.array([1.0, 2.0]), 0.5)


def test_thousand_updates_stay_synchronized():
    rng = np.random.default_rng(77)
    state = PrecisionState.from_cov(np.eye(8), ridge=1e-3, resync_interval=0)
    for _ in range(1000):
        k = 0.1 * rng.standard_normal(8)
        geometry.covariance_update(state, k, 0.01)
    assert state.updates_since_resync == 1000
    direct = np.linalg.inv(state.cov + 1e-3 * np.eye(8))
    drift = np.linalg.norm(state.prec - direct) / np.linalg.norm(direct)
    assert drift <= 1e-10
    geometry.resync(state)
    drift2 = np.linalg.norm(state.prec - direct) / np.linalg.norm(direct)
    assert drift2 <= 1e-14
    assert state.updates_since_resync == 0


def test_automatic_resync_counter():
    rng = np.random.default_rng(13)
    state = PrecisionState.from_cov(np.eye(3), ridge=0.1, resync_interval=4)
    for i in range(9):
        geometry.covariance_update(state, rng.standard_normal(3), 0.01)
    # 9 updates with interval 4: resyncs at 4 and 8, one update since
    assert state.updates_since_resync == 1


def test_decay_scales_cov_and_refreshes_prec():
    state = PrecisionState.from_cov(2.0 * np.eye(2), ridge=1.0)
    geometry.decay(state, 0.5)
    np.testing.assert_allclose(state.cov, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(state.prec, 0.5 * np.eye(2), atol=1e-14)
    assert state.updates_since_resync == 0
    with pytest.raises(DimensionMismatch):
        geometry.decay(state, 0.0)
    with pytest.raises(DimensionMismatch):
        geometry.decay(state, 1.5)


def test_decay_at_one_keeps_cov():
    state = PrecisionState.from_cov(np.diag([3.0, 1.0]), ridge=0.1)
    cov0 = state.cov.copy()
    geometry.decay(state, 1.0)
    np.testing.assert_array_equal(state.cov, cov0)


def test_whitened_ops_against_closed_form():
    state = PrecisionState.from_cov(np.zeros((2, 2)), ridge=0.25)
    u = np.array([3.0, 4.0])
    # prec is I / 0.25
    assert geometry.whitened_inner(state, u, u) == pytest.approx(100.0)
    assert geometry.whitened_norm(state, u) == pytest.approx(10.0)


def test_whitened_cauchy_schwarz():
    rng = np.random.default_rng(15)
    a = rng.standard_normal((5, 5))
    state = PrecisionState.from_cov(a @ a.T, ridge=0.05)
    for _ in range(20):
        u = rng.standard_normal(5)
        v = rng.standard_normal(5)
        lhs = abs(geometry.whitened_inner(state, u, v))
        rhs = geometry.whitened_norm(state, u) * geometry.whitened_norm(state, v)
        assert lhs <= rhs * (1 + 1e-10)


def test_spectral_tail_endpoints_and_monotonicity():
    cov = np.diag([4.0, 2.0, 1.0, 0.5])
    state = PrecisionState.from_cov(cov, ridge=0.1)
    assert geometry.spectral_tail(state, 0) == pytest.approx(7.5)
    assert geometry.spectral_tail(state, 4) == 0.0
    assert geometry.spectral_tail(state, 2) == pytest.approx(1.5)
    tails = [geometry.spectral_tail(state, k) for k in range(5)]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    with pytest.raises(DimensionMismatch):
        geometry.spectral_tail(state, 5)


def test_snapshot_json_roundtrip():
    basis, sigs = make_basis(m=4)
    rng = np.random.default_rng(2)
    a = rng.standard_normal((4, 4))
    state = PrecisionState.from_cov(a @ a.T, ridge=0.01)
    geom = Geometry(basis, state)
    back = geometry.snapshot_from_json(geometry.snapshot_to_json(geom))
    np.testing.assert_allclose(back.state.cov, geom.state.cov, atol=1e-12)
    assert back.state.ridge == geom.state.ridge
    probe = sigs[19]
    np.testing.assert_allclose(
        back.feature(probe), geom.feature(probe), atol=1e-10
    )
    np.testing.assert_allclose(back.state.prec, geom.state.prec, atol=1e-10)


def test_geometry_inner_routes_through_state():
    basis, _ = make_basis(m=4)
    state = PrecisionState.from_cov(np.eye(4), ridge=1.0)
    geom = Geometry(basis, state)
    u = np.array([1.0, 0.0, 2.0, 0.0])
    assert geom.inner(u, u) == pytest.approx(2.5)
    assert geom.norm(u) == pytest.approx(np.sqrt(2.5))
