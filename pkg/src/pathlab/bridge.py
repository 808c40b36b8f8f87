"""Entropic tilting of a prior path ensemble toward a target embedding.

The minimum-KL reweighting whose mean feature hits the target is an
exponential family in the features; its dual is concave and solved by
damped Newton ascent with Armijo backtracking (the Hessian is the
weighted feature covariance, so the direction costs one m x m solve).
Targets outside the feature hull cannot be matched: the solver then
returns its best iterate with the converged flag down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyEnsemble
from .geometry import Geometry
from .paths import PathEnsemble, signatures_flat

__all__ = ["GibbsTilt", "solve_bridge", "moment_residual", "prior_features"]

ARMIJO_C = 1e-4
STEP_GROWTH = 1.5
MIN_STEP = 1e-14


@dataclass
class GibbsTilt:
    alpha: np.ndarray
    weights: np.ndarray
    log_partition: float
    kl_to_prior: float
    converged: bool = True
    residual: float = 0.0
    residual_trace: np.ndarray = field(default=None)
    iterations: int = 0


def prior_features(prior, geometry: Geometry) -> np.ndarray:
    """Whitened Nystrom features of each prior path (or signature)."""
    if isinstance(prior, PathEnsemble):
        flats = signatures_flat(prior, geometry.basis.depth)
        return geometry.features_flat(flats)
    arr = np.asarray(prior, dtype=float)
    if arr.ndim != 2:
        raise EmptyEnsemble("prior must be an ensemble or a feature matrix")
    return arr


def _weights_and_logz(alpha: np.ndarray, feats: np.ndarray):
    logits = feats @ alpha
    shift = logits.max()
    expw = np.exp(logits - shift)
    total = expw.sum()
    return expw / total, float(np.log(total) + shift)


def _dual(alpha: np.ndarray, target: np.ndarray, feats: np.ndarray) -> float:
    logits = feats @ alpha
    shift = logits.max()
    return float(alpha @ target - (np.log(np.exp(logits - shift).sum()) + shift))


def _ascent_direction(grad: np.ndarray, weights: np.ndarray, feats: np.ndarray):
    """Newton direction under the weighted feature covariance.

    Falls back to the raw gradient when the covariance is too degenerate
    to factor; either way the result has positive inner product with the
    gradient, so backtracking terminates.
    """
    mu = weights @ feats
    hess = (feats * weights[:, None]).T @ feats - np.outer(mu, mu)
    damp = 1e-10 * max(float(np.trace(hess)), 1.0)
    try:
        direction = np.linalg.solve(hess + damp * np.eye(len(grad)), grad)
    except np.linalg.LinAlgError:
        return grad
    if grad @ direction <= 0.0 or not np.all(np.isfinite(direction)):
        return grad
    return direction


def solve_bridge(
    prior,
    target_feat: np.ndarray,
    geometry: Geometry,
    tol: float = 1e-6,
    max_iter: int = 500,
) -> GibbsTilt:
    """Maximize the tilt dual <alpha, target> - log Z(alpha).

    The gradient is the moment mismatch, so the stopping rule is the
    whitened residual norm dropping below tol.
    """
    feats = prior_features(prior, geometry)
    target = np.asarray(target_feat, dtype=float)
    n, m = feats.shape
    if target.shape != (m,):
        raise EmptyEnsemble(
            f"target feature length {target.shape} does not match m={m}"
        )
    alpha = np.zeros(m)
    step = 1.0
    weights, logz = _weights_and_logz(alpha, feats)
    value = _dual(alpha, target, feats)
    resid_trace = []
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        grad = target - weights @ feats
        resid = float(np.sqrt(max(geometry.inner(grad, grad), 0.0)))
        resid_trace.append(resid)
        if resid <= tol:
            converged = True
            break
        direction = _ascent_direction(grad, weights, feats)
        g_dot_dir = float(grad @ direction)
        accepted = False
        t = step
        while t >= MIN_STEP:
            cand = alpha + t * direction
            if np.array_equal(cand, alpha):
                # gradient too small to move alpha at float resolution
                break
            cand_val = _dual(cand, target, feats)
            w_c, logz_c = _weights_and_logz(cand, feats)
            g_c = target - w_c @ feats
            resid_c = float(np.sqrt(max(geometry.inner(g_c, g_c), 0.0)))
            # ascent on the dual that also keeps the moment residual
            # non-increasing; plain Armijo can overshoot into iterates
            # whose gradient norm grows
            if cand_val >= value + ARMIJO_C * t * g_dot_dir and resid_c <= resid:
                alpha, value = cand, cand_val
                weights, logz = w_c, logz_c
                step = min(t * STEP_GROWTH, 1.0)
                accepted = True
                break
            t /= 2.0
        if not accepted:
            break
    grad = target - weights @ feats
    resid = float(np.sqrt(max(geometry.inner(grad, grad), 0.0)))
    if resid <= tol:
        converged = True
    kl = float(alpha @ (weights @ feats) - logz + np.log(n))
    return GibbsTilt(
        alpha=alpha,
        weights=weights,
        log_partition=logz,
        kl_to_prior=max(kl, 0.0),
        converged=converged,
        residual=resid,
        residual_trace=np.asarray(resid_trace),
        iterations=iters,
    )


def moment_residual(
    tilt: GibbsTilt, prior, target_feat: np.ndarray, geometry: Geometry
) -> float:
    """Whitened norm of the reweighted mean feature minus the target."""
    feats = prior_features(prior, geometry)
    gap = tilt.weights @ feats - np.asarray(target_feat, dtype=float)
    return float(np.sqrt(max(geometry.inner(gap, gap), 0.0)))
