"""Greedy kernel herding in the whitened signature geometry.

Quantizes a target mean embedding into a small set of representative
paths. With uniform 1/k weights and a target inside the convex hull of
the candidate features, the squared whitened error decays like R^2/k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from . import tensor
from .errors import EmptyCandidates, TraceTooShort
from .geometry import Geometry
from .paths import PathEnsemble, signatures_flat
from .tensor import TensorSeries

__all__ = [
    "HerdingResult",
    "RateReport",
    "herd",
    "herding_rate_report",
    "hull_distance",
]

RESIDUAL_FLOOR = 1e-8


@dataclass
class HerdingResult:
    selected: list
    error_trace: np.ndarray
    residual: float
    # supporting data so the rate report needs no recomputation
    r_max: float = 0.0
    cross_terms: np.ndarray = field(default=None)
    target_feat: np.ndarray = field(default=None)
    candidate_feats: np.ndarray = field(default=None)
    prec: np.ndarray = field(default=None)

    @property
    def k(self) -> int:
        return len(self.selected)


def _candidate_features(candidates, geometry: Geometry) -> np.ndarray:
    depth = geometry.basis.depth
    if isinstance(candidates, PathEnsemble):
        if len(candidates.paths) == 0:
            raise EmptyCandidates("no candidate paths")
        flats = signatures_flat(candidates, depth)
        return geometry.features_flat(flats)
    seq = list(candidates)
    if not seq:
        raise EmptyCandidates("no candidate paths")
    if isinstance(seq[0], TensorSeries):
        flats = np.stack([tensor.flatten(s) for s in seq])
        return geometry.features_flat(flats)
    return _candidate_features(PathEnsemble(tuple(seq)), geometry)


def herd(
    target: TensorSeries, candidates, k: int, geometry: Geometry
) -> HerdingResult:
    """Select k candidates (repetition allowed) whose mean feature chases
    the target embedding.

    Step j+1 maximizes the whitened inner product of the running error
    with each candidate feature; ties go to the lowest index.
    """
    if k < 1:
        raise EmptyCandidates("k must be at least 1")
    feats = _candidate_features(candidates, geometry)
    phi_star = (
        geometry.feature(target)
        if isinstance(target, TensorSeries)
        else np.asarray(target, dtype=float)
    )
    prec = geometry.state.prec
    feats_q = feats @ prec

    diffs = phi_star[None, :] - feats
    r_max = float(np.sqrt(np.max(np.einsum("nm,nm->n", diffs @ prec, diffs))))

    selected: list = []
    errors = np.empty(k)
    cross = np.empty(k)
    running_sum = np.zeros_like(phi_star)
    for j in range(k):
        err = phi_star - (running_sum / j if j else np.zeros_like(phi_star))
        scores = feats_q @ err
        pick = int(np.argmax(scores))
        cross[j] = float(err @ prec @ (phi_star - feats[pick]))
        selected.append(pick)
        running_sum += feats[pick]
        e_k = phi_star - running_sum / (j + 1)
        errors[j] = geometry.norm(e_k)
    return HerdingResult(
        selected=selected,
        error_trace=errors,
        residual=float(errors[-1]),
        r_max=r_max,
        cross_terms=cross,
        target_feat=phi_star,
        candidate_feats=feats,
        prec=prec.copy(),
    )


class RateReport(NamedTuple):
    slope: float
    intercept: float
    r_bound_satisfied: bool
    residual_floor: bool
    hull_distance: float


def hull_distance(
    feats: np.ndarray, target_feat: np.ndarray, prec: np.ndarray
) -> float:
    """Whitened distance from the target to the candidate feature hull.

    Solves the simplex-constrained least-squares projection with a
    penalty row enforcing the weights' unit sum.
    """
    chol = scipy.linalg.cholesky(prec, lower=True)
    a = chol.T @ feats.T
    b = chol.T @ target_feat
    penalty = 1e6 * max(1.0, float(np.abs(a).max()))
    a_aug = np.vstack([a, penalty * np.ones(feats.shape[0])])
    b_aug = np.concatenate([b, [penalty]])
    w, _ = scipy.optimize.nnls(a_aug, b_aug)
    total = w.sum()
    if total > 0:
        w = w / total
    resid = feats.T @ w - target_feat
    return float(np.sqrt(max(resid @ prec @ resid, 0.0)))


def herding_rate_report(result: HerdingResult) -> RateReport:
    """Fit the decay rate of the squared error over the trace's last 3/4.

    Returns nan slope with the residual-floor flag when the trace has
    already collapsed to numerical zero (exact-match targets).
    """
    k = result.k
    if k < 20:
        raise TraceTooShort(f"need at least 20 herding steps, got {k}")
    dist = (
        hull_distance(result.candidate_feats, result.target_feat, result.prec)
        if result.candidate_feats is not None
        else float("nan")
    )
    bound_ok = bool(
        np.all(
            result.error_trace**2 <= result.r_max**2 / np.arange(1, k + 1) + 1e-12
        )
    )
    lo = max(k // 4, 1)
    ks = np.arange(lo, k + 1)
    errs = result.error_trace[lo - 1 : k]
    if np.any(errs < RESIDUAL_FLOOR):
        return RateReport(float("nan"), float("nan"), bound_ok, True, dist)
    coeffs = np.polyfit(np.log(ks), 2.0 * np.log(errs), 1)
    return RateReport(float(coeffs[0]), float(coeffs[1]), bound_ok, False, dist)
