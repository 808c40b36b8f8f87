"""Whitened low-rank signature geometry.

A NystromBasis compresses signature space through m anchor signatures
chosen by greedy max-determinant pivoting; features are anchor inner
products pushed through the symmetric inverse square root of the anchor
Gram. A PrecisionState tracks the long-run covariance of feature
innovations together with its ridge-regularised inverse, maintained by
rank-1 updates and periodically resynchronised by direct inversion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import paths as pth
from . import tensor
from .errors import DenominatorDegenerate, DimensionMismatch, RankDeficient
from .tensor import TensorSeries

__all__ = [
    "NystromBasis",
    "PrecisionState",
    "Geometry",
    "build_basis",
    "basis_from_series",
    "project",
    "sherman_morrison_update",
    "covariance_update",
    "decay",
    "resync",
    "whitened_inner",
    "whitened_norm",
    "spectral_tail",
    "snapshot_to_dict",
    "snapshot_from_dict",
]

EIG_FLOOR = 1e-10
RESYNC_DRIFT_TOL = 1e-8


@dataclass
class NystromBasis:
    """Anchor signatures with their Gram whitener."""

    anchors: tuple[TensorSeries, ...]
    gram: np.ndarray
    whitener: np.ndarray
    retained: int

    def __post_init__(self):
        self.anchors = tuple(self.anchors)
        depth, dim = self.anchors[0].depth, self.anchors[0].dim
        self._anchors_flat = np.stack([tensor.flatten(a) for a in self.anchors])
        self.depth = depth
        self.dim = dim

    @property
    def m(self) -> int:
        return len(self.anchors)

    @property
    def anchors_flat(self) -> np.ndarray:
        return self._anchors_flat


def _whitener_from_gram(gram: np.ndarray) -> tuple[np.ndarray, int]:
    w, v = np.linalg.eigh((gram + gram.T) / 2.0)
    floor = EIG_FLOOR * max(w.max(), 0.0)
    keep = w > max(floor, 0.0)
    retained = int(keep.sum())
    inv_sqrt = np.zeros_like(w)
    inv_sqrt[keep] = 1.0 / np.sqrt(w[keep])
    whitener = (v * inv_sqrt) @ v.T
    return whitener, retained


def basis_from_series(sigs: list[TensorSeries], m: int) -> NystromBasis:
    """Greedy max-determinant anchor selection from candidate signatures.

    Equivalent to pivoted Cholesky on the candidate Gram: each step
    picks the candidate with the largest residual diagonal, which is the
    factor by which it multiplies the selected principal minor's
    determinant. Duplicates get residual zero and are never picked while
    distinct candidates remain.
    """
    n = len(sigs)
    if n < m:
        raise RankDeficient(f"{n} anchor candidates for rank {m}")
    flats = np.stack([tensor.flatten(s) for s in sigs])
    gram_full = flats @ flats.T
    diag = np.diag(gram_full).copy()
    tol = 1e-12 * max(diag.max(), 1.0)
    low = np.zeros((n, m))
    selected: list[int] = []
    for j in range(m):
        live = diag.copy()
        live[selected] = -np.inf
        i = int(np.argmax(live))
        selected.append(i)
        if live[i] > tol:
            col = gram_full[:, i] - low[:, :j] @ low[i, :j]
            low[:, j] = col / np.sqrt(live[i])
            diag = diag - low[:, j] ** 2
    anchors = [sigs[i] for i in selected]
    gram = gram_full[np.ix_(selected, selected)]
    whitener, retained = _whitener_from_gram(gram)
    ambient = flats.shape[1]
    if retained < min(m, ambient) / 2:
        raise RankDeficient(
            f"retained rank {retained} below min(m, ambient)/2 "
            f"= {min(m, ambient) / 2}"
        )
    return NystromBasis(tuple(anchors), gram, whitener, retained)


def build_basis(anchor_paths: pth.PathEnsemble, m: int, depth: int) -> NystromBasis:
    sigs = [pth.marcus_signature(p, depth) for p in anchor_paths]
    return basis_from_series(sigs, m)


def project(basis: NystromBasis, s: TensorSeries) -> np.ndarray:
    """Whitened anchor-inner-product feature vector, length m."""
    if s.depth != basis.depth or s.dim != basis.dim:
        raise DimensionMismatch("series does not match the basis alphabet")
    k = basis.anchors_flat @ tensor.flatten(s)
    return basis.whitener @ k


def project_flats(basis: NystromBasis, flats: np.ndarray) -> np.ndarray:
    """Batched projection of flattened series, shape (n, F) -> (n, m)."""
    return (basis.whitener @ (basis.anchors_flat @ flats.T)).T


@dataclass
class PrecisionState:
    """Long-run covariance and its ridge-regularised inverse.

    Single-writer: one update stream may mutate an instance. prec always
    tracks (cov + ridge * I)^-1; rank-1 updates keep it current and a
    direct inversion runs every resync_interval updates (0 disables).
    """

    cov: np.ndarray
    prec: np.ndarray
    ridge: float
    updates_since_resync: int = 0
    resync_interval: int = 256
    warnings: list = field(default_factory=list)

    @classmethod
    def from_cov(
        cls, cov: np.ndarray, ridge: float = 1e-3, resync_interval: int = 256
    ) -> "PrecisionState":
        if ridge <= 0:
            raise DimensionMismatch("ridge must be positive")
        cov = np.asarray(cov, dtype=float)
        cov = (cov + cov.T) / 2.0
        prec = _direct_inverse(cov, ridge)
        return cls(cov, prec, float(ridge), 0, resync_interval)

    @property
    def m(self) -> int:
        return self.cov.shape[0]


def _direct_inverse(cov: np.ndarray, ridge: float) -> np.ndarray:
    a = cov + ridge * np.eye(cov.shape[0])
    prec = np.linalg.inv(a)
    return (prec + prec.T) / 2.0


def sherman_morrison_update(
    prec: np.ndarray, k: np.ndarray, alpha: float
) -> np.ndarray:
    """Rank-1 inverse update: (A + alpha k k^T)^-1 from A^-1.

    Raises DenominatorDegenerate when 1 + alpha k^T A^-1 k falls at or
    below 1e-12, which is where the updated matrix stops being safely
    invertible (downdates that remove more mass than present).
    """
    qk = prec @ k
    denom = 1.0 + alpha * float(k @ qk)
    if denom <= 1e-12:
        raise DenominatorDegenerate(f"update denominator {denom:.3e}")
    return prec - (alpha / denom) * np.outer(qk, qk)


def resync(state: PrecisionState) -> float:
    """Direct inversion; returns the drift the rank-1 chain had built up."""
    direct = _direct_inverse(state.cov, state.ridge)
    denom = np.linalg.norm(direct)
    drift = np.linalg.norm(state.prec - direct) / (denom if denom > 0 else 1.0)
    if drift > RESYNC_DRIFT_TOL:
        state.warnings.append(f"resync drift {drift:.3e} above {RESYNC_DRIFT_TOL}")
    state.prec = direct
    state.updates_since_resync = 0
    return drift


def covariance_update(
    state: PrecisionState, k: np.ndarray, alpha: float
) -> PrecisionState:
    """Accumulate one innovation: cov += alpha k k^T, prec via rank-1."""
    k = np.asarray(k, dtype=float)
    if k.shape != (state.m,):
        raise DimensionMismatch(f"innovation has shape {k.shape}, state is {state.m}")
    state.prec = sherman_morrison_update(state.prec, k, alpha)
    state.cov = state.cov + alpha * np.outer(k, k)
    state.updates_since_resync += 1
    if state.resync_interval and state.updates_since_resync >= state.resync_interval:
        resync(state)
    return state


def decay(state: PrecisionState, rho: float) -> PrecisionState:
    """Exponential forgetting: cov <- rho * cov.

    The fixed ridge breaks the rank-1 structure of this rescaling, so
    the precision is refreshed directly; this counts as a resync.
    """
    if not 0.0 < rho <= 1.0:
        raise DimensionMismatch(f"forgetting factor {rho} outside (0, 1]")
    state.cov = rho * state.cov
    state.prec = _direct_inverse(state.cov, state.ridge)
    state.updates_since_resync = 0
    return state


def whitened_inner(state: PrecisionState, u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ state.prec @ v)


def whitened_norm(state: PrecisionState, u: np.ndarray) -> float:
    return float(np.sqrt(max(whitened_inner(state, u, u), 0.0)))


def spectral_tail(state: PrecisionState, m_prime: int) -> float:
    """Sum of cov eigenvalues strictly below the m_prime leading ones."""
    if not 0 <= m_prime <= state.m:
        raise DimensionMismatch(f"m'={m_prime} outside [0, {state.m}]")
    w = np.linalg.eigvalsh((state.cov + state.cov.T) / 2.0)[::-1]
    return float(max(w[m_prime:].sum(), 0.0))


@dataclass
class Geometry:
    """Basis and precision bundled: the ambient geometry every consumer sees."""

    basis: NystromBasis
    state: PrecisionState

    def feature(self, s: TensorSeries) -> np.ndarray:
        return project(self.basis, s)

    def features_flat(self, flats: np.ndarray) -> np.ndarray:
        return project_flats(self.basis, flats)

    def lift(self, v: np.ndarray) -> TensorSeries:
        """Series L with <L, s> = v . feature(s) for every s."""
        coeffs = self.basis.whitener @ v
        flat = self.basis.anchors_flat.T @ coeffs
        return tensor.unflatten(flat, self.basis.depth, self.basis.dim)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return whitened_inner(self.state, u, v)

    def norm(self, u: np.ndarray) -> float:
        return whitened_norm(self.state, u)


def snapshot_to_dict(geom: Geometry) -> dict:
    return {
        "ridge": geom.state.ridge,
        "cov": geom.state.cov.tolist(),
        "anchors": [tensor.series_to_dict(a) for a in geom.basis.anchors],
    }


def snapshot_from_dict(data: dict, resync_interval: int = 256) -> Geometry:
    anchors = [tensor.series_from_dict(d) for d in data["anchors"]]
    flats = [tensor.flatten(a) for a in anchors]
    gram = np.stack(flats) @ np.stack(flats).T
    whitener, retained = _whitener_from_gram(gram)
    basis = NystromBasis(tuple(anchors), gram, whitener, retained)
    state = PrecisionState.from_cov(
        np.asarray(data["cov"], dtype=float), data["ridge"], resync_interval
    )
    return Geometry(basis, state)


def snapshot_to_json(geom: Geometry) -> str:
    return json.dumps(snapshot_to_dict(geom))


def snapshot_from_json(text: str) -> Geometry:
    return snapshot_from_dict(json.loads(text))
