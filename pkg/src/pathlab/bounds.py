"""Empirical checks of the statistical guarantees.

Three harnesses: the finite-sample generalisation bound on the whitened
mean-embedding error, the Rademacher-complexity closed form against its
Monte Carlo estimate, and the projection-error-vs-spectral-tail probe
for the low-rank geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import tensor
from .errors import DimensionMismatch, FullSpaceTooLarge
from .geometry import Geometry
from .paths import PathEnsemble, signatures_flat
from .rng import stream
from .tensor import TensorSeries

__all__ = [
    "BoundReport",
    "ProjectionProbe",
    "generalization_bound_rhs",
    "generalization_trial",
    "rademacher_bound",
    "rademacher_mc",
    "projection_error_probe",
    "support_radius",
]

FULL_SPACE_CAP = 2000


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    satisfied: bool
    trials: int
    satisfaction_rate: float


def _features(paths, geometry: Geometry) -> np.ndarray:
    if isinstance(paths, PathEnsemble):
        flats = signatures_flat(paths, geometry.basis.depth)
        return geometry.features_flat(flats)
    if isinstance(paths, np.ndarray):
        return paths
    seq = list(paths)
    if seq and isinstance(seq[0], TensorSeries):
        flats = np.stack([tensor.flatten(s) for s in seq])
        return geometry.features_flat(flats)
    return _features(PathEnsemble(tuple(seq)), geometry)


def _whitened_row_norms(feats: np.ndarray, prec: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("nm,nm->n", feats @ prec, feats), 0.0))


def _rademacher_mean_norm(
    feats: np.ndarray, prec: np.ndarray, draws: int, rng
) -> float:
    """Monte Carlo E over sign vectors of the whitened norm of the signed sum."""
    n = feats.shape[0]
    if n == 1:
        # the signed sum is +-phi, whose norm does not depend on the sign:
        # the estimator is constant, so evaluate it exactly
        sq = np.maximum(np.einsum("nm,nm->n", feats @ prec, feats), 0.0)
        return float(np.sqrt(sq[0]))
    signs = rng.integers(0, 2, size=(draws, n)) * 2 - 1
    sums = signs @ feats
    norms = np.sqrt(np.maximum(np.einsum("dm,dm->d", sums @ prec, sums), 0.0))
    return float(np.mean(norms))


def support_radius(paths, geometry: Geometry) -> tuple:
    """Empirical whitened support radius with a 1.5x safety variant.

    The max over a finite sample undershoots the true essential sup, so
    downstream consumers get both the raw estimate and an inflated one.
    """
    feats = _features(paths, geometry)
    r_s = float(np.max(_whitened_row_norms(feats, geometry.state.prec)))
    return r_s, 1.5 * r_s


def generalization_bound_rhs(
    paths,
    delta: float,
    geometry: Geometry,
    rademacher_draws: int = 256,
    seed: int = 0,
) -> float:
    """Sample-dependent right-hand side of the mean-embedding error bound.

    Twice the (Monte Carlo) Rademacher average plus the concentration
    term scaled by the empirical support radius.
    """
    if not (0 < delta < 1):
        raise DimensionMismatch("delta must lie in (0, 1)")
    feats = _features(paths, geometry)
    n = feats.shape[0]
    prec = geometry.state.prec
    rng = stream(seed, "rademacher")
    term1 = (2.0 / n) * _rademacher_mean_norm(feats, prec, rademacher_draws, rng)
    r_s = float(np.max(_whitened_row_norms(feats, prec)))
    return term1 + r_s * np.sqrt(np.log(1.0 / delta) / (2.0 * n))


def generalization_trial(
    measure_sampler,
    n: int,
    delta: float,
    geometry: Geometry,
    oracle_size: int = None,
    trials: int = 1,
    seed: int = 0,
    rademacher_draws: int = 256,
) -> BoundReport:
    """Monte Carlo check that the bound holds at its nominal confidence.

    measure_sampler(count, seed) must return a PathEnsemble. The oracle
    mean comes from one large fresh sample; each trial then draws n paths
    at a derived seed, so the whole report is reproducible from `seed`.
    """
    if oracle_size is None:
        oracle_size = 100 * n
    prec = geometry.state.prec
    oracle_feats = _features(measure_sampler(oracle_size, seed), geometry)
    phi_oracle = oracle_feats.mean(axis=0)
    hits = 0
    lhs_sum = 0.0
    rhs_sum = 0.0
    for k in range(trials):
        trial_seed = seed + k + 1
        feats = _features(measure_sampler(n, trial_seed), geometry)
        gap = phi_oracle - feats.mean(axis=0)
        lhs = float(np.sqrt(max(gap @ prec @ gap, 0.0)))
        rng = stream(trial_seed, "rademacher")
        term1 = (2.0 / n) * _rademacher_mean_norm(feats, prec, rademacher_draws, rng)
        r_s = float(np.max(_whitened_row_norms(feats, prec)))
        rhs = term1 + r_s * np.sqrt(np.log(1.0 / delta) / (2.0 * n))
        hits += lhs <= rhs
        lhs_sum += lhs
        rhs_sum += rhs
    rate = hits / trials
    return BoundReport(
        lhs=lhs_sum / trials,
        rhs=rhs_sum / trials,
        satisfied=bool(rate >= 1.0 - delta - 0.02),
        trials=trials,
        satisfaction_rate=rate,
    )


def rademacher_bound(paths, big_m: float, geometry: Geometry) -> float:
    """Closed form (M/n)·sqrt(sum of squared whitened norms).

    The squared norms are summed without an intermediate square root so
    the n=1 case agrees with the Monte Carlo estimate bit for bit.
    """
    if big_m < 0:
        raise DimensionMismatch("M must be non-negative")
    feats = _features(paths, geometry)
    n = feats.shape[0]
    prec = geometry.state.prec
    sq = np.maximum(np.einsum("nm,nm->n", feats @ prec, feats), 0.0)
    return float(big_m / n * np.sqrt(np.sum(sq)))


def rademacher_mc(
    paths, big_m: float, geometry: Geometry, draws: int = 256, seed: int = 0
) -> float:
    """Monte Carlo (M/n)·E over signs of the whitened signed-sum norm."""
    if big_m < 0:
        raise DimensionMismatch("M must be non-negative")
    feats = _features(paths, geometry)
    n = feats.shape[0]
    rng = stream(seed, "rademacher")
    return float(
        big_m / n * _rademacher_mean_norm(feats, geometry.state.prec, draws, rng)
    )


class ProjectionProbe(NamedTuple):
    rows: list
    c_fit: float


def projection_error_probe(
    ensemble: PathEnsemble,
    proxy: TensorSeries,
    geometry: Geometry,
    m_values,
) -> ProjectionProbe:
    """Full-space score residual vs the covariance spectral tail.

    Works in the flattened truncated tensor algebra (toy scales only):
    the score field of each path against the proxy target is projected
    onto the top-m' eigenspace of the full covariance, and the discarded
    energy is compared with the tail eigenvalue mass.
    """
    depth = proxy.depth
    dim = proxy.dim
    flats = signatures_flat(ensemble, depth)
    full_dim = flats.shape[1]
    if full_dim > FULL_SPACE_CAP:
        raise FullSpaceTooLarge(
            f"flattened dimension {full_dim} exceeds the probe cap {FULL_SPACE_CAP}"
        )
    if tensor.flat_dim(depth, dim) != full_dim:
        raise DimensionMismatch("proxy depth/dim do not match the ensemble")
    target = tensor.flatten(proxy)
    centered = flats - flats.mean(axis=0, keepdims=True)
    omega = centered.T @ centered / max(flats.shape[0] - 1, 1)
    ridge = geometry.state.ridge
    q_full = np.linalg.inv(omega + ridge * np.eye(full_dim))
    psi = (target[None, :] - flats) @ q_full

    eigvals, eigvecs = np.linalg.eigh(omega)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    rows = []
    for m_prime in m_values:
        m_prime = int(m_prime)
        if not (0 <= m_prime <= full_dim):
            raise DimensionMismatch(f"m'={m_prime} outside [0, {full_dim}]")
        basis = eigvecs[:, :m_prime]
        resid = psi - (psi @ basis) @ basis.T
        eps = float(np.mean(np.linalg.norm(resid, axis=1)))
        tail = float(max(np.sum(eigvals[m_prime:]), 0.0))
        rows.append((m_prime, eps, tail))
    fit_row = min(rows, key=lambda r: r[0])
    c_fit = fit_row[1] / np.sqrt(fit_row[2]) if fit_row[2] > 0 else 0.0
    return ProjectionProbe(rows=rows, c_fit=float(c_fit))
