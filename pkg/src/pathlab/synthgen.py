"""Synthetic cadlag generators and the proxy-trajectory builder.

Reference jump-diffusions (Merton and a two-regime switch variant), a
deterministic constant-velocity actor path, and the Monte Carlo proxy
builder that turns a reference ensemble into the moving target the
sampler tracks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor
from .errors import DimensionMismatch, SwitchOutsideHorizon
from .flow import ProxyTrajectory
from .paths import CadlagPath, PathEnsemble, grid_signatures
from .rng import stream


@dataclass
class MertonParams:
    drift: np.ndarray
    vol: np.ndarray
    jump_rate: float = 0.0
    jump_mean: np.ndarray = None
    jump_std: np.ndarray = None
    clip: float = 1e6

    def __post_init__(self):
        self.drift = np.atleast_1d(np.asarray(self.drift, dtype=float))
        self.vol = np.atleast_1d(np.asarray(self.vol, dtype=float))
        d = self.drift.shape[0]
        if self.vol.shape[0] != d:
            raise DimensionMismatch("drift and vol disagree on dimension")
        if self.jump_mean is None:
            self.jump_mean = np.zeros(d)
        if self.jump_std is None:
            self.jump_std = np.zeros(d)
        self.jump_mean = np.atleast_1d(np.asarray(self.jump_mean, dtype=float))
        self.jump_std = np.atleast_1d(np.asarray(self.jump_std, dtype=float))
        if self.jump_mean.shape[0] != d or self.jump_std.shape[0] != d:
            raise DimensionMismatch("jump moments disagree on dimension")
        if np.any(self.vol < 0) or self.jump_rate < 0:
            raise DimensionMismatch("vol and jump_rate must be non-negative")
        if np.any(self.jump_std < 0):
            raise DimensionMismatch("jump_std must be non-negative")
        if self.clip <= 0:
            raise DimensionMismatch("clip must be positive")

    @property
    def d(self) -> int:
        return self.drift.shape[0]

    def to_dict(self) -> dict:
        return {
            "drift": self.drift.tolist(),
            "vol": self.vol.tolist(),
            "jump_rate": self.jump_rate,
            "jump_mean": self.jump_mean.tolist(),
            "jump_std": self.jump_std.tolist(),
            "clip": self.clip,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MertonParams":
        return cls(**data)


@dataclass
class RegimeSwitchParams:
    before: MertonParams
    after: MertonParams
    switch_time: float
    switch_jump: np.ndarray

    def __post_init__(self):
        self.switch_jump = np.atleast_1d(np.asarray(self.switch_jump, dtype=float))
        if self.before.d != self.after.d or self.switch_jump.shape[0] != self.before.d:
            raise DimensionMismatch("regimes disagree on dimension")

    def to_dict(self) -> dict:
        return {
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "switch_time": self.switch_time,
            "switch_jump": self.switch_jump.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegimeSwitchParams":
        return cls(
            before=MertonParams.from_dict(data["before"]),
            after=MertonParams.from_dict(data["after"]),
            switch_time=data["switch_time"],
            switch_jump=data["switch_jump"],
        )


def _euler_segment(
    rng, params: MertonParams, t0: float, x0, t1: float, steps: int, warnings
):
    """March one Euler grid, emitting (time, value, flag) event rows.

    Jumps within a step land as flagged zero-duration events at the step's
    right endpoint. Values are hard-clipped; activation is reported, not
    silent.
    """
    d = params.d
    dt = (t1 - t0) / steps
    root_dt = np.sqrt(dt)
    events = []
    x = np.asarray(x0, dtype=float).copy()
    clipped = False
    for k in range(steps):
        n_jumps = rng.poisson(params.jump_rate * dt) if params.jump_rate > 0 else 0
        xi = rng.standard_normal(d)
        # index arithmetic so the last event lands exactly on t1
        t = t1 if k == steps - 1 else t0 + (t1 - t0) * (k + 1) / steps
        x = x + params.drift * dt + params.vol * root_dt * xi
        if np.any(np.abs(x) > params.clip):
            clipped = True
            x = np.clip(x, -params.clip, params.clip)
        events.append((t, x.copy(), False))
        for _ in range(n_jumps):
            amp = params.jump_mean + params.jump_std * rng.standard_normal(d)
            x = x + amp
            if np.any(np.abs(x) > params.clip):
                clipped = True
                x = np.clip(x, -params.clip, params.clip)
            events.append((t, x.copy(), True))
    if clipped and warnings is not None:
        warnings.append("clip bound activated")
    return events, x, t


def _assemble(x0, t_start: float, events) -> CadlagPath:
    times = [t_start] + [e[0] for e in events]
    values = [np.asarray(x0, dtype=float)] + [e[1] for e in events]
    flags = [False] + [e[2] for e in events]
    return CadlagPath(np.array(times), np.stack(values), np.array(flags))


def gen_merton(
    params: MertonParams,
    n: int,
    steps: int,
    horizon: float,
    seed: int,
    x0=None,
    t_start: float = 0.0,
    warnings: list = None,
) -> PathEnsemble:
    """Merton jump-diffusion ensemble on a uniform Euler grid."""
    if steps < 1 or n < 1:
        raise DimensionMismatch("need at least one step and one path")
    if horizon <= 0:
        raise DimensionMismatch("horizon must be positive")
    x0 = np.zeros(params.d) if x0 is None else np.asarray(x0, dtype=float)
    paths = []
    for i in range(n):
        rng = stream(seed, "merton", i)
        events, _, _ = _euler_segment(
            rng, params, t_start, x0, t_start + horizon, steps, warnings
        )
        paths.append(_assemble(x0, t_start, events))
    return PathEnsemble(tuple(paths))


def gen_regime_switch(
    params: RegimeSwitchParams,
    n: int,
    steps: int,
    horizon: float,
    seed: int,
    x0=None,
    t_start: float = 0.0,
    warnings: list = None,
) -> PathEnsemble:
    """Two Merton regimes glued at switch_time by a deterministic flagged jump."""
    tau = params.switch_time - t_start
    if tau <= 0 or tau >= horizon:
        raise SwitchOutsideHorizon(
            f"switch at {params.switch_time} outside ({t_start}, {t_start + horizon})"
        )
    if steps < 2:
        raise DimensionMismatch("need at least two steps to fit the switch")
    steps_a = min(max(int(round(steps * tau / horizon)), 1), steps - 1)
    steps_b = steps - steps_a
    x0 = np.zeros(params.before.d) if x0 is None else np.asarray(x0, dtype=float)
    paths = []
    for i in range(n):
        rng = stream(seed, "regime-switch", i)
        ev_a, x_mid, t_mid = _euler_segment(
            rng, params.before, t_start, x0, params.switch_time, steps_a, warnings
        )
        x_mid = x_mid + params.switch_jump
        ev_switch = [(t_mid, x_mid.copy(), True)]
        ev_b, _, _ = _euler_segment(
            rng, params.after, t_mid, x_mid, t_start + horizon, steps_b, warnings
        )
        paths.append(_assemble(x0, t_start, ev_a + ev_switch + ev_b))
    return PathEnsemble(tuple(paths))


def actor_path(
    z_velocity,
    t_start: float,
    horizon: float,
    steps: int,
    x0=None,
) -> CadlagPath:
    """Deterministic constant-velocity extension of the current state."""
    v = np.atleast_1d(np.asarray(z_velocity, dtype=float))
    if steps < 1:
        raise DimensionMismatch("need at least one step")
    if horizon <= 0:
        raise DimensionMismatch("horizon must be positive")
    x0 = np.zeros(v.shape[0]) if x0 is None else np.asarray(x0, dtype=float)
    times = t_start + np.linspace(0.0, horizon, steps + 1)
    values = x0[None, :] + v[None, :] * (times - t_start)[:, None]
    return CadlagPath(times, values)


def build_proxy(
    reference: PathEnsemble,
    t_start: float,
    grid,
    depth: int,
    geometry=None,
) -> ProxyTrajectory:
    """Expected-signature trajectory of the reference ensemble.

    Proxy at grid time s is the mean signature of reference paths
    restricted to [t_start, s]; velocities are forward differences of
    the flattened coordinates. The geometry argument is accepted for
    interface symmetry and not consulted.
    """
    grid = np.asarray(grid, dtype=float)
    dim = reference.d + 1
    flats = grid_signatures(reference, t_start, grid, depth)
    means = flats.mean(axis=1)
    proxies = tuple(tensor.unflatten(means[g], depth, dim) for g in range(len(grid)))
    return ProxyTrajectory(grid, proxies)
