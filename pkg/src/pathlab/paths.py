"""Cadlag paths, their time-extended signatures, and path file formats.

A path is a finite event sequence: strictly positive time gaps are
linear segments, zero-duration events are instantaneous moves, and
flagged events are jumps (always zero duration). Both an instantaneous
move and a jump contribute exp_level1((0, dX)) to the signature; the
flag keeps them distinguishable in the data model. Continuous segments
contribute exp_level1((dt, dX)) over the extended alphabet whose letter
0 is time.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .errors import (
    DimensionMismatch,
    EmptyEnsemble,
    GridOutsideSupport,
    NegativeDuration,
    NonMonotoneTime,
    TimeLetterForbidden,
)
from .tensor import TensorSeries

__all__ = [
    "CadlagPath",
    "PathEnsemble",
    "rectilinear_interpolate",
    "marcus_signature",
    "signature_extend",
    "terminal_gradient",
    "expected_signature",
    "signatures_flat",
    "restrict",
    "grid_signatures",
    "write_path_csv",
    "read_path_csv",
    "write_ensemble_csv",
    "read_ensemble_csv",
]


@dataclass
class CadlagPath:
    """Event-list path: times (n,), values (n, d), jump_flags (n,)."""

    times: np.ndarray
    values: np.ndarray
    jump_flags: np.ndarray = field(default=None)

    def __post_init__(self):
        self.times = np.ascontiguousarray(self.times, dtype=float)
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.jump_flags is None:
            self.jump_flags = np.zeros(len(self.times), dtype=bool)
        self.jump_flags = np.ascontiguousarray(self.jump_flags, dtype=bool)
        n = len(self.times)
        if n == 0:
            raise DimensionMismatch("a path needs at least one event")
        if self.values.shape[0] != n or self.jump_flags.shape[0] != n:
            raise DimensionMismatch("times, values and jump_flags disagree on length")
        gaps = np.diff(self.times)
        if np.any(gaps < 0):
            raise NonMonotoneTime("event times decrease")
        if self.jump_flags[0]:
            raise NonMonotoneTime("first event cannot be a jump")
        if np.any(self.jump_flags[1:] & (gaps != 0.0)):
            raise NonMonotoneTime("jump events must carry zero duration")

    @property
    def n_events(self) -> int:
        return len(self.times)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


@dataclass
class PathEnsemble:
    """A non-empty collection of paths sharing one state dimension."""

    paths: tuple[CadlagPath, ...]

    def __post_init__(self):
        self.paths = tuple(self.paths)
        if not self.paths:
            raise EmptyEnsemble("ensemble has no paths")
        d = self.paths[0].d
        for p in self.paths:
            if p.d != d:
                raise DimensionMismatch("paths disagree on state dimension")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    @property
    def d(self) -> int:
        return self.paths[0].d


def rectilinear_interpolate(times: np.ndarray, values: np.ndarray) -> CadlagPath:
    """Lift discrete observations to a time-then-space event path.

    Each observation after the first becomes a time-only advance
    followed by a zero-duration space move; equal consecutive values
    collapse to the pure time advance.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if np.any(np.diff(times) <= 0):
        raise NonMonotoneTime("observation times must be strictly increasing")
    ev_t = [times[0]]
    ev_x = [values[0]]
    for i in range(1, len(times)):
        ev_t.append(times[i])
        ev_x.append(values[i - 1])
        if not np.array_equal(values[i], values[i - 1]):
            ev_t.append(times[i])
            ev_x.append(values[i])
    return CadlagPath(np.array(ev_t), np.array(ev_x))


def _increments(path: CadlagPath) -> np.ndarray:
    """Effective time-extended increments, one row per segment."""
    dt = np.diff(path.times)
    dx = np.diff(path.values, axis=0)
    dt = np.where(path.jump_flags[1:], 0.0, dt)
    return np.column_stack([dt, dx])


def marcus_signature(path: CadlagPath, depth: int) -> TensorSeries:
    """Signature of the time-extended path, chords across jumps."""
    dim = path.d + 1
    sig = tensor.unit(depth, dim)
    for inc in _increments(path):
        sig = tensor.concat_product(sig, tensor.exp_level1(inc, depth))
    return sig


def signature_extend(
    sig: TensorSeries, increment: tuple[float, np.ndarray], is_jump: bool = False
) -> TensorSeries:
    """Extend a running signature by one segment or jump."""
    dt, dx = increment
    dx = np.atleast_1d(np.asarray(dx, dtype=float))
    if dx.shape[0] != sig.dim - 1:
        raise DimensionMismatch(
            f"increment has {dx.shape[0]} space components, path has {sig.dim - 1}"
        )
    if is_jump:
        dt = 0.0
    elif dt < 0:
        raise NegativeDuration(f"segment duration {dt} is negative")
    vec = np.concatenate([[dt], dx])
    return tensor.concat_product(sig, tensor.exp_level1(vec, sig.depth))


def terminal_gradient(sig: TensorSeries, letter: int) -> TensorSeries:
    """Right-concatenation by a space letter: sig (x) e_letter.

    This is the signature's sensitivity to an infinitesimal terminal
    move along that coordinate. The time letter is not a control
    direction and is refused.
    """
    if letter == 0:
        raise TimeLetterForbidden("letter 0 is the time letter")
    return tensor.concat_product(
        sig, tensor.basis_letter(letter, sig.depth, sig.dim)
    )


def expected_signature(ensemble: PathEnsemble, depth: int) -> TensorSeries:
    """Mean signature across the ensemble."""
    dim = ensemble.d + 1
    acc = tensor.zero(depth, dim)
    for p in ensemble:
        acc = tensor.add(acc, marcus_signature(p, depth))
    return tensor.scale(acc, 1.0 / len(ensemble))


def signatures_flat(ensemble: PathEnsemble, depth: int) -> np.ndarray:
    """Flattened signatures of all paths, shape (n, flat_dim).

    Paths are padded with null increments to a common event count so the
    whole ensemble runs through one vectorised product chain; a null
    increment multiplies by the unit element and changes nothing.
    """
    incs = [_increments(p) for p in ensemble]
    n = len(incs)
    dim = ensemble.d + 1
    e_max = max(a.shape[0] for a in incs)
    padded = np.zeros((n, e_max, dim))
    for i, a in enumerate(incs):
        padded[i, : a.shape[0]] = a
    levels = tensor.batch_unit(n, depth, dim)
    for e in range(e_max):
        levels = tensor.batch_extend(levels, padded[:, e, :])
    return tensor.batch_flatten(levels)


def value_at(path: CadlagPath, t: float) -> np.ndarray:
    """Cadlag evaluation, linear inside continuous segments."""
    if t < path.t_start or t > path.t_end:
        raise GridOutsideSupport(
            f"t={t} outside path support [{path.t_start}, {path.t_end}]"
        )
    j = int(np.searchsorted(path.times, t, side="right")) - 1
    if path.times[j] == t or j == path.n_events - 1:
        return path.values[j].copy()
    theta = (t - path.times[j]) / (path.times[j + 1] - path.times[j])
    return path.values[j] + theta * (path.values[j + 1] - path.values[j])


def restrict(path: CadlagPath, a: float, b: float) -> CadlagPath:
    """Restriction to [a, b]; straddling segments split linearly."""
    if b < a:
        raise NonMonotoneTime(f"restriction window [{a}, {b}] is reversed")
    if a < path.t_start or b > path.t_end:
        raise GridOutsideSupport(
            f"window [{a}, {b}] outside support [{path.t_start}, {path.t_end}]"
        )
    ev_t = [a]
    ev_x = [value_at(path, a)]
    ev_j = [False]
    start = int(np.searchsorted(path.times, a, side="right"))
    stop = int(np.searchsorted(path.times, b, side="right"))
    for j in range(start, stop):
        ev_t.append(float(path.times[j]))
        ev_x.append(path.values[j].copy())
        ev_j.append(bool(path.jump_flags[j]))
    if ev_t[-1] < b:
        ev_t.append(b)
        ev_x.append(value_at(path, b))
        ev_j.append(False)
    return CadlagPath(np.array(ev_t), np.stack(ev_x), np.array(ev_j))


def grid_signatures(
    ensemble: PathEnsemble, t_start: float, grid: np.ndarray, depth: int
) -> np.ndarray:
    """Flattened signatures of every path restricted to [t_start, s].

    Returns an array of shape (len(grid), n_paths, flat_dim). Uses the
    splitting identity to extend each running signature once per event
    instead of recomputing from scratch at every grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise NonMonotoneTime("grid times decrease")
    if len(grid) and grid[0] < t_start:
        raise GridOutsideSupport("grid starts before t_start")
    dim = ensemble.d + 1
    F = tensor.flat_dim(depth, dim)
    out = np.empty((len(grid), len(ensemble), F))
    for i, path in enumerate(ensemble):
        if t_start < path.t_start or (len(grid) and grid[-1] > path.t_end):
            raise GridOutsideSupport(
                f"path {i} covers [{path.t_start}, {path.t_end}], "
                f"grid needs [{t_start}, {grid[-1] if len(grid) else t_start}]"
            )
        sig = tensor.unit(depth, dim)
        cur_t = t_start
        cur_x = value_at(path, t_start)
        j = int(np.searchsorted(path.times, t_start, side="right"))
        for g, s in enumerate(grid):
            while j < path.n_events and path.times[j] <= s:
                dt = 0.0 if path.jump_flags[j] else float(path.times[j]) - cur_t
                vec = np.concatenate([[dt], path.values[j] - cur_x])
                sig = tensor.concat_product(sig, tensor.exp_level1(vec, depth))
                cur_t, cur_x = float(path.times[j]), path.values[j].copy()
                j += 1
            if cur_t < s:
                x_s = value_at(path, s)
                vec = np.concatenate([[s - cur_t], x_s - cur_x])
                sig = tensor.concat_product(sig, tensor.exp_level1(vec, depth))
                cur_t, cur_x = float(s), x_s
            out[g, i] = tensor.flatten(sig)
    return out


# ---------------------------------------------------------------------------
# delimited formats


def _header(d: int, with_id: bool) -> list[str]:
    cols = ["t"] + [f"x{i + 1}" for i in range(d)] + ["jump"]
    return (["path_id"] + cols) if with_id else cols


def write_path_csv(path: CadlagPath, fp) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(_header(path.d, with_id=False))
    for t, x, j in zip(path.times, path.values, path.jump_flags):
        w.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [int(j)])


def write_ensemble_csv(ensemble: PathEnsemble, fp) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(_header(ensemble.d, with_id=True))
    for pid, path in enumerate(ensemble):
        for t, x, j in zip(path.times, path.values, path.jump_flags):
            w.writerow(
                [pid, repr(float(t))] + [repr(float(v)) for v in x] + [int(j)]
            )


def _parse_rows(rows: list[list[str]], d: int) -> CadlagPath:
    times = np.array([float(r[0]) for r in rows])
    values = np.array([[float(v) for v in r[1 : 1 + d]] for r in rows])
    flags = np.array([bool(int(r[1 + d])) for r in rows])
    return CadlagPath(times, values, flags)


def read_path_csv(fp) -> CadlagPath:
    r = csv.reader(fp)
    header = next(r)
    if header[0] == "path_id":
        raise DimensionMismatch("file holds an ensemble; use read_ensemble_csv")
    d = len(header) - 2
    return _parse_rows(list(r), d)


def read_ensemble_csv(fp) -> PathEnsemble:
    r = csv.reader(fp)
    header = next(r)
    if header[0] == "path_id":
        d = len(header) - 3
        groups: dict[int, list[list[str]]] = {}
        for row in r:
            groups.setdefault(int(row[0]), []).append(row[1:])
        return PathEnsemble(
            tuple(_parse_rows(groups[k], d) for k in sorted(groups))
        )
    d = len(header) - 2
    return PathEnsemble((_parse_rows(list(r), d),))


def path_csv_text(path: CadlagPath) -> str:
    buf = io.StringIO()
    write_path_csv(path, buf)
    return buf.getvalue()


def ensemble_csv_text(ensemble: PathEnsemble) -> str:
    buf = io.StringIO()
    write_ensemble_csv(ensemble, buf)
    return buf.getvalue()
