"""Truncated tensor algebra over the time-extended alphabet.

Elements of T^{<=N}(R^D) are stored densely, one flat numpy array per
tensor level. A word (l_1, ..., l_k) over letters 0..D-1 (letter 0 is
reserved for time) maps to position sum_i l_i * D^(k-i) inside level k,
which is exactly lexicographic order, so flattening levels in sequence
gives the canonical order: by length, then lexicographic.

The module has two layers: TensorSeries for single elements, and a
batched layer operating on lists of (n, D^k) arrays that the signature
and sampler code uses to stay vectorised across paths or particles.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass

import numpy as np

from .errors import DepthExceeded, DimensionMismatch

__all__ = [
    "Word",
    "TensorSeries",
    "add",
    "scale",
    "concat_product",
    "shuffle_product",
    "exp_level1",
    "inner_product",
    "flatten",
    "unflatten",
    "flat_dim",
    "level_offsets",
    "unit",
    "zero",
    "series_to_dict",
    "series_from_dict",
    "series_to_json",
    "series_from_json",
]


@dataclass(frozen=True)
class Word:
    """A word over the letters 0..dim-1; the empty word is Word(())."""

    letters: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return ",".join(str(l) for l in self.letters)

    @classmethod
    def parse(cls, text: str) -> "Word":
        if text == "":
            return cls(())
        return cls(tuple(int(tok) for tok in text.split(",")))


def word_index(letters: tuple[int, ...], dim: int) -> int:
    """Mixed-radix position of a word inside its level block."""
    idx = 0
    for l in letters:
        if not 0 <= l < dim:
            raise DimensionMismatch(f"letter {l} outside alphabet of size {dim}")
        idx = idx * dim + l
    return idx


def index_word(idx: int, length: int, dim: int) -> Word:
    letters = []
    for _ in range(length):
        letters.append(idx % dim)
        idx //= dim
    return Word(tuple(reversed(letters)))


def flat_dim(depth: int, dim: int) -> int:
    """Length of the flattened coefficient vector, sum of dim^k for k<=depth."""
    if dim == 1:
        return depth + 1
    return (dim ** (depth + 1) - 1) // (dim - 1)


def level_offsets(depth: int, dim: int) -> list[int]:
    """Start offset of each level inside the flattened vector."""
    offs = [0]
    for k in range(depth + 1):
        offs.append(offs[-1] + dim**k)
    return offs


@dataclass
class TensorSeries:
    """Truncated tensor-algebra element with dense per-level storage.

    Attributes
    ----------
    depth : truncation order N.
    dim : alphabet size D (time letter included).
    levels : tuple of arrays, levels[k] has shape (D**k,). Read-only
        after construction; treat instances as values.
    """

    depth: int
    dim: int
    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.levels) != self.depth + 1:
            raise DimensionMismatch(
                f"expected {self.depth + 1} levels, got {len(self.levels)}"
            )
        frozen = []
        for k, lvl in enumerate(self.levels):
            arr = np.ascontiguousarray(lvl, dtype=float)
            if arr.shape != (self.dim**k,):
                raise DimensionMismatch(
                    f"level {k} has shape {arr.shape}, expected ({self.dim ** k},)"
                )
            arr.flags.writeable = False
            frozen.append(arr)
        self.levels = tuple(frozen)

    def coeff(self, word: Word | str | tuple[int, ...]) -> float:
        """Coefficient of a word; accepts Word, "0,1" strings, or tuples."""
        if isinstance(word, str):
            word = Word.parse(word)
        elif isinstance(word, tuple):
            word = Word(word)
        k = len(word)
        if k > self.depth:
            raise DepthExceeded(f"word of length {k} above depth {self.depth}")
        return float(self.levels[k][word_index(word.letters, self.dim)])

    def __add__(self, other: "TensorSeries") -> "TensorSeries":
        return add(self, other)

    def __sub__(self, other: "TensorSeries") -> "TensorSeries":
        return add(self, scale(other, -1.0))

    def __mul__(self, c: float) -> "TensorSeries":
        return scale(self, c)

    __rmul__ = __mul__


def _check_compatible(a: TensorSeries, b: TensorSeries) -> None:
    if a.depth != b.depth or a.dim != b.dim:
        raise DimensionMismatch(
            f"operands disagree: depth {a.depth}/{b.depth}, dim {a.dim}/{b.dim}"
        )


def zero(depth: int, dim: int) -> TensorSeries:
    return TensorSeries(depth, dim, tuple(np.zeros(dim**k) for k in range(depth + 1)))


def unit(depth: int, dim: int) -> TensorSeries:
    levels = [np.zeros(dim**k) for k in range(depth + 1)]
    levels[0][0] = 1.0
    return TensorSeries(depth, dim, tuple(levels))


def add(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    _check_compatible(a, b)
    return TensorSeries(
        a.depth, a.dim, tuple(x + y for x, y in zip(a.levels, b.levels))
    )


def scale(a: TensorSeries, c: float) -> TensorSeries:
    return TensorSeries(a.depth, a.dim, tuple(c * x for x in a.levels))


def concat_product(a: TensorSeries, b: TensorSeries) -> TensorSeries:
    """Concatenation (Chen) product truncated at the common depth."""
    _check_compatible(a, b)
    dim = a.dim
    out = [np.zeros(dim**k) for k in range(a.depth + 1)]
    for k in range(a.depth + 1):
        acc = out[k]
        for j in range(k + 1):
            acc += np.outer(a.levels[j], b.levels[k - j]).ravel()
    return TensorSeries(a.depth, a.dim, tuple(out))


@functools.lru_cache(maxsize=65536)
def _shuffle_words(u: tuple[int, ...], v: tuple[int, ...]) -> tuple:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    out: dict[tuple[int, ...], int] = {}
    for w, c in _shuffle_words(u[1:], v):
        key = (u[0],) + w
        out[key] = out.get(key, 0) + c
    for w, c in _shuffle_words(u, v[1:]):
        key = (v[0],) + w
        out[key] = out.get(key, 0) + c
    return tuple(out.items())


def shuffle_product(
    w1: Word, w2: Word, depth: int | None = None
) -> dict[Word, int]:
    """Formal shuffle of two words with interleaving multiplicities.

    The multiplicities sum to binomial(|w1|+|w2|, |w1|). When a depth is
    given, a combined length above it raises DepthExceeded.
    """
    if depth is not None and len(w1) + len(w2) > depth:
        raise DepthExceeded(
            f"shuffle of lengths {len(w1)}+{len(w2)} exceeds depth {depth}"
        )
    return {
        Word(letters): mult
        for letters, mult in _shuffle_words(w1.letters, w2.letters)
    }


def exp_level1(v: np.ndarray, depth: int) -> TensorSeries:
    """Tensor exponential of a level-1 element: sum_k v^(x)k / k!."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch("exp_level1 expects a flat vector")
    dim = v.shape[0]
    levels = [np.ones(1)]
    for k in range(1, depth + 1):
        levels.append(np.outer(levels[-1], v).ravel() / k)
    return TensorSeries(depth, dim, tuple(levels))


def inner_product(a: TensorSeries, b: TensorSeries) -> float:
    """Euclidean pairing of coefficients, level by level."""
    _check_compatible(a, b)
    return float(sum(np.dot(x, y) for x, y in zip(a.levels, b.levels)))


def flatten(a: TensorSeries) -> np.ndarray:
    """Coefficients in canonical order (by length, then lexicographic)."""
    return np.concatenate(a.levels)


def unflatten(vec: np.ndarray, depth: int, dim: int) -> TensorSeries:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (flat_dim(depth, dim),):
        raise DimensionMismatch(
            f"flat vector has length {vec.shape}, expected {flat_dim(depth, dim)}"
        )
    offs = level_offsets(depth, dim)
    return TensorSeries(
        depth, dim, tuple(vec[offs[k] : offs[k + 1]] for k in range(depth + 1))
    )


def basis_letter(letter: int, depth: int, dim: int) -> TensorSeries:
    """The level-1 basis element e_letter."""
    if not 0 <= letter < dim:
        raise DimensionMismatch(f"letter {letter} outside alphabet of size {dim}")
    lv1 = np.zeros(dim)
    lv1[letter] = 1.0
    levels = [np.zeros(dim**k) for k in range(depth + 1)]
    levels[1] = lv1
    levels[0][0] = 0.0
    return TensorSeries(depth, dim, tuple(levels))


# ---------------------------------------------------------------------------
# serialization


def series_to_dict(a: TensorSeries) -> dict:
    """JSON-ready dict with only the nonzero coefficients."""
    coeffs = {}
    for k, lvl in enumerate(a.levels):
        for idx in np.nonzero(lvl)[0]:
            coeffs[str(index_word(int(idx), k, a.dim))] = float(lvl[idx])
    return {"depth": a.depth, "dim": a.dim, "coeffs": coeffs}


def series_from_dict(data: dict) -> TensorSeries:
    depth = int(data["depth"])
    dim = int(data["dim"])
    levels = [np.zeros(dim**k) for k in range(depth + 1)]
    for text, value in data["coeffs"].items():
        word = Word.parse(text)
        k = len(word)
        if k > depth:
            raise DepthExceeded(f"word '{text}' above depth {depth}")
        levels[k][word_index(word.letters, dim)] = float(value)
    return TensorSeries(depth, dim, tuple(levels))


def series_to_json(a: TensorSeries) -> str:
    return json.dumps(series_to_dict(a))


def series_from_json(text: str) -> TensorSeries:
    return series_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# batched layer: lists of (n, dim**k) arrays, one entry per level


def batch_unit(n: int, depth: int, dim: int) -> list[np.ndarray]:
    levels = [np.zeros((n, dim**k)) for k in range(depth + 1)]
    levels[0][:, 0] = 1.0
    return levels


def batch_from_series(series: list[TensorSeries]) -> list[np.ndarray]:
    depth, dim = series[0].depth, series[0].dim
    for s in series:
        _check_compatible(series[0], s)
    return [
        np.stack([s.levels[k] for s in series]) for k in range(depth + 1)
    ]


def batch_row(levels: list[np.ndarray], i: int, dim: int) -> TensorSeries:
    depth = len(levels) - 1
    return TensorSeries(depth, dim, tuple(lvl[i].copy() for lvl in levels))


def batch_exp_level1(incs: np.ndarray, depth: int) -> list[np.ndarray]:
    """Row-wise tensor exponential of level-1 increments, shape (n, dim)."""
    n, dim = incs.shape
    levels = [np.ones((n, 1))]
    for k in range(1, depth + 1):
        nxt = np.einsum("np,nq->npq", levels[-1], incs).reshape(n, -1) / k
        levels.append(nxt)
    return levels


def batch_concat(a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    """Row-wise concatenation product of two batches."""
    depth = len(a) - 1
    n = a[0].shape[0]
    out = []
    for k in range(depth + 1):
        acc = np.zeros((n, a[k].shape[1]))
        for j in range(k + 1):
            acc += np.einsum("np,nq->npq", a[j], b[k - j]).reshape(n, -1)
        out.append(acc)
    return out


def batch_concat_fixed(a: list[np.ndarray], b: TensorSeries) -> list[np.ndarray]:
    """Row-wise concatenation with a single fixed right factor."""
    depth = len(a) - 1
    n = a[0].shape[0]
    out = []
    for k in range(depth + 1):
        acc = np.zeros((n, a[k].shape[1]))
        for j in range(k + 1):
            acc += np.einsum("np,q->npq", a[j], b.levels[k - j]).reshape(n, -1)
        out.append(acc)
    return out


def batch_extend(levels: list[np.ndarray], incs: np.ndarray) -> list[np.ndarray]:
    """Row-wise right-multiplication by exp_level1 of per-row increments."""
    return batch_concat(levels, batch_exp_level1(incs, len(levels) - 1))


def batch_flatten(levels: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(levels, axis=1)


def batch_mean(levels: list[np.ndarray], dim: int) -> TensorSeries:
    depth = len(levels) - 1
    return TensorSeries(depth, dim, tuple(lvl.mean(axis=0) for lvl in levels))
