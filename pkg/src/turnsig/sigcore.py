"""Truncated path signatures of piecewise-linear paths.

A signature truncated at level ``L`` over ``d`` letters is stored as one flat
array per level, level ``k`` holding ``d**k`` coefficients in row-major word
order. The level-0 term is the constant 1 and is never stored.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, ShapeError

MAX_LEVEL = 5

Word = tuple  # tuple[int, ...] of 0-based letters


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signature:
    d: int
    level: int
    coeffs: tuple  # tuple of flat arrays, coeffs[k-1] has length d**k

    def __post_init__(self):
        if self.d < 1 or not 1 <= self.level:
            raise ShapeError(f"bad signature shape d={self.d} level={self.level}")
        if len(self.coeffs) != self.level:
            raise ShapeError(f"expected {self.level} levels, got {len(self.coeffs)}")
        frozen = []
        for k, c in enumerate(self.coeffs, start=1):
            c = np.asarray(c, dtype=float).ravel()
            if c.size != self.d**k:
                raise ShapeError(f"level {k} has {c.size} coefficients, expected {self.d**k}")
            if not np.all(np.isfinite(c)):
                raise InvalidInputError(f"non-finite coefficient at level {k}")
            frozen.append(_frozen(c))
        object.__setattr__(self, "coeffs", tuple(frozen))

    def __getitem__(self, word) -> float:
        word = tuple(word)
        if not word:
            return 1.0
        return float(self.coeffs[len(word) - 1][index_of_word(word, self.d)])

    def tensor(self, k: int) -> np.ndarray:
        """Level-``k`` coefficients reshaped to a ``(d,)*k`` tensor."""
        return self.coeffs[k - 1].reshape((self.d,) * k)

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return (self.d == other.d and self.level == other.level
                and all(np.array_equal(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def allclose(self, other: "Signature", rtol=1e-9, atol=1e-12) -> bool:
        _check_compatible(self, other)
        return all(np.allclose(a, b, rtol=rtol, atol=atol)
                   for a, b in zip(self.coeffs, other.coeffs))

    def __repr__(self):
        return f"Signature(d={self.d}, level={self.level})"


def _check_level(level):
    if not isinstance(level, (int, np.integer)) or not 1 <= level <= MAX_LEVEL:
        raise InvalidInputError(f"level must be an integer in 1..{MAX_LEVEL}, got {level!r}")


def _check_compatible(a: Signature, b: Signature):
    if a.d != b.d or a.level != b.level:
        raise ShapeError(f"incompatible signatures: (d={a.d}, L={a.level}) vs (d={b.d}, L={b.level})")


def signature_size(d: int, level: int) -> int:
    return sum(d**k for k in range(1, level + 1))


def identity(d: int, level: int) -> Signature:
    _check_level(level)
    return Signature(d, level, tuple(np.zeros(d**k) for k in range(1, level + 1)))


def tensor_exp(increment, level: int) -> Signature:
    """Signature of one straight segment: level ``k`` is ``increment**k / k!``."""
    _check_level(level)
    delta = np.asarray(increment, dtype=float).ravel()
    if delta.size == 0:
        raise ShapeError("increment must have at least one component")
    if not np.all(np.isfinite(delta)):
        raise InvalidInputError("increment contains non-finite values")
    levels = [delta.copy()]
    for k in range(2, level + 1):
        levels.append(np.multiply.outer(levels[-1], delta).ravel() / k)
    return Signature(delta.size, level, tuple(levels))


def chen_product(a: Signature, b: Signature) -> Signature:
    """Truncated tensor product; the signature of path ``a`` followed by path ``b``."""
    _check_compatible(a, b)
    out = []
    for k in range(1, a.level + 1):
        acc = a.coeffs[k - 1] + b.coeffs[k - 1]
        for j in range(1, k):
            acc = acc + np.multiply.outer(a.coeffs[j - 1], b.coeffs[k - j - 1]).ravel()
        out.append(acc)
    return Signature(a.d, a.level, tuple(out))


def as_path(points, d: int | None = None) -> np.ndarray:
    """Validate ``points`` as an ``(n, d)`` float array."""
    if isinstance(points, np.ndarray):
        arr = points.astype(float, copy=False)
    else:
        points = list(points)
        if not points:
            if d is None:
                raise ShapeError("empty path needs an explicit dimension")
            return np.zeros((0, d))
        rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
        widths = {r.shape for r in rows}
        if len(widths) != 1:
            raise ShapeError(f"inconsistent point dimensions: {sorted(w[0] for w in widths)}")
        arr = np.vstack(rows)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d in (None, 1) else arr.reshape(-1, d)
    if arr.ndim != 2:
        raise ShapeError(f"path must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 and d is not None:
        arr = np.zeros((0, d))
    if d is not None and arr.shape[1] != d:
        raise ShapeError(f"path has dimension {arr.shape[1]}, expected {d}")
    if arr.shape[1] < 1:
        raise ShapeError("path dimension must be at least 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("path contains non-finite values")
    return arr


def path_signature(path, level: int, d: int | None = None) -> Signature:
    """Signature of the piecewise-linear interpolation of ``path``.

    Equivalent to folding :func:`chen_product` over the :func:`tensor_exp` of
    successive increments, but each segment is appended with a Horner-style
    update that avoids building the segment signature explicitly.
    Fewer than two points give the identity.
    """
    _check_level(level)
    pts = as_path(path, d)
    dim = pts.shape[1]
    sig = [np.zeros(dim**k) for k in range(1, level + 1)]
    for delta in np.diff(pts, axis=0):
        for k in range(level, 0, -1):
            acc = delta / k
            for j in range(1, k):
                acc = np.multiply.outer(sig[j - 1] + acc, delta).ravel() / (k - j)
            sig[k - 1] = sig[k - 1] + acc
    return Signature(dim, level, tuple(sig))


def augment_basepoint(path, d: int | None = None) -> np.ndarray:
    """Prepend the origin so the signature sees absolute feature levels."""
    pts = as_path(path, d)
    return np.vstack([np.zeros((1, pts.shape[1])), pts])


def levy_area(sig: Signature, i: int, j: int) -> float:
    if sig.level < 2:
        raise InvalidInputError("Levy area needs a signature of level >= 2")
    if i == j:
        raise InvalidInputError("Levy area needs two distinct letters")
    if not (0 <= i < sig.d and 0 <= j < sig.d):
        raise IndexError(f"letters ({i}, {j}) out of range for d={sig.d}")
    return 0.5 * (sig[(i, j)] - sig[(j, i)])


def word_of_index(level: int, flat_index: int, d: int) -> Word:
    if not 0 <= flat_index < d**level:
        raise IndexError(f"index {flat_index} out of range for d={d}, level={level}")
    letters = []
    for _ in range(level):
        flat_index, r = divmod(flat_index, d)
        letters.append(r)
    return tuple(reversed(letters))


def index_of_word(word, d: int) -> int:
    idx = 0
    for letter in word:
        if not 0 <= letter < d:
            raise IndexError(f"letter {letter} out of range for d={d}")
        idx = idx * d + letter
    return idx


@lru_cache(maxsize=64)
def signature_words(d: int, level: int) -> tuple:
    """All words in the order :meth:`Signature.flatten` emits coefficients."""
    words = []
    for k in range(1, level + 1):
        words.extend(word_of_index(k, i, d) for i in range(d**k))
    return tuple(words)


def scale_signature(sig: Signature, factors) -> Signature:
    """Signature of the path with coordinate ``i`` multiplied by ``factors[i]``."""
    f = np.asarray(factors, dtype=float)
    if f.shape != (sig.d,):
        raise ShapeError(f"need {sig.d} scale factors, got shape {f.shape}")
    out, w = [], np.ones(1)
    for c in sig.coeffs:
        w = np.multiply.outer(w, f).ravel()
        out.append(c * w)
    return Signature(sig.d, sig.level, tuple(out))
