"""Interval matrix families and the uncertain fractional-order plant.

An interval matrix ``[lower, upper]`` is rewritten as ``mid + M F R`` where
``F = diag(delta)`` ranges over diagonal matrices with ``|delta_k| <= 1``.
``delta`` is indexed row-major over the matrix entries.
"""

from dataclasses import dataclass
import itertools

import numpy as np

from .linalg import as_matrix


class IntervalOrderError(ValueError):
    """Lower bound exceeds upper bound in one or more entries."""

    def __init__(self, entries):
        self.entries = list(entries)
        detail = ", ".join(f"({i + 1},{j + 1}): {lo:g} > {hi:g}" for i, j, lo, hi in self.entries)
        super().__init__(f"interval bounds out of order at {detail}")


@dataclass(frozen=True, eq=False)
class IntervalMatrix:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = as_matrix(self.lower)
        upper = as_matrix(self.upper)
        if lower.shape != upper.shape:
            raise ValueError(f"bound shapes differ: {lower.shape} vs {upper.shape}")
        bad = np.argwhere(lower > upper)
        if bad.size:
            raise IntervalOrderError((i, j, lower[i, j], upper[i, j]) for i, j in bad)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_bounds(cls, lower, upper, canonicalize: bool = False) -> "IntervalMatrix":
        """Build from a bound pair; ``canonicalize`` reorders each entry by min/max."""
        lower = as_matrix(lower)
        upper = as_matrix(upper)
        if canonicalize:
            lower, upper = np.minimum(lower, upper), np.maximum(lower, upper)
        return cls(lower, upper)

    @classmethod
    def point(cls, m) -> "IntervalMatrix":
        m = as_matrix(m)
        return cls(m, m.copy())

    @property
    def shape(self):
        return self.lower.shape

    @property
    def size(self) -> int:
        return self.lower.size

    def contains(self, m, tol: float = 0.0) -> bool:
        m = as_matrix(m)
        return bool(np.all(m >= self.lower - tol) and np.all(m <= self.upper + tol))


@dataclass(frozen=True, eq=False)
class MidpointRadius:
    mid: np.ndarray
    rad: np.ndarray


def midpoint_radius(im: IntervalMatrix) -> MidpointRadius:
    return MidpointRadius(mid=0.5 * (im.lower + im.upper), rad=0.5 * (im.upper - im.lower))


def from_midpoint_radius(mr: MidpointRadius) -> IntervalMatrix:
    return IntervalMatrix(mr.mid - mr.rad, mr.mid + mr.rad)


@dataclass(frozen=True, eq=False)
class UncertaintyFactors:
    """``left`` is rows x (rows*cols), ``right`` is (rows*cols) x cols."""

    left: np.ndarray
    right: np.ndarray

    @property
    def n_delta(self) -> int:
        return self.left.shape[1]

    def perturbation(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float).ravel()
        return self.left @ np.diag(delta) @ self.right


def structure_factors(mr: MidpointRadius, column_dim: int | None = None) -> UncertaintyFactors:
    """Unit-vector factors of the radius matrix.

    Slot ``k = i * cols + j`` carries ``sqrt(rad[i, j])`` in column ``k`` of
    ``left`` (row ``i``) and in row ``k`` of ``right`` (column ``j``).  Zero
    radii keep their slots.
    """
    rad = as_matrix(mr.rad)
    rows, cols = rad.shape
    if column_dim is not None and column_dim != cols:
        raise ValueError(f"column_dim={column_dim} does not match radius with {cols} columns")
    if np.any(rad < 0):
        raise ValueError("radius entries must be nonnegative")
    root = np.sqrt(rad)
    left = np.zeros((rows, rows * cols))
    right = np.zeros((rows * cols, cols))
    for i in range(rows):
        for j in range(cols):
            k = i * cols + j
            left[i, k] = root[i, j]
            right[k, j] = root[i, j]
    return UncertaintyFactors(left=left, right=right)


def _check_delta(im: IntervalMatrix, delta) -> np.ndarray:
    delta = np.asarray(delta, dtype=float).ravel()
    if delta.size != im.size:
        raise ValueError(f"delta has {delta.size} entries, interval has {im.size}")
    if np.any(np.abs(delta) > 1.0):
        raise ValueError("delta entries must lie in [-1, 1]")
    return delta


def sample_member(im: IntervalMatrix, delta) -> np.ndarray:
    """``mid + M diag(delta) R`` for a row-major ``delta`` in ``[-1, 1]``."""
    delta = _check_delta(im, delta)
    mr = midpoint_radius(im)
    fac = structure_factors(mr)
    member = mr.mid + fac.perturbation(delta)
    # sqrt(rad)^2 and mid +- rad are not exact; pin the bounds themselves at delta = +-1
    grid = delta.reshape(im.shape)
    member = np.where(grid == 1.0, im.upper, np.where(grid == -1.0, im.lower, member))
    return np.clip(member, im.lower, im.upper)


def uncertain_entries(im: IntervalMatrix) -> np.ndarray:
    """Row-major flat indices of entries with nonzero radius."""
    return np.flatnonzero((im.upper - im.lower).ravel() > 0)


def vertex_deltas(im: IntervalMatrix, max_count: int = 4096) -> list:
    idx = uncertain_entries(im)
    count = 2 ** idx.size
    if count > max_count:
        raise ValueError(f"{count} vertices exceed max_count={max_count}")
    deltas = []
    for signs in itertools.product((-1.0, 1.0), repeat=idx.size):
        d = np.zeros(im.size)
        d[idx] = signs
        deltas.append(d)
    return deltas


def vertices(im: IntervalMatrix, max_count: int = 4096) -> list:
    """All members with every uncertain entry at one of its bounds."""
    return [sample_member(im, d) for d in vertex_deltas(im, max_count)]


@dataclass(frozen=True, eq=False)
class UncertainPlant:
    """``D^alpha x = A x + B u, y = C x`` with interval ``A, B, C``."""

    a: IntervalMatrix
    b: IntervalMatrix
    c: IntervalMatrix
    alpha: float

    def __post_init__(self):
        if not 1.0 <= self.alpha < 2.0:
            raise ValueError(f"alpha must lie in [1, 2), got {self.alpha}")
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise ValueError(f"A must be square, got {self.a.shape}")
        if self.b.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got {self.b.shape}")
        if self.c.shape[1] != n:
            raise ValueError(f"C must have {n} columns, got {self.c.shape}")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.b.shape[1]

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def n_delta(self) -> int:
        return self.a.size + self.b.size + self.c.size

    def split_delta(self, delta):
        delta = np.asarray(delta, dtype=float).ravel()
        if delta.size != self.n_delta:
            raise ValueError(f"plant delta needs {self.n_delta} entries, got {delta.size}")
        na, nb = self.a.size, self.b.size
        return delta[:na], delta[na:na + nb], delta[na + nb:]

    def member(self, delta=None):
        """``(A, B, C)`` at ``delta`` (concatenated A, B, C parts); ``None`` is nominal."""
        if delta is None:
            return self.nominal()
        da, db, dc = self.split_delta(delta)
        return sample_member(self.a, da), sample_member(self.b, db), sample_member(self.c, dc)

    def nominal(self):
        return (midpoint_radius(self.a).mid, midpoint_radius(self.b).mid,
                midpoint_radius(self.c).mid)
