"""Dense matrix substrate with deterministic reductions.

Everything downstream (attention kernels, polynomial attention, gadgets)
passes :class:`DenseMatrix` values around.  The matrices are immutable
float64 arrays stored in row-major order; all entries are finite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityError, DegenerateRowError, ShapeError


class OpCounter:
    """Tally of scalar multiply-adds performed by counted operations."""

    def __init__(self) -> None:
        self.madds = 0

    def add(self, count: int) -> None:
        self.madds += int(count)

    def reset(self) -> None:
        self.madds = 0

    def __repr__(self) -> str:
        return f"OpCounter(madds={self.madds})"


def _tally(counter: OpCounter | None, count: int) -> None:
    if counter is not None:
        counter.add(count)


class DenseMatrix:
    """Immutable row-major real matrix with finite entries."""

    __slots__ = ("_a",)

    def __init__(self, values) -> None:
        a = np.array(values, dtype=np.float64, order="C", copy=True)
        if a.ndim == 1:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got ndim={a.ndim}")
        if not np.isfinite(a).all():
            raise ValueError("DenseMatrix entries must be finite")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "DenseMatrix":
        # Internal fast path: caller guarantees a fresh, finite, 2-d float64 array.
        if not np.isfinite(a).all():
            raise ValueError("DenseMatrix entries must be finite")
        a = np.ascontiguousarray(a, dtype=np.float64)
        a.setflags(write=False)
        m = cls.__new__(cls)
        m._a = a
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrix":
        return cls._wrap(np.zeros((rows, cols)))

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls._wrap(np.eye(n))

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the entries (read-only)."""
        return self._a.reshape(-1)

    def to_numpy(self) -> np.ndarray:
        """Read-only 2-d view; copy it before mutating."""
        return self._a

    def tolist(self) -> list[list[float]]:
        return self._a.tolist()

    def row(self, i: int) -> np.ndarray:
        return self._a[i]

    def scale(self, c: float) -> "DenseMatrix":
        return DenseMatrix._wrap(self._a * float(c))

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix._wrap(self._a.T.copy())

    def take_rows(self, idx: Sequence[int]) -> "DenseMatrix":
        return DenseMatrix._wrap(self._a[np.asarray(idx, dtype=np.intp)].copy())

    @staticmethod
    def vstack(parts: Iterable["DenseMatrix"]) -> "DenseMatrix":
        return DenseMatrix._wrap(np.vstack([p._a for p in parts]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True)
class BinaryVectorSet:
    """Ordered set of n binary vectors of dimension d, stored as int8 rows."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.bits, copy=True)
        if b.ndim != 2:
            raise ShapeError("bits must be an n x d array")
        if b.shape[0] < 1 or b.shape[1] < 1:
            raise ShapeError("a BinaryVectorSet needs n >= 1 and d >= 1")
        if not np.isin(b, (0, 1)).all():
            raise ValueError("every entry of a BinaryVectorSet must be 0 or 1")
        b = b.astype(np.int8)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def d(self) -> int:
        return self.bits.shape[1]

    def as_int(self) -> np.ndarray:
        """int64 copy, safe for exact dot products and distances."""
        return self.bits.astype(np.int64)

    def as_matrix(self, scale: float = 1.0) -> DenseMatrix:
        return DenseMatrix._wrap(self.bits.astype(np.float64) * scale)

    def tolist(self) -> list[list[int]]:
        return self.bits.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryVectorSet):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))


_CHUNK_ENTRIES = 1 << 20


def matmul(lhs: DenseMatrix, rhs: DenseMatrix, counter: OpCounter | None = None) -> DenseMatrix:
    """Matrix product accumulated over the inner index from left to right.

    Each step adds the rank-one term ``lhs[:, k] rhs[k, :]`` to the running
    sum, so the summation order is fixed and results are reproducible.
    """
    if lhs.cols != rhs.rows:
        raise ShapeError(f"cannot multiply {lhs.rows}x{lhs.cols} by {rhs.rows}x{rhs.cols}")
    a, b = lhs.to_numpy(), rhs.to_numpy()
    m, inner = a.shape
    p = b.shape[1]
    acc = np.zeros((m, p))
    step = _CHUNK_ENTRIES // max(1, m * p)
    if step < 2:
        tmp = np.empty((m, p))
        for k in range(inner):
            np.multiply(a[:, k, None], b[None, k, :], out=tmp)
            acc += tmp
    else:
        # np.add.accumulate adds strictly left to right, so seeding each chunk
        # with the running sum reproduces the one-term-at-a-time loop exactly
        buf = np.empty((m, step + 1, p))
        for lo in range(0, inner, step):
            hi = min(lo + step, inner)
            part = buf[:, : hi - lo + 1]
            part[:, 0] = acc
            np.multiply(a[:, lo:hi, None], b[None, lo:hi, :], out=part[:, 1:])
            acc = np.add.accumulate(part, axis=1)[:, -1]
    _tally(counter, m * inner * p)
    return DenseMatrix._wrap(np.ascontiguousarray(acc))


def row_normalize(m: DenseMatrix) -> DenseMatrix:
    """Divide every row by its sum; rows must have strictly positive sums."""
    a = m.to_numpy()
    sums = np.zeros(a.shape[0])
    for k in range(a.shape[1]):
        sums += a[:, k]
    bad = np.flatnonzero(~(sums > 0))
    if bad.size:
        raise DegenerateRowError(f"row {int(bad[0])} has nonpositive sum {sums[bad[0]]!r}")
    return DenseMatrix._wrap(a / sums[:, None])


def logsumexp(values: Iterable[float]) -> float:
    """Natural log of the sum of exponentials, computed with a max shift."""
    x = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    if x.size == 0:
        raise ArityError("logsumexp of an empty sequence")
    x = x.reshape(-1)
    top = np.max(x)
    if np.isneginf(top):
        return float("-inf")
    if np.isposinf(top):
        return float("inf")
    return float(top + np.log(np.sum(np.exp(x - top))))


def logsumexp_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise :func:`logsumexp` of a 2-d array; all--inf rows give -inf."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 0:
        raise ArityError("logsumexp of an empty row")
    top = np.max(x, axis=-1, keepdims=True)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - safe), axis=-1)) + safe[..., 0]
    return out
