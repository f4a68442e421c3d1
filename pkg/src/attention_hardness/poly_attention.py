"""Linear-time attention for polynomial score functions.

For a score ``S_ij = sum_z c_z (C Q_i . K_j)^z`` every monomial factors
through the tensor-power feature map ``alpha``:

    (x . y)^z = alpha_z(x) . alpha_z(y)

so ``S V`` and the row sums of ``S`` are computed as ``Qhat (Khat^T V)`` and
``Qhat (sum_j Khat_j)`` without ever forming the n x n matrix.  The cost is
O(n d^p d_v): linear in sequence length, exponential in the order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateRowError, ResourceError, ShapeError
from .tensor_core import DenseMatrix, OpCounter, matmul

DEFAULT_FEATURE_BUDGET = 10**7


@dataclass(frozen=True)
class PolySpec:
    coefficients: tuple[float, ...]
    temperature: float = 1.0
    feature_budget: int = field(default=DEFAULT_FEATURE_BUDGET, compare=False)

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ConfigError("a polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs) or not math.isfinite(self.temperature):
            raise ConfigError("coefficients and temperature must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def taylor(cls, p: int, temperature: float = 1.0, **kw) -> "PolySpec":
        """Truncated exponential series: c_z = 1/z! for z = 0..p."""
        if p < 0:
            raise ConfigError("order must be >= 0")
        return cls(tuple(1.0 / math.factorial(z) for z in range(p + 1)), temperature, **kw)

    @classmethod
    def monomial(cls, p: int, coefficient: float = 1.0, temperature: float = 1.0, **kw) -> "PolySpec":
        if p < 0:
            raise ConfigError("order must be >= 0")
        return cls((0.0,) * p + (float(coefficient),), temperature, **kw)

    def monomials(self) -> list[tuple[int, float]]:
        return [(z, c) for z, c in enumerate(self.coefficients) if c != 0.0]


def _check_budget(d: int, p: int, budget: int) -> None:
    if p > 0 and p * math.log(d) > math.log(budget) + 1e-12:
        raise ResourceError(f"feature dimension d^p = {d}^{p} exceeds the budget of {budget} entries")


def feature_map(v: Sequence[float], p: int, budget: int = DEFAULT_FEATURE_BUDGET) -> np.ndarray:
    """Tensor power of ``v``: all ordered products v[r1]...v[rp], tuples in lexicographic order."""
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    if x.size < 1:
        raise ShapeError("feature_map needs a vector of length >= 1")
    if p < 0:
        raise ConfigError("order must be >= 0")
    return feature_rows(x[None, :], p, budget=budget)[0]


def feature_rows(X: np.ndarray, p: int, counter: OpCounter | None = None,
                 budget: int = DEFAULT_FEATURE_BUDGET) -> np.ndarray:
    """Row-wise :func:`feature_map` of an n x d array, giving n x d^p."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    _check_budget(d, p, budget)
    out = np.ones((n, 1))
    for _ in range(p):
        out = _raise_order(out, X, counter)
    return out


def _raise_order(feats: np.ndarray, X: np.ndarray, counter: OpCounter | None) -> np.ndarray:
    """Order-z features to order z+1; the first index varies slowest (lexicographic tuples)."""
    out = (X[:, :, None] * feats[:, None, :]).reshape(X.shape[0], -1)
    if counter is not None:
        counter.add(out.size)
    return out


def _check_shapes(Q: DenseMatrix, K: DenseMatrix, V: DenseMatrix | None = None) -> None:
    if Q.cols != K.cols:
        raise ShapeError(f"query width {Q.cols} != key width {K.cols}")
    if V is not None and K.rows != V.rows:
        raise ShapeError(f"K has {K.rows} rows but V has {V.rows}")


def _single_monomial(spec: PolySpec) -> tuple[int, float]:
    terms = spec.monomials()
    if len(terms) > 1:
        raise ConfigError("expected a single-monomial PolySpec")
    return terms[0] if terms else (spec.order, 0.0)


def _scaled_q(spec: PolySpec, Q: DenseMatrix) -> np.ndarray:
    q = Q.to_numpy()
    return q if spec.temperature == 1.0 else q * spec.temperature


def sv_linear(spec: PolySpec, Q: DenseMatrix, K: DenseMatrix, V: DenseMatrix,
              counter: OpCounter | None = None) -> DenseMatrix:
    """``S V`` for ``S_ij = c (C Q_i . K_j)^p`` without forming S."""
    _check_shapes(Q, K, V)
    p, c = _single_monomial(spec)
    qh = feature_rows(_scaled_q(spec, Q), p, counter, spec.feature_budget)
    kh = feature_rows(K.to_numpy(), p, counter, spec.feature_budget)
    kv = matmul(DenseMatrix._wrap(kh.T.copy()), V, counter)
    out = matmul(DenseMatrix._wrap(qh), kv, counter).to_numpy()
    return DenseMatrix._wrap(out * c)


def row_sums_linear(spec: PolySpec, Q: DenseMatrix, K: DenseMatrix,
                    counter: OpCounter | None = None) -> np.ndarray:
    """Row sums ``s_i = sum_j c (C Q_i . K_j)^p`` from one stored key sum."""
    _check_shapes(Q, K)
    p, c = _single_monomial(spec)
    qh = feature_rows(_scaled_q(spec, Q), p, counter, spec.feature_budget)
    kh = feature_rows(K.to_numpy(), p, counter, spec.feature_budget)
    ksum = np.zeros(kh.shape[1])
    for j in range(kh.shape[0]):
        ksum += kh[j]
    s = matmul(DenseMatrix._wrap(qh), DenseMatrix._wrap(ksum[:, None]), counter).to_numpy()[:, 0]
    if counter is not None:
        counter.add(kh.size)
    return s * c


def poly_attention(spec: PolySpec, Q: DenseMatrix, K: DenseMatrix, V: DenseMatrix,
                   normalize: bool = True, counter: OpCounter | None = None,
                   require_positive: bool = False) -> DenseMatrix:
    """Polynomial-score attention in O(n d^p d_v).

    With ``normalize`` the result is ``h(S) V`` where h divides each row by
    its sum.  A zero row sum (or a nonpositive one when
    ``require_positive``) raises :class:`DegenerateRowError`.
    """
    _check_shapes(Q, K, V)
    n, dv = Q.rows, V.cols
    sv = np.zeros((n, dv))
    sums = np.zeros(n)
    terms = spec.monomials()
    top = terms[-1][0] if terms else 0
    _check_budget(Q.cols, top, spec.feature_budget)
    q, k = _scaled_q(spec, Q), K.to_numpy()
    qh, kh = np.ones((n, 1)), np.ones((K.rows, 1))
    coeffs = dict(terms)
    # features of successive orders are built from the previous order
    for z in range(top + 1):
        if z:
            qh, kh = _raise_order(qh, q, counter), _raise_order(kh, k, counter)
        c = coeffs.get(z)
        if c is None:
            continue
        kv = matmul(DenseMatrix._wrap(kh.T.copy()), V, counter)
        sv += c * matmul(DenseMatrix._wrap(qh), kv, counter).to_numpy()
        if normalize:
            ksum = kh.sum(axis=0)
            sums += c * matmul(DenseMatrix._wrap(qh), DenseMatrix._wrap(ksum[:, None]), counter).to_numpy()[:, 0]
            if counter is not None:
                counter.add(kh.size)
    if not normalize:
        return DenseMatrix._wrap(sv)
    bad = np.flatnonzero(sums <= 0) if require_positive else np.flatnonzero(sums == 0)
    if bad.size:
        i = int(bad[0])
        raise DegenerateRowError(f"row {i} of the polynomial score matrix sums to {sums[i]!r}")
    return DenseMatrix._wrap(sv / sums[:, None])


def taylor_softmax_attention(p: int, C: float, Q: DenseMatrix, K: DenseMatrix, V: DenseMatrix,
                             counter: OpCounter | None = None) -> DenseMatrix:
    """Order-p Taylor surrogate for softmax attention with temperature C."""
    return poly_attention(PolySpec.taylor(p, C), Q, K, V, normalize=True,
                          counter=counter, require_positive=True)
