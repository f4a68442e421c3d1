"""Quadratic-time reference attention kernels.

These are deliberately direct: scores are formed entry by entry (or band by
band for sliding windows) and multiplied into ``V``.  They serve as oracles
for the linear-time polynomial path and as the kernels the hardness gadgets
run.

Kernels take ``(spec, Q, V)`` for self-attention (keys equal queries).  Pass
``K=`` for a separate key matrix and ``rows=`` to evaluate only a subset of
query rows (row indices keep their meaning for the sliding band).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor_core import DenseMatrix, OpCounter, logsumexp_rows, matmul, row_normalize

KINDS = ("exp_dot", "softmax_dot", "sliding_window", "l2_rbf")


@dataclass(frozen=True)
class AttentionSpec:
    kind: str = "softmax_dot"
    temperature: float = 1.0
    window: int | None = None
    scale_by_inv_sqrt_dk: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown attention kind {self.kind!r}; expected one of {KINDS}")
        c = float(self.temperature)
        if not math.isfinite(c) or c < 0:
            raise ConfigError(f"temperature must be finite and non-negative, got {self.temperature!r}")
        if self.window is not None:
            if self.window < 2 or self.window % 2:
                raise ConfigError(f"window must be an even integer >= 2, got {self.window!r}")

    @property
    def half_window(self) -> int:
        if self.window is None:
            raise ConfigError("sliding_window attention needs a window")
        return self.window // 2


def _prepare(spec: AttentionSpec, Q: DenseMatrix, K: DenseMatrix | None) -> tuple[np.ndarray, np.ndarray]:
    K = Q if K is None else K
    if Q.cols != K.cols:
        raise ShapeError(f"query width {Q.cols} != key width {K.cols}")
    q = Q.to_numpy()
    if spec.scale_by_inv_sqrt_dk and spec.kind != "l2_rbf":
        q = q * (1.0 / math.sqrt(Q.cols))
    return q, K.to_numpy()


def _rows(rows: Sequence[int] | None, n: int) -> np.ndarray:
    if rows is None:
        return np.arange(n)
    r = np.asarray(rows, dtype=np.intp)
    if r.size and (r.min() < 0 or r.max() >= n):
        raise ShapeError("row index out of range")
    return r


def _dense_log_scores(spec: AttentionSpec, q: np.ndarray, k: np.ndarray,
                      counter: OpCounter | None = None) -> np.ndarray:
    """Exponents of the score entries (before exp), for all key columns."""
    if spec.kind == "l2_rbf":
        dist = np.zeros((q.shape[0], k.shape[0]))
        for c in range(q.shape[1]):
            diff = q[:, c, None] - k[None, :, c]
            dist += diff * diff
        if counter is not None:
            counter.add(q.shape[0] * k.shape[0] * q.shape[1])
        return -float(spec.temperature) * dist
    dots = matmul(DenseMatrix._wrap(q.copy()), DenseMatrix._wrap(k.T.copy()), counter).to_numpy()
    return float(spec.temperature) * dots


def _band(spec: AttentionSpec, q: np.ndarray, k: np.ndarray, rows: np.ndarray,
          counter: OpCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Banded log-scores: entry (r, o) pairs query rows[r] with key rows[r] + o - h.

    Returns ``(log_scores, key_index)``; out-of-range cells hold ``-inf`` and
    index ``-1``.
    """
    h = spec.half_window
    m = rows.size
    logs = np.full((m, 2 * h + 1), -np.inf)
    idx = np.full((m, 2 * h + 1), -1, dtype=np.intp)
    for slot, off in enumerate(range(-h, h + 1)):
        j = rows + off
        ok = (j >= 0) & (j < k.shape[0])
        if not ok.any():
            continue
        qi, kj = q[rows[ok]], k[j[ok]]
        dot = np.zeros(qi.shape[0])
        for c in range(q.shape[1]):
            dot += qi[:, c] * kj[:, c]
        if counter is not None:
            counter.add(qi.shape[0] * q.shape[1])
        logs[ok, slot] = float(spec.temperature) * dot
        idx[ok, slot] = j[ok]
    return logs, idx


def score_matrix(spec: AttentionSpec, Q: DenseMatrix, K: DenseMatrix | None = None,
                 rows: Sequence[int] | None = None) -> DenseMatrix:
    """Score matrix S with S_ij = f(Q_i, K_j); zero outside the band for sliding windows."""
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    if spec.kind == "sliding_window":
        logs, idx = _band(spec, q, k, r)
        s = np.zeros((r.size, k.shape[0]))
        ok = idx >= 0
        s[np.nonzero(ok)[0], idx[ok]] = np.exp(logs[ok])
        return DenseMatrix._wrap(s)
    with np.errstate(over="raise"):
        try:
            s = np.exp(_dense_log_scores(spec, q[r], k))
        except FloatingPointError as exc:
            raise OverflowError("score matrix overflows float64; use the log-domain kernels") from exc
    return DenseMatrix._wrap(s)


def _check_v(n_keys: int, V: DenseMatrix) -> None:
    if V.rows != n_keys:
        raise ShapeError(f"V has {V.rows} rows but there are {n_keys} keys")


def exp_dot_attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, *,
                      K: DenseMatrix | None = None, rows: Sequence[int] | None = None,
                      counter: OpCounter | None = None) -> DenseMatrix:
    """Unnormalized exponential dot-product attention ``Y = S V``."""
    _check_v((K or Q).rows, V)
    spec = spec if spec.kind == "exp_dot" else AttentionSpec("exp_dot", spec.temperature,
                                                            None, spec.scale_by_inv_sqrt_dk)
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    s = np.exp(_dense_log_scores(spec, q[r], k, counter))
    if counter is not None:
        counter.add(s.size)
    return matmul(DenseMatrix._wrap(s), V, counter)


def softmax_attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, *,
                      K: DenseMatrix | None = None, rows: Sequence[int] | None = None,
                      counter: OpCounter | None = None) -> DenseMatrix:
    """Row-softmax dot-product attention.

    Scores are shifted by their row maximum before exponentiation; the shift
    cancels in the normalization.
    """
    _check_v((K or Q).rows, V)
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    logs = _dense_log_scores(spec, q[r], k, counter)
    s = np.exp(logs - logs.max(axis=1, keepdims=True))
    if counter is not None:
        counter.add(2 * s.size)
    return matmul(row_normalize(DenseMatrix._wrap(s)), V, counter)


def sliding_window_attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, *,
                             K: DenseMatrix | None = None, rows: Sequence[int] | None = None,
                             counter: OpCounter | None = None) -> DenseMatrix:
    """Banded exponential attention, O(n w) work.

    Terms for each output row are summed in increasing key order, the same
    order :func:`matmul` uses, so a band covering the whole matrix reproduces
    :func:`exp_dot_attention` exactly.
    """
    if spec.window is None:
        raise ConfigError("sliding_window attention needs spec.window")
    _check_v((K or Q).rows, V)
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    logs, idx = _band(spec, q, k, r, counter)
    v = V.to_numpy()
    y = np.zeros((r.size, v.shape[1]))
    for slot in range(logs.shape[1]):
        ok = idx[:, slot] >= 0
        y[ok] += np.exp(logs[ok, slot])[:, None] * v[idx[ok, slot]]
    if counter is not None:
        counter.add(logs.size * v.shape[1])
    return DenseMatrix._wrap(y)


def l2_attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, *,
                 K: DenseMatrix | None = None, rows: Sequence[int] | None = None,
                 counter: OpCounter | None = None) -> DenseMatrix:
    """RBF-kernel attention with S_ij = exp(-C ||Q_i - K_j||^2)."""
    _check_v((K or Q).rows, V)
    spec = spec if spec.kind == "l2_rbf" else AttentionSpec("l2_rbf", spec.temperature)
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    s = np.exp(_dense_log_scores(spec, q[r], k, counter))
    return matmul(DenseMatrix._wrap(s), V, counter)


_KERNELS = {
    "exp_dot": exp_dot_attention,
    "softmax_dot": softmax_attention,
    "sliding_window": sliding_window_attention,
    "l2_rbf": l2_attention,
}


def attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, **kw) -> DenseMatrix:
    """Dispatch on ``spec.kind``."""
    return _KERNELS[spec.kind](spec, Q, V, **kw)


def log_attention(spec: AttentionSpec, Q: DenseMatrix, V: DenseMatrix, *,
                  K: DenseMatrix | None = None, rows: Sequence[int] | None = None) -> np.ndarray:
    """Natural log of the attention output for nonnegative ``V``.

    Computed as a log-sum-exp over ``log S_ij + log V_j`` so scores far beyond
    the float64 range stay usable.  Zero outputs map to ``-inf``.
    """
    v = V.to_numpy()
    if (v < 0).any():
        raise ValueError("log-domain attention needs a nonnegative V")
    _check_v((K or Q).rows, V)
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    with np.errstate(divide="ignore"):
        logv = np.log(v)
    out = np.empty((r.size, v.shape[1]))
    if spec.kind == "sliding_window":
        logs, idx = _band(spec, q, k, r)
        for c in range(v.shape[1]):
            lv = np.where(idx >= 0, logv[np.maximum(idx, 0), c], -np.inf)
            out[:, c] = logsumexp_rows(logs + lv)
        return out
    logs = _dense_log_scores(spec, q[r], k)
    for c in range(v.shape[1]):
        out[:, c] = logsumexp_rows(logs + logv[None, :, c])
    if spec.kind == "softmax_dot":
        out -= logsumexp_rows(logs)[:, None]
    return out


def log_scores(spec: AttentionSpec, Q: DenseMatrix, K: DenseMatrix | None = None,
               rows: Sequence[int] | None = None) -> np.ndarray:
    """Exponents of the (dense) score entries, ``log S`` for the selected rows."""
    if spec.kind == "sliding_window":
        raise ConfigError("use score_matrix for banded scores")
    q, k = _prepare(spec, Q, K)
    r = _rows(rows, q.shape[0])
    return _dense_log_scores(spec, q[r], k)
