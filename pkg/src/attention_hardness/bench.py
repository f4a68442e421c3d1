"""Scaling benchmarks, log-log exponent fits and Taylor-error sweeps."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from .attention_ref import AttentionSpec, exp_dot_attention, softmax_attention
from .errors import ConfigError, DegenerateRowError, ResourceError
from .poly_attention import PolySpec, poly_attention, taylor_softmax_attention
from .tensor_core import DenseMatrix, OpCounter

KERNELS = ("exp_dot", "softmax", "poly")
CSV_COLUMNS = ("kernel", "n", "d", "p", "reps", "mean_seconds", "std_seconds", "op_count")
# n x n score entries the quadratic kernels may materialize
DENSE_ENTRY_BUDGET = 64 * 1024 * 1024


@dataclass(frozen=True)
class BenchRecord:
    kernel: str
    n: int
    d: int
    p: int
    reps: int
    mean_seconds: float
    std_seconds: float
    op_count: int

    def __post_init__(self) -> None:
        if self.reps < 3:
            raise ConfigError("a benchmark record needs reps >= 3")
        if self.std_seconds < 0:
            raise ConfigError("std_seconds must be >= 0")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def _kernel_fn(kernel: str, d: int, p: int) -> Callable[[DenseMatrix, DenseMatrix, DenseMatrix, OpCounter | None], DenseMatrix]:
    if kernel == "exp_dot":
        spec = AttentionSpec("exp_dot", 1.0)
        return lambda q, k, v, c: exp_dot_attention(spec, q, v, K=k, counter=c)
    if kernel == "softmax":
        spec = AttentionSpec("softmax_dot", 1.0)
        return lambda q, k, v, c: softmax_attention(spec, q, v, K=k, counter=c)
    if kernel == "poly":
        spec = PolySpec.monomial(p)
        return lambda q, k, v, c: poly_attention(spec, q, k, v, normalize=False, counter=c)
    raise ConfigError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def run_scaling(kernel: str, sizes: Sequence[int], d: int = 8, p: int = 2, reps: int = 3,
                seed: int = 0, value_dim: int | None = None) -> list[BenchRecord]:
    """Time ``kernel`` at each sequence length on fixed-seed random inputs.

    One warm-up call per size is discarded; repetitions are interleaved
    across sizes.  The multiply-add tally comes from a separate counted call.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise ConfigError("need at least 3 sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("sizes must be strictly ascending")
    if reps < 3:
        raise ConfigError("reps must be >= 3")
    fn = _kernel_fn(kernel, d, p)
    if kernel != "poly" and sizes[-1] ** 2 > DENSE_ENTRY_BUDGET:
        raise ResourceError(f"n={sizes[-1]} exceeds the dense score budget of {DENSE_ENTRY_BUDGET} entries")
    dv = d if value_dim is None else value_dim
    rng = np.random.default_rng(seed)
    inputs = {}
    for n in sizes:
        q, k, v = (rng.uniform(-1, 1, (n, w)) for w in (d, d, dv))
        if kernel != "poly":
            q /= math.sqrt(d)
        inputs[n] = tuple(DenseMatrix._wrap(x) for x in (q, k, v))
    ops = {}
    for n in sizes:
        counter = OpCounter()
        fn(*inputs[n], counter)          # warm-up, also yields the op tally
        ops[n] = counter.madds
    times: dict[int, list[float]] = {n: [] for n in sizes}
    for _ in range(reps):
        for n in sizes:
            start = time.perf_counter()
            fn(*inputs[n], None)
            times[n].append(time.perf_counter() - start)
    return [BenchRecord(kernel, n, d, p if kernel == "poly" else 0, reps, statistics.fmean(times[n]),
                        statistics.stdev(times[n]), ops[n]) for n in sizes]


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    """Least-squares line through (log x, log y)."""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    if lx.size < 3:
        raise ConfigError("need at least 3 points")
    if np.ptp(lx) == 0:
        raise ConfigError("all sizes are equal; the slope is undefined")
    if not np.isfinite(ly).all():
        raise ConfigError("measurements must be positive")
    xm, ym = lx.mean(), ly.mean()
    sxx = float(((lx - xm) ** 2).sum())
    slope = float(((lx - xm) * (ly - ym)).sum()) / sxx
    intercept = float(ym - slope * xm)
    ss_res = float(((ly - (intercept + slope * lx)) ** 2).sum())
    ss_tot = float(((ly - ym) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return FitResult(slope, intercept, min(1.0, max(0.0, r2)))


def fit_exponent(records: Sequence[BenchRecord], metric: str = "mean_seconds") -> FitResult:
    """Scaling exponent of ``metric`` (``mean_seconds`` or ``op_count``) in n."""
    if len({r.n for r in records}) != len(records):
        raise ConfigError("records must have distinct n")
    return fit_power_law([r.n for r in records], [getattr(r, metric) for r in records])


def taylor_sweep(p_max: int, C: float = 1.0, n: int = 16, d: int = 4, input_scale: float | None = None,
                 seed: int = 0) -> list[tuple[int, float | None]]:
    """Max elementwise error of the order-p Taylor surrogate against softmax, p = 0..p_max.

    Inputs are uniform in [-s, s] with s = 1/sqrt(d) by default, which keeps
    every |Q_i . K_j| <= 1.  A degenerate row sum at some order is recorded
    as ``None`` and the sweep moves on.
    """
    s = 1.0 / math.sqrt(d) if input_scale is None else float(input_scale)
    rng = np.random.default_rng(seed)
    q = rng.uniform(-s, s, (n, d))
    k = rng.uniform(-s, s, (n, d))
    v = rng.uniform(-1, 1, (n, d))
    if np.abs(q @ k.T).max() > 1.0 + 1e-12:
        raise ConfigError("input_scale lets |Q_i . K_j| exceed 1")
    Q, K, V = (DenseMatrix._wrap(x) for x in (q, k, v))
    ref = softmax_attention(AttentionSpec("softmax_dot", C), Q, V, K=K).to_numpy()
    out: list[tuple[int, float | None]] = []
    for p in range(p_max + 1):
        try:
            approx = taylor_softmax_attention(p, C, Q, K, V).to_numpy()
        except DegenerateRowError:
            out.append((p, None))
            continue
        out.append((p, float(np.abs(approx - ref).max())))
    return out


def emit_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(r).items()})
    return buf.getvalue()


def _coerce(row: dict) -> BenchRecord:
    types = {f.name: f.type for f in fields(BenchRecord)}
    conv = {"str": str, "int": int, "float": float}
    return BenchRecord(**{k: conv[types[k]](row[k]) for k in CSV_COLUMNS})


def parse_csv(text: str) -> list[BenchRecord]:
    return [_coerce(row) for row in csv.DictReader(io.StringIO(text))]


def emit_json(records: Iterable[BenchRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=1)


def parse_json(text: str) -> list[BenchRecord]:
    return [_coerce(row) for row in json.loads(text)]
