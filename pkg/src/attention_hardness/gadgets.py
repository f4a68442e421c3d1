"""Attention-side reductions: vector gadgets, temperatures, and decisions.

A TVPP (or BHCP) instance is encoded into attention inputs ``Q, V`` so that
a handful of attention outputs reveal the answer: every output stays below
``delta`` on no-instances while some output exceeds ``Delta`` on
yes-instances (or the mirror image for the flipped softmax gadget).  The
temperature ``C`` is chosen per mechanism so that ``Delta > delta``.

Outputs are compared in the log domain.  ``delta`` and ``Delta`` are derived
in extended precision (mpmath) because the exact softmax gadget separates
its two cases by far less than one float64 ulp; the stored ``gap`` keeps the
exact positive difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np

from .attention_ref import AttentionSpec, attention, log_attention, log_scores, score_matrix
from .errors import (BoundViolationError, ConfigError, ConstructionError, NumericalRangeError,
                     SeparationError, VariantError)
from .problems import ProblemInstance, oracle
from .tensor_core import BinaryVectorSet, DenseMatrix, OpCounter, logsumexp_rows, matmul, row_normalize

MECHANISMS = ("exp_dot", "softmax_dot", "sliding_window", "l2_rbf", "score_matrix_approx")
MODES = ("exact", "multiplicative", "additive")
MAX_ABOVE, MIN_BELOW = "max_above", "min_below"


@dataclass(frozen=True)
class HardnessVariant:
    """Attention mechanism plus the error model the decision must survive.

    ``mu_n_power`` selects the n-dependent budget mu = 1 - n**-x, admitted
    for the multiplicative softmax gadget only.
    """

    mechanism: str
    mode: str = "exact"
    mu: float = 0.0
    window: int | None = None
    mu_n_power: float | None = None

    def __post_init__(self) -> None:
        if self.mechanism not in MECHANISMS:
            raise VariantError(f"unknown mechanism {self.mechanism!r}")
        if self.mode not in MODES:
            raise VariantError(f"unknown mode {self.mode!r}")
        mu = float(self.mu)
        if not math.isfinite(mu) or mu < 0:
            raise VariantError(f"mu must be finite and >= 0, got {self.mu!r}")
        if self.mode == "exact" and (mu != 0 or self.mu_n_power is not None):
            raise VariantError("exact mode takes no error budget")
        if self.mu_n_power is not None:
            if (self.mechanism, self.mode) != ("softmax_dot", "multiplicative"):
                raise VariantError("mu = 1 - n^-x is only admitted for softmax_dot:multiplicative")
            if self.mu_n_power <= 0:
                raise VariantError("the n-power of the budget must be positive")
        elif self.mode == "multiplicative" and mu >= 1:
            raise VariantError("multiplicative budgets need mu < 1")
        if self.mechanism == "sliding_window":
            if self.window is None or self.window < 2 or self.window % 2:
                raise VariantError("sliding_window needs an even window >= 2")

    @property
    def label(self) -> str:
        return f"{self.mechanism}:{self.mode}"

    def mu_for(self, n: int) -> float:
        if self.mu_n_power is not None:
            return 1.0 - float(n) ** (-self.mu_n_power)
        return float(self.mu)

    def mu_mp(self, n: int):
        """Budget and its complement (1 - mu) in extended precision."""
        if self.mu_n_power is not None:
            comp = mpmath.mpf(n) ** (-mpmath.mpf(self.mu_n_power))
            return 1 - comp, comp
        mu = mpmath.mpf(self.mu)
        return mu, 1 - mu

    @classmethod
    def parse(cls, text: str, mu: str | float | None = None, window: int | None = None) -> "HardnessVariant":
        """Build from ``"mechanism:mode"`` and an optional budget like ``0.5`` or ``1-1/n^2``."""
        mech, _, mode = text.partition(":")
        mode = mode or "exact"
        mode = {"mult": "multiplicative", "add": "additive"}.get(mode, mode)
        power = None
        value = 0.0
        if isinstance(mu, str) and mu.replace(" ", "").startswith("1-1/n^"):
            power = float(mu.replace(" ", "")[len("1-1/n^"):])
        elif mu is not None:
            value = float(mu)
        return cls(mech, mode, value, window, power)


@dataclass(frozen=True)
class GadgetBundle:
    Q: DenseMatrix
    V: DenseMatrix
    C: float
    delta: float
    Delta: float
    direction: str
    read_indices: tuple[int, ...]
    variant: HardnessVariant
    threshold: int
    kernel: AttentionSpec
    gap: float = field(repr=False)
    cut: float = field(repr=False)

    def __post_init__(self) -> None:
        if not self.gap > 0:
            raise SeparationError(f"{self.variant.label}: Delta - delta = {self.gap!r} is not positive")
        if not np.isin(self.V.to_numpy(), (0.0, 1.0)).all():
            raise ConstructionError("gadget V entries must be 0 or 1")


# --- temperatures and bounds ---------------------------------------------------

def additive_error_ceiling(mechanism: str, n: int, d: int) -> tuple[float, float]:
    """Admissible additive-error ceiling and matching temperature.

    RBF kernel: mu_max = (n + 2)^(-2d), C = 2 ln(n + 2).
    Softmax (advisory): mu_max = exp(-3 d ln n - 3 d^2), C = ln n + d.
    """
    if mechanism == "l2_rbf":
        return float(mpmath.mpf(n + 2) ** (-2 * d)), 2.0 * math.log(n + 2)
    if mechanism == "softmax_dot":
        return float(mpmath.exp(-3 * d * mpmath.log(n) - 3 * d * d)), math.log(n) + d
    raise VariantError(f"no additive ceiling is defined for {mechanism!r}")


def select_temperature(variant: HardnessVariant, n: int, d: int, t: int | None = None) -> float:
    """Temperature C that separates the yes and no cases (natural logs throughout)."""
    if n < 1 or d < 1:
        raise VariantError("n and d must be >= 1")
    mech, mode = variant.mechanism, variant.mode
    mu = variant.mu_for(n)
    size = variant.window if mech == "sliding_window" else n
    if mode == "multiplicative":
        mu_mp, comp = variant.mu_mp(n)
        ratio = (1 + mu_mp) / comp
    if mech in ("exp_dot", "sliding_window", "score_matrix_approx"):
        if mode == "exact":
            return 2.0 * math.log(size)
        if mode == "multiplicative":
            return float(2 * mpmath.log(ratio * size))
        return 2.0 * math.log(size + 2.0 * mu)
    if mech == "softmax_dot":
        if mode == "exact":
            # the yes/no gap is only (n - 1) e^{-Ct} relative, so C must not
            # round below ln n + d
            with mpmath.workdps(50):
                exact = mpmath.log(n) + d
                c = float(exact)
                return c if c >= exact else math.nextafter(c, math.inf)
        if mode == "multiplicative":
            return float(mpmath.log(2 * ratio * n) + d)
        return additive_error_ceiling("softmax_dot", n, d)[1]
    # l2_rbf
    if mode == "exact":
        return 2.0 * math.log(n)
    if mode == "multiplicative":
        return float(2 * mpmath.log(ratio * n))
    return additive_error_ceiling("l2_rbf", n, d)[1]


def _dps(C: float, t: int) -> int:
    return 40 + int(math.ceil(2.5 * abs(C) * (abs(t) + 2) / math.log(10)))


def _case_bounds(variant: HardnessVariant, n: int, d: int, t: int, C: float,
                 window: int | None = None) -> tuple[mpmath.mpf, mpmath.mpf, str]:
    """Log-domain (delta, Delta, direction) in extended precision.

    For ``max_above`` delta bounds every no-case output from above and Delta
    bounds some yes-case output from below; ``min_below`` mirrors this.
    """
    mech, mode = variant.mechanism, variant.mode
    mu, comp = variant.mu_mp(n) if mode == "multiplicative" else (mpmath.mpf(variant.mu), None)
    C = mpmath.mpf(C)
    log, exp = mpmath.log, mpmath.exp

    def sub_log(x):
        if x <= 0:
            raise SeparationError(f"{variant.label}: the yes-case lower bound is not positive")
        return log(x)

    if mech in ("exp_dot", "sliding_window"):
        count = n if mech == "exp_dot" else window
        if mode == "exact":
            return log(count) + C * (t - 1), C * t, MAX_ABOVE
        if mode == "multiplicative":
            return log(1 + mu) + log(count) + C * (t - 1), log(comp) + C * t, MAX_ABOVE
        return log(count * exp(C * (t - 1)) + mu), sub_log(exp(C * t) - mu), MAX_ABOVE

    if mech == "score_matrix_approx":
        if mode == "multiplicative":
            return (log(1 + mu) + log(n) + C * (t - 1),
                    log(comp) + log(exp(C * t) + n - 1), MAX_ABOVE)
        return log(n * exp(C * (t - 1)) + n * mu), sub_log(exp(C * t) + n - 1 - n * mu), MAX_ABOVE

    if mech == "softmax_dot":
        R = exp(C * (t - 1))
        P = exp(C * t) + n - 1
        ned = n * exp(d)
        if mode == "exact":
            return log(R / (R + 1)), log(P / (P + ned)), MAX_ABOVE
        if mode == "multiplicative":
            # flipped V: the yes case shows up as a small output
            return log(1 + mu) + log(ned / (P + ned)), log(comp) - log(R + 1), MIN_BELOW
        return log(R / (R + 1) + mu), sub_log(P / (P + ned) - mu), MAX_ABOVE

    # l2_rbf, squared-distance threshold t
    if mode == "exact":
        return log(n) - C * t, -C * (t - 1), MAX_ABOVE
    if mode == "multiplicative":
        return log(1 + mu) + log(n) - C * t, log(comp) - C * (t - 1), MAX_ABOVE
    return log(n * exp(-C * t) + mu), sub_log(exp(-C * (t - 1)) - mu), MAX_ABOVE


def _finish(variant, n, d, t, C, window=None) -> dict:
    with mpmath.workdps(_dps(C, t)):
        lo, hi, direction = _case_bounds(variant, n, d, t, C, window)
        gap = hi - lo
        return dict(delta=float(lo), Delta=float(hi), gap=float(gap),
                    cut=float((lo + hi) / 2), direction=direction)


# --- builders --------------------------------------------------------------------

def _tally(counter: OpCounter | None, k: int) -> None:
    if counter is not None:
        counter.add(k)


def build_tvpp_gadget(A: BinaryVectorSet, B: BinaryVectorSet, t: int, variant: HardnessVariant,
                      C: float | None = None, counter: OpCounter | None = None) -> GadgetBundle:
    """Stack ``Q = [A; C B]`` with ``V = [0; 1]`` (``[1; 0]`` for multiplicative softmax)."""
    if variant.mechanism not in ("exp_dot", "softmax_dot", "score_matrix_approx"):
        raise VariantError(f"the TVPP gadget does not serve {variant.mechanism!r}")
    if A.n != B.n or A.d != B.d:
        raise ConfigError("A and B must have equal size and dimension")
    n, d = A.n, A.d
    if variant.mechanism == "softmax_dot" and variant.mode == "additive":
        _check_additive_ceiling(variant, n, d)
    if C is None:
        C = select_temperature(variant, n, d, t)
    q = np.vstack([A.bits.astype(np.float64), C * B.bits.astype(np.float64)])
    flipped = variant.mechanism == "softmax_dot" and variant.mode == "multiplicative"
    v = np.zeros((2 * n, 1))
    v[:n] = 1.0 if flipped else 0.0
    v[n:] = 0.0 if flipped else 1.0
    _tally(counter, q.size + v.size)
    kind = "softmax_dot" if variant.mechanism == "softmax_dot" else "exp_dot"
    return GadgetBundle(DenseMatrix._wrap(q), DenseMatrix._wrap(v), float(C),
                        read_indices=tuple(range(n)), variant=variant, threshold=int(t),
                        kernel=AttentionSpec(kind, 1.0), **_finish(variant, n, d, t, C))


def _check_additive_ceiling(variant: HardnessVariant, n: int, d: int) -> None:
    ceiling, _ = additive_error_ceiling(variant.mechanism, n, d)
    if variant.mu > ceiling:
        raise BoundViolationError(f"{variant.label}: mu = {variant.mu:.3e} exceeds the admissible "
                                  f"additive ceiling {ceiling:.3e} for n={n}, d={d}")


def build_bhcp_gadget(A: BinaryVectorSet, B: BinaryVectorSet, t2: int, variant: HardnessVariant,
                      fixed_C: float | None = None, counter: OpCounter | None = None) -> GadgetBundle:
    """Stack ``Q = [A; B]`` with ``V = [0; 1]``; the temperature lives in the RBF kernel.

    ``fixed_C`` models a kernel whose constant cannot be chosen: the gadget
    rows are rescaled by sqrt(C_required / fixed_C) instead, which leaves
    every kernel value unchanged.
    """
    if variant.mechanism != "l2_rbf":
        raise VariantError(f"the BHCP gadget serves l2_rbf, not {variant.mechanism!r}")
    if A.n != B.n or A.d != B.d:
        raise ConfigError("A and B must have equal size and dimension")
    n, d = A.n, A.d
    if variant.mode == "additive":
        _check_additive_ceiling(variant, n, d)
    C = select_temperature(variant, n, d, t2)
    q = np.vstack([A.bits, B.bits]).astype(np.float64)
    kernel_C = C
    if fixed_C is not None:
        if not fixed_C > 0:
            raise ConfigError("fixed_C must be positive")
        q = q * math.sqrt(C / fixed_C)
        kernel_C = float(fixed_C)
    v = np.zeros((2 * n, 1))
    v[n:] = 1.0
    _tally(counter, q.size + v.size)
    return GadgetBundle(DenseMatrix._wrap(q), DenseMatrix._wrap(v), float(C),
                        read_indices=tuple(range(n)), variant=variant, threshold=int(t2),
                        kernel=AttentionSpec("l2_rbf", kernel_C), **_finish(variant, n, d, t2, C))


def sliding_layout(k: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Slot assignment for the sliding-window gadget.

    Slot s puts an a-vector at position 2s and a b-vector at 2s + 1.  The b's
    cycle with period k.  Each a_i is repeated at slots spaced by the number
    of b's one window sees, so its copies see consecutive arcs that together
    wrap the whole b-cycle.  Padding slots hold the zero vector (index -1).

    Returns ``(a_index, b_index)`` per slot.
    """
    h = w // 2
    seen = 2 * ((h + 1) // 2)          # b-slots visible from one a-slot
    lead = (h + 1) // 2                # visible b-slots start this far back
    copies = -(-k // seen)
    groups = -(-k // seen)
    pad = lead + 1
    body = groups * seen * copies
    total = pad + body + pad
    a_idx = np.full(total, -1, dtype=np.intp)
    for grp in range(groups):
        base = pad + grp * seen * copies
        for u in range(seen):
            i = grp * seen + u
            if i >= k:
                continue
            for c in range(copies):
                a_idx[base + u + c * seen] = i
    b_idx = np.arange(total) % k
    return a_idx, b_idx


def _coverage(a_idx: np.ndarray, b_idx: np.ndarray, k: int, h: int) -> np.ndarray:
    """cover[i, j] is True when some copy of a_i shares a window with some b_j."""
    length = 2 * a_idx.size
    cover = np.zeros((k, k), dtype=bool)
    for s, i in enumerate(a_idx):
        if i < 0:
            continue
        p = 2 * s
        for q in range(max(p - h, 0), min(p + h, length - 1) + 1):
            if q % 2:
                cover[i, b_idx[q // 2]] = True
    return cover


def build_sliding_gadget(A: BinaryVectorSet, B: BinaryVectorSet, t: int, variant: HardnessVariant,
                         n_total: int | None = None, w: int | None = None,
                         counter: OpCounter | None = None) -> GadgetBundle:
    """Interleave a's (even positions) and C b's (odd positions) so every pair shares a window.

    The b outputs are read; each sums ``exp(C a . b)`` over at most w a's.
    """
    if variant.mechanism != "sliding_window":
        raise VariantError(f"the sliding gadget serves sliding_window, not {variant.mechanism!r}")
    w = variant.window if w is None else w
    if w != variant.window:
        variant = replace(variant, window=w)
    k, d = A.n, A.d
    if B.n != k or B.d != d:
        raise ConfigError("A and B must have equal size and dimension")
    if n_total is not None and k * k != n_total * w:
        raise ConfigError(f"set size k={k} is incompatible with n_total={n_total}, w={w} (need k^2 = n w)")
    C = select_temperature(variant, k, d, t)
    a_idx, b_idx = sliding_layout(k, w)
    if not _coverage(a_idx, b_idx, k, w // 2).all():
        raise ConstructionError(f"sliding layout misses a pair (k={k}, w={w})")
    a = np.vstack([np.zeros((1, d)), A.bits.astype(np.float64)])[a_idx + 1]
    b = C * B.bits.astype(np.float64)[b_idx]
    q = np.empty((2 * a_idx.size, d))
    q[0::2], q[1::2] = a, b
    v = np.zeros((q.shape[0], 1))
    v[0::2] = 1.0
    _tally(counter, q.size + v.size)
    return GadgetBundle(DenseMatrix._wrap(q), DenseMatrix._wrap(v), float(C),
                        read_indices=tuple(range(1, q.shape[0], 2)), variant=variant,
                        threshold=int(t), kernel=AttentionSpec("sliding_window", 1.0, window=w),
                        **_finish(variant, k, d, t, C, window=w))


def build_gadget(inst: ProblemInstance, variant: HardnessVariant, **kw) -> GadgetBundle:
    """Pick the builder that matches the (instance kind, mechanism) pairing."""
    pair = (inst.kind, variant.mechanism)
    if pair in (("TVPP", "exp_dot"), ("TVPP", "softmax_dot"), ("TVPP", "score_matrix_approx")):
        return build_tvpp_gadget(inst.A, inst.B, inst.threshold, variant, **kw)
    if pair == ("TVPP", "sliding_window"):
        return build_sliding_gadget(inst.A, inst.B, inst.threshold, variant, **kw)
    if pair == ("BHCP", "l2_rbf"):
        return build_bhcp_gadget(inst.A, inst.B, inst.threshold, variant, **kw)
    raise VariantError(f"no reduction pairs a {inst.kind} instance with {variant.mechanism}")


# --- error injection -----------------------------------------------------------

def _budget_ok(y: np.ndarray, yhat: np.ndarray, mode: str, mu: float) -> np.ndarray:
    lim = mu * np.abs(y) if mode == "multiplicative" else np.full_like(y, mu)
    return np.abs(yhat - y) <= lim


def inject_error(Y: DenseMatrix | np.ndarray, mode: str, mu: float, adversary: str = "worst_case",
                 seed: int | np.random.Generator | None = None, toward: int | np.ndarray = -1):
    """Perturb ``Y`` inside an elementwise error budget.

    ``worst_case`` spends the whole budget in direction ``toward`` (+1 up,
    -1 down, per entry or global); ``random`` draws uniformly inside the
    budget.  The result always satisfies ``|Yhat - Y| <= mu |Y|``
    (multiplicative) or ``|Yhat - Y| <= mu`` (additive) in float64.
    """
    if mode not in ("multiplicative", "additive"):
        raise VariantError(f"cannot inject errors for mode {mode!r}")
    if not math.isfinite(mu) or mu < 0 or (mode == "multiplicative" and mu >= 1):
        raise VariantError(f"error budget mu={mu!r} is out of range for {mode}")
    as_matrix = isinstance(Y, DenseMatrix)
    y = Y.to_numpy() if as_matrix else np.asarray(Y, dtype=np.float64)
    if mu == 0:
        return Y
    if adversary == "worst_case":
        eps = np.broadcast_to(np.sign(toward).astype(np.float64), y.shape) * mu
    elif adversary == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        eps = rng.uniform(-mu, mu, size=y.shape)
    else:
        raise ValueError(f"unknown adversary {adversary!r}")
    yhat = y * (1.0 + eps) if mode == "multiplicative" else y + eps
    for _ in range(8):
        bad = ~_budget_ok(y, yhat, mode, mu)
        if not bad.any():
            break
        yhat = np.where(bad, np.nextafter(yhat, y), yhat)
    return DenseMatrix._wrap(yhat) if as_matrix else yhat


def inject_error_log(log_y: np.ndarray, mode: str, mu: float, adversary: str = "worst_case",
                     seed: int | np.random.Generator | None = None, toward: int | np.ndarray = -1,
                     comp: float | None = None) -> np.ndarray:
    """:func:`inject_error` applied to ``log Y`` (so Y itself may overflow float64).

    ``comp`` optionally carries 1 - mu computed without cancellation.
    """
    if mode not in ("multiplicative", "additive"):
        raise VariantError(f"cannot inject errors for mode {mode!r}")
    if mu < 0 or (mode == "multiplicative" and mu >= 1):
        raise VariantError(f"error budget mu={mu!r} is out of range for {mode}")
    log_y = np.asarray(log_y, dtype=np.float64)
    if mu == 0:
        return log_y
    if adversary == "worst_case":
        eps = np.broadcast_to(np.sign(toward).astype(np.float64), log_y.shape) * mu
    elif adversary == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        eps = rng.uniform(-mu, mu, size=log_y.shape)
    else:
        raise ValueError(f"unknown adversary {adversary!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        if mode == "multiplicative":
            down = np.log(comp) if comp is not None else np.log1p(-mu)
            shift = np.where(eps == -mu, down, np.log1p(eps))
            return log_y + shift
        rel = eps * np.exp(-log_y)
        return np.where(rel <= -1, -np.inf, log_y + np.log1p(np.maximum(rel, -1)))


# --- decisions -----------------------------------------------------------------

@dataclass
class DecisionReport:
    variant: str
    C: float
    delta: float
    Delta: float
    statistic: float
    decision: bool
    oracle_agreement: bool | None = None
    advisory: bool = False

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("variant", "C", "delta", "Delta", "statistic",
                                              "decision", "oracle_agreement", "advisory")}


def _binary_softmax_log(bundle: GadgetBundle) -> np.ndarray:
    """log of the softmax output for 0/1 V without cancellation near 1."""
    logs = log_scores(bundle.kernel, bundle.Q, rows=bundle.read_indices)
    on = bundle.V.to_numpy()[:, 0] == 1.0
    lx = logsumexp_rows(logs[:, on])
    lz = logsumexp_rows(logs[:, ~on])
    return -np.logaddexp(0.0, lz - lx)


def gadget_statistics(bundle: GadgetBundle, path: str = "log") -> np.ndarray:
    """log of the attention outputs at ``read_indices``."""
    if path == "log":
        if bundle.kernel.kind == "softmax_dot":
            out = _binary_softmax_log(bundle)
        else:
            out = log_attention(bundle.kernel, bundle.Q, bundle.V, rows=bundle.read_indices)[:, 0]
    elif path == "raw":
        try:
            with np.errstate(over="raise"):
                y = attention(bundle.kernel, bundle.Q, bundle.V, rows=bundle.read_indices).to_numpy()[:, 0]
        except (FloatingPointError, OverflowError, ValueError) as exc:
            raise NumericalRangeError("raw attention outputs overflow float64") from exc
        with np.errstate(divide="ignore"):
            out = np.log(y)
    else:
        raise ValueError(f"unknown path {path!r}")
    if np.isnan(out).any() or np.isposinf(out).any():
        raise NumericalRangeError("log-domain statistics left the float64 range")
    return out


def softmax_row_sums(bundle: GadgetBundle) -> np.ndarray:
    """Row sums of the normalized score rows the softmax gadget reads."""
    s = score_matrix(bundle.kernel, bundle.Q, rows=bundle.read_indices).to_numpy()
    s = np.exp(np.log(s) - np.log(s).max(axis=1, keepdims=True))
    return row_normalize(DenseMatrix._wrap(s)).to_numpy().sum(axis=1)


def _wrong_way(direction: str, truth: bool) -> int:
    """Sign that pushes outputs toward the wrong answer."""
    if direction == MAX_ABOVE:
        return -1 if truth else 1
    return 1 if truth else -1


def _threshold(bundle: GadgetBundle, stats: np.ndarray) -> tuple[float, bool]:
    if bundle.direction == MAX_ABOVE:
        s = float(np.max(stats))
        return s, s > bundle.cut
    s = float(np.min(stats))
    return s, s < bundle.cut


def _score_matrix_stats(bundle: GadgetBundle, adversary: str | None, seed, truth: bool | None) -> np.ndarray:
    variant = bundle.variant
    n = len(bundle.read_indices)
    try:
        s = score_matrix(AttentionSpec("exp_dot", 1.0), bundle.Q, rows=bundle.read_indices)
    except OverflowError as exc:
        raise NumericalRangeError(str(exc)) from exc
    if adversary is not None:
        toward = _wrong_way(bundle.direction, bool(truth)) if adversary == "worst_case" else 0
        s = inject_error(s, variant.mode, variant.mu_for(n), adversary, seed, toward)
    y = matmul(s, bundle.V).to_numpy()[:, 0]
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(y, 0.0))


def evaluate(inst: ProblemInstance, variant: HardnessVariant, adversary: str | None = None,
             seed: int | np.random.Generator | None = None, path: str = "log",
             check_oracle: bool = True, **build_kw) -> DecisionReport:
    """Decide ``inst`` through its attention gadget and report the evidence.

    ``adversary`` (``worst_case`` or ``random``) perturbs the outputs (or,
    for ``score_matrix_approx``, the score matrix) at the variant's full
    budget; ``worst_case`` uses the oracle answer to push the wrong way.
    """
    bundle = build_gadget(inst, variant, **build_kw)
    n = len(bundle.read_indices) if variant.mechanism != "sliding_window" else inst.n
    truth = oracle(inst) if (check_oracle or adversary == "worst_case") else None
    if adversary is not None and variant.mode == "exact":
        adversary = None
    if variant.mechanism == "score_matrix_approx":
        stats = _score_matrix_stats(bundle, adversary, seed, truth)
    else:
        stats = gadget_statistics(bundle, path)
        if adversary is not None:
            toward = _wrong_way(bundle.direction, bool(truth)) if adversary == "worst_case" else 0
            mu = variant.mu_for(n)
            comp = float(variant.mu_mp(n)[1]) if variant.mode == "multiplicative" else None
            stats = inject_error_log(stats, variant.mode, mu, adversary, seed, toward, comp)
    stat, decision = _threshold(bundle, stats)
    return DecisionReport(variant.label, bundle.C, bundle.delta, bundle.Delta, stat, decision,
                          None if truth is None else decision == truth,
                          advisory=(variant.mechanism, variant.mode) == ("softmax_dot", "additive"))


def decide(inst: ProblemInstance, variant: HardnessVariant, adversary: str | None = None,
           seed: int | np.random.Generator | None = None, path: str = "log", **build_kw) -> bool:
    return evaluate(inst, variant, adversary, seed, path, check_oracle=False, **build_kw).decision


def score_matrix_decide(inst: ProblemInstance, mode: str, mu: float, adversary: str | None = "worst_case",
                        seed: int | np.random.Generator | None = None) -> bool:
    """Decide TVPP from a perturbed score matrix ``Shat`` via ``Shat V``."""
    if inst.kind != "TVPP":
        raise VariantError("score-matrix decisions take TVPP instances")
    if mode == "exact" or mu == 0:
        return decide(inst, HardnessVariant("exp_dot"))
    variant = HardnessVariant("score_matrix_approx", mode, mu)
    return decide(inst, variant, adversary, seed)


def acceptance_variants() -> list[HardnessVariant]:
    """The variant grid exercised by the decision-soundness sweep."""
    return [
        HardnessVariant("exp_dot", "exact"),
        HardnessVariant("exp_dot", "multiplicative", 0.5),
        HardnessVariant("exp_dot", "additive", 1.0),
        HardnessVariant("softmax_dot", "exact"),
        HardnessVariant("softmax_dot", "multiplicative", 0.5),
        HardnessVariant("softmax_dot", "multiplicative", mu_n_power=2),
        HardnessVariant("sliding_window", "exact", window=4),
        HardnessVariant("l2_rbf", "exact"),
        HardnessVariant("l2_rbf", "multiplicative", 0.5),
        HardnessVariant("score_matrix_approx", "multiplicative", 0.5),
        HardnessVariant("score_matrix_approx", "additive", 1.0),
    ]


def problem_kind(variant: HardnessVariant) -> str:
    return "BHCP" if variant.mechanism == "l2_rbf" else "TVPP"
