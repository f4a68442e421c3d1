"""Vector decision problems behind the attention lower bounds.

* OVP  -- is there a cross pair with a . b == 0?
* TVPP -- is there a cross pair with a . b >= t?
* BHFP -- is there a cross pair with ||a - b||^2 >= t2?
* BHCP -- is there a cross pair with ||a - b||^2 <  t2?

Distance thresholds are kept as integer *squared* distances; for binary
vectors the squared distance is the Hamming distance, so every comparison
is exact integer arithmetic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GenerationError, KindError, ShapeError
from .tensor_core import BinaryVectorSet, DenseMatrix, matmul

KINDS = ("OVP", "TVPP", "BHFP", "BHCP")
PLANTINGS = ("yes", "no", "random")


@dataclass(frozen=True)
class ProblemInstance:
    kind: str
    A: BinaryVectorSet
    B: BinaryVectorSet
    threshold: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise KindError(f"unknown problem kind {self.kind!r}")
        if self.A.n != self.B.n or self.A.d != self.B.d:
            raise ShapeError(f"A is {self.A.n}x{self.A.d} but B is {self.B.n}x{self.B.d}")
        d = self.A.d
        if self.kind == "OVP":
            if self.threshold is not None:
                raise ValueError("OVP takes no threshold")
        elif self.threshold is None:
            raise ValueError(f"{self.kind} needs a threshold")
        else:
            object.__setattr__(self, "threshold", int(self.threshold))
            lo = 1 if self.kind == "TVPP" else 0
            if not lo <= self.threshold <= d:
                raise ValueError(f"{self.kind} threshold must lie in [{lo}, {d}], got {self.threshold}")

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def d(self) -> int:
        return self.A.d

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "d": self.d, "threshold": self.threshold,
                "A": self.A.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemInstance":
        inst = cls(doc["kind"], BinaryVectorSet(np.array(doc["A"])), BinaryVectorSet(np.array(doc["B"])),
                   doc.get("threshold"))
        for key in ("n", "d"):
            if key in doc and doc[key] != getattr(inst, key):
                raise ShapeError(f"field {key}={doc[key]} disagrees with the vector arrays")
        return inst


def save_instance(inst: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=1) + "\n")


def load_instance(path: str | Path) -> ProblemInstance:
    return ProblemInstance.from_dict(json.loads(Path(path).read_text()))


def pair_dots(A: BinaryVectorSet, B: BinaryVectorSet) -> np.ndarray:
    """All n x n integer dot products a_i . b_j."""
    return A.as_int() @ B.as_int().T


def pair_sqdists(A: BinaryVectorSet, B: BinaryVectorSet) -> np.ndarray:
    a, b = A.as_int(), B.as_int()
    return (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2 * (a @ b.T)


def oracle(inst: ProblemInstance) -> bool:
    """Exhaustive O(n^2 d) decision, integer arithmetic only."""
    if inst.kind == "OVP":
        return bool((pair_dots(inst.A, inst.B) == 0).any())
    if inst.kind == "TVPP":
        return bool((pair_dots(inst.A, inst.B) >= inst.threshold).any())
    dist = pair_sqdists(inst.A, inst.B)
    if inst.kind == "BHFP":
        return bool((dist >= inst.threshold).any())
    return bool((dist < inst.threshold).any())


def _expect(inst: ProblemInstance, kind: str) -> None:
    if inst.kind != kind:
        raise KindError(f"expected a {kind} instance, got {inst.kind}")


def ovp_to_tvpp(inst: ProblemInstance) -> ProblemInstance:
    """a -> [a, 1-a], b -> [1-b, 1], threshold d; then abar . bbar = d - a . b."""
    _expect(inst, "OVP")
    a, b = inst.A.bits, inst.B.bits
    abar = np.hstack([a, 1 - a])
    bbar = np.hstack([1 - b, np.ones_like(b)])
    return ProblemInstance("TVPP", BinaryVectorSet(abar), BinaryVectorSet(bbar), inst.d)


def ovp_to_bhfp(inst: ProblemInstance) -> ProblemInstance:
    """a -> [a, 1-a, 0], b -> [b, 0, 1-b], squared threshold 2d.

    Both gadget vectors have squared norm d, so
    ||abar - bbar||^2 = 2d - 2 a . b, which reaches 2d exactly when a . b = 0.
    """
    _expect(inst, "OVP")
    a, b = inst.A.bits, inst.B.bits
    z = np.zeros_like(a)
    abar = np.hstack([a, 1 - a, z])
    bbar = np.hstack([b, np.zeros_like(b), 1 - b])
    return ProblemInstance("BHFP", BinaryVectorSet(abar), BinaryVectorSet(bbar), 2 * inst.d)


def bhfp_to_bhcp(inst: ProblemInstance) -> ProblemInstance:
    """b -> 1-b with squared threshold d - t2 + 1 (A unchanged)."""
    _expect(inst, "BHFP")
    bbar = 1 - inst.B.bits
    return ProblemInstance("BHCP", inst.A, BinaryVectorSet(bbar), inst.d - inst.threshold + 1)


def tvpp_t1_linear(inst: ProblemInstance) -> bool:
    """Linear-time TVPP for t = 1: Y = Q (K^T 1) is positive iff some a . b >= 1."""
    _expect(inst, "TVPP")
    if inst.threshold != 1:
        raise ValueError("the linear-time shortcut only applies to t = 1")
    ones = DenseMatrix._wrap(np.ones((inst.n, 1)))
    ktv = matmul(inst.B.as_matrix().transpose(), ones)
    y = matmul(inst.A.as_matrix(), ktv)
    return bool((y.to_numpy() > 0).any())


# --- planted instance generation -------------------------------------------------

def _plant_witness(kind: str, a: np.ndarray, b: np.ndarray, t: int | None,
                   rng: np.random.Generator) -> None:
    n, d = a.shape
    i, j = rng.integers(n), rng.integers(n)
    if kind == "OVP":
        b[j] = (1 - a[i]) * rng.integers(0, 2, d)
    elif kind == "TVPP":
        cols = rng.choice(d, size=t, replace=False)
        a[i, cols] = 1
        b[j, cols] = 1
    elif kind == "BHFP":
        b[j] = 1 - a[i]
    else:
        b[j] = a[i]


def _repair_no(kind: str, a: np.ndarray, b: np.ndarray, t: int | None,
               rng: np.random.Generator) -> None:
    """Monotone fix-ups that remove witnesses without creating new ones."""
    n, d = a.shape
    if kind == "OVP":
        # raising bits only increases dot products
        for _ in range(n * n * d):
            zi, zj = np.nonzero(a @ b.T == 0)
            if zi.size == 0:
                return
            c = rng.integers(d)
            a[zi[0], c] = 1
            b[zj[0], c] = 1
    elif kind == "TVPP":
        # clearing bits only decreases dot products
        for _ in range(n * n * d):
            hi, hj = np.nonzero(a @ b.T >= t)
            if hi.size == 0:
                return
            common = np.flatnonzero(a[hi[0]] & b[hj[0]])
            c = rng.choice(common)
            if rng.integers(2):
                a[hi[0], c] = 0
            else:
                b[hj[0], c] = 0


def _clustered(kind: str, n: int, d: int, t: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A near a random centre and B near it (BHFP) or near its complement (BHCP).

    With per-side flip budgets ra + rb the cross distances are confined to
    [d - ra - rb, d] (BHCP) or [0, ra + rb] (BHFP).
    """
    centre = rng.integers(0, 2, d)
    spread = d - t if kind == "BHCP" else t - 1
    ra = int(rng.integers(0, spread + 1)) if spread > 0 else 0
    rb = spread - ra

    def jitter(base: np.ndarray, r: int) -> np.ndarray:
        out = np.tile(base, (n, 1))
        for row in out:
            if r:
                flips = rng.choice(d, size=int(rng.integers(0, r + 1)), replace=False)
                row[flips] ^= 1
        return out

    a = jitter(centre, ra)
    b = jitter(centre if kind == "BHFP" else 1 - centre, rb)
    return a, b


def generate(kind: str, n: int, d: int, threshold: int | None = None, planted: str = "random",
             seed: int | np.random.Generator | None = 0, max_tries: int = 200) -> ProblemInstance:
    """Random instance; ``planted`` forces a yes or no answer.

    ``yes`` inserts a witness pair.  ``no`` samples (with witness-removing
    repairs where they are monotone) and accepts only after a full oracle
    scan confirms there is no witness.
    """
    if kind not in KINDS:
        raise KindError(f"unknown problem kind {kind!r}")
    if planted not in PLANTINGS:
        raise ValueError(f"planted must be one of {PLANTINGS}")
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    t = threshold
    if kind == "BHCP" and planted == "yes" and t == 0:
        raise GenerationError("BHCP with squared threshold 0 has no yes-instances")
    if kind == "BHFP" and planted == "no" and t == 0:
        raise GenerationError("BHFP with squared threshold 0 has no no-instances")

    def build(a: np.ndarray, b: np.ndarray) -> ProblemInstance:
        return ProblemInstance(kind, BinaryVectorSet(a), BinaryVectorSet(b), t)

    if planted == "random":
        return build(rng.integers(0, 2, (n, d)), rng.integers(0, 2, (n, d)))
    if planted == "yes":
        a, b = rng.integers(0, 2, (n, d)), rng.integers(0, 2, (n, d))
        _plant_witness(kind, a, b, t, rng)
        inst = build(a, b)
        assert oracle(inst)
        return inst

    for attempt in range(max_tries):
        if kind in ("BHFP", "BHCP") and attempt % 2:
            a, b = _clustered(kind, n, d, t, rng)
        else:
            # bias the density toward the easy side for this kind
            if kind == "OVP":
                density = 0.5 + 0.4 * rng.random()
            elif kind == "TVPP":
                density = min(0.5, 0.2 + 0.6 * rng.random() * t / d)
            else:
                density = 0.5
            a = (rng.random((n, d)) < density).astype(np.int64)
            b = (rng.random((n, d)) < density).astype(np.int64)
            _repair_no(kind, a, b, t, rng)
        inst = build(a, b)
        if not oracle(inst):
            return inst
    raise GenerationError(f"could not plant a no-instance of {kind} (n={n}, d={d}, t={t}) "
                          f"in {max_tries} tries")
