"""Linear pseudo-boolean functions in normal form.

A search point is a length-``n`` numpy array of zeros and ones where
``x[i - 1]`` holds bit ``x_i``; bit ``x_n`` is the most significant one.
Functions are minimized and always carry ascending, strictly positive
weights, so the all-zeros string is the unique optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "LinearFunction",
    "NormalizationRecord",
    "as_bits",
    "ones_count",
    "evaluate",
    "normalize",
    "make_family",
    "function_from_spec",
    "FAMILIES",
    "BINVAL_MAX_N",
]

FAMILIES = ("onemax", "binval", "random-uniform", "random-exponential")

# 2**(n-1) must stay a finite float64.
BINVAL_MAX_N = 1024


def as_bits(x, n: int | None = None) -> np.ndarray:
    """Validate ``x`` as a bit string and return it as a ``uint8`` array."""
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a bit string must be a non-empty 1-d sequence")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit strings may only contain 0 and 1")
    if n is not None and arr.size != n:
        raise ValueError(f"dimension mismatch: expected {n} bits, got {arr.size}")
    return arr.astype(np.uint8, copy=False)


def ones_count(x) -> int:
    return int(np.count_nonzero(as_bits(x)))


def _is_superincreasing(weights: np.ndarray) -> bool:
    # Exact rational arithmetic: float sums would misjudge long BinVal prefixes.
    total = Fraction(0)
    for w in weights:
        fw = Fraction(float(w))
        if fw <= total:
            return False
        total += fw
    return True


@dataclass(frozen=True, eq=False)
class LinearFunction:
    """``f(x) = sum_i w_i x_i`` with ``0 < w_1 <= ... <= w_n``.

    ``superincreasing`` is true when every weight exceeds the sum of all
    smaller ones (BinVal, for instance). The simulator then decides
    acceptance from the most significant flipped bit, which stays exact
    where floating-point sums of ``2**(i-1)`` would not.
    """

    weights: np.ndarray
    name: str = "custom"
    spec: dict = field(default_factory=dict)
    superincreasing: bool = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        if np.any(np.diff(w) < 0):
            raise ValueError("weights must be sorted ascending (w_1 <= ... <= w_n)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "superincreasing", _is_superincreasing(w))
        if not self.spec:
            object.__setattr__(self, "spec", {"weights": w.tolist()})

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __repr__(self) -> str:
        return f"LinearFunction(name={self.name!r}, n={self.n})"


def evaluate(f: LinearFunction, x) -> float:
    """Return ``sum_i w_i x_i``, correctly rounded."""
    bits = as_bits(x, f.n)
    return math.fsum(f.weights[bits.astype(bool)])


@dataclass(frozen=True, eq=False)
class NormalizationRecord:
    """How a raw linear function was brought into normal form.

    ``permutation[j]`` is the raw (0-based) index feeding normalized
    position ``j``; ``flip_mask`` is indexed by raw position and marks
    bits whose meaning was negated. For every raw point ``x``::

        raw(x) == normalized(record.apply(x)) + record.constant
    """

    permutation: np.ndarray
    flip_mask: np.ndarray
    constant: float

    def apply(self, x) -> np.ndarray:
        bits = as_bits(x, self.permutation.size)
        return (bits ^ self.flip_mask.astype(np.uint8))[self.permutation]

    def restore(self, y) -> np.ndarray:
        bits = as_bits(y, self.permutation.size)
        x = np.empty_like(bits)
        x[self.permutation] = bits
        return x ^ self.flip_mask.astype(np.uint8)

    @property
    def is_identity(self) -> bool:
        return (
            bool(np.all(self.permutation == np.arange(self.permutation.size)))
            and not self.flip_mask.any()
            and self.constant == 0
        )


def normalize(raw_weights, constant: float = 0.0) -> tuple[LinearFunction, NormalizationRecord]:
    """Bring ``sum_i raw_weights[i-1] x_i + constant`` into normal form.

    Negative weights are handled by substituting ``x_i -> 1 - y_i``, which
    moves the weight into the constant; the bits are then stably sorted by
    the absolute weight. Zero weights are rejected.
    """
    raw = np.asarray(raw_weights, dtype=np.float64)
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("raw weights must be a non-empty 1-d sequence")
    if np.any(raw == 0):
        raise ValueError("zero weights are not allowed")
    flip = raw < 0
    dropped = math.fsum([constant, *raw[flip].tolist()])
    absw = np.abs(raw)
    perm = np.argsort(absw, kind="stable")
    f = LinearFunction(absw[perm])
    return f, NormalizationRecord(perm, flip, dropped)


def make_family(kind: str, n: int, seed: int | None = None, kappa: float = 5.0) -> LinearFunction:
    """Build one of the standard function families.

    ``random-uniform`` draws weights from (0, 1]; ``random-exponential``
    draws ``u**kappa`` with ``u`` uniform on (0, 1], which yields very
    uneven weight ratios. Random weights are sorted ascending.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    spec: dict = {"kind": kind, "n": int(n)}
    if kind == "onemax":
        w = np.ones(n)
    elif kind == "binval":
        if n > BINVAL_MAX_N:
            raise ValueError(
                f"binval weights 2**(n-1) are not exactly representable for n > {BINVAL_MAX_N}"
            )
        w = np.ldexp(1.0, np.arange(n))
    elif kind in ("random-uniform", "random-exponential"):
        if seed is None:
            raise ValueError(f"{kind} requires a seed")
        rng = np.random.default_rng(seed)
        u = 1.0 - rng.random(n)
        spec["seed"] = int(seed)
        if kind == "random-exponential":
            w = u**kappa
            spec["kappa"] = float(kappa)
            # u**kappa can underflow for tiny u and large kappa
            w = np.maximum(w, np.finfo(np.float64).tiny)
        else:
            w = u
        w = np.sort(w, kind="stable")
    else:
        raise ValueError(f"unknown function family {kind!r}; expected one of {FAMILIES}")
    return LinearFunction(w, name=kind, spec=spec)


def function_from_spec(spec: dict, n: int | None = None) -> LinearFunction:
    """Inverse of ``LinearFunction.spec``.

    Accepts ``{"kind", "n", "seed", "kappa"}`` or ``{"weights": [...]}``; an
    explicit ``n`` fills in a missing ``"n"`` (campaign grids use this).
    """
    if "weights" in spec:
        return LinearFunction(spec["weights"], name=spec.get("name", "custom"))
    if "kind" not in spec:
        raise ValueError("function spec needs either 'kind' or 'weights'")
    size = spec.get("n", n)
    if size is None:
        raise ValueError("function spec is missing 'n'")
    if n is not None and spec.get("n") is not None and int(spec["n"]) != int(n):
        raise ValueError(f"function spec has n={spec['n']} but {n} was requested")
    return make_family(spec["kind"], int(size), spec.get("seed"), spec.get("kappa", 5.0))
