"""Potential (drift) functions ``g(x) = sum_i g_i x_i`` for linear functions.

Two constructions tailored to the weights of ``f``:

* ``adaptive``: ``g_1 = 1`` and ``g_i = min(gamma_i, g_{i-1} * w_i / w_{i-1})``
  with ``gamma_i = (1 + alpha p / (1-p)^(n-1))^(i-1)``; extreme weight
  ratios are capped by ``gamma``.
* ``refined`` (for ``p = 1/n``): ``g_i = (1 + 1/(n-1))^(m(i)-1)`` where
  ``m(i)`` is the first index carrying the same weight as ``w_i``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .functions import LinearFunction, as_bits

__all__ = [
    "Potential",
    "identity_potential",
    "build_adaptive_potential",
    "build_refined_potential",
    "potential_value",
    "initial_value_bound",
    "default_alpha",
    "potential_to_csv",
]

_LOG_SWITCH = math.log(1e300)


@dataclass(frozen=True, eq=False)
class Potential:
    """Weights ``g`` of a potential function plus how they were built.

    ``cap`` holds the per-position ceiling of the construction (``gamma``
    for the adaptive one, ``(1+1/(n-1))^(i-1)`` for the refined one).
    When the adaptive ceiling overflows float64, ``g`` may contain ``inf``
    and ``log_g`` carries the finite logarithms.
    """

    g: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    cap: np.ndarray | None = None
    log_g: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.g.size)


def identity_potential(n: int) -> Potential:
    return Potential(np.ones(n), "identity", {}, np.ones(n), np.zeros(n))


def default_alpha(n: int) -> float:
    """``ln ln n``, kept strictly above 1."""
    lnln = math.log(math.log(n)) if n > math.e else 0.0
    return max(lnln, 1.0 + 1e-6)


def _gamma_ratio(n: int, p: float, alpha: float) -> tuple[float, float]:
    """Return ``(q, log(1+q))`` for ``q = alpha p / (1-p)^(n-1)``."""
    log_q = math.log(alpha) + math.log(p) - (n - 1) * math.log1p(-p)
    if log_q > 700:
        return math.inf, log_q
    q = math.exp(log_q)
    return q, math.log1p(q)


def build_adaptive_potential(f: LinearFunction, p: float, alpha: float | None = None) -> Potential:
    if not 0 < p < 1:
        raise ValueError("p must satisfy 0 < p < 1")
    n = f.n
    if alpha is None:
        alpha = default_alpha(n)
    if alpha <= 1:
        raise ValueError("alpha must be greater than 1")
    w = f.weights
    q, step = _gamma_ratio(n, p, alpha)
    log_gamma = step * np.arange(n)

    if log_gamma[-1] < _LOG_SWITCH:
        gamma = (1.0 + q) ** np.arange(n, dtype=np.float64)
        g = np.empty(n)
        g[0] = 1.0
        for i in range(1, n):
            g[i] = min(gamma[i], g[i - 1] * (w[i] / w[i - 1]))
        log_g = np.log(g)
    else:
        # compare on logs once gamma leaves the float range
        with np.errstate(over="ignore"):
            gamma = np.exp(log_gamma)
        log_w = np.log(w)
        log_g = np.empty(n)
        log_g[0] = 0.0
        for i in range(1, n):
            log_g[i] = min(log_gamma[i], log_g[i - 1] + log_w[i] - log_w[i - 1])
        with np.errstate(over="ignore"):
            g = np.exp(log_g)
    return Potential(g, "adaptive", {"p": p, "alpha": alpha}, gamma, log_g)


def build_refined_potential(f: LinearFunction) -> Potential:
    n = f.n
    if n < 2:
        raise ValueError("the refined potential needs n >= 2")
    w = f.weights
    base = 1.0 + 1.0 / (n - 1)
    first = np.empty(n, dtype=np.int64)
    first[0] = 0
    for i in range(1, n):
        # weights are sorted, so equal weights form contiguous blocks
        first[i] = first[i - 1] if w[i] == w[i - 1] else i
    g = base ** first.astype(np.float64)
    cap = base ** np.arange(n, dtype=np.float64)
    return Potential(g, "refined", {"p": 1.0 / n}, cap, np.log(g))


def potential_value(pot: Potential, x) -> float:
    bits = as_bits(x, pot.n).astype(bool)
    return math.fsum(pot.g[bits])


def initial_value_bound(kind: str, n: int, p: float | None = None, alpha: float | None = None) -> float:
    """Upper bound on ``ln g(x)`` over all search points ``x``.

    adaptive: ``n alpha p (1-p)^(1-n) + ln(1/p) + (n-1) ln(1-p)``;
    refined: ``ln n + 1``; identity: ``ln n``.
    """
    if kind == "refined":
        return math.log(n) + 1.0
    if kind == "identity":
        return math.log(n)
    if kind == "adaptive":
        if p is None or not 0 < p < 1:
            raise ValueError("adaptive bound needs 0 < p < 1")
        if alpha is None:
            alpha = default_alpha(n)
        if alpha <= 1:
            raise ValueError("alpha must be greater than 1")
        inv_pow = math.exp(-(n - 1) * math.log1p(-p))
        return n * alpha * p * inv_pow + math.log(1.0 / p) + (n - 1) * math.log1p(-p)
    raise ValueError(f"unknown potential kind {kind!r}")


def potential_to_csv(pot: Potential, f: LinearFunction, out=None) -> str:
    """Write rows ``i, w_i, gamma_i, g_i`` (1-based ``i``); returns the text."""
    if pot.n != f.n:
        raise ValueError("potential and function dimensions differ")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "w_i", "gamma_i", "g_i"])
    cap = pot.cap if pot.cap is not None else np.full(pot.n, np.nan)
    for i in range(pot.n):
        writer.writerow([i + 1, repr(float(f.weights[i])), repr(float(cap[i])), repr(float(pot.g[i]))])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text
