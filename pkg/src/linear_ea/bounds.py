"""Closed-form runtime bounds.

All calculators are pure functions of their arguments. Bounds whose exact
statement carries ``o(1)`` factors or ``O(1)`` additive terms return the
leading expression only; the corresponding :class:`BoundReport` sets
``asymptotic_terms_dropped`` and callers compare with inequalities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

__all__ = [
    "BoundReport",
    "mult_drift_upper",
    "mult_drift_lower",
    "additive_drift_lower",
    "general_upper_bound",
    "constant_mut_upper",
    "constant_mut_lower",
    "refined_upper_bound",
    "general_lower_bound",
    "onemax_drift_upper",
    "bound_table",
]


@dataclass(frozen=True)
class BoundReport:
    """A single evaluated bound.

    ``kind`` is one of ``expectation-upper``, ``expectation-lower`` or
    ``tail``; tail reports store the threshold in ``value`` and the
    probability bound in ``tail_prob``.
    """

    bound: str
    kind: str
    inputs: dict
    value: float
    asymptotic_terms_dropped: bool = False
    tail_prob: float | None = None
    notes: str = field(default="", compare=False)

    def to_json(self) -> dict:
        return asdict(self)


def _pow1m(p: float, e: float) -> float:
    """``(1-p)**e`` via ``exp(e * log1p(-p))``; overflows to ``inf``."""
    x = e * math.log1p(-p)
    return math.inf if x > 709.0 else math.exp(x)


def mult_drift_upper(delta: float, s0: float, t: float = 0.0) -> tuple[float, float, float]:
    """Multiplicative drift upper bound.

    Returns ``(expectation_bound, tail_threshold, tail_prob)`` where
    ``E(T) <= (ln s0 + 1)/delta`` and
    ``P(T > (ln s0 + t)/delta) <= exp(-t)``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if s0 < 1:
        raise ValueError("s0 must be at least 1 (the state space has minimum 1)")
    if t < 0:
        raise ValueError("t must be non-negative")
    ls = math.log(s0)
    return (ls + 1.0) / delta, (ls + t) / delta, math.exp(-t)


def mult_drift_lower(delta: float, beta: float, s0: float, smin: float) -> float:
    """``((ln s0 - ln smin)/delta) * (1-beta)/(1+beta)``."""
    if not 0 < delta <= 1 or not 0 < beta <= 1:
        raise ValueError("delta and beta must lie in (0, 1]")
    if smin <= 0:
        raise ValueError("smin must be positive")
    if s0 <= smin:
        raise ValueError("s0 must exceed smin")
    return (math.log(s0) - math.log(smin)) / delta * (1.0 - beta) / (1.0 + beta)


def additive_drift_lower(g: float, u: float) -> float:
    """Expected time to accumulate ``g`` with per-step expectation at most ``u``."""
    if g <= 0 or u <= 0:
        raise ValueError("g and u must be positive")
    return g / u


def _check_alpha_p(p: float, alpha: float):
    if not 0 < p < 1:
        raise ValueError("p must satisfy 0 < p < 1")
    if alpha <= 1:
        raise ValueError("alpha must be greater than 1")


def general_upper_bound(n: int, p: float, alpha: float, t: float = 1.0) -> float:
    """Runtime bound ``b(t)`` for any linear function and any ``0 < p < 1``.

    The (1+1) EA finishes within ``b(t)`` steps with probability at least
    ``1 - exp(-t)``; ``b(1)`` bounds the expectation.
    """
    _check_alpha_p(p, alpha)
    if t < 0:
        raise ValueError("t must be non-negative")
    inv = _pow1m(p, 1 - n)
    first = n * alpha**2 * inv / (alpha - 1)
    second = alpha / (alpha - 1) * (math.log(1 / p) + (n - 1) * math.log1p(-p) + t) / p
    return inv * (first + second)


def _check_constant_mut(n: int, c: float):
    if c <= 0:
        raise ValueError("c must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")


def constant_mut_upper(n: int, c: float) -> float:
    """Leading term ``(e^c/c) n ln n`` of the upper bound for ``p = c/n``."""
    _check_constant_mut(n, c)
    return math.exp(c) / c * n * math.log(n)


def constant_mut_lower(n: int, c: float) -> float:
    """Leading term ``(e^c/c) n ln n`` of the lower bound for ``p = c/n``."""
    _check_constant_mut(n, c)
    return math.exp(c) / c * n * math.log(n)


def refined_upper_bound(n: int, t: float | None = None):
    """Bound for ``p = 1/n``: ``e n ln n + 2 e n`` (additive ``O(1)`` dropped).

    With ``t`` given, returns ``(expectation_bound, tail_threshold)`` where
    the runtime exceeds ``e n (ln n + t + 1)`` with probability at most
    ``exp(-t)``.
    """
    if n < 4:
        raise ValueError("the refined bound needs n >= 4")
    en = math.e * n
    expectation = en * math.log(n) + 2 * en
    if t is None:
        return expectation
    if t < 0:
        raise ValueError("t must be non-negative")
    return expectation, en * (math.log(n) + t + 1)


def general_lower_bound(n: int, p: float) -> float:
    """``(1-p)^(-n) (1/p) min(ln n, ln(1/(p^3 n^2)))``, ``(1-o(1))`` dropped.

    Valid for mutation-based EAs when ``p = O(n^(-2/3-eps))``.
    """
    if not 0 < p < 1:
        raise ValueError("p must satisfy 0 < p < 1")
    inner = -(3 * math.log(p) + 2 * math.log(n))
    if inner <= 0:
        raise ValueError("outside theorem regime: ln(1/(p^3 n^2)) <= 0")
    if p > 0.5:
        warnings.warn("p > 1/2 lies outside the mutation-based EA definition", stacklevel=2)
    return _pow1m(p, -n) / p * min(math.log(n), inner)


def onemax_drift_upper(i: int, n: int, p: float) -> float:
    """Upper bound ``i p (1 - p + i p^2/(1-p))^(n-i)`` on the expected
    one-step decrease of the ones-count of the (1+1) EA on OneMax."""
    if not 0 <= i <= n:
        raise ValueError("need 0 <= i <= n")
    if not 0 < p < 1:
        raise ValueError("p must satisfy 0 < p < 1")
    return i * p * (1 - p + i * p * p / (1 - p)) ** (n - i)


def bound_table(n: int, p: float, alpha: float = 2.0, t: float = 1.0) -> list[BoundReport]:
    """Every bound that applies to ``(n, p, alpha, t)``."""
    inputs = {"n": n, "p": p, "alpha": alpha, "t": t}
    rows = [
        BoundReport("general-upper", "expectation-upper", dict(inputs, t=1.0),
                    general_upper_bound(n, p, alpha, 1.0)),
        BoundReport("general-upper", "tail", inputs,
                    general_upper_bound(n, p, alpha, t), tail_prob=math.exp(-t)),
    ]
    c = p * n
    rows.append(BoundReport("constant-mut-upper", "expectation-upper", {"n": n, "c": c},
                            constant_mut_upper(n, c), asymptotic_terms_dropped=True))
    rows.append(BoundReport("constant-mut-lower", "expectation-lower", {"n": n, "c": c},
                            constant_mut_lower(n, c), asymptotic_terms_dropped=True))
    if n >= 4:
        exp_bound, thr = refined_upper_bound(n, t)
        note = "" if math.isclose(p, 1 / n) else "only valid for p = 1/n"
        rows.append(BoundReport("refined-upper", "expectation-upper", {"n": n}, exp_bound,
                                asymptotic_terms_dropped=True, notes=note))
        rows.append(BoundReport("refined-upper", "tail", {"n": n, "t": t}, thr,
                                asymptotic_terms_dropped=True, tail_prob=math.exp(-t), notes=note))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            low = general_lower_bound(n, p)
        rows.append(BoundReport("general-lower", "expectation-lower", {"n": n, "p": p}, low,
                                asymptotic_terms_dropped=True))
    except ValueError as exc:
        rows.append(BoundReport("general-lower", "expectation-lower", {"n": n, "p": p},
                                math.nan, True, notes=str(exc)))
    return rows
