"""Exact small-scale oracles.

* distribution of the ones-count after mutating a point with ``i`` ones,
  in floating point (log-domain binomials, usable up to n ~ 2000) or in
  exact rational arithmetic when ``p`` is a :class:`fractions.Fraction`;
* the (1+1) EA on OneMax as a Markov chain on the ones-count, with
  expected hitting times of the optimum;
* the exact expected one-step change of a potential by enumerating all
  ``2**n`` mutation masks (``n <= 16``);
* checkers built on top of these that return a :class:`Verdict`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .functions import LinearFunction, as_bits, make_family
from .potentials import Potential, build_adaptive_potential, build_refined_potential, identity_potential

__all__ = [
    "OnesDistribution",
    "OneMaxChain",
    "Verdict",
    "exact_mutation_ones_distribution",
    "check_cdf_monotonicity",
    "solve_onemax_chain",
    "onemax_drift_exact",
    "exact_one_step_drift",
    "exact_one_step_drifts",
    "verify_drift_condition",
    "check_onemax_drift_bound",
    "run_verification_suite",
    "MAX_ENUMERATION_N",
]

MAX_ENUMERATION_N = 16
RESIDUAL_LIMIT = 1e-9


@dataclass(frozen=True, eq=False)
class OnesDistribution:
    """``probs[j] = P(ones(mut(x)) = j)`` for a source with ``i`` ones."""

    n: int
    i: int
    p: float | Fraction
    probs: np.ndarray | tuple
    residual: float = 0.0

    def cdf(self):
        if isinstance(self.probs, tuple):
            out, acc = [], Fraction(0)
            for q in self.probs:
                acc += q
                out.append(acc)
            return tuple(out)
        return np.cumsum(self.probs)

    def mean(self):
        return sum(j * q for j, q in enumerate(self.probs))


@dataclass
class Verdict:
    """Outcome of a checker. ``witness`` describes the first violation."""

    name: str
    passed: bool
    checked: int = 0
    witness: dict | None = None
    info: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


# --------------------------------------------------------------------------
# mutation ones-count distribution


def _log_binom_pmf(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1)
    logc = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
    return logc + k * math.log(p) + (m - k) * math.log1p(-p)


def _float_ones_distribution(i: int, n: int, p: float) -> tuple[np.ndarray, float]:
    if p in (0.0, 1.0):
        probs = np.zeros(n + 1)
        probs[i if p == 0.0 else n - i] = 1.0
        return probs, 0.0
    kept = np.exp(_log_binom_pmf(i, p))[::-1]  # index k: i - A = k
    gained = np.exp(_log_binom_pmf(n - i, p))
    probs = np.convolve(kept, gained)
    total = probs.sum()
    residual = abs(total - 1.0)
    if residual > RESIDUAL_LIMIT:
        raise ArithmeticError(f"ones distribution lost {residual:.3g} probability mass")
    return probs / total, residual


def _exact_numerators(i: int, n: int, num: int, den: int) -> list[int]:
    """Integer numerators of ``P(ones = j)`` over the common denominator ``den**n``."""
    q = den - num
    pw = [num**k for k in range(n + 1)]
    qw = [q**k for k in range(n + 1)]
    ci = [math.comb(i, a) for a in range(i + 1)]
    cz = [math.comb(n - i, b) for b in range(n - i + 1)]
    out = [0] * (n + 1)
    for a in range(i + 1):
        for b in range(n - i + 1):
            flips = a + b
            out[i - a + b] += ci[a] * cz[b] * pw[flips] * qw[n - flips]
    return out


def _as_fraction(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


def exact_mutation_ones_distribution(i: int, n: int, p) -> OnesDistribution:
    """Law of ``(i - A) + B`` with ``A ~ Bin(i, p)``, ``B ~ Bin(n-i, p)``.

    Passing ``p`` as a :class:`~fractions.Fraction` yields exact rational
    probabilities (a tuple of Fractions); a float yields a numpy array.
    """
    if not 0 <= i <= n:
        raise ValueError("need 0 <= i <= n")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if isinstance(p, Fraction):
        nums = _exact_numerators(i, n, p.numerator, p.denominator)
        den = p.denominator**n
        return OnesDistribution(n, i, p, tuple(Fraction(v, den) for v in nums))
    probs, residual = _float_ones_distribution(i, n, float(p))
    return OnesDistribution(n, i, float(p), probs, residual)


def check_cdf_monotonicity(n: int, p, max_pointwise: int = 20) -> Verdict:
    """Check ``P(ones(mut(a)) <= j) >= P(ones(mut(b)) <= j)`` whenever
    ``ones(a) < ones(b)``, for every ``j``, in exact arithmetic.

    The claim is expected for ``p <= 1/2``; larger ``p`` may be explored and
    then yields violations. As side information the verdict lists pairs
    where the pointwise form ``P(= j)`` fails for some ``j < ones(a)``.
    """
    pf = _as_fraction(p)
    den = pf.denominator
    cdfs = []
    pmfs = []
    for i in range(n + 1):
        nums = _exact_numerators(i, n, pf.numerator, den)
        pmfs.append(nums)
        acc, row = 0, []
        for v in nums:
            acc += v
            row.append(acc)
        cdfs.append(row)
    witness = None
    pointwise = []
    checked = 0
    for ia in range(n + 1):
        for ib in range(ia + 1, n + 1):
            for j in range(n + 1):
                checked += 1
                if witness is None and cdfs[ia][j] < cdfs[ib][j]:
                    witness = {"i_a": ia, "i_b": ib, "j": j, "p": float(pf),
                               "cdf_a": Fraction(cdfs[ia][j], den**n),
                               "cdf_b": Fraction(cdfs[ib][j], den**n)}
                if j < ia and pmfs[ia][j] < pmfs[ib][j] and len(pointwise) < max_pointwise:
                    pointwise.append((ia, ib, j))
    return Verdict("cdf-monotonicity", witness is None, checked, witness,
                   {"n": n, "p": float(pf), "pointwise_pmf_violations": pointwise})


# --------------------------------------------------------------------------
# OneMax chain


@dataclass(frozen=True, eq=False)
class OneMaxChain:
    """Ones-count chain of the (1+1) EA on OneMax.

    ``P[i, j]`` is the post-selection transition probability (zero for
    ``j > i``), ``expected_steps[i]`` the expected number of mutation steps
    to reach 0 from ``i`` and ``mean_runtime`` the expected number of
    f-evaluations from a uniform random start (initial evaluation included).
    """

    n: int
    p: float
    P: np.ndarray
    expected_steps: np.ndarray
    mean_runtime: float
    residual: float

    def drift(self, i: int) -> float:
        """Expected one-step decrease of the ones-count at state ``i``."""
        j = np.arange(i)
        return float(np.dot(self.P[i, :i], i - j))

    def dense_expected_steps(self) -> np.ndarray:
        """Expected steps from a general dense solve of ``(I - Q) E = 1``."""
        Q = self.P[1:, 1:]
        E = np.linalg.solve(np.eye(self.n) - Q, np.ones(self.n))
        return np.concatenate([[0.0], E])


def solve_onemax_chain(n: int, p: float, limit: int = 2000) -> OneMaxChain:
    if n < 1 or n > limit:
        raise ValueError(f"n must lie in [1, {limit}]")
    if not 0 < p < 1:
        raise ValueError("p must satisfy 0 < p < 1")
    P = np.zeros((n + 1, n + 1))
    P[0, 0] = 1.0
    E = np.zeros(n + 1)
    worst = 0.0
    for i in range(1, n + 1):
        probs, residual = _float_ones_distribution(i, n, p)
        worst = max(worst, residual)
        down = probs[:i]
        leave = math.fsum(down)
        if leave <= 0.0:
            raise ArithmeticError(f"absorbing non-target state {i}: leaving probability underflows")
        P[i, :i] = down
        P[i, i] = 1.0 - leave
        E[i] = (1.0 + float(np.dot(down, E[:i]))) / leave
    start = np.exp(_log_binom_pmf(n, 0.5))
    mean = float(np.dot(start, E)) + 1.0
    return OneMaxChain(n, p, P, E, mean, worst)


def onemax_drift_exact(i: int, n: int, p: Fraction) -> Fraction:
    """Exact ``E(i - I')`` for the (1+1) EA on OneMax at ones-count ``i``."""
    pf = _as_fraction(p)
    num, den = pf.numerator, pf.denominator
    q = den - num
    total = 0
    for a in range(1, i + 1):
        ca = math.comb(i, a)
        for b in range(0, min(a, n - i + 1)):
            total += (a - b) * ca * math.comb(n - i, b) * num ** (a + b) * q ** (n - a - b)
    return Fraction(total, den**n)


def check_onemax_drift_bound(nmax: int = 30, p_values=None) -> Verdict:
    """Exact check that the OneMax one-step drift never exceeds
    ``i p (1 - p + i p^2/(1-p))^(n-i)``."""
    if p_values is None:
        p_values = [Fraction(k, 100) for k in range(1, 51)]
    checked = 0
    for pv in p_values:
        pf = _as_fraction(pv)
        for n in range(1, nmax + 1):
            for i in range(n + 1):
                drift = onemax_drift_exact(i, n, pf)
                bound = i * pf * (1 - pf + i * pf * pf / (1 - pf)) ** (n - i)
                checked += 1
                if drift > bound:
                    return Verdict("onemax-drift-bound", False, checked,
                                   {"i": i, "n": n, "p": float(pf),
                                    "drift": float(drift), "bound": float(bound)})
    return Verdict("onemax-drift-bound", True, checked)


# --------------------------------------------------------------------------
# mask enumeration


@lru_cache(maxsize=None)
def _masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    codes = np.arange(2**n, dtype=np.int64)
    masks = ((codes[:, None] >> np.arange(n)) & 1).astype(np.float64)
    flips = masks.sum(axis=1).astype(np.int64)
    masks.setflags(write=False)
    return masks, flips


def exact_one_step_drifts(f: LinearFunction, pot: Potential, points, p: float) -> np.ndarray:
    """Exact ``E(g(a) - g(a_next))`` for each row ``a`` of ``points``."""
    n = f.n
    if n > MAX_ENUMERATION_N:
        raise ValueError(
            f"mask enumeration is limited to n <= {MAX_ENUMERATION_N}; "
            "use the Monte Carlo drift estimator for larger n"
        )
    if pot.n != n:
        raise ValueError("potential and function dimensions differ")
    pts = np.atleast_2d(np.asarray(points)).astype(np.float64)
    if pts.shape[1] != n:
        raise ValueError("dimension mismatch between points and function")
    masks, flips = _masks(n)
    probs = np.exp(flips * math.log(p) + (n - flips) * math.log1p(-p))
    sign = 1.0 - 2.0 * pts  # +1 where a 0 would become 1
    df = masks @ (sign * f.weights).T  # change of f, one column per point
    dg = masks @ (sign * pot.g).T
    if f.superincreasing:
        # sign of df is decided by the most significant flipped bit
        codes = np.arange(2**n)
        top = np.zeros(2**n, dtype=np.int64)
        nz = codes > 0
        top[nz] = np.floor(np.log2(codes[nz])).astype(np.int64)
        accepted = (pts[:, top].T == 1) | ~nz[:, None]
    else:
        accepted = df <= 0.0
    return -(probs[:, None] * np.where(accepted, dg, 0.0)).sum(axis=0)


def exact_one_step_drift(f: LinearFunction, pot: Potential, a, p: float) -> float:
    bits = as_bits(a, f.n)
    return float(exact_one_step_drifts(f, pot, bits[None, :], p)[0])


def _drift_lower_bound(kind: str, n: int, p: float, alpha: float) -> float:
    if kind == "refined":
        return 1.0 / (math.e * n)
    return p * math.exp((n - 1) * math.log1p(-p)) * (1.0 - 1.0 / alpha)


def verify_drift_condition(
    f: LinearFunction,
    kind: str,
    p: float,
    alpha: float = 2.0,
    sample_count: int = 32,
    seed: int = 0,
    tol: float = 1e-12,
) -> Verdict:
    """Check ``E(drift | g(a) = s) >= delta * s`` exactly at selected points.

    ``kind`` picks the potential: ``adaptive`` and ``identity`` are held to
    ``delta = p (1-p)^(n-1) (1 - 1/alpha)``, ``refined`` (which needs
    ``p = 1/n`` and ``n >= 4``) to ``delta = 1/(e n)``. The checked points
    are all-ones, every single-one point and ``sample_count`` random
    non-optimal points.
    """
    n = f.n
    if kind == "adaptive":
        pot = build_adaptive_potential(f, p, alpha)
    elif kind == "refined":
        if n < 4 or not math.isclose(p, 1.0 / n, rel_tol=1e-12):
            raise ValueError("the refined potential is checked for p = 1/n and n >= 4")
        pot = build_refined_potential(f)
    elif kind == "identity":
        pot = identity_potential(n)
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    rng = np.random.default_rng(seed)
    pts = [np.ones(n, dtype=np.uint8), *np.eye(n, dtype=np.uint8)]
    while len(pts) < n + 1 + sample_count:
        x = rng.integers(0, 2, n, dtype=np.uint8)
        if x.any():
            pts.append(x)
    pts = np.array(pts)
    drifts = exact_one_step_drifts(f, pot, pts, p)
    s = pts @ pot.g
    delta = _drift_lower_bound(kind, n, p, alpha)
    margin = drifts - delta * s
    worst = int(np.argmin(margin))
    info = {"n": n, "p": p, "kind": kind, "delta": delta, "worst_margin": float(margin[worst])}
    if margin[worst] < -tol:
        witness = {"point": pts[worst].tolist(), "s": float(s[worst]),
                   "drift": float(drifts[worst]), "bound": float(delta * s[worst])}
        return Verdict(f"drift-{kind}", False, len(pts), witness, info)
    return Verdict(f"drift-{kind}", True, len(pts), None, info)


def random_test_function(index: int, n: int, seed: int = 0) -> LinearFunction:
    """Deterministic mix of random-uniform and random-exponential functions."""
    kind = "random-exponential" if index % 2 == 0 else "random-uniform"
    return make_family(kind, n, seed=seed * 1_000_003 + n * 1009 + index)


def run_verification_suite(nmax: int = 12, functions_per_n: int = 100, seed: int = 0,
                           sample_count: int = 16) -> list[Verdict]:
    """All exact checks up to dimension ``nmax``."""
    verdicts = []
    grid = [Fraction(k, 20) for k in range(1, 11)]
    ok, first = True, None
    checked = 0
    for n in range(1, min(nmax, 20) + 1):
        for pf in grid:
            v = check_cdf_monotonicity(n, pf)
            checked += v.checked
            if not v.passed and first is None:
                ok, first = False, v.witness
    verdicts.append(Verdict("cdf-monotonicity", ok, checked, first))

    for kind in ("adaptive", "refined"):
        ok, first, checked = True, None, 0
        for n in range(4, min(nmax, MAX_ENUMERATION_N) + 1):
            p_values = (1 / n, 2 / n, 0.3) if kind == "adaptive" else (1 / n,)
            for idx in range(functions_per_n):
                f = random_test_function(idx, n, seed)
                for p in p_values:
                    v = verify_drift_condition(f, kind, p, 2.0, sample_count, seed + idx)
                    checked += v.checked
                    if not v.passed and first is None:
                        ok, first = False, dict(v.witness, weights=f.weights.tolist(), p=p)
        verdicts.append(Verdict(f"drift-{kind}", ok, checked, first))

    verdicts.append(check_onemax_drift_bound(min(nmax, 30)))
    return verdicts
