"""Mutation operator and the elitist / mutation-based EA simulators.

Every replication draws from its own PCG64 stream derived from
``SeedSequence([master_seed, stream, rep])``; a replication's result
therefore depends only on those three integers and the configuration,
never on how many other replications run alongside it.

Mutation samples the number of flipped bits from Binomial(n, p) and then
picks that many distinct positions with a partial Fisher-Yates shuffle,
which has the same law as independent per-bit flips. When ``n * p`` is
large the per-bit Bernoulli draws are cheaper and are used instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .functions import LinearFunction, as_bits, evaluate, function_from_spec

__all__ = [
    "DEFAULT_CAP",
    "DEFAULT_SEED",
    "RunConfig",
    "RunRecord",
    "rng_for",
    "mutate",
    "mutate_per_bit",
    "select_best_index",
    "run_oneone_ea",
    "run_oneone_ea_mu",
    "run_mutation_based_ea",
    "SELECTORS",
]

DEFAULT_CAP = 10**7
DEFAULT_SEED = 20121

_RECORD_MODES = {None: 0, "none": 0, "ones": 1, "potential": 2}


def rng_for(master_seed: int, rep: int = 0, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, stream, rep])))


# --------------------------------------------------------------------------
# compiled kernels


_PER_BIT_THRESHOLD = 24.0


@numba.njit(cache=True)
def _draw_flips(rng, n, p, perm):
    # Positions end up in perm[:k]. The shuffle path needs perm to hold a
    # permutation of 0..n-1; the per-bit path (many expected flips) does
    # not, and a given p always takes the same path.
    if n * p > _PER_BIT_THRESHOLD:
        k = 0
        for i in range(n):
            if rng.random() < p:
                perm[k] = i
                k += 1
        return k
    k = rng.binomial(n, p)
    for j in range(k):
        r = j + int(rng.random() * (n - j))
        if r >= n:
            r = n - 1
        tmp = perm[j]
        perm[j] = perm[r]
        perm[r] = tmp
    return k


@numba.njit(cache=True)
def _accepts(x, w, superinc, perm, k):
    if k == 0:
        return True
    if superinc:
        top = -1
        for j in range(k):
            if perm[j] > top:
                top = perm[j]
        return x[top] == 1
    delta = 0.0
    for j in range(k):
        i = perm[j]
        if x[i]:
            delta -= w[i]
        else:
            delta += w[i]
    return delta <= 0.0


@numba.njit(cache=True)
def _compare(a, b, w, superinc):
    """Sign of f(a) - f(b)."""
    n = a.size
    if superinc:
        for i in range(n - 1, -1, -1):
            if a[i] != b[i]:
                return 1 if a[i] > b[i] else -1
        return 0
    fa = 0.0
    fb = 0.0
    for i in range(n):
        if a[i]:
            fa += w[i]
        if b[i]:
            fb += w[i]
    if fa < fb:
        return -1
    if fa > fb:
        return 1
    return 0


@numba.njit(cache=True)
def _reservoir_replace(rng, ties):
    # keeps each of `ties` equal candidates with probability 1/ties
    return rng.integers(0, ties) == 0


@numba.njit(cache=True)
def _record_row(buf, nrec, step, x, w, g):
    if nrec == buf.shape[0]:
        bigger = np.empty((2 * buf.shape[0], 4))
        bigger[:nrec] = buf[:nrec]
        buf = bigger
    fval = 0.0
    gval = 0.0
    ones = 0
    for i in range(x.size):
        if x[i]:
            fval += w[i]
            ones += 1
            if g.size == x.size:
                gval += g[i]
    buf[nrec, 0] = step
    buf[nrec, 1] = fval
    buf[nrec, 2] = gval if g.size == x.size else np.nan
    buf[nrec, 3] = ones
    return buf, nrec + 1


@numba.njit(cache=True)
def _simulate(rng, w, superinc, p, mu, cap, record, thin, g):
    n = w.size
    x = np.zeros(n, dtype=np.uint8)
    cand = np.zeros(n, dtype=np.uint8)
    perm = np.arange(n)
    buf = np.empty((64 if record else 0, 4))
    nrec = 0

    ties = 0
    for t in range(mu):
        cones = 0
        for i in range(n):
            cand[i] = rng.integers(0, 2)
            cones += cand[i]
        if cones == 0:
            x[:] = cand
            if record:
                buf, nrec = _record_row(buf, nrec, 0, x, w, g)
            return t + 1, False, 0, buf[:nrec]
        if t == 0:
            x[:] = cand
            ties = 1
        else:
            c = _compare(cand, x, w, superinc)
            if c < 0:
                x[:] = cand
                ties = 1
            elif c == 0:
                ties += 1
                if _reservoir_replace(rng, ties):
                    x[:] = cand

    ones = 0
    for i in range(n):
        ones += x[i]
    init_ones = ones
    if record:
        buf, nrec = _record_row(buf, nrec, 0, x, w, g)

    steps = 0
    while ones > 0 and steps < cap:
        k = _draw_flips(rng, n, p, perm)
        if _accepts(x, w, superinc, perm, k):
            for j in range(k):
                i = perm[j]
                if x[i]:
                    x[i] = 0
                    ones -= 1
                else:
                    x[i] = 1
                    ones += 1
        steps += 1
        if record and (steps % thin == 0 or ones == 0):
            buf, nrec = _record_row(buf, nrec, steps, x, w, g)
    return mu + steps, ones > 0, init_ones, buf[:nrec]


# --------------------------------------------------------------------------
# mutation


def mutate(x, p: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit of ``x`` independently with probability ``p``."""
    bits = as_bits(x).copy()
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    perm = np.arange(bits.size)
    k = _draw_flips(rng, bits.size, p, perm)
    bits[perm[:k]] ^= 1
    return bits


def mutate_per_bit(x, p: float, rng: np.random.Generator) -> np.ndarray:
    """Reference mutation: one Bernoulli draw per bit."""
    bits = as_bits(x)
    return bits ^ (rng.random(bits.size) < p).astype(np.uint8)


def select_best_index(fvalues, rng: np.random.Generator) -> int:
    """Index of a minimal value, ties broken uniformly at random."""
    vals = np.asarray(fvalues)
    best = 0
    ties = 1
    for i in range(1, vals.size):
        if vals[i] < vals[best]:
            best, ties = i, 1
        elif vals[i] == vals[best]:
            ties += 1
            if _reservoir_replace(rng, ties):
                best = i
    return best


# --------------------------------------------------------------------------
# runs


@dataclass
class RunConfig:
    """One replication of one experiment cell.

    ``record`` selects what the trajectory keeps: ``None`` (nothing),
    ``"ones"`` (step, f, ones-count) or ``"potential"`` (also the value of
    ``potential``), sampled every ``thin`` mutation steps plus the final one.
    """

    function: LinearFunction
    p: float
    mu: int = 1
    cap: int = DEFAULT_CAP
    master_seed: int = DEFAULT_SEED
    rep: int = 0
    stream: int = 0
    record: str | None = None
    potential: object | None = None
    thin: int = 1

    def __post_init__(self):
        if isinstance(self.function, dict):
            self.function = function_from_spec(self.function)
        if self.mu < 1:
            raise ValueError("mu must be at least 1")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.record not in _RECORD_MODES:
            raise ValueError(f"unknown recording policy {self.record!r}")
        if self.record == "potential":
            if self.potential is None:
                raise ValueError("recording potential values needs a potential")
            if len(self.potential.g) != self.function.n:
                raise ValueError("potential and function dimensions differ")

    def rng(self) -> np.random.Generator:
        return rng_for(self.master_seed, self.rep, self.stream)

    def to_json(self) -> dict:
        return {
            "function": self.function.spec,
            "p": self.p,
            "mu": self.mu,
            "cap": self.cap,
            "master_seed": self.master_seed,
            "rep": self.rep,
            "stream": self.stream,
            "record": self.record,
            "thin": self.thin,
        }


@dataclass
class RunRecord:
    """Outcome of a replication.

    ``T`` counts f-evaluations including the initial ones; for a capped
    run it equals ``mu + cap`` and ``capped`` is set.
    """

    T: int
    capped: bool
    init_ones: int
    rep: int = 0
    seed: int = DEFAULT_SEED
    trajectory: dict | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"rep": self.rep, "T": self.T, "capped": self.capped,
                "init_ones": self.init_ones, "seed": self.seed}


def _check_p(p: float, upper: float = 1.0):
    if not 0 < p < 1:
        raise ValueError("mutation probability must satisfy 0 < p < 1")
    if p > upper:
        raise ValueError(f"mutation probability must be at most {upper}")


def _trajectory(rows: np.ndarray, mode: int) -> dict | None:
    if mode == 0:
        return None
    traj = {
        "step": rows[:, 0].astype(np.int64),
        "f": rows[:, 1].copy(),
        "ones": rows[:, 3].astype(np.int64),
    }
    if mode == 2:
        traj["potential"] = rows[:, 2].copy()
    return traj


def run_oneone_ea_mu(config: RunConfig) -> RunRecord:
    """(1+1) EA preceded by ``mu`` uniform samples; the best one (ties
    uniform) becomes the starting point."""
    _check_p(config.p)
    f = config.function
    mode = _RECORD_MODES[config.record]
    g = np.asarray(config.potential.g, dtype=np.float64) if mode == 2 else np.empty(0)
    T, capped, init_ones, rows = _simulate(
        config.rng(), f.weights, f.superincreasing, float(config.p),
        int(config.mu), int(config.cap), mode, int(config.thin), g,
    )
    return RunRecord(int(T), bool(capped), int(init_ones), config.rep,
                     config.master_seed, _trajectory(rows, mode))


def run_oneone_ea(config: RunConfig) -> RunRecord:
    """The plain (1+1) EA; accepts offspring that are not worse."""
    if config.mu != 1:
        raise ValueError("run_oneone_ea needs mu == 1; use run_oneone_ea_mu")
    return run_oneone_ea_mu(config)


# --------------------------------------------------------------------------
# general mutation-based scheme

Selector = Callable[[int, np.ndarray, np.random.Generator], int]


def best_oldest(t: int, fvalues: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.argmin(fvalues))


def best_newest(t: int, fvalues: np.ndarray, rng: np.random.Generator) -> int:
    # newest among the minimal points: this is exactly the (1+1) EA's parent
    return int(t - np.argmin(fvalues[::-1]))


def uniform_parent(t: int, fvalues: np.ndarray, rng: np.random.Generator) -> int:
    return int(rng.integers(0, t + 1))


def best_uniform_ties(t: int, fvalues: np.ndarray, rng: np.random.Generator) -> int:
    return select_best_index(fvalues, rng)


SELECTORS: dict[str, Selector] = {
    "best": best_oldest,
    "best-newest": best_newest,
    "best-uniform": best_uniform_ties,
    "uniform": uniform_parent,
}


def run_mutation_based_ea(config: RunConfig, selector: Selector | str) -> RunRecord:
    """Mutation-based EA scheme with a pluggable parent selection rule.

    ``selector(t, fvalues, rng)`` sees the current time and the f-values of
    ``x_0, ..., x_t`` and returns the index of the parent to mutate.
    """
    if isinstance(selector, str):
        selector = SELECTORS[selector]
    _check_p(config.p, upper=0.5)
    f = config.function
    n = f.n
    rng = config.rng()
    points: list[np.ndarray] = []
    fvals = np.empty(max(64, config.mu))
    ones_hist: list[int] = []

    def push(x):
        nonlocal fvals
        t = len(points)
        if t == fvals.size:
            fvals = np.concatenate([fvals, np.empty(t)])
        points.append(x)
        fvals[t] = evaluate(f, x)
        ones_hist.append(int(x.sum()))
        return ones_hist[-1] == 0

    for _ in range(config.mu):
        if push(rng.integers(0, 2, n, dtype=np.uint8)):
            return _mb_record(config, points, ones_hist, capped=False)
    steps = 0
    while steps < config.cap:
        t = len(points) - 1
        idx = selector(t, fvals[: t + 1], rng)
        if not 0 <= idx <= t:
            raise IndexError(f"selector returned parent index {idx} outside [0, {t}]")
        steps += 1
        if push(mutate(points[idx], config.p, rng)):
            return _mb_record(config, points, ones_hist, capped=False)
    return _mb_record(config, points, ones_hist, capped=True)


def _mb_record(config, points, ones_hist, capped):
    mu = config.mu
    init_ones = min(ones_hist[:mu])
    traj = None
    if config.record is not None and config.record != "none":
        traj = {"step": np.arange(len(points)), "ones": np.array(ones_hist)}
    return RunRecord(len(points), capped, init_ones, config.rep, config.master_seed, traj)
