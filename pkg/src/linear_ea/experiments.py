"""Monte Carlo campaigns, summaries and statistical checks.

A campaign is a list of cells (function, n, p, mu, selector) that are each
run for a fixed number of replications. Records are persisted as JSONL,
one line per replication, and summaries as CSV plus a Markdown report.
Every summary can be rebuilt from the JSONL file alone.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import general_lower_bound, general_upper_bound, refined_upper_bound
from .engine import (
    DEFAULT_CAP,
    DEFAULT_SEED,
    RunConfig,
    RunRecord,
    run_mutation_based_ea,
    run_oneone_ea_mu,
)
from .functions import function_from_spec
from .oracles import solve_onemax_chain

__all__ = [
    "Cell",
    "Campaign",
    "CellSummary",
    "CellResult",
    "RecordFormatError",
    "simulate",
    "run_campaign",
    "summarize",
    "read_records",
    "report_from_records",
    "write_summaries_csv",
    "write_markdown",
    "DominanceResult",
    "dominance_test",
    "optimal_p_scan",
    "exact_optimal_c",
    "phase_transition_scan",
    "theoretical_delta",
    "drift_trace_estimator",
]

SUMMARY_COLUMNS = [
    "function", "fseed", "n", "p", "c", "mu", "selector", "reps", "mean", "se",
    "median", "q05", "q25", "q75", "q95", "capped_frac", "ratio_nln",
    "bound_thm6", "bound_thm9", "bound_b1",
]


class RecordFormatError(ValueError):
    """A JSONL record line could not be parsed."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: malformed record ({reason})")
        self.path = path
        self.line_no = line_no


# --------------------------------------------------------------------------
# cells and campaigns


@dataclass(frozen=True)
class Cell:
    """One grid point. Exactly one of ``p`` and ``c`` (with ``p = c/n``) is set.

    ``selector`` names a parent selection rule from
    :data:`linear_ea.engine.SELECTORS`; ``None`` runs the (1+1) EA with
    ``mu`` initial samples.
    """

    function: tuple  # sorted (key, value) pairs of the function spec
    n: int
    p: float | None = None
    c: float | None = None
    mu: int = 1
    selector: str | None = None

    def __post_init__(self):
        if isinstance(self.function, dict):
            object.__setattr__(self, "function", tuple(sorted(self.function.items())))
        if (self.p is None) == (self.c is None):
            raise ValueError("a cell needs exactly one of p and c")
        if self.mu < 1:
            raise ValueError("mu must be at least 1")

    @property
    def prob(self) -> float:
        return float(self.p) if self.p is not None else float(self.c) / self.n

    @property
    def function_spec(self) -> dict:
        return dict(self.function)

    def key(self) -> dict:
        spec = self.function_spec
        return {
            "function": spec.get("kind", "custom"),
            "fseed": spec.get("seed"),
            "n": self.n,
            "p": self.p,
            "c": self.c,
            "mu": self.mu,
            "selector": self.selector,
            **({"kappa": spec["kappa"]} if "kappa" in spec else {}),
            **({"weights": spec["weights"]} if "weights" in spec else {}),
        }

    def key_json(self) -> str:
        return json.dumps(self.key(), sort_keys=True, separators=(",", ":"))

    def stream(self) -> int:
        return zlib.crc32(self.key_json().encode())

    def build_function(self):
        spec = dict(self.function_spec)
        if "weights" in spec:
            return function_from_spec(spec)
        spec.setdefault("n", self.n)
        return function_from_spec(spec)

    @classmethod
    def from_key(cls, key: dict) -> "Cell":
        spec = {}
        if "weights" in key:
            spec["weights"] = key["weights"]
        else:
            spec["kind"] = key["function"]
            if key.get("fseed") is not None:
                spec["seed"] = key["fseed"]
            if "kappa" in key:
                spec["kappa"] = key["kappa"]
        return cls(spec, key["n"], key.get("p"), key.get("c"), key.get("mu", 1), key.get("selector"))


@dataclass
class Campaign:
    cells: list[Cell]
    reps: int = 100
    cap: int = DEFAULT_CAP
    seed: int = DEFAULT_SEED
    output: str | None = None

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("a campaign needs at least 2 replications per cell")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        for cell in self.cells:
            p = cell.prob
            if not 0 < p < 1:
                raise ValueError(f"cell {cell.key()} has invalid mutation probability {p}")
            if cell.selector is not None and p > 0.5:
                raise ValueError(f"cell {cell.key()}: mutation-based EAs need p <= 1/2")

    @classmethod
    def from_json(cls, data: dict) -> "Campaign":
        """Build a campaign from a dict.

        ``cells`` lists explicit cells; ``grid`` is expanded as a cartesian
        product of its list-valued entries ``function``, ``n``, ``p`` or
        ``c``, ``mu`` and ``selector``.
        """
        cells = [Cell(c["function"], c["n"], c.get("p"), c.get("c"), c.get("mu", 1), c.get("selector"))
                 for c in data.get("cells", [])]
        grid = data.get("grid")
        if grid:
            def as_list(v):
                return v if isinstance(v, list) else [v]
            funcs = as_list(grid.get("function", {"kind": "onemax"}))
            ns = as_list(grid["n"])
            mus = as_list(grid.get("mu", 1))
            sels = as_list(grid.get("selector", None))
            if "p" in grid:
                probs = [("p", v) for v in as_list(grid["p"])]
            else:
                probs = [("c", v) for v in as_list(grid.get("c", 1.0))]
            for fn, n, (pk, pv), mu, sel in itertools.product(funcs, ns, probs, mus, sels):
                cells.append(Cell(fn, n, pv if pk == "p" else None, pv if pk == "c" else None, mu, sel))
        if not cells:
            raise ValueError("campaign defines no cells")
        return cls(cells, int(data.get("reps", 100)), int(data.get("cap", DEFAULT_CAP)),
                   int(data.get("seed", DEFAULT_SEED)), data.get("output"))

    def to_json(self) -> dict:
        return {
            "cells": [
                {"function": c.function_spec, "n": c.n, "p": c.p, "c": c.c, "mu": c.mu, "selector": c.selector}
                for c in self.cells
            ],
            "reps": self.reps,
            "cap": self.cap,
            "seed": self.seed,
            "output": self.output,
        }


@dataclass
class CellSummary:
    cell: dict
    reps: int
    mean: float
    se: float
    median: float
    q05: float
    q25: float
    q75: float
    q95: float
    capped_frac: float
    ratio_nln: float
    bound_thm6: float
    bound_thm9: float
    bound_b1: float

    def row(self) -> dict:
        row = {k: self.cell.get(k) for k in ("function", "fseed", "n", "p", "c", "mu", "selector")}
        row.update({k: v for k, v in asdict(self).items() if k != "cell"})
        return row


@dataclass
class CellResult:
    cell: Cell
    records: list[RunRecord]
    summary: CellSummary


# --------------------------------------------------------------------------
# running


def _run_one(cell: Cell, f, rep: int, cap: int, seed: int) -> RunRecord:
    cfg = RunConfig(f, cell.prob, mu=cell.mu, cap=cap, master_seed=seed, rep=rep, stream=cell.stream())
    if cell.selector is None:
        return run_oneone_ea_mu(cfg)
    return run_mutation_based_ea(cfg, cell.selector)


def _run_chunk(cell: Cell, reps: Sequence[int], cap: int, seed: int) -> list[RunRecord]:
    f = cell.build_function()
    return [_run_one(cell, f, r, cap, seed) for r in reps]


def simulate(cell: Cell, reps: int | Iterable[int], cap: int = DEFAULT_CAP, seed: int = DEFAULT_SEED,
             jobs: int = 1) -> list[RunRecord]:
    """Run replications of one cell; the result is independent of ``jobs``."""
    rep_ids = list(range(reps)) if isinstance(reps, int) else list(reps)
    if jobs <= 1 or len(rep_ids) < 2 * jobs:
        return _run_chunk(cell, rep_ids, cap, seed)
    chunks = [rep_ids[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_chunk, [cell] * jobs, chunks, [cap] * jobs, [seed] * jobs))
    out = [r for part in parts for r in part]
    out.sort(key=lambda r: r.rep)
    return out


def runtimes(records: Sequence[RunRecord]) -> tuple[np.ndarray, np.ndarray]:
    T = np.array([r.T for r in records], dtype=np.int64)
    capped = np.array([r.capped for r in records], dtype=bool)
    return T, capped


def summarize(cell: Cell, records: Sequence[RunRecord]) -> CellSummary:
    T, capped = runtimes(records)
    done = T[~capped].astype(np.float64)
    n, p = cell.n, cell.prob
    if done.size:
        mean = float(done.mean())
        se = float(done.std(ddof=1) / math.sqrt(done.size)) if done.size > 1 else math.nan
        median = float(np.median(done))
        q05, q25, q75, q95 = (float(v) for v in np.quantile(done, [0.05, 0.25, 0.75, 0.95]))
    else:
        mean = se = median = q05 = q25 = q75 = q95 = math.nan
    nln = n * math.log(n) if n > 1 else math.nan
    thm6 = refined_upper_bound(n) if n >= 4 and math.isclose(p, 1 / n) else math.nan
    try:
        thm9 = general_lower_bound(n, p) if p <= 0.5 else math.nan
    except ValueError:
        thm9 = math.nan
    b1 = general_upper_bound(n, p, 2.0, 1.0)
    return CellSummary(cell.key(), len(records), mean, se, median, q05, q25, q75, q95,
                       float(capped.mean()) if capped.size else math.nan,
                       mean / nln if nln == nln else math.nan, thm6, thm9, b1)


def _record_line(cell: Cell, rec: RunRecord) -> str:
    return json.dumps({"cell": cell.key(), **rec.to_json()}, sort_keys=True, separators=(",", ":"))


def read_records(path) -> list[tuple[dict, RunRecord]]:
    """Parse a JSONL record file; raises :class:`RecordFormatError` naming the line."""
    out = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rec = RunRecord(int(obj["T"]), bool(obj["capped"]), int(obj["init_ones"]),
                                int(obj["rep"]), int(obj["seed"]))
                key = obj["cell"]
                if not isinstance(key, dict):
                    raise TypeError("cell must be an object")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RecordFormatError(path, line_no, str(exc)) from None
            out.append((key, rec))
    return out


def report_from_records(path) -> list[CellSummary]:
    """Recompute the cell summaries from a JSONL record file."""
    grouped: dict[str, tuple[dict, list[RunRecord]]] = {}
    for key, rec in read_records(path):
        k = json.dumps(key, sort_keys=True)
        grouped.setdefault(k, (key, []))[1].append(rec)
    return [summarize(Cell.from_key(key), sorted(recs, key=lambda r: r.rep)) for key, recs in grouped.values()]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if v != v else repr(v)
    return str(v)


def write_summaries_csv(summaries: Sequence[CellSummary], out) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for s in summaries:
        row = s.row()
        writer.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    text = buf.getvalue()
    Path(out).write_text(text)
    return text


def write_markdown(summaries: Sequence[CellSummary], out, title: str = "Campaign report") -> str:
    cols = ["function", "n", "p", "mu", "selector", "reps", "mean", "se", "median",
            "capped_frac", "ratio_nln", "bound_thm6", "bound_thm9", "bound_b1"]
    lines = [f"# {title}", "", "| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for s in summaries:
        row = s.row()
        if row["p"] is None:
            row["p"] = s.cell["c"] / s.cell["n"]
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:.4g}" if isinstance(v, float) else ("" if v is None else str(v)))
        lines.append("| " + " | ".join(cells) + " |")
    text = "\n".join(lines) + "\n"
    Path(out).write_text(text)
    return text


def _existing_lines(path: Path) -> list[str]:
    """Complete lines of a previous (possibly interrupted) run."""
    if not path.exists():
        return []
    data = path.read_text()
    lines = data.split("\n")
    complete = lines[:-1]  # the last piece lacks its newline or is empty
    good = []
    for line in complete:
        try:
            json.loads(line)
        except json.JSONDecodeError:
            break
        good.append(line)
    return good


def run_campaign(campaign: Campaign, jobs: int = 1, resume: bool = True) -> list[CellResult]:
    """Run every cell and, if ``campaign.output`` is set, persist the results.

    Output files: ``records.jsonl``, ``summary.csv``, ``report.md`` and
    ``campaign.json`` (the effective configuration). With ``resume`` the
    replications already present in ``records.jsonl`` are reused and only
    the missing ones are simulated; the final files are byte-identical to
    those of an uninterrupted run.
    """
    out_dir = Path(campaign.output) if campaign.output else None
    done: dict[str, dict[int, RunRecord]] = {}
    writer = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "campaign.json").write_text(json.dumps(campaign.to_json(), indent=2, sort_keys=True) + "\n")
        rec_path = out_dir / "records.jsonl"
        kept = _existing_lines(rec_path) if resume else []
        for line in kept:
            obj = json.loads(line)
            k = json.dumps(obj["cell"], sort_keys=True, separators=(",", ":"))
            done.setdefault(k, {})[obj["rep"]] = RunRecord(obj["T"], obj["capped"], obj["init_ones"],
                                                           obj["rep"], obj["seed"])
        with open(rec_path, "w") as fh:
            fh.write("".join(line + "\n" for line in kept))
        writer = open(rec_path, "a")

    results = []
    written = {k: set(v) for k, v in done.items()}
    try:
        for cell in campaign.cells:
            k = cell.key_json()
            have = done.get(k, {})
            missing = [r for r in range(campaign.reps) if r not in have]
            fresh = simulate(cell, missing, campaign.cap, campaign.seed, jobs) if missing else []
            if writer is not None:
                for rec in fresh:
                    writer.write(_record_line(cell, rec) + "\n")
                writer.flush()
            merged = dict(have)
            merged.update({r.rep: r for r in fresh})
            records = [merged[r] for r in range(campaign.reps)]
            written.setdefault(k, set()).update(r.rep for r in fresh)
            results.append(CellResult(cell, records, summarize(cell, records)))
    finally:
        if writer is not None:
            writer.close()

    if out_dir is not None:
        _canonicalize(out_dir / "records.jsonl", campaign)
        summaries = [r.summary for r in results]
        write_summaries_csv(summaries, out_dir / "summary.csv")
        write_markdown(summaries, out_dir / "report.md")
    return results


def _canonicalize(path: Path, campaign: Campaign):
    """Rewrite records in cell order then replication order."""
    order = {c.key_json(): i for i, c in enumerate(campaign.cells)}
    lines = [line for line in path.read_text().split("\n") if line]

    def sort_key(line):
        obj = json.loads(line)
        k = json.dumps(obj["cell"], sort_keys=True, separators=(",", ":"))
        return order.get(k, len(order)), obj["rep"]

    lines.sort(key=sort_key)
    path.write_text("".join(line + "\n" for line in lines))


# --------------------------------------------------------------------------
# stochastic dominance


@dataclass
class DominanceResult:
    passed: bool
    epsilon: float
    worst_gap: float  # min over t of F_A(t) - F_B(t)
    worst_t: float
    confidence: float


def _as_runtimes(samples) -> np.ndarray:
    if len(samples) and isinstance(samples[0], RunRecord):
        if any(r.capped for r in samples):
            raise ValueError("capped runs present; censored samples would bias the CDFs")
        return np.array([r.T for r in samples], dtype=np.float64)
    arr = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("capped (non-finite) runtimes present")
    return arr


def dominance_test(a, b, confidence: float = 0.99, capped_a=None, capped_b=None) -> DominanceResult:
    """One-sided DKW test of ``A <=_st B`` (A is stochastically smaller).

    Passes when ``F_A(t) >= F_B(t) - eps`` at every ``t`` with
    ``eps = sqrt(ln(2/(1-confidence)) / (2 min(|A|, |B|)))``; a pass means
    the ordering is not refuted at that confidence.
    """
    for flags in (capped_a, capped_b):
        if flags is not None and np.any(flags):
            raise ValueError("capped runs present; censored samples would bias the CDFs")
    xa = np.sort(_as_runtimes(a))
    xb = np.sort(_as_runtimes(b))
    if xa.size == 0 or xb.size == 0:
        raise ValueError("both samples must be non-empty")
    eps = math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * min(xa.size, xb.size)))
    grid = np.union1d(xa, xb)
    Fa = np.searchsorted(xa, grid, side="right") / xa.size
    Fb = np.searchsorted(xb, grid, side="right") / xb.size
    gap = Fa - Fb
    k = int(np.argmin(gap))
    return DominanceResult(bool(gap[k] >= -eps), eps, float(gap[k]), float(grid[k]), confidence)


# --------------------------------------------------------------------------
# scans


def _cell_for(function: dict | str, n: int, p=None, c=None) -> Cell:
    spec = {"kind": function} if isinstance(function, str) else dict(function)
    spec.pop("n", None)
    return Cell(spec, n, p, c)


def optimal_p_scan(n: int, c_grid: Sequence[float], function: dict | str = "binval", reps: int = 500,
                   seed: int = DEFAULT_SEED, cap: int = DEFAULT_CAP, jobs: int = 1) -> dict:
    """Mean runtime for ``p = c/n`` over ``c_grid``.

    Returns ``{"rows": [...], "argmin": c, "decisive": bool}`` where
    ``decisive`` says that ``c = 1`` beats each grid neighbour by more than
    two combined standard errors.
    """
    if not any(math.isclose(c, 1.0) for c in c_grid):
        raise ValueError("c_grid must contain 1")
    if reps < 200:
        raise ValueError("optimal_p_scan needs at least 200 replications per value")
    rows = []
    for c in c_grid:
        cell = _cell_for(function, n, c=float(c))
        s = summarize(cell, simulate(cell, reps, cap, seed, jobs))
        rows.append({"c": float(c), "p": c / n, "mean": s.mean, "se": s.se, "capped_frac": s.capped_frac,
                     "predicted": math.exp(c) / c * n * math.log(n)})
    means = [r["mean"] if r["capped_frac"] == 0 else math.inf for r in rows]
    best = int(np.argmin(means))
    order = sorted(range(len(rows)), key=lambda i: rows[i]["c"])
    one = next(i for i in order if math.isclose(rows[i]["c"], 1.0))
    pos = order.index(one)
    decisive = True
    for nb in (pos - 1, pos + 1):
        if 0 <= nb < len(order):
            r1, r2 = rows[one], rows[order[nb]]
            if not r2["mean"] - r1["mean"] > 2 * math.hypot(r1["se"], r2["se"]):
                decisive = False
    return {"rows": rows, "argmin": rows[best]["c"], "decisive": decisive}


def exact_optimal_c(n: int, c_grid: Sequence[float]) -> dict:
    """Exact OneMax runtimes over ``c_grid`` from the ones-count chain."""
    rows = [{"c": float(c), "mean": solve_onemax_chain(n, c / n).mean_runtime} for c in c_grid]
    best = min(rows, key=lambda r: r["mean"])
    return {"rows": rows, "argmin": best["c"]}


def phase_transition_scan(n: int, multipliers: Sequence[float] = (), reps: int = 20, cap: int = DEFAULT_CAP,
                          function: dict | str = "onemax", seed: int = DEFAULT_SEED,
                          probabilities: Sequence[float] = (), jobs: int = 1) -> list[dict]:
    """Median runtime and capped fraction for ``p = m ln(n)/n``.

    Explicit ``probabilities`` (for instance above 1/2) are appended as
    extra rows with ``m = None``. The median is ``None`` when at least half
    of the runs hit the cap.
    """
    entries = [(m, m * math.log(n) / n) for m in multipliers] + [(None, p) for p in probabilities]
    rows = []
    for m, p in entries:
        cell = _cell_for(function, n, p=p)
        T, capped = runtimes(simulate(cell, reps, cap, seed, jobs))
        med = np.median(np.where(capped, np.inf, T.astype(np.float64)))
        rows.append({"m": m, "p": p, "median": None if not np.isfinite(med) else float(med),
                     "capped_frac": float(capped.mean()), "reps": reps, "cap": cap})
    return rows


# --------------------------------------------------------------------------
# empirical drift


def theoretical_delta(kind: str, n: int, p: float, alpha: float = 2.0) -> float:
    """Multiplicative drift constant the analysis guarantees for a potential kind."""
    if kind == "adaptive":
        return p * math.exp((n - 1) * math.log1p(-p)) * (1 - 1 / alpha)
    if kind in ("refined", "identity"):
        return 1.0 / (math.e * n)
    raise ValueError(f"unknown potential kind {kind!r}")


@dataclass
class DriftTrace:
    rows: list[dict]
    delta: float
    skipped_bins: int = 0
    pairs: int = 0

    @property
    def passed(self) -> bool:
        return not any(r["flagged"] for r in self.rows)

    @property
    def flagged(self) -> list[dict]:
        return [r for r in self.rows if r["flagged"]]


def drift_trace_estimator(records: Sequence[RunRecord], delta: float, bins: int = 12,
                          min_count: int = 200) -> DriftTrace:
    """Estimate the multiplicative drift from recorded potential trajectories.

    Consecutive recorded states one step apart give pairs
    ``(s, s - s_next)``. The pairs are binned by log-spaced ``s`` and each
    bin reports ``delta_hat = mean(s - s_next) / mean(s)`` with a
    delta-method standard error. Bins with ``delta_hat + 3 se < delta`` are
    flagged; bins with fewer than ``min_count`` pairs are skipped.
    """
    s_all, d_all = [], []
    for rec in records:
        traj = rec.trajectory
        if not traj or "potential" not in traj:
            continue
        step = np.asarray(traj["step"])
        g = np.asarray(traj["potential"])
        ok = np.diff(step) == 1
        s_all.append(g[:-1][ok])
        d_all.append((g[:-1] - g[1:])[ok])
    if not s_all or sum(a.size for a in s_all) == 0:
        raise ValueError("no potential trajectories with consecutive steps to estimate drift from")
    s = np.concatenate(s_all)
    d = np.concatenate(d_all)
    pos = s > 0
    s, d = s[pos], d[pos]
    edges = np.geomspace(s.min(), s.max() * (1 + 1e-12), bins + 1)
    idx = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, bins - 1)
    rows, skipped = [], 0
    for b in range(bins):
        m = idx == b
        count = int(m.sum())
        if count < min_count:
            skipped += count > 0
            continue
        sb, db = s[m], d[m]
        ms = float(sb.mean())
        dh = float(db.mean()) / ms
        resid = db - dh * sb
        se = float(resid.std(ddof=1) / math.sqrt(count)) / ms
        rows.append({"s_lo": float(edges[b]), "s_hi": float(edges[b + 1]), "count": count,
                     "mean_s": ms, "mean_delta": float(db.mean()), "delta_hat": dh, "se": se,
                     "flagged": dh + 3 * se < delta})
    return DriftTrace(rows, delta, skipped, int(s.size))


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)
