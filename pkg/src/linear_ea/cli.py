"""Command-line interface: ``linear-ea {run,sweep,bounds,exact,verify,report}``.

Settings come from built-in defaults, then a JSON ``--config`` file, then
explicit flags, later sources winning. Commands that write an output
directory also write the effective configuration there as JSON.

Exit status: 0 success, 1 usage error, 2 verification failure, 3 I/O or
malformed data.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .bounds import bound_table, onemax_drift_upper
from .engine import DEFAULT_CAP, DEFAULT_SEED, SELECTORS
from .experiments import (
    Campaign,
    Cell,
    RecordFormatError,
    default_jobs,
    report_from_records,
    run_campaign,
    write_markdown,
    write_summaries_csv,
)
from .functions import FAMILIES, make_family
from .oracles import run_verification_suite, solve_onemax_chain
from .potentials import build_adaptive_potential, build_refined_potential, potential_to_csv

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

RUN_DEFAULTS = {"function": "onemax", "fseed": None, "kappa": 5.0, "n": 100, "p": None, "c": 1.0, "mu": 1,
                "selector": None, "reps": 100, "cap": DEFAULT_CAP, "seed": DEFAULT_SEED, "out": None}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sp, seed=True, jobs=False):
    sp.add_argument("--config", help="JSON file with settings; explicit flags override it")
    sp.add_argument("--out", help="output directory")
    if seed:
        sp.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
    if jobs:
        sp.add_argument("--jobs", type=int, help="worker processes (default: available cores); "
                                                 "results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linear-ea", description="Runtime experiments for the (1+1) EA on linear functions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("run", help="run one experiment cell")
    _add_common(sp, jobs=True)
    sp.add_argument("--function", choices=sorted(FAMILIES), help="function family (default onemax)")
    sp.add_argument("--fseed", type=int, help="seed of a random function family")
    sp.add_argument("--kappa", type=float, help="skew of random-exponential weights (default 5)")
    sp.add_argument("--n", type=int, help="number of bits (default 100)")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, help="mutation probability")
    g.add_argument("--c", type=float, help="mutation probability as c/n (default c=1)")
    sp.add_argument("--mu", type=int, help="initial samples (default 1)")
    sp.add_argument("--selector", choices=sorted(SELECTORS), help="run the generic mutation-based EA "
                                                                  "with this parent selection")
    sp.add_argument("--reps", type=int, help="replications (default 100)")
    sp.add_argument("--cap", type=int, help=f"mutation step cap (default {DEFAULT_CAP})")

    sp = sub.add_parser("sweep", help="run a campaign file")
    _add_common(sp, jobs=True)
    sp.add_argument("--reps", type=int, help="override replications per cell")
    sp.add_argument("--cap", type=int, help="override the step cap")

    sp = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    _add_common(sp, seed=False)
    sp.add_argument("--n", type=int, help="number of bits")
    sp.add_argument("--p", type=float, help="mutation probability (default 1/n)")
    sp.add_argument("--alpha", type=float, help="potential parameter alpha > 1 (default 2)")
    sp.add_argument("--t", type=float, help="tail parameter t >= 0 (default 1)")
    sp.add_argument("--format", choices=["text", "json"], help="output format (default text)")

    sp = sub.add_parser("exact", help="exact OneMax chain and potential tables")
    _add_common(sp, seed=False)
    sp.add_argument("--n", type=int, help="number of bits")
    sp.add_argument("--p", type=float, help="mutation probability (default 1/n)")
    sp.add_argument("--potential", choices=["adaptive", "refined"], help="also write this potential")
    sp.add_argument("--function", choices=sorted(FAMILIES), help="function for --potential (default binval)")
    sp.add_argument("--fseed", type=int, help="seed of a random function family")
    sp.add_argument("--alpha", type=float, help="alpha of the adaptive potential (default 2)")

    sp = sub.add_parser("verify", help="run the exact verification suite")
    _add_common(sp)
    sp.add_argument("--nmax", type=int, help="largest dimension to enumerate (default 12)")
    sp.add_argument("--functions-per-n", type=int, help="random functions per dimension (default 100)")

    sp = sub.add_parser("report", help="rebuild summaries from a records file")
    _add_common(sp, seed=False)
    sp.add_argument("--records", help="records.jsonl (default: OUT/records.jsonl)")
    return parser


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise RecordFormatError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise RecordFormatError(path, 1, "config must be a JSON object")
    return data


def _merge(defaults: dict, config: dict, args: argparse.Namespace) -> dict:
    out = dict(defaults)
    out.update({k: v for k, v in config.items() if k in defaults or k not in out})
    for k in defaults:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _echo_config(out_dir, settings: dict):
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.json").write_text(json.dumps(settings, indent=2, sort_keys=True) + "\n")


def _print_summaries(results):
    cols = ("function", "n", "p", "reps", "mean", "se", "median", "capped_frac")
    print("  ".join(f"{c:>11}" for c in cols))
    for s in results:
        row = s.row()
        if row["p"] is None:
            row["p"] = row["c"] / row["n"]
        print("  ".join(f"{row[c]:>11.5g}" if isinstance(row[c], float) else f"{row[c]!s:>11}" for c in cols))


def _jobs(args, settings):
    jobs = getattr(args, "jobs", None) or settings.get("jobs") or default_jobs()
    if jobs < 1:
        raise UsageError("--jobs must be positive")
    return jobs


def cmd_run(args) -> int:
    s = _merge(RUN_DEFAULTS, _load_config(args.config), args)
    if args.p is not None:
        s["c"] = None
    elif args.c is not None:
        s["p"] = None
    if s["p"] is not None:
        s["c"] = None
    spec = {"kind": s["function"]}
    if s["function"].startswith("random"):
        if s["fseed"] is None:
            raise UsageError("random function families need --fseed")
        spec["seed"] = s["fseed"]
        if s["function"] == "random-exponential":
            spec["kappa"] = s["kappa"]
    cell = Cell(spec, s["n"], s["p"], s["c"], s["mu"], s["selector"])
    camp = Campaign([cell], s["reps"], s["cap"], s["seed"], s["out"])
    if s["out"]:
        _echo_config(s["out"], s)
    results = run_campaign(camp, jobs=_jobs(args, s))
    _print_summaries([r.summary for r in results])
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = _load_config(args.config)
    if not data:
        raise UsageError("sweep needs --config with a campaign")
    for k in ("reps", "cap", "seed"):
        if getattr(args, k) is not None:
            data[k] = getattr(args, k)
    if args.out is not None:
        data["output"] = args.out
    camp = Campaign.from_json(data)
    results = run_campaign(camp, jobs=_jobs(args, data))
    _print_summaries([r.summary for r in results])
    return EXIT_OK


def cmd_bounds(args) -> int:
    s = _merge({"n": None, "p": None, "alpha": 2.0, "t": 1.0, "format": "text", "out": None},
               _load_config(args.config), args)
    if s["n"] is None:
        raise UsageError("bounds needs --n")
    p = s["p"] if s["p"] is not None else 1.0 / s["n"]
    rows = bound_table(s["n"], p, s["alpha"], s["t"])
    payload = [r.to_json() for r in rows]
    if s["format"] == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"{'bound':<20}{'kind':<19}{'value':>14}{'tail_prob':>11}  asymptotic")
        for r in rows:
            tp = "" if r.tail_prob is None else f"{r.tail_prob:.4g}"
            note = f"  ({r.notes})" if r.notes else ""
            print(f"{r.bound:<20}{r.kind:<19}{r.value:>14.6g}{tp:>11}  "
                  f"{'yes' if r.asymptotic_terms_dropped else 'no'}{note}")
    if s["out"]:
        _echo_config(s["out"], s)
        (Path(s["out"]) / "bounds.json").write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_exact(args) -> int:
    s = _merge({"n": None, "p": None, "potential": None, "function": "binval", "fseed": None, "alpha": 2.0,
                "out": None}, _load_config(args.config), args)
    if s["n"] is None:
        raise UsageError("exact needs --n")
    n = s["n"]
    p = s["p"] if s["p"] is not None else 1.0 / n
    chain = solve_onemax_chain(n, p)
    print(f"OneMax n={n} p={p:.6g}: expected runtime from a uniform start {chain.mean_runtime:.10g}")
    table = [{"i": i, "expected_steps": float(chain.expected_steps[i]), "drift": chain.drift(i),
              "drift_bound": onemax_drift_upper(i, n, p)} for i in range(n + 1)]
    if s["out"]:
        out = Path(s["out"])
        _echo_config(out, s)
        (out / "chain.json").write_text(json.dumps({"n": n, "p": p, "mean_runtime": chain.mean_runtime,
                                                    "residual": chain.residual}, indent=2) + "\n")
        with open(out / "chain.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(table[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows({k: repr(v) if isinstance(v, float) else v for k, v in row.items()} for row in table)
    else:
        print(f"{'i':>5}{'E[steps]':>16}{'drift':>14}{'drift bound':>14}")
        for row in table:
            print(f"{row['i']:>5}{row['expected_steps']:>16.8g}{row['drift']:>14.6g}{row['drift_bound']:>14.6g}")
    if s["potential"]:
        f = make_family(s["function"], n, seed=s["fseed"])
        pot = (build_adaptive_potential(f, p, s["alpha"]) if s["potential"] == "adaptive"
               else build_refined_potential(f))
        if s["out"]:
            potential_to_csv(pot, f, Path(s["out"]) / "potential.csv")
        else:
            sys.stdout.write(potential_to_csv(pot, f))
    return EXIT_OK


def cmd_verify(args) -> int:
    s = _merge({"nmax": 12, "functions_per_n": 100, "seed": 0, "out": None}, _load_config(args.config), args)
    verdicts = run_verification_suite(s["nmax"], s["functions_per_n"], s["seed"])
    ok = all(v.passed for v in verdicts)
    for v in verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name:<20} checked={v.checked}"
              + ("" if v.passed else f"  witness={v.witness}"))
    if s["out"]:
        _echo_config(s["out"], s)
        (Path(s["out"]) / "verify.json").write_text(json.dumps(
            [{"name": v.name, "passed": v.passed, "checked": v.checked, "witness": v.witness} for v in verdicts],
            indent=2, default=str) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_report(args) -> int:
    if args.records is None and args.out is None:
        raise UsageError("report needs --records or --out")
    records = Path(args.records) if args.records else Path(args.out) / "records.jsonl"
    out = Path(args.out) if args.out else records.parent
    summaries = report_from_records(records)
    out.mkdir(parents=True, exist_ok=True)
    write_summaries_csv(summaries, out / "summary.csv")
    write_markdown(summaries, out / "report.md")
    _print_summaries(summaries)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "bounds": cmd_bounds, "exact": cmd_exact,
            "verify": cmd_verify, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"linear-ea {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RecordFormatError, OSError) as exc:
        print(f"linear-ea {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"linear-ea {args.command}: invalid settings: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted; records written so far are kept", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
