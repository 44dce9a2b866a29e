"""Command-line front end.

    smartrule errfn    --n 3 --grid 1001 --out fig.csv
    smartrule schedule --config sched.json --out sched.csv
    smartrule simulate --config run.json --seed 7 --out curve.csv
    smartrule verify   --suite all --seed 7 --out report.json

CSV files start with ``# key: value`` header lines (mode, seed, version),
then a comma-separated table with '\\n' line endings. Floats are written in
shortest round-trip form, so parsing and rewriting a file reproduces it.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import harness
from .config import ConfigError, build_schedule, load_config, parse_run_config
from .errorfn import FindNError, bayes_binary, find_N, majority_error, upper_hull
from .estimators import make_rule
from .problems import LearningProblem
from .schedule import ScheduleError, vc_sample_size

__all__ = ["main", "read_table", "write_table"]


# ------------------------------------------------------------------ tables

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(header: dict, columns: list, rows) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {_cell(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_table(text: str):
    """Inverse of :func:`write_table`: ``(header, columns, rows)`` with string cells."""
    header, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("# ") and not body:
            key, _, value = line[2:].rstrip("\n").partition(": ")
            header[key] = value
        else:
            body.append(line)
    reader = csv.reader(io.StringIO("".join(body)))
    columns = next(reader)
    rows = [dict(zip(columns, r)) for r in reader]
    return header, columns, rows


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands

def _odd_list(values) -> list[int]:
    out = []
    for v in values:
        for part in str(v).split(","):
            n = int(part)
            if n < 1 or n % 2 == 0:
                raise SystemExit(f"error: n={n} is not allowed; the vote runs over an odd number of labels (n = 2k + 1)")
            out.append(n)
    return out


def cmd_errfn(args) -> int:
    ns = _odd_list(args.n)
    if args.grid < 2:
        raise SystemExit("error: --grid must be at least 2")
    p = np.linspace(0.0, 1.0, args.grid)
    rows = []
    for n in ns:
        L = majority_error(p, n)
        hull = upper_hull(p, L)
        env = np.interp(p, p[hull], L[hull])
        env[hull] = L[hull]
        bayes = bayes_binary(p)
        for j in range(p.size):
            rows.append({"n": n, "p": float(p[j]), "L": float(L[j]), "envelope": float(env[j]),
                         "bayes": float(bayes[j])})
    header = harness.report_header("errfn", None, grid=args.grid)
    _emit(write_table(header, ["n", "p", "L", "envelope", "bayes"], rows), args.out)
    return 0


def _audit_exact(sched, grid_size, cap) -> list[bool]:
    ok = [True]
    for k in range(2, sched.K + 1):
        prev = sched.b[k - 2] if sched.b[k - 2] % 2 else sched.b[k - 2] - 1
        N = find_N(prev, sched.eps[k - 1], grid_size=grid_size, cap=cap).N
        a = vc_sample_size(k, N, sched.delta[k - 1])
        b = vc_sample_size(k, a, sched.delta[k - 1])
        ok.append((N, a, b) == (sched.N[k - 1], sched.a[k - 1], sched.b[k - 1]))
    return ok


def cmd_schedule(args) -> int:
    spec = load_config(args.config) if args.config else {"mode": "practical", "K": 8}
    spec = spec.get("schedule", spec)
    columns = ["k", "eps", "delta", "N", "a", "b", "n_start", "n_end", "status"]
    mode = spec.get("mode", "practical")
    failure = None
    try:
        sched = build_schedule(spec)
    except ScheduleError as exc:
        sched, failure = exc.partial, str(exc)
    rows = list(sched.rows())
    if mode == "exact":
        audited = _audit_exact(sched, spec.get("grid_size", 4097), spec.get("cap", 10 ** 5))
        for row, ok in zip(rows, audited):
            row["status"] = "audited" if ok else "failed"
    else:
        for row in rows:
            row["status"] = "practical"
    if failure is not None:
        rows.append({"k": sched.K + 1, "status": f"failed: {failure}"})
    header = harness.report_header(mode, None)
    _emit(write_table(header, columns, rows), args.out)
    return 0


def cmd_simulate(args) -> int:
    try:
        cfg = parse_run_config(load_config(args.config), seed=args.seed, trials=args.trials)
    except (ConfigError, ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    params = dict(cfg.rule_params)
    if cfg.rule == "smart":
        params["schedule"] = cfg.schedule
    try:
        rule = make_rule(cfg.rule, **params)
    except TypeError as exc:
        print(f"config error: /rule_params: {exc}", file=sys.stderr)
        return 2
    mode = cfg.schedule.mode if cfg.schedule is not None else "none"
    curve = harness.expected_error_curve(cfg.problem, rule, cfg.ns, cfg.trials, cfg.seed,
                                         metadata={"schedule_mode": mode})
    audit = harness.monotonicity_audit(curve)
    header = harness.report_header(mode, cfg.seed, problem=cfg.problem.name, rule=cfg.rule,
                                   trials=cfg.trials)
    text = write_table(header, ["n", "mean_risk", "stderr", "trials", "bayes"], curve.rows())
    _emit(text, args.out)
    log = {"header": header, "problem": cfg.problem.to_dict(), "schedule": cfg.schedule_spec if cfg.rule == "smart" else None,
           "curve": curve.to_dict(), "monotonicity": audit}
    log_path = args.log or (str(Path(args.out).with_suffix(".json")) if args.out else None)
    if log_path:
        Path(log_path).write_text(harness.dump_report(log), newline="")
    return 0


SUITES = ("identity", "key", "key_piece", "coverage", "counterexample")


def _suite_identity(seed, trials, opts):
    return harness.verify_monotone_identity(opts.get("n_max", 41), opts.get("grid", 1001))


def _suite_key(seed, trials, opts):
    n, t = opts.get("n", 3), opts.get("t", 0.25)
    grid = opts.get("grid_size", 4097)
    N = opts.get("N")
    if N is None:
        try:
            N = find_N(n, t, grid_size=grid).N
        except FindNError as exc:
            return {"suite": "key", "n": n, "t": t, "passed": False, "error": str(exc)}
    return harness.verify_key_lemma(n, t, N, grid)


def _suite_key_piece(seed, trials, opts):
    n, eps = opts.get("n", 5), opts.get("eps", 0.2)
    N = opts.get("N") or find_N(n, eps).N
    p0 = opts.get("p0", 0.1)
    return harness.verify_key_piece(n, N, eps, trials or opts.get("trials", 10 ** 4), seed,
                                    etas=(2 * p0, 0.0))


def _suite_coverage(seed, trials, opts):
    problems = [
        LearningProblem.uniform(0.5, name="uniform"),
        LearningProblem.atomic([0.5], [1.0], [0.5], name="single-atom"),
        LearningProblem.atomic([0.1, 0.6], [0.95, 0.05], [0.5, 0.5], name="skewed-atoms"),
    ]
    reports = []
    for i, pb in enumerate(problems):
        reports.append(harness.verify_coverage(opts.get("k", 2), opts.get("N", 11), opts.get("delta", 0.25),
                                               trials or opts.get("trials", 200), pb, seed + i))
    return {"suite": "coverage", "reports": reports, "passed": all(r["passed"] for r in reports)}


def _suite_counterexample(seed, trials, opts):
    return harness.nn_counterexample_search(seed)


_SUITE_FUNCS = {
    "identity": _suite_identity, "key": _suite_key, "key_piece": _suite_key_piece,
    "coverage": _suite_coverage, "counterexample": _suite_counterexample,
}


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; expected one of {list(SUITES) + ['all']}", file=sys.stderr)
        return 2
    opts = load_config(args.config) if args.config else {}
    names = SUITES if args.suite == "all" else (args.suite,)
    results = {}
    for name in names:
        suite_opts = opts.get(name, opts if args.suite != "all" else {})
        try:
            results[name] = _SUITE_FUNCS[name](args.seed, args.trials, suite_opts)
        except (ValueError, FindNError) as exc:
            results[name] = {"suite": name, "passed": False, "error": str(exc)}
    passed = all(r["passed"] for r in results.values())
    report = {"header": harness.report_header("verify", args.seed, suite=args.suite),
              "results": results, "passed": passed}
    text = harness.dump_report(report)
    _emit(text, args.out)
    return 0 if passed else 1


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smartrule", description="Monotone partitioning rule on the circle.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("errfn", help="tabulate the majority-vote error and its concave envelope")
    p.add_argument("--n", action="append", required=True, help="odd sample size; repeat or comma-separate")
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_errfn)

    p = sub.add_parser("schedule", help="print a block schedule")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="expected exact-risk curve over many trials")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--log", help="JSON log path (default: --out with .json suffix)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--config", help="JSON object of suite options")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("--seed must be a non-negative integer", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
