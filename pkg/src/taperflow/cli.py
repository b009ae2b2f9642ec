"""Command line interface: ``taperflow <subcommand> ...``.

Tabular output is CSV with 17 significant digits. With ``--out DIR`` each
table goes to ``DIR/<name>.csv`` and a ``manifest.json`` records the config,
seed, tool version, timestamps and the sha256 digest of every output file;
without it the table is written to stdout.

Exit codes: 0 success, 1 invalid input or failed checks, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (ConstantsRequest, SimulationRequest, config_to_dict, parse_config)
from .errors import NumericalError, TaperflowError
from .innovations import InnovationModel
from .limit_theory import hurst, limit_constant, limit_law
from .montecarlo import (CSV_COLUMNS, ExperimentConfig, ExperimentReport, convergence_table,
                         lyapunov_table, run_experiment)
from .path_engine import PathConfig, generate_path, partial_sums, replication_rng
from .filters import build_filter

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --- output -------------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


class Sink:
    """Collects named outputs; writes them to a run directory or to stdout."""

    def __init__(self, out: str | None, command: str, config: dict, seed):
        self.out = Path(out) if out else None
        self.command = command
        self.config = config
        self.seed = seed
        self.started = datetime.now(timezone.utc).isoformat()
        self.files = {}

    def emit(self, name: str, text: str):
        if self.out is None:
            sys.stdout.write(text)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def close(self):
        if self.out is None:
            return
        manifest = {
            "tool": "taperflow", "version": __version__, "command": self.command,
            "config": self.config, "seed": self.seed, "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "files": {k: {"sha256": v} for k, v in sorted(self.files.items())},
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --- argument helpers ---------------------------------------------------------------

def _model_args(p, *, n_default="1000", t_default="1"):
    p.add_argument("--config", help="JSON configuration file (schema v1); overrides model flags")
    p.add_argument("--case", type=int, help="case id j (1-12)")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma1", type=float, help="filter truncation exponent")
    p.add_argument("--c", type=float, default=1.0, help="truncation constant")
    p.add_argument("--alpha", type=float, help="Pareto tail index (tapered-Pareto innovations)")
    p.add_argument("--gamma", type=float, help="taper exponent, b(n) = n**gamma")
    p.add_argument("--n", default=n_default, help="comma separated sample sizes")
    p.add_argument("--t", default=t_default, help="comma separated times")
    p.add_argument("--out", help="run directory for CSV outputs and manifest.json")


def _floats(text):
    try:
        return tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(float(x)) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma separated integers, got {text!r}") from None


def _innovation(args):
    if args.alpha is None and args.gamma is None:
        return InnovationModel.gaussian()
    if args.alpha is None or args.gamma is None:
        raise UsageError("--alpha and --gamma go together")
    return InnovationModel.tapered_pareto(args.alpha, args.gamma)


def _load(path):
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _experiment(args, reps=1, seed=0) -> ExperimentConfig:
    if args.config:
        cfg = _load(args.config)
        if not isinstance(cfg, ExperimentConfig):
            raise UsageError("this subcommand needs an experiment configuration")
        return cfg
    if args.case is None:
        raise UsageError("--case (or --config) is required")
    return ExperimentConfig(case=args.case, beta=args.beta, gamma1=args.gamma1, c=args.c,
                            innovation=_innovation(args), n_list=_ints(args.n),
                            t_grid=_floats(args.t), reps=reps, seed=seed)


# --- subcommands ----------------------------------------------------------------

def cmd_constants(args):
    if args.config:
        req = _load(args.config)
        if not isinstance(req, ConstantsRequest):
            raise UsageError("constants needs a 'constants' configuration")
    else:
        if not args.id and args.case is None:
            raise UsageError("give --id and/or --case")
        req = ConstantsRequest(tuple(args.id or ()), _floats(args.t), args.beta, args.c, args.method)
    rows = []
    for cid in req.ids:
        for t in req.t_grid:
            rows.append({"quantity": f"C{cid}", "t": t, "beta": req.beta, "c": req.c,
                         "value": limit_constant(cid, t, req.beta, req.c, req.method)})
    if not args.config and args.case is not None:
        law = limit_law(args.case, args.beta, args.gamma1, args.c)
        H = hurst(args.case, args.beta)
        for t in req.t_grid:
            rows.append({"quantity": f"W{args.case}", "t": t, "beta": args.beta, "c": law.c,
                         "value": law.W(t)})
        rows.append({"quantity": f"H{args.case}", "t": None, "beta": args.beta, "c": law.c,
                     "value": H if isinstance(H, float) else None, "note": H if isinstance(H, str) else ""})
    sink = Sink(args.out, "constants", config_to_dict(req), None)
    sink.emit("constants.csv", csv_text(("quantity", "t", "beta", "c", "value", "note"), rows))
    sink.close()
    return EXIT_OK


def cmd_exact_var(args):
    cfg = _experiment(args)
    rows = [vars(r) for r in convergence_table(cfg)]
    sink = Sink(args.out, "exact-var", config_to_dict(cfg), None)
    sink.emit("exact_var.csv", csv_text(("case", "n", "t", "m", "var_exact", "W", "ratio", "error",
                                         "flag"), rows))
    sink.close()
    return EXIT_OK


def cmd_lyapunov(args):
    cfg = _experiment(args)
    rows = [dict(r, case=cfg.case) for r in lyapunov_table(cfg, _floats(args.t)[0])]
    sink = Sink(args.out, "lyapunov", config_to_dict(cfg), None)
    sink.emit("lyapunov.csv", csv_text(("case", "n", "t", "delta", "moment_ratio", "lyapunov"), rows))
    sink.close()
    return EXIT_OK


def cmd_simulate(args):
    if args.config:
        cfg = _load(args.config)
    else:
        if args.case is None:
            raise UsageError("--case (or --config) is required")
        if args.reps is None:
            n = _ints(args.n)
            if len(n) != 1:
                raise UsageError("a single path needs exactly one --n")
            cfg = SimulationRequest(args.case, args.beta, args.gamma1, args.c, _innovation(args),
                                    n[0], _floats(args.t), args.seed)
        else:
            cfg = _experiment(args, reps=args.reps, seed=args.seed)
    if isinstance(cfg, ConstantsRequest):
        raise UsageError("simulate needs an experiment or simulate configuration")
    sink = Sink(args.out, "simulate", config_to_dict(cfg), cfg.seed)
    if isinstance(cfg, ExperimentConfig):
        report = run_experiment(cfg, threads=args.threads)
        sink.emit("results.csv", csv_text(CSV_COLUMNS, report.csv_rows()))
        if sink.out is not None:
            sink.emit("report.json", json.dumps(_jsonable(report.to_dict()), indent=2,
                                                sort_keys=True) + "\n")
    else:
        law = limit_law(cfg.case, cfg.beta, cfg.gamma1, cfg.c)
        pc = PathConfig(build_filter(law.filter_spec, cfg.n), cfg.innovation, cfg.n,
                        sorted(cfg.t_grid), seed=cfg.seed)
        path = generate_path(pc, replication_rng(cfg.seed, 0))
        ts = sorted(cfg.t_grid)
        S = partial_sums(path, cfg.n, ts)
        a2 = law.A2(cfg.n)
        rows = [{"case": cfg.case, "n": cfg.n, "t": t, "S": s, "Z": s / math.sqrt(a2),
                 "seed": cfg.seed} for t, s in zip(ts, S)]
        sink.emit("partial_sums.csv", csv_text(("case", "n", "t", "S", "Z", "seed"), rows))
        if args.path and sink.out is not None:
            sink.emit("path.csv", csv_text(("k", "X"), ({"k": k + 1, "X": x}
                                                        for k, x in enumerate(path))))
    sink.close()
    return EXIT_OK


def cmd_limit_sim(args):
    if args.case is None:
        raise UsageError("--case is required")
    law = limit_law(args.case, args.beta, args.gamma1, args.c)
    grid = _floats(args.t)
    paths = law.sample(grid, replication_rng(args.seed, 0), args.paths)
    cols = ("path",) + tuple(f"t={t:g}" for t in grid)
    rows = ({"path": i, **{c: v for c, v in zip(cols[1:], p)}} for i, p in enumerate(paths))
    sink = Sink(args.out, "limit-sim", {"case": args.case, "beta": args.beta, "gamma1": law.gamma1,
                                        "c": law.c, "t": list(grid), "paths": args.paths}, args.seed)
    sink.emit("limit_paths.csv", csv_text(cols, rows))
    sink.close()
    return EXIT_OK


def cmd_verify(args):
    from .verify import SUITES, checks_to_csv, run_suite

    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    sink = Sink(args.out, "verify", {"suite": args.suite, "reps": args.reps, "n": args.n}, args.seed)
    checks = run_suite(args.suite, args.seed, reps=args.reps, n=args.n, threads=args.threads)
    failed = 0
    for c in checks:
        failed += not c.passed
        print(f"[{'PASS' if c.passed else 'FAIL'}] criterion {c.criterion}: {c.name} = {c.value:.6g} "
              f"({c.threshold})", file=sys.stderr if args.out is None else sys.stdout)
    sink.emit("verify.csv", checks_to_csv(checks))
    sink.close()
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_INVALID


def cmd_report(args):
    try:
        doc = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {args.input}: {exc}") from None
    if not isinstance(doc, dict) or "config" not in doc:
        raise UsageError("not an experiment report")
    report = ExperimentReport.from_dict(doc)
    sink = Sink(args.out, "report", report.config, report.config.get("seed"))
    sink.emit("results.csv", csv_text(CSV_COLUMNS, report.csv_rows()))
    sink.close()
    return EXIT_OK


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="taperflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"taperflow {__version__}")
    sub = p.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)

    s = sub.add_parser("simulate", help="seeded path / Monte Carlo experiment")
    _model_args(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, help="run a Monte Carlo experiment with this many replications")
    s.add_argument("--threads", type=int, help="worker threads (default TAPERFLOW_THREADS or 1)")
    s.add_argument("--path", action="store_true", help="also write the path X_1..X_M (needs --out)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("constants", help="limit constants C_id, W_j(t), H_j")
    s.add_argument("--id", type=int, action="append", help="constant id (repeatable)")
    s.add_argument("--t", default="1")
    s.add_argument("--beta", type=float)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--gamma1", type=float)
    s.add_argument("--case", type=int, help="also report W(t) and H for this case")
    s.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")
    s.add_argument("--config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("exact-var", help="exact Var Z_n(t) / W(t) convergence table")
    _model_args(s, n_default="1000,10000,100000")
    s.set_defaults(func=cmd_exact_var)

    s = sub.add_parser("lyapunov", help="Lyapunov fraction decay table")
    _model_args(s, n_default="1000,10000,100000")
    s.set_defaults(func=cmd_lyapunov)

    s = sub.add_parser("limit-sim", help="sample Gaussian limit paths on a grid")
    s.add_argument("--case", type=int)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--gamma1", type=float)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--t", default="0.25,0.5,0.75,1")
    s.add_argument("--paths", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_limit_sim)

    s = sub.add_parser("verify", help="acceptance suite with pass/fail summary")
    s.add_argument("--suite", default="all")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--reps", type=int, help="Monte Carlo replications (default 4000)")
    s.add_argument("--n", type=int, help="Monte Carlo sample size (default 1e5)")
    s.add_argument("--threads", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("report", help="re-render a stored experiment report")
    s.add_argument("input", help="report.json written by simulate --out")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "taperflow: error: a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"taperflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TaperflowError, ValueError, MemoryError) as exc:
        print(f"taperflow: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None):
    sys.exit(run_cli(argv))


if __name__ == "__main__":
    main()
