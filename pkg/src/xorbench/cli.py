"""``xorbench`` command line: generate → convert → solve → bench → fit → verify → report.

Every run echoes its fully resolved configuration (defaults, then config file,
then explicit flags — precedence CLI > config > default) as ``#``-prefixed
header lines, so any output can be reproduced from its own header.

Exit codes: 0 success, 1 domain failure (inconsistent system, unsolved run,
no data), 2 usage error (bad arguments or unknown names).
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys

import numpy as np

from . import analysis, bench
from .errors import (
    Inconsistent,
    IndexOutOfRange,
    InsufficientPoints,
    LengthMismatch,
    NoData,
    NonPositiveValue,
    OddSize,
    ParseError,
    PlanInvalid,
    TooSmall,
    UnknownSolver,
    XorbenchError,
)
from .ising import serialize_ising, xorsat_to_ising
from .solvers import CONFIG_BY_NAME, solve, trajectory_seed
from .xorsat import (
    count_solutions,
    evaluate,
    generate_3r3x,
    gf2_solve,
    load,
    serialize,
)

#: Argument/usage problems exit 2; everything else domain-fails with 1.
_USAGE_ERRORS = (OddSize, TooSmall, UnknownSolver, LengthMismatch,
                 PlanInvalid, IndexOutOfRange)


def _read_config_file(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ParseError(f"config file '{path}' not found or unreadable")
    return parser


def _resolve(args: argparse.Namespace, section: str,
             spec: dict[str, tuple]) -> dict:
    """Merge defaults < config-file section < explicit CLI flags."""
    config = None
    if getattr(args, "config", None):
        config = _read_config_file(args.config)
    resolved = {}
    for dest, (cast, default) in spec.items():
        value = getattr(args, dest, None)
        if value is None and config is not None:
            for sec in (section, "global"):
                if config.has_option(sec, dest):
                    raw = config.get(sec, dest)
                    value = (raw.lower() == "true") if cast is bool else cast(raw)
                    break
        if value is None:
            value = default
        resolved[dest] = value
    return resolved


def _echo_header(command: str, resolved: dict, out=None) -> str:
    payload = {k: v for k, v in sorted(resolved.items()) if v is not None}
    line = f"# xorbench {command} config: " + json.dumps(payload, sort_keys=True,
                                                         default=str)
    print(line, file=out if out is not None else sys.stdout)
    return line


def _default_threads() -> int:
    return os.cpu_count() or 1


# --- subcommands -------------------------------------------------------------

_GENERATE_SPEC = {
    "n": (int, None),
    "count": (int, 1),
    "seed": (int, 0),
    "output": (str, "."),
}


def cmd_generate(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "generate", _GENERATE_SPEC)
    if resolved["n"] is None:
        raise LengthMismatch("generate requires -n/--num-spins")
    header = _echo_header("generate", resolved)
    os.makedirs(resolved["output"], exist_ok=True)
    for idx in range(resolved["count"]):
        inst_seed = trajectory_seed(resolved["seed"], resolved["n"], idx)
        instance = generate_3r3x(resolved["n"], inst_seed)
        name = f"xorsat_n{resolved['n']}_i{idx}_s{inst_seed}.3r3x"
        path = os.path.join(resolved["output"], name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + f"\n# instance {idx} of {resolved['count']}\n")
            fh.write(serialize(instance))
        print(path)
    return 0


_CONVERT_SPEC = {
    "output": (str, None),
}


def cmd_convert(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "convert", _CONVERT_SPEC)
    resolved["instance"] = args.instance
    header = _echo_header("convert", resolved)
    instance = load(args.instance)
    model, vmap = xorsat_to_ising(instance)
    out = resolved["output"]
    if out is None:
        base, _ = os.path.splitext(args.instance)
        out = base + ".ising"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + f"\n# convention {vmap.convention}\n")
        fh.write(serialize_ising(model))
    print(f"{out}: n={model.n} pairs={len(model.weights)} offset={model.offset!r}")
    return 0


_SOLVE_SPEC = {
    "solver": (str, "laser"),
    "seed": (int, 0),
    "max_steps": (int, None),
    "noise": (float, None),
    "g0": (float, None),
    "kappa": (float, None),
    "detune": (float, None),
    "init_scale": (float, None),
    "t_hi": (float, None),
    "t_lo": (float, None),
    "tenure": (int, None),
    "replicas": (int, None),
    "output": (str, None),
}

_SOLVE_PARAM_FIELDS = {
    "noise": "eta",
    "g0": "g0",
    "kappa": "kappa",
    "detune": "detune",
    "init_scale": "init_scale",
    "t_hi": "T_hi",
    "t_lo": "T_lo",
    "tenure": "tenure",
    "replicas": "num_replicas",
}


def cmd_solve(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "solve", _SOLVE_SPEC)
    resolved["instance"] = args.instance
    name = resolved["solver"]
    if name not in CONFIG_BY_NAME:
        raise UnknownSolver(
            f"unknown solver '{name}'; valid: {', '.join(sorted(CONFIG_BY_NAME))}")
    _echo_header("solve", resolved)
    instance = load(args.instance)
    label = os.path.splitext(os.path.basename(args.instance))[0]
    model, _ = xorsat_to_ising(instance)
    params = {field: resolved[flag]
              for flag, field in _SOLVE_PARAM_FIELDS.items()
              if resolved[flag] is not None}
    cfg = bench.build_config(name, params)
    record = solve(model, cfg, resolved["seed"], max_steps=resolved["max_steps"],
                   target_energy=0.0, instance_label=label)
    line = record.to_json()
    print(line)
    if resolved["output"]:
        with open(resolved["output"], "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
    return 0 if record.success else 1


_BENCH_SPEC = {
    "seed": (int, None),
    "threads": (int, None),
    "output": (str, None),
    "resume": (bool, False),
}


def cmd_bench(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "bench", _BENCH_SPEC)
    resolved["plan"] = args.plan
    plan = bench.load_plan(args.plan)
    if resolved["seed"] is not None:
        plan = dataclasses.replace(plan, master_seed=resolved["seed"])
    if resolved["output"]:
        plan = dataclasses.replace(plan, output=resolved["output"])
    resolved.update(dataclasses.asdict(plan))
    resolved.pop("solver_params", None)
    _echo_header("bench", resolved)
    threads = resolved["threads"] or _default_threads()
    records = bench.run_experiment(plan, resume=resolved["resume"], threads=threads,
                                   log=lambda r: print(
                                       f"  {r.solver_id} {r.instance_label} "
                                       f"restart={r.extra.get('restart')} "
                                       f"success={r.success}", file=sys.stderr))
    rows = bench.summarize(records, plan.cutoff_grid)
    base, _ = os.path.splitext(plan.output)
    summary_path = base + ".summary.csv"
    bench.write_summary(rows, summary_path)
    print(f"records: {plan.output} ({len(records)} rows)")
    print(f"summary: {summary_path}")
    for row in rows:
        print(f"  {row.solver} n={row.n} eta={row.noise:g} "
              f"tf*={row.tf_star:g} tts={row.tts_steps:g} steps "
              f"({row.tts_seconds:.3g} s) p={row.mean_p:.3f}")
    return 0


_FIT_SPEC = {
    "seed": (int, 0),
    "resamples": (int, 200),
    "output": (str, None),
}


def cmd_fit(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "fit", _FIT_SPEC)
    resolved["summary"] = args.summary
    _echo_header("fit", resolved)
    rows = bench.read_summary(args.summary)
    if not rows:
        raise NoData(f"no summary rows in {args.summary}")
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row.solver, row.noise), []).append(row)
    results = {}
    for (solver, noise), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r.n)
        sizes = [r.n for r in grp]
        tts = [r.tts_steps for r in grp]
        comparison = analysis.compare_models(sizes, tts)
        fit = (comparison.power if comparison.preferred == "power"
               else comparison.exponential)
        ci = analysis.bootstrap_ci(sizes, tts, resamples=resolved["resamples"],
                                   seed=resolved["seed"],
                                   model_kind=comparison.preferred)
        symbol = "k" if comparison.preferred == "power" else "alpha"
        print(f"{solver} eta={noise:g}: preferred={comparison.preferred} "
              f"{symbol}={fit.exponent:.6g} stderr={fit.exponent_stderr:.3g} "
              f"ci95=[{ci[0]:.6g}, {ci[1]:.6g}] "
              f"r2_power={comparison.power.r_squared:.4f} "
              f"r2_exp={comparison.exponential.r_squared:.4f} "
              f"delta_r2={comparison.delta_r2:.4f} "
              f"indeterminate={comparison.indeterminate} "
              f"excluded={fit.n_excluded}")
        results[f"{solver}|{noise:g}"] = {
            "preferred": comparison.preferred,
            "exponent": fit.exponent,
            "stderr": fit.exponent_stderr,
            "ci95": list(ci),
            "r2_power": comparison.power.r_squared,
            "r2_exponential": comparison.exponential.r_squared,
            "delta_r2": comparison.delta_r2,
            "indeterminate": comparison.indeterminate,
            "n_points": fit.n_points,
            "n_excluded": fit.n_excluded,
            "method": "ols-log10",
        }
    if resolved["output"]:
        with open(resolved["output"], "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"fits: {resolved['output']}")
    return 0


_VERIFY_SPEC = {
    "assignment": (str, None),
}


def cmd_verify(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "verify", _VERIFY_SPEC)
    resolved["instance"] = args.instance
    _echo_header("verify", resolved)
    instance = load(args.instance)
    try:
        space = gf2_solve(instance)
    except Inconsistent:
        print("inconsistent")
        return 1
    parts = [f"satisfiable, rank={space.rank}",
             f"log2_solutions={count_solutions(space)}"]
    if instance.planted is not None:
        parts.append(f"unsat(planted)={int(evaluate(instance, instance.planted))}")
    if resolved["assignment"] is not None:
        bits = resolved["assignment"]
        if len(bits) != instance.num_vars or not set(bits) <= {"0", "1"}:
            raise LengthMismatch(
                f"--assignment needs a {instance.num_vars}-bit 0/1 string")
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        parts.append(f"unsat(assignment)={int(evaluate(instance, arr))}")
    print(", ".join(parts))
    return 0


_REPORT_SPEC = {
    "seed": (int, 0),
    "resamples": (int, 200),
    "output": (str, "plots"),
}


def cmd_report(args: argparse.Namespace) -> int:
    resolved = _resolve(args, "report", _REPORT_SPEC)
    resolved["summary"] = args.summary
    _echo_header("report", resolved)
    rows = bench.read_summary(args.summary)
    if not rows:
        raise NoData(f"no summary rows in {args.summary}")
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row.solver, row.noise), []).append(row)
    fits = {}
    for key, grp in groups.items():
        sizes = [r.n for r in grp]
        tts = [r.tts_steps for r in grp]
        try:
            fits[key] = analysis.compare_models(sizes, tts)
        except (InsufficientPoints, NonPositiveValue):
            continue
    if not fits:
        raise NoData("no series had enough finite points to fit")
    written = analysis.emit_plot_data(rows, fits, resolved["output"])
    for path in written:
        print(path)
    return 0


# --- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xorbench",
        description="Planted 3-regular 3-XORSAT benchmark: generation, "
                    "Ising conversion, heuristic solvers, TTS scaling fits.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: all cores)")
    common.add_argument("--config", type=str, default=None,
                        help="INI file supplying flag defaults")
    common.add_argument("--output", type=str, default=None,
                        help="output file or directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common],
                       help="write planted 3R3X instance files")
    p.add_argument("-n", "--num-spins", dest="n", type=int, default=None,
                   help="problem size (even, >= 8)")
    p.add_argument("--count", type=int, default=None,
                   help="number of instances (default 1)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convert", parents=[common],
                       help="quadratize an instance to an Ising model file")
    p.add_argument("instance", help="instance file (p 3r3x format)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("solve", parents=[common],
                       help="run one solver trajectory on an instance")
    p.add_argument("instance", help="instance file (p 3r3x format)")
    p.add_argument("--solver", type=str, default=None,
                   help=f"one of: {', '.join(sorted(CONFIG_BY_NAME))}")
    p.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    p.add_argument("--noise", type=float, default=None,
                   help="laser noise amplitude eta (fraction of a_sat)")
    p.add_argument("--g0", type=float, default=None, help="laser pump gain")
    p.add_argument("--kappa", type=float, default=None,
                   help="laser coupling strength (default: shipped calibration)")
    p.add_argument("--detune", type=float, default=None,
                   help="laser per-cavity detuning spread (0 disables)")
    p.add_argument("--init-scale", dest="init_scale", type=float, default=None)
    p.add_argument("--t-hi", dest="t_hi", type=float, default=None)
    p.add_argument("--t-lo", dest="t_lo", type=float, default=None)
    p.add_argument("--tenure", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", parents=[common],
                       help="run an experiment plan (JSONL records + summary CSV)")
    p.add_argument("plan", help="plan INI file")
    p.add_argument("--resume", action="store_true", default=None,
                   help="skip (solver, instance, noise, restart) tuples already "
                        "in the output records file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", parents=[common],
                       help="fit power/exponential scaling laws to a summary CSV")
    p.add_argument("summary", help="summary CSV from bench")
    p.add_argument("--resamples", type=int, default=None,
                   help="bootstrap resamples (default 200)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", parents=[common],
                       help="Gaussian-elimination ground truth for an instance")
    p.add_argument("instance", help="instance file (p 3r3x format)")
    p.add_argument("--assignment", type=str, default=None,
                   help="0/1 bitstring to score against the clauses")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common],
                       help="emit plot-ready CSV series + gnuplot script")
    p.add_argument("summary", help="summary CSV from bench")
    p.add_argument("--resamples", type=int, default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except XorbenchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
