"""Command-line benchmark harness.

Subcommands:
  run       execute a benchmark (config file + flag overrides), write CSVs
  diag      growth-rate diagnostics across horizons
  gen-rkhs  emit a reproducible kernel-expansion target file
  optimum   certify a target's optimum by dense random search

Every config-file key is also a flag; flags win.  GPBANDIT_OUTPUT_DIR
overrides the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench
from .bench import BenchConfig, ObjectiveSpec, build_bench_config, load_config_file
from .kernels import KernelSpec
from .testbed import (
    STANDARD_FUNCTIONS,
    RkhsFunction,
    estimate_optimum,
    make_rkhs_function,
    standard_function,
)

_CONFIG_KEYS = sorted(bench._DEFAULTS)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    for key in _CONFIG_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)


def _cmd_run(args) -> int:
    values = load_config_file(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    env_out = os.environ.get("GPBANDIT_OUTPUT_DIR")
    if env_out:
        values["output_dir"] = env_out
    config = build_bench_config(values)
    summary = bench.run_benchmark(config)
    print(f"manifest: {summary['manifest']}")
    for label, path in summary["aggregates"].items():
        print(f"aggregate[{label}]: {path}")
    return 0


def _cmd_diag(args) -> int:
    values = load_config_file(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    horizons = [int(h) for h in args.horizons.split(",")]
    if len(set(horizons)) < 2:
        print("diag needs at least two distinct horizons", file=sys.stderr)
        return 2
    traces = []
    for T in horizons:
        values["T"] = str(T)
        values["output_dir"] = os.path.join(
            values.get("output_dir", "bench_out"), f"T{T}"
        )
        config = build_bench_config(values)
        summary = bench.run_benchmark(config)
        for trs in summary["by_label"].values():
            traces.extend(trs)
        values["output_dir"] = os.path.dirname(values["output_dir"])
    report = bench.diagnostics_report(traces)
    text = report.as_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _cmd_gen_rkhs(args) -> int:
    kernel = KernelSpec(
        args.kernel_family,
        args.lengthscale,
        args.nu if args.kernel_family == "matern" else None,
    )
    rng = np.random.default_rng(args.seed)
    f = make_rkhs_function(kernel, args.dim, args.centers, rng,
                           optimum_budget=args.budget)
    f.save(args.out)
    print(json.dumps({
        "file": args.out,
        "dim": f.dim,
        "centers": len(f.weights),
        "rkhs_norm": float(np.sqrt(f.rkhs_norm_sq)),
        "optimum_value": f.optimum_value,
    }, indent=2))
    return 0


def _cmd_optimum(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.objective == "rkhs":
        f = RkhsFunction.load(args.rkhs_file)
        target, d = f, f.dim
    else:
        target, d, _, _ = standard_function(args.objective)
    value, point = estimate_optimum(target, d, args.budget, rng)
    print(json.dumps({
        "objective": args.objective,
        "budget": args.budget,
        "value": value,
        "point": [float(c) for c in point],
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpbandit",
        description="GP bandit optimization benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark")
    p_run.add_argument("--config", help="flat key=value config file")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_diag = sub.add_parser("diag", help="growth-rate diagnostics")
    p_diag.add_argument("--config", help="flat key=value config file")
    p_diag.add_argument("--horizons", default="50,100,200",
                        help="comma-separated horizons")
    p_diag.add_argument("--out", help="write the report to this file")
    _add_config_flags(p_diag)
    p_diag.set_defaults(func=_cmd_diag)

    p_gen = sub.add_parser("gen-rkhs", help="emit a kernel-expansion target")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--dim", type=int, default=5)
    p_gen.add_argument("--centers", type=int, default=500)
    p_gen.add_argument("--kernel-family", default="matern")
    p_gen.add_argument("--nu", type=float, default=2.5)
    p_gen.add_argument("--lengthscale", type=float, default=0.2)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--budget", type=int, default=50_000)
    p_gen.set_defaults(func=_cmd_gen_rkhs)

    p_opt = sub.add_parser("optimum", help="certify a target's optimum")
    p_opt.add_argument("--objective", default="hartmann3",
                       choices=list(STANDARD_FUNCTIONS) + ["rkhs"])
    p_opt.add_argument("--rkhs-file")
    p_opt.add_argument("--budget", type=int, default=100_000)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.set_defaults(func=_cmd_optimum)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
