"""Command-line interface: run simulations, verify against the reference,
sweep design parameters, project runtimes cubically, and compare against
user-supplied baselines.

Exit codes: 0 success, 1 verification failure, 2 configuration/usage error.
All randomness flows from explicit seeds; reports carry no timestamps, so
identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import FwsimError, ConfigError
from .fw import fw_reference
from .graphs import build_distance_matrix, gen_synthetic, load_edge_list
from .hbm import HbmConfig, config_to_dict, load_config, validate_config
from .scheduler import SimResult, simulate, simulate_functional, utilization_report

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

SWEEP_PARAMS = ("channels", "bpes_per_bank", "block_size", "n")


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def build_report(result: SimResult, cfg: HbmConfig, graph_path=None) -> dict:
    """Assemble the JSON run report, separating modeled quantities (cycles,
    counts) from calibrated ones (seconds, joules) and stamping the constants
    used for the latter."""
    util = None
    if result.timeline is not None:
        u = utilization_report(result)
        util = {"max": u["max"], "min": u["min"], "mean": u["mean"]}
    return {
        "tool": {"name": "fwsim", "version": __version__},
        "workload": {
            "n": result.n,
            "block_size": result.block_size,
            "tiles_per_row": result.tiles_per_row,
            "padded_n": result.tiles_per_row * result.block_size,
            "graph": graph_path,
        },
        "config": config_to_dict(cfg),
        "modeled": {
            "total_cycles": result.total_cycles,
            "bulk_load_cycles": result.bulk_load_cycles,
            "op_counts": dataclasses.asdict(result.counts),
            "per_bank_group_busy_cycles": result.per_bank_group_busy,
            "utilization": util,
        },
        "calibrated": {
            "clock_period_ps": cfg.clock_period_ps,
            "total_time_seconds": result.total_time_seconds,
            "energy": result.energy.as_dict(),
            "energy_joules": result.energy.total_joules,
            "energy_params_pj": {
                f.name: getattr(cfg.energy, f.name)
                for f in dataclasses.fields(cfg.energy)
            },
        },
    }


def _workload_from_args(args) -> tuple[int, str | None]:
    if args.graph is not None:
        edges = load_edge_list(args.graph, directed=not args.undirected)
        return edges.num_vertices, args.graph
    if args.nodes is None:
        raise ConfigError("either --graph or --nodes is required")
    return args.nodes, None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    n, graph_path = _workload_from_args(args)
    result = simulate(
        n, args.block_size, cfg, enforce_wavefront=not args.relax_wavefront
    )
    _write_text(args.out, _json_dumps(build_report(result, cfg, graph_path)))
    return EXIT_OK


def cmd_verify(args) -> int:
    """Generate random graphs, run the blocked pipeline, and compare every
    element against the reference (INF entries included)."""
    cfg = load_config(args.config)
    n, b = args.nodes, args.block_size
    failures = []
    for trial in range(args.trials):
        edges = gen_synthetic(n, args.density, seed=args.seed + trial)
        d = build_distance_matrix(edges)
        expected = fw_reference(d)
        got, _ = simulate_functional(d, b, cfg, enforce_wavefront=False)
        if not np.array_equal(expected, got):
            i, j = map(int, np.argwhere(expected != got)[0])
            failures.append(
                {
                    "trial": trial,
                    "seed": args.seed + trial,
                    "i": i,
                    "j": j,
                    "expected": int(expected[i, j]),
                    "got": int(got[i, j]),
                }
            )
            break
    report = {
        "n": n,
        "block_size": b,
        "density": args.density,
        "trials_run": args.trials if not failures else failures[0]["trial"] + 1,
        "status": "pass" if not failures else "fail",
        "failures": failures,
    }
    if args.out:
        _write_text(args.out, _json_dumps(report))
    if failures:
        f = failures[0]
        print(
            f"verify FAIL: trial {f['trial']} (seed {f['seed']}): "
            f"d[{f['i']}][{f['j']}] expected {f['expected']}, got {f['got']}",
            file=sys.stderr,
        )
        return EXIT_VERIFY_FAILED
    print(f"verify PASS: {args.trials} trials, n={n}, b={b}, density={args.density}")
    return EXIT_OK


def _sweep_point(param: str, value: int, base: HbmConfig, n: int, b: int):
    if param == "channels":
        return dataclasses.replace(base, channels=value), n, b
    if param == "bpes_per_bank":
        return dataclasses.replace(base, bpes_per_bank=value), n, b
    if param == "block_size":
        return base, n, value
    if param == "n":
        return base, value, b
    raise ConfigError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = args.values
    if not values:
        raise ConfigError("sweep needs at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep values must be strictly increasing")

    points = [_sweep_point(args.param, v, cfg, args.nodes, args.block_size)
              for v in values]
    # Validate the whole sweep up front: one bad point rejects everything.
    if not args.relax_wavefront:
        for point_cfg, n, b in points:
            validate_config(point_cfg, -(-n // b))

    def run_point(point):
        point_cfg, n, b = point
        return simulate(n, b, point_cfg,
                        enforce_wavefront=not args.relax_wavefront,
                        keep_timeline=False)

    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(run_point, points))
    else:
        results = [run_point(p) for p in points]

    rows = []
    base_time = results[0].total_time_seconds
    for value, res in zip(values, results):
        rows.append(
            {
                "parameter": args.param,
                "value": value,
                "total_cycles": res.total_cycles,
                "total_time_seconds": res.total_time_seconds,
                "energy_total_fj": res.energy.total_fj,
                "time_ratio_vs_first": res.total_time_seconds / base_time,
            }
        )
    if args.format == "json":
        _write_text(args.out, _json_dumps({"sweep": rows}))
    else:
        header = ("parameter,value,total_cycles,total_time_seconds,"
                  "energy_total_fj,time_ratio_vs_first\n")
        lines = [
            f"{r['parameter']},{r['value']},{r['total_cycles']},"
            f"{r['total_time_seconds']!r},{r['energy_total_fj']},"
            f"{r['time_ratio_vs_first']!r}\n"
            for r in rows
        ]
        _write_text(args.out, header + "".join(lines))
    return EXIT_OK


def project_runtime(t_measured: float, n_measured: int, n_target: int) -> float:
    """Cubic-complexity projection: t * (n_target / n_measured)^3."""
    if t_measured <= 0 or n_measured <= 0 or n_target <= 0:
        raise ConfigError("projection inputs must all be positive")
    return t_measured * (n_target / n_measured) ** 3


def cmd_project(args) -> int:
    seconds = project_runtime(args.measured_seconds, args.measured_n, args.target_n)
    out = {
        "measured_seconds": args.measured_seconds,
        "measured_n": args.measured_n,
        "target_n": args.target_n,
        "projected_seconds": seconds,
    }
    if args.out:
        _write_text(args.out, _json_dumps(out))
    print(repr(seconds))
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.baseline_runtime is None or args.baseline_runtime <= 0:
        raise ConfigError("--baseline-runtime must be a positive duration in seconds")
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    sim_seconds = report["calibrated"]["total_time_seconds"]
    sim_joules = report["calibrated"]["energy_joules"]
    out = {
        "baseline": {
            "name": args.baseline_name,
            "runtime_seconds": args.baseline_runtime,
            "energy_joules": args.baseline_energy,
            "source": "user-supplied (external measurement, not modeled here)",
        },
        "simulated": {
            "total_time_seconds": sim_seconds,
            "energy_joules": sim_joules,
        },
        "speedup": args.baseline_runtime / sim_seconds,
        "energy_ratio": (
            args.baseline_energy / sim_joules
            if args.baseline_energy is not None and sim_joules > 0
            else None
        ),
    }
    _write_text(args.out, _json_dumps(out))
    return EXIT_OK


def _add_workload_flags(p, verify=False):
    p.add_argument("--graph", help="edge-list file (u v [w], '#' comments)")
    p.add_argument("--undirected", action="store_true",
                   help="treat the edge list as undirected")
    p.add_argument("--nodes", type=int, help="synthetic workload size N")
    p.add_argument("--block-size", type=int, required=True, help="tile dimension B")
    p.add_argument("--config", default="default",
                   help="config JSON path, or 'default'")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--relax-wavefront", action="store_true",
                   help="allow 2M > bank-groups (oversubscribed staging)")
    if verify:
        p.add_argument("--density", type=float, default=0.5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwsim",
        description="Blocked Floyd-Warshall on an in-memory-compute HBM3 stack: "
                    "functional verification and cycle/energy modeling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one workload, emit a JSON report")
    _add_workload_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="check the blocked result against the reference")
    _add_workload_flags(p_verify, verify=True)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="sweep one design parameter, emit CSV/JSON")
    _add_workload_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         type=lambda s: [int(v) for v in s.split(",")],
                         help="comma-separated values, strictly increasing")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--parallel", type=int, default=1,
                         help="worker threads (results are order-stable)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_project = sub.add_parser("project", help="cubic runtime projection")
    p_project.add_argument("--measured-seconds", type=float, required=True)
    p_project.add_argument("--measured-n", type=int, required=True)
    p_project.add_argument("--target-n", type=int, required=True)
    p_project.add_argument("--out")
    p_project.set_defaults(func=cmd_project)

    p_compare = sub.add_parser("compare", help="speedup/energy vs a user-supplied baseline")
    p_compare.add_argument("--report", required=True, help="run report JSON path")
    p_compare.add_argument("--baseline-runtime", type=float, required=True,
                           help="baseline runtime, seconds")
    p_compare.add_argument("--baseline-energy", type=float,
                           help="baseline energy, joules (optional)")
    p_compare.add_argument("--baseline-name", default="baseline")
    p_compare.add_argument("--out")
    p_compare.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (FwsimError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
