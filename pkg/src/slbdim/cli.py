"""Command-line interface: solve single configurations, run sweeps, emit isolines.

Flags may also come from a JSON config file (--config); explicit command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import get_case, l2_error, rms, run_sweep, write_isoline_csvs
from .solver import SolverConfig, prepare_geometry, save_field, solve_bvp


def parse_grid(spec: str) -> list:
    """Parse 'a:b:step' into an inclusive list of floats."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:step, got {spec!r}")
    a, b, step = (float(p) for p in parts)
    if step <= 0:
        raise argparse.ArgumentTypeError("grid step must be positive")
    out = []
    v = a
    while v <= b + 1e-12 * max(1.0, abs(b)):
        out.append(round(v, 12))
        v += step
    return out


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """File-config values fill in flags the command line left unset."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            file_cfg = json.load(f)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(h=cfg.get("spacing"), n_int_target=cfg.get("nodes"),
                        n=int(cfg["stencil"]), epsilon=float(cfg["eps"]),
                        method=cfg["method"])


def cmd_solve(args) -> int:
    defaults = {"case": 1, "method": "slbdim", "eps": 1.0, "stencil": 25,
                "spacing": None, "nodes": None, "nodes_out": None, "field_out": None}
    cfg = _merged(args, defaults)
    if cfg["spacing"] is None and cfg["nodes"] is None:
        print("error: one of --spacing or --nodes is required", file=sys.stderr)
        return 2
    domain, problem = get_case(int(cfg["case"]))
    config = _solver_config(cfg)
    disc = prepare_geometry(domain, config)
    sol = solve_bvp(domain, problem, config, discretization=disc)
    line = (f"case={cfg['case']} method={config.method} N_int={disc.nodes.n_int} "
            f"N_bnd={disc.nodes.n_bnd} n={config.n} eps={config.epsilon:g} "
            f"solver={sol.report.method} iters={sol.report.iterations} "
            f"residual={sol.report.residual:.3e}")
    if problem.exact_solution is not None:
        exact = problem.exact_solution(disc.nodes.interior)
        line += f" l2_error={l2_error(exact, sol.values):.6e} rms={rms(exact, sol.values):.6e}"
    print(line)
    if cfg["nodes_out"]:
        disc.nodes.save(cfg["nodes_out"])
    if cfg["field_out"]:
        save_field(cfg["field_out"], disc.nodes, sol.values)
    return 0


def cmd_sweep(args) -> int:
    defaults = {"case": 1, "methods": "slbdim", "eps_grid": "1:10:1",
                "n_grid": None, "stencil": 25, "nodes": 916, "out": "results.csv"}
    cfg = _merged(args, defaults)
    eps_grid = parse_grid(cfg["eps_grid"]) if isinstance(cfg["eps_grid"], str) \
        else list(cfg["eps_grid"])
    if cfg["n_grid"] is None:
        n_grid = [int(cfg["stencil"])]
    else:
        n_grid = [int(v) for v in (parse_grid(cfg["n_grid"])
                                   if isinstance(cfg["n_grid"], str) else cfg["n_grid"])]
    methods = cfg["methods"].split(",") if isinstance(cfg["methods"], str) else cfg["methods"]
    result = run_sweep(int(cfg["case"]), eps_grid, n_grid, [int(cfg["nodes"])], methods)
    result.write_csv(cfg["out"])
    print(f"wrote {len(result.rows)} rows to {cfg['out']}")
    return 0


def cmd_isolines(args) -> int:
    defaults = {"case": 1, "eps_grid": "1:10:1", "n_grid": "10:100:10",
                "nodes": 916, "out_error": "isolines_error.csv",
                "out_cond": "isolines_cond.csv"}
    cfg = _merged(args, defaults)
    eps_grid = parse_grid(cfg["eps_grid"]) if isinstance(cfg["eps_grid"], str) \
        else list(cfg["eps_grid"])
    n_grid = [int(v) for v in (parse_grid(cfg["n_grid"])
                               if isinstance(cfg["n_grid"], str) else cfg["n_grid"])]
    result = write_isoline_csvs(int(cfg["case"]), eps_grid, n_grid, int(cfg["nodes"]),
                                cfg["out_error"], cfg["out_cond"])
    print(f"wrote {len(result.rows)} grid cells to {cfg['out_error']} and {cfg['out_cond']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slbdim",
                                description="Meshless local boundary-domain integral "
                                            "solver for 2D Helmholtz-type problems")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one benchmark configuration")
    ps.add_argument("--case", type=int, choices=(1, 2))
    ps.add_argument("--method", choices=("lbdim", "slbdim"))
    ps.add_argument("--eps", type=float)
    ps.add_argument("--stencil", type=int, help="stencil size n")
    ps.add_argument("--spacing", type=float, help="target node spacing h")
    ps.add_argument("--nodes", type=int, help="interior node-count target (alternative to --spacing)")
    ps.add_argument("--nodes-out", dest="nodes_out", help="write the node set to this file")
    ps.add_argument("--field-out", dest="field_out", help="write the solution field to this file")
    ps.add_argument("--config", help="JSON file with default flag values")
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", help="run a parameter sweep and write a CSV")
    pw.add_argument("--case", type=int, choices=(1, 2))
    pw.add_argument("--methods", help="comma-separated: lbdim,slbdim")
    pw.add_argument("--eps-grid", dest="eps_grid", help="a:b:step")
    pw.add_argument("--n-grid", dest="n_grid", help="a:b:step over stencil sizes")
    pw.add_argument("--stencil", type=int)
    pw.add_argument("--nodes", type=int)
    pw.add_argument("--out")
    pw.add_argument("--config")
    pw.set_defaults(func=cmd_sweep)

    pi = sub.add_parser("isolines", help="error and conditioning surfaces over (eps, n)")
    pi.add_argument("--case", type=int, choices=(1, 2))
    pi.add_argument("--eps-grid", dest="eps_grid")
    pi.add_argument("--n-grid", dest="n_grid")
    pi.add_argument("--nodes", type=int)
    pi.add_argument("--out-error", dest="out_error")
    pi.add_argument("--out-cond", dest="out_cond")
    pi.add_argument("--config")
    pi.set_defaults(func=cmd_isolines)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
