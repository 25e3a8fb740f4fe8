"""Command-line front end.

Subcommands: cubic, integrate, shoot, scan, child-langmuir. Every value a
flag can set may also come from a flat JSON config file (--config); flags
override config entries, config entries override built-in defaults.
Output files land in --out; a bare filename (or no --out at all) resolves
against the MIDIODE_OUT_DIR environment variable when it is set.

Exit codes: 0 success, 1 solver-flagged result (diagnostics on stderr),
2 usage or config error. Identical invocations produce byte-identical
stdout and output files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bifurcation, bvp, potential, serialize
from .cubic import solve_closed_form, solve_numeric_oracle, theta_candidates
from .model import Regime, RegimeReport, to_json

OUT_DIR_ENV = "MIDIODE_OUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="midiode",
        description="Solvers for the magnetically insulated diode model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cubic", help="solve the deflection cubic")
    p.add_argument("k_hat", nargs="?", type=float, default=None)
    p.add_argument("b_hat", nargs="?", type=float, default=None)
    p.add_argument("--space", choices=("u", "theta"), default=None)
    p.add_argument("--oracle", action="store_true", default=None,
                   help="add companion-matrix verification")
    _common_io(p)

    p = sub.add_parser("integrate", help="integrate the effective potential")
    p.add_argument("j_x", nargs="?", type=float, default=None)
    p.add_argument("gamma", nargs="?", type=float, default=None)
    p.add_argument("x_max", nargs="?", type=float, default=None)
    p.add_argument("--rtol", type=float, default=None)
    p.add_argument("--atol", type=float, default=None)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    _common_io(p)

    p = sub.add_parser("shoot", help="shoot for collector conditions")
    p.add_argument("alpha", nargs="?", type=float, default=None)
    p.add_argument("a_l", nargs="?", type=float, default=None)
    p.add_argument("--guess-jx", dest="guess_jx", type=float, default=None)
    p.add_argument("--guess-beta", dest="guess_beta", type=float,
                   default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--rtol", type=float, default=None)
    p.add_argument("--atol", type=float, default=None)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    _common_io(p)

    p = sub.add_parser("scan", help="sweep the reduced parameter plane")
    p.add_argument("mode", nargs="?", choices=("1d", "surface"),
                   default=None)
    p.add_argument("--space", choices=("u", "theta"), default=None)
    p.add_argument("--fixed-name", dest="fixed_name",
                   choices=("k_hat", "b_hat"), default=None)
    p.add_argument("--fixed-value", dest="fixed_value", type=float,
                   default=None)
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k-min", dest="k_min", type=float, default=None)
    p.add_argument("--k-max", dest="k_max", type=float, default=None)
    p.add_argument("--b-min", dest="b_min", type=float, default=None)
    p.add_argument("--b-max", dest="b_max", type=float, default=None)
    p.add_argument("--n-k", dest="n_k", type=int, default=None)
    p.add_argument("--n-b", dest="n_b", type=int, default=None)
    p.add_argument("--z", choices=("re", "im"), default=None)
    p.add_argument("--branches", action="store_true", default=None,
                   help="add assembled branch summaries to the report")
    p.add_argument("--format", choices=("csv", "json", "gnuplot"),
                   default=None)
    _common_io(p)

    p = sub.add_parser("child-langmuir",
                       help="space-charge-limit inequality report")
    p.add_argument("delta", nargs="?", type=float, default=None)
    p.add_argument("j_x_max", nargs="?", type=float, default=None)
    p.add_argument("--phi-l", dest="phi_l", type=float, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    _common_io(p)
    return parser


def _common_io(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="flat JSON config file")
    p.add_argument("--out", default=None, help="output file path")


_DEFAULTS = {
    "cubic": {"space": "u", "oracle": False, "out": None},
    "integrate": {"rtol": 1e-10, "atol": 1e-10, "x0": 1e-6,
                  "format": "csv", "out": "trajectory.csv"},
    "shoot": {"guess_jx": 1.0, "guess_beta": 0.0, "tol": 1e-8,
              "rtol": 1e-10, "atol": 1e-10, "x0": 1e-6, "format": "json",
              "out": "shoot.json"},
    "scan": {"space": "u", "fixed_name": None, "fixed_value": None,
             "lo": -5.0, "hi": 5.0, "n": 1001, "k_min": -5.0, "k_max": 5.0,
             "b_min": -5.0, "b_max": 5.0, "n_k": 201, "n_b": 201, "z": "re",
             "branches": False, "format": "csv", "out": None},
    "child-langmuir": {"phi_l": None, "grid_n": 512, "out": None},
}


def _merge_config(args: argparse.Namespace) -> dict:
    """Built-in defaults, overridden by config entries, then by flags."""
    merged = dict(_DEFAULTS[args.command])
    cli = {k: v for k, v in vars(args).items()
           if k not in ("command", "config")}
    if args.config is not None:
        with open(args.config) as handle:
            loaded = json.load(handle)
        if not isinstance(loaded, dict):
            raise ValueError("config must be a flat JSON object")
        unknown = sorted(set(loaded) - set(cli))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(loaded)
    merged.update({k: v for k, v in cli.items() if v is not None})
    return merged


def _require(merged: dict, *names):
    for name in names:
        if merged.get(name) is None:
            raise ValueError(f"missing required parameter: {name}")


def _resolve_out(path, default_name: str) -> str:
    if path is None:
        path = default_name
    if not os.path.dirname(path):
        out_dir = os.environ.get(OUT_DIR_ENV)
        if out_dir:
            path = os.path.join(out_dir, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _emit(payload) -> None:
    print(to_json(payload))


def _max_root_deviation(closed, oracle) -> float:
    a = sorted(closed.as_complex(), key=lambda z: (z.real, z.imag))
    b = sorted(oracle.as_complex(), key=lambda z: (z.real, z.imag))
    return max(abs(x - y) for x, y in zip(a, b))


def _cmd_cubic(merged: dict) -> int:
    _require(merged, "k_hat", "b_hat")
    k_hat, b_hat = float(merged["k_hat"]), float(merged["b_hat"])
    root_set = solve_closed_form(k_hat, b_hat)
    payload = {"k_hat": k_hat, "b_hat": b_hat}
    if merged["space"] == "theta":
        payload["result"] = theta_candidates(root_set).to_dict()
        payload["roots"] = root_set.to_dict()
    else:
        payload["result"] = root_set.to_dict()
    if merged["oracle"]:
        oracle = solve_numeric_oracle(k_hat, b_hat)
        payload["oracle"] = oracle.to_dict()
        payload["max_deviation"] = _max_root_deviation(root_set, oracle)
    _emit(payload)
    if merged["out"] is not None:
        serialize.write_text(_resolve_out(merged["out"], "cubic.json"),
                             to_json(payload) + "\n")
    if root_set.flags:
        print(f"solver flags: {', '.join(root_set.flags)}", file=sys.stderr)
        return 1
    return 0


def _cmd_integrate(merged: dict) -> int:
    _require(merged, "j_x", "gamma", "x_max")
    j_x, gamma = float(merged["j_x"]), float(merged["gamma"])
    traj = potential.integrate_D(j_x, gamma, float(merged["x_max"]),
                                 rtol=float(merged["rtol"]),
                                 atol=float(merged["atol"]),
                                 x0=float(merged["x0"]))
    regime = Regime(traj.metadata["regime"])
    turning = (potential.turning_point(gamma)
               if regime is not Regime.ASYMPTOTIC_TO_ONE else 1.0)
    report = RegimeReport(gamma=gamma, regime=regime, turning_point=turning,
                          period=traj.metadata.get("period"))
    out = _resolve_out(merged["out"], "trajectory.csv")
    serialize.write_trajectory(traj, out, merged["format"])
    _emit({"report": report.to_dict(), "output": out,
           "n_samples": len(traj.grid)})
    return 0


def _cmd_shoot(merged: dict) -> int:
    _require(merged, "alpha", "a_l")
    result = bvp.shoot((float(merged["alpha"]), float(merged["a_l"])),
                       (float(merged["guess_jx"]),
                        float(merged["guess_beta"])),
                       float(merged["tol"]), rtol=float(merged["rtol"]),
                       atol=float(merged["atol"]), x0=float(merged["x0"]))
    out = _resolve_out(merged["out"], "shoot.json")
    if merged["format"] == "csv":
        serialize.write_trajectory(result.trajectory, out, "csv")
    else:
        serialize.write_text(out, to_json(result) + "\n")
    summary = result.to_dict()
    del summary["trajectory"]
    summary["output"] = out
    _emit(summary)
    if not result.converged or result.flags:
        if result.flags:
            print(f"solver flags: {', '.join(result.flags)}",
                  file=sys.stderr)
        return 1
    return 0


def _branch_summary(branches) -> list:
    out = []
    for br in branches:
        out.append({"kind": br.kind, "start": br.start, "end": br.end,
                    "left_event": br.left_event,
                    "right_event": br.right_event,
                    "closed_loop": br.closed_loop,
                    "flags": list(br.flags)})
    return out


def _cmd_scan(merged: dict) -> int:
    _require(merged, "mode")
    mode = merged["mode"]
    if merged["format"] == "gnuplot" and mode != "surface":
        raise ValueError("gnuplot output needs a surface scan")
    if merged["branches"] and (mode != "1d" or merged["space"] != "u"):
        raise ValueError("branch assembly needs a 1-D u-space scan")
    if mode == "1d":
        _require(merged, "fixed_name", "fixed_value")
        scan = bifurcation.scan_1d(
            merged["space"],
            (merged["fixed_name"], float(merged["fixed_value"])),
            (_other_param(merged["fixed_name"]),
             (float(merged["lo"]), float(merged["hi"])),
             int(merged["n"])))
        default_name = "scan.csv"
    else:
        scan = bifurcation.scan_surface(
            merged["space"],
            (float(merged["k_min"]), float(merged["k_max"])),
            (float(merged["b_min"]), float(merged["b_max"])),
            int(merged["n_k"]), int(merged["n_b"]), merged["z"])
        default_name = "scan.dat" if merged["format"] == "gnuplot" \
            else "scan.csv"
    out = _resolve_out(merged["out"], default_name)
    serialize.write_scan(scan, out, merged["format"])
    payload = {"mode": mode, "space": merged["space"],
               "n_points": len(scan.k_values), "coverage": scan.coverage,
               "bifurcation_points": list(scan.bifurcation_points),
               "masked_points": (None if scan.mask is None
                                 else int(np.count_nonzero(scan.mask))),
               "output": out}
    if merged["branches"]:
        payload["branches"] = _branch_summary(
            bifurcation.assemble_branches(scan))
    _emit(payload)
    return 0


def _other_param(name: str) -> str:
    return "b_hat" if name == "k_hat" else "k_hat"


def _cmd_child_langmuir(merged: dict) -> int:
    _require(merged, "delta", "j_x_max")
    phi_l = merged["phi_l"]
    report = bvp.child_langmuir_check(
        float(merged["delta"]), float(merged["j_x_max"]),
        None if phi_l is None else float(phi_l),
        grid_n=int(merged["grid_n"]))
    _emit(report)
    if merged["out"] is not None:
        serialize.write_text(
            _resolve_out(merged["out"], "child_langmuir.json"),
            to_json(report) + "\n")
    return 0


_DISPATCH = {
    "cubic": _cmd_cubic,
    "integrate": _cmd_integrate,
    "shoot": _cmd_shoot,
    "scan": _cmd_scan,
    "child-langmuir": _cmd_child_langmuir,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        merged = _merge_config(args)
        return _DISPATCH[args.command](merged)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
