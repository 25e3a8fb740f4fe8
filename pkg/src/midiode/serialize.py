"""Deterministic file emitters (CSV, JSON, gnuplot matrix).

All floats are written with 17 significant digits, enough to round-trip an
IEEE double, and all files use "\n" newlines regardless of platform, so a
rerun with identical inputs is byte-identical.
"""

from __future__ import annotations

import math

from .model import to_json


def fmt(x: float) -> str:
    """Format one float with 17 significant digits."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".17g")


def write_text(path, text: str):
    with open(path, "w", newline="\n") as handle:
        handle.write(text)


def trajectory_csv(traj) -> str:
    """CSV body for a trajectory: x plus the state columns."""
    header = ",".join(("x",) + traj.columns)
    lines = [header]
    for x, row in zip(traj.grid, traj.states):
        lines.append(",".join([fmt(x)] + [fmt(value) for value in row]))
    return "\n".join(lines) + "\n"


def scan_csv(scan) -> str:
    """Long-format CSV for a scan.

    One row per (grid point, solution); columns k_hat, b_hat,
    solution_index, re, im, multiplicity, discriminant.
    """
    lines = ["k_hat,b_hat,solution_index,re,im,multiplicity,discriminant"]
    for i in range(len(scan.k_values)):
        for idx, (value, mult) in enumerate(scan.solutions[i]):
            lines.append(",".join([
                fmt(scan.k_values[i]), fmt(scan.b_values[i]), str(idx),
                fmt(value.real), fmt(value.imag), str(mult),
                fmt(scan.discriminants[i])]))
    return "\n".join(lines) + "\n"


def surface_gnuplot(scan, z: str = "re") -> str:
    """gnuplot-ready matrix blocks for a surface scan.

    One index block per solution layer; within a block, "k b z" lines with a
    blank line after each k-row, suitable for splot with the index keyword.
    Grid points missing a layer (fewer solutions than the layer index) emit
    nan, which gnuplot treats as missing data.
    """
    if z not in ("re", "im"):
        raise ValueError(f"z must be 're' or 'im', got {z!r}")
    spec = scan.sweep_spec
    n_k, n_b = spec["n_k"], spec["n_b"]
    layers = max((len(sols) for sols in scan.solutions), default=0)
    blocks = []
    for layer in range(layers):
        lines = [f"# layer {layer} z={z}"]
        for i in range(n_k):
            for j in range(n_b):
                point = i * n_b + j
                sols = scan.solutions[point]
                if layer < len(sols):
                    value = sols[layer][0]
                    zval = value.real if z == "re" else value.imag
                    ztxt = fmt(zval)
                else:
                    ztxt = "nan"
                lines.append(f"{fmt(scan.k_values[point])} "
                             f"{fmt(scan.b_values[point])} {ztxt}")
            lines.append("")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def write_trajectory(traj, path, fileformat: str = "csv"):
    if fileformat == "csv":
        write_text(path, trajectory_csv(traj))
    elif fileformat == "json":
        write_text(path, to_json(traj) + "\n")
    else:
        raise ValueError(f"unknown trajectory format {fileformat!r}")


def write_scan(scan, path, fileformat: str = "csv"):
    if fileformat == "csv":
        write_text(path, scan_csv(scan))
    elif fileformat == "json":
        write_text(path, to_json(scan) + "\n")
    elif fileformat == "gnuplot":
        if scan.sweep_spec.get("mode") != "surface":
            raise ValueError("gnuplot format needs a surface scan")
        z = scan.sweep_spec.get("z", "re")
        write_text(path, surface_gnuplot(scan, z))
    else:
        raise ValueError(f"unknown scan format {fileformat!r}")
