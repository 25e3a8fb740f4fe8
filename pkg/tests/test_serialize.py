"""Deterministic emitters: round-trip fidelity and file layout."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from midiode import Trajectory, scan_1d, scan_surface
from midiode.serialize import (
    fmt,
    scan_csv,
    surface_gnuplot,
    trajectory_csv,
    write_scan,
    write_trajectory,
)


@pytest.fixture
def tiny_trajectory() -> Trajectory:
    return Trajectory(grid=np.array([0.25, 0.5, 1.0]),
                      states=np.array([[1.0, 2.0],
                                       [0.1, -0.25],
                                       [math.pi, 1.0 / 3.0]]),
                      columns=("D", "D_prime"),
                      metadata={"j_x": 1.0})


def test_fmt_round_trips_representative_values() -> None:
    for x in (math.pi, 1.0 / 3.0, 0.1, -0.1, 1e-300, 5e-324, 1e308, 0.0,
              -0.0, 2.0 / 3.0, -12345.678901234567):
        assert float(fmt(x)) == x


def test_fmt_special_values() -> None:
    assert fmt(float("nan")) == "nan"
    assert fmt(3) == "3"
    assert float(fmt(float("inf"))) == float("inf")


@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_any_finite_double(x: float) -> None:
    assert float(fmt(x)) == x


def test_trajectory_csv_layout(tiny_trajectory: Trajectory) -> None:
    text = trajectory_csv(tiny_trajectory)
    lines = text.splitlines()
    assert lines[0] == "x,D,D_prime"
    assert len(lines) == 4
    assert text.endswith("\n")
    x, d, dp = lines[3].split(",")
    assert float(x) == 1.0
    assert float(d) == math.pi
    assert float(dp) == 1.0 / 3.0


def test_scan_csv_long_format() -> None:
    # the middle grid point k_hat = -2 carries a double root, so it emits
    # two rows while its neighbors emit three
    scan = scan_1d("u", ("b_hat", 0.0), ("k_hat", (-2.5, -1.5), 3))
    text = scan_csv(scan)
    lines = text.splitlines()
    assert lines[0] == ("k_hat,b_hat,solution_index,re,im,multiplicity,"
                        "discriminant")
    assert len(lines) == 1 + 3 + 2 + 3
    rows = [line.split(",") for line in lines[1:]]
    mid = [r for r in rows if float(r[0]) == -2.0]
    assert sorted(int(r[5]) for r in mid) == [1, 2]
    assert all(float(r[6]) == 0.0 for r in mid)
    for r in rows:
        assert int(r[2]) >= 0
        float(r[3]), float(r[4])


def test_surface_gnuplot_blocks() -> None:
    # the k = +3 row of this grid has no positive-real-part root, so both
    # layers show nan there while k = -3 carries two candidates; all roots
    # sit well away from the imaginary axis so roundoff cannot flip a side
    scan = scan_surface("theta", (-3.0, 3.0), (1.0, 2.0), 2, 2)
    assert scan.coverage == 0.5
    text = surface_gnuplot(scan, z="re")
    # layers separate with two blank lines, k-rows with one (gnuplot index
    # convention), so the block separator is three consecutive newlines
    blocks = text.rstrip("\n").split("\n\n\n")
    assert len(blocks) == 2
    for layer, block in enumerate(blocks):
        lines = block.split("\n")
        assert lines[0] == f"# layer {layer} z=re"
        assert len(lines) == 6
        assert lines[3] == ""
        for data_line in (lines[4], lines[5]):
            k, b, z = data_line.split(" ")
            assert float(k) == 3.0
            assert z == "nan"
        for data_line in (lines[1], lines[2]):
            assert data_line.split(" ")[2] != "nan"


def test_surface_gnuplot_rejects_unknown_height() -> None:
    scan = scan_surface("u", (-1.0, 1.0), (0.0, 1.0), 2, 2)
    with pytest.raises(ValueError, match="'re' or 'im'"):
        surface_gnuplot(scan, z="abs")


def test_write_trajectory_csv_and_json(tmp_path,
                                       tiny_trajectory: Trajectory) -> None:
    csv_path = tmp_path / "traj.csv"
    write_trajectory(tiny_trajectory, csv_path, "csv")
    assert csv_path.read_text() == trajectory_csv(tiny_trajectory)

    json_path = tmp_path / "traj.json"
    write_trajectory(tiny_trajectory, json_path, "json")
    loaded = json.loads(json_path.read_text())
    assert loaded["columns"] == ["D", "D_prime"]
    assert loaded["grid"] == [0.25, 0.5, 1.0]
    assert loaded["metadata"] == {"j_x": 1.0}

    with pytest.raises(ValueError, match="unknown trajectory format"):
        write_trajectory(tiny_trajectory, tmp_path / "x.bin", "parquet")


def test_write_scan_formats(tmp_path) -> None:
    line = scan_1d("u", ("b_hat", 2.0), ("k_hat", (-3.0, 3.0), 5))
    csv_path = tmp_path / "scan.csv"
    write_scan(line, csv_path, "csv")
    assert csv_path.read_text() == scan_csv(line)

    json_path = tmp_path / "scan.json"
    write_scan(line, json_path, "json")
    loaded = json.loads(json_path.read_text())
    assert loaded["sweep_spec"]["mode"] == "1d"
    assert len(loaded["solutions"]) == 5

    with pytest.raises(ValueError, match="needs a surface scan"):
        write_scan(line, tmp_path / "scan.gp", "gnuplot")

    surf = scan_surface("u", (-1.0, 1.0), (0.0, 1.0), 2, 3)
    gp_path = tmp_path / "surf.gp"
    write_scan(surf, gp_path, "gnuplot")
    assert gp_path.read_text() == surface_gnuplot(surf, "re")

    with pytest.raises(ValueError, match="unknown scan format"):
        write_scan(line, tmp_path / "scan.bin", "parquet")


def test_emitters_are_deterministic() -> None:
    scan = scan_surface("theta", (-2.0, 2.0), (0.0, 2.0), 3, 3)
    assert scan_csv(scan) == scan_csv(scan)
    assert surface_gnuplot(scan) == surface_gnuplot(scan)
