"""Parameter and result types: validation, derived fields, round-trips."""

import json
import math

import numpy as np
import pytest

from midiode import (
    ComplexValue,
    DiodeParams,
    ReducedParams,
    RegimeReport,
    RootClass,
    RootSet,
    ShootResult,
    Trajectory,
    reduce_params,
    to_json,
)
from midiode.model import Regime


def test_diode_params_derives_alpha() -> None:
    p = DiodeParams(j_x=0.5, phi_L=0.6, a_L=0.2, beta=1.0)
    assert p.alpha == 1.6


@pytest.mark.parametrize("bad", [
    dict(j_x=0.0, phi_L=0.0, a_L=0.0, beta=0.0),
    dict(j_x=-1.0, phi_L=0.0, a_L=0.0, beta=0.0),
    dict(j_x=1.0, phi_L=0.0, a_L=0.0, beta=-0.1),
    dict(j_x=float("nan"), phi_L=0.0, a_L=0.0, beta=0.0),
    dict(j_x=1.0, phi_L=float("inf"), a_L=0.0, beta=0.0),
])
def test_diode_params_rejects_bad_values(bad: dict) -> None:
    with pytest.raises(ValueError):
        DiodeParams(**bad)


def test_diode_params_round_trip() -> None:
    p = DiodeParams(j_x=2.0, phi_L=1.5, a_L=0.3, beta=0.7)
    assert DiodeParams.from_dict(p.to_dict()) == p


def test_diode_params_from_dict_checks_alpha() -> None:
    data = DiodeParams(j_x=1.0, phi_L=1.0, a_L=0.0, beta=0.0).to_dict()
    data["alpha"] = 3.0
    with pytest.raises(ValueError, match="alpha"):
        DiodeParams.from_dict(data)


def test_reduce_params_known_values() -> None:
    # k / (8 j_x) and beta^2 / (2 j_x), checked by hand
    p = DiodeParams(j_x=1.0, phi_L=0.5, a_L=0.0, beta=math.sqrt(2.0))
    r = reduce_params(8.0, p)
    assert r.k_hat == pytest.approx(1.0, abs=1e-15)
    assert r.b_hat == pytest.approx(1.0, abs=1e-15)
    assert r.gamma == pytest.approx(-1.0, abs=1e-15)

    p2 = DiodeParams(j_x=0.5, phi_L=0.0, a_L=0.0, beta=1.0)
    r2 = reduce_params(4.0, p2)
    assert (r2.k_hat, r2.b_hat, r2.gamma) == (1.0, 1.0, -1.0)


def test_reduce_params_gamma_mirrors_b_hat() -> None:
    p = DiodeParams(j_x=0.37, phi_L=0.1, a_L=0.0, beta=1.3)
    r = reduce_params(-2.0, p)
    assert r.gamma == -r.b_hat
    assert r.b_hat > 0.0


def test_reduced_params_round_trip_and_validation() -> None:
    r = ReducedParams(k_hat=1.0, b_hat=0.5, gamma=-0.5)
    assert ReducedParams.from_dict(r.to_dict()) == r
    with pytest.raises(ValueError):
        ReducedParams(k_hat=float("nan"), b_hat=0.0, gamma=0.0)


def test_complex_value_round_trip() -> None:
    z = ComplexValue.from_complex(1.5 - 2.25j)
    assert (z.re, z.im) == (1.5, -2.25)
    assert z.to_complex() == 1.5 - 2.25j
    assert ComplexValue.from_dict(z.to_dict()) == z
    with pytest.raises(ValueError):
        ComplexValue(re=float("inf"), im=0.0)


def test_root_set_multiplicities_must_sum_to_three() -> None:
    one = ComplexValue(re=1.0, im=0.0)
    with pytest.raises(ValueError, match="sum to 3"):
        RootSet(discriminant=0.0, classification=RootClass.DOUBLE_ROOT,
                roots=((one, 2),))


def test_root_set_expansion_and_round_trip() -> None:
    rs = RootSet(discriminant=0.0, classification=RootClass.DOUBLE_ROOT,
                 roots=((ComplexValue(-0.0, 0.0), 1),
                        (ComplexValue(1.0, 0.0), 2)))
    assert rs.as_complex() == [0.0 + 0.0j, 1.0 + 0.0j, 1.0 + 0.0j]
    again = RootSet.from_dict(rs.to_dict())
    assert again.classification is RootClass.DOUBLE_ROOT
    assert again.as_complex() == rs.as_complex()


def test_trajectory_validates_shapes_and_monotonic_grid() -> None:
    grid = np.array([0.1, 0.2, 0.3])
    states = np.zeros((3, 2))
    t = Trajectory(grid=grid, states=states, columns=("a", "b"), metadata={})
    assert t.column("b").shape == (3,)
    with pytest.raises(ValueError, match="shapes"):
        Trajectory(grid=grid, states=np.zeros((3, 1)), columns=("a", "b"),
                   metadata={})
    with pytest.raises(ValueError, match="increasing"):
        Trajectory(grid=np.array([0.1, 0.1, 0.3]), states=states,
                   columns=("a", "b"), metadata={})


def test_trajectory_round_trip() -> None:
    t = Trajectory(grid=np.array([0.5, 1.0]),
                   states=np.array([[1.0, 2.0], [3.0, 4.0]]),
                   columns=("p", "q"), metadata={"origin": {"x": 0.0}})
    back = Trajectory.from_dict(t.to_dict())
    assert np.array_equal(back.grid, t.grid)
    assert np.array_equal(back.states, t.states)
    assert back.columns == t.columns
    assert back.metadata == t.metadata


def test_regime_report_round_trip() -> None:
    r = RegimeReport(gamma=3.0, regime=Regime.PERIODIC, turning_point=0.25,
                     period=1.5)
    assert RegimeReport.from_dict(r.to_dict()) == r
    bare = RegimeReport(gamma=0.0, regime=Regime.UNBOUNDED)
    assert bare.turning_point is None and bare.period is None


def test_shoot_result_round_trip() -> None:
    traj = Trajectory(grid=np.array([0.5]), states=np.array([[1.0]]),
                      columns=("u",), metadata={})
    sr = ShootResult(j_x=1.0, beta=0.5, trajectory=traj,
                     end_values=(1.5, 0.1), residual=(0.0, 0.0),
                     converged=True, iterations=3, flags=("penalized",))
    back = ShootResult.from_dict(sr.to_dict())
    assert back.end_values == (1.5, 0.1)
    assert back.converged is True
    assert back.flags == ("penalized",)


def test_to_json_is_deterministic_and_sorted() -> None:
    payload = {"b": 1, "a": {"d": 2.0, "c": [1, 2]}}
    text = to_json(payload)
    assert text == to_json(payload)
    assert json.loads(text) == payload
    assert text.index('"a"') < text.index('"b"')
