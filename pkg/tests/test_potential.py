"""Effective-potential integration: startup, regimes, conserved quantity."""

import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from midiode import (
    Regime,
    classify_regime,
    effective_potential,
    first_integral_residual,
    integrate_D,
    regime_report,
    turning_point,
)
from midiode.potential import (
    _startup_state,
    deflection_point,
    series_startup_D,
    startup_amplitude,
)
from midiode import _kernels


def test_startup_amplitude_identity() -> None:
    for j_x in (0.25, 1.0, 3.0):
        a = startup_amplitude(j_x)
        assert a ** 1.5 == pytest.approx(4.5 * j_x, rel=1e-15)


def test_series_startup_slope_consistency() -> None:
    x = np.array([1e-8, 1e-6, 1e-4])
    d, dp = series_startup_D(2.0, x)
    assert dp * x == pytest.approx(4.0 * d / 3.0, rel=1e-14)


def test_effective_potential_values() -> None:
    assert effective_potential(1.0, 2.0) == 0.0
    assert effective_potential(0.0, 5.0) == 0.0
    # positive for every D > 0 when gamma < 2
    d = np.linspace(1e-6, 9.0, 500)
    assert np.all(effective_potential(d, 1.999) > 0.0)


def test_turning_point_values() -> None:
    assert turning_point(0.0) is None
    assert turning_point(1.9999999) is None
    assert turning_point(2.0) == 1.0
    assert turning_point(2.5) == 0.25
    assert turning_point(3.0) == pytest.approx(0.14589803375031546,
                                               abs=1e-16)
    for gamma in (2.0, 2.5, 3.0, 10.0):
        d_t = turning_point(gamma)
        assert effective_potential(d_t, gamma) == pytest.approx(0.0,
                                                               abs=1e-14)


def test_classify_regime_band() -> None:
    assert classify_regime(0.0) is Regime.UNBOUNDED
    assert classify_regime(-3.0) is Regime.UNBOUNDED
    assert classify_regime(2.0) is Regime.ASYMPTOTIC_TO_ONE
    assert classify_regime(2.0 + 1e-13) is Regime.ASYMPTOTIC_TO_ONE
    assert classify_regime(2.0 - 1e-13) is Regime.ASYMPTOTIC_TO_ONE
    assert classify_regime(2.0 + 1e-11) is Regime.PERIODIC
    assert classify_regime(2.0 - 1e-11) is Regime.UNBOUNDED
    assert classify_regime(3.0) is Regime.PERIODIC


def test_unbounded_regime_against_scipy(backend: str) -> None:
    j_x, x_end = 1.0, 2.0
    traj = integrate_D(j_x, 0.0, x_end)
    assert traj.metadata["regime"] == "Unbounded"
    assert traj.metadata["backend"] == backend
    assert traj.grid[-1] == x_end
    assert traj.column("D")[-1] > 10.0

    x0 = traj.metadata["x0"]
    d0, dp0 = _startup_state(j_x, 0.0, x0)

    def rhs(x, y):
        return [y[1], j_x * (6.0 * math.sqrt(y[0]) + 2.0 / math.sqrt(y[0]))]

    ref = solve_ivp(rhs, (x0, x_end), [d0, dp0], method="DOP853",
                    rtol=1e-11, atol=1e-12)
    assert ref.success
    assert traj.column("D")[-1] == pytest.approx(ref.y[0, -1], rel=1e-7)
    assert traj.column("D_prime")[-1] == pytest.approx(ref.y[1, -1],
                                                       rel=1e-7)


def test_asymptotic_regime_plateau(backend: str) -> None:
    traj = integrate_D(1.0, 2.0, 50.0)
    d = traj.column("D")
    assert traj.metadata["regime"] == "AsymptoticToOne"
    assert traj.grid[-1] == 50.0
    assert np.all(np.diff(d) >= -1e-12)
    assert np.max(d) <= 1.0 + 1e-9
    assert abs(d[-1] - 1.0) < 1e-6
    assert deflection_point(traj) is None


def test_periodic_regime_arch_and_tiling(backend: str) -> None:
    traj = integrate_D(1.0, 3.0, 2.0)
    d = traj.column("D")
    meta = traj.metadata
    d_t = turning_point(3.0)
    assert meta["regime"] == "Periodic"
    assert np.max(d) == pytest.approx(d_t, abs=1e-6)
    assert np.min(d) >= 0.0
    assert meta["period"] == pytest.approx(2.0 * meta["turning_point_x"],
                                           rel=1e-15)
    assert meta["period"] == pytest.approx(0.5560336272166557, abs=1e-8)
    assert meta["n_arches"] == math.ceil(2.0 / meta["period"])
    # first interior maximum sits at the first turning point
    assert deflection_point(traj) == pytest.approx(meta["turning_point_x"],
                                                   abs=1e-9)


def test_periodic_period_against_quadrature() -> None:
    traj = integrate_D(1.0, 3.0, 1.0)
    d_t = turning_point(3.0)

    def inverse_speed(d: float) -> float:
        return 1.0 / math.sqrt(8.0 * effective_potential(d, 3.0))

    half, err = quad(inverse_speed, 0.0, d_t, limit=200, epsabs=1e-12)
    assert err < 1e-8
    assert traj.metadata["period"] == pytest.approx(2.0 * half, abs=1e-7)


def test_periodic_descent_matches_direct_integration(backend: str) -> None:
    # the tiled descent is a mirror of the ascent; integrating the
    # second-order form straight through the arch must land on it
    j_x, gamma = 1.0, 3.0
    traj = integrate_D(j_x, gamma, 1.0)
    period = traj.metadata["period"]
    x_turn = traj.metadata["turning_point_x"]
    sel = (traj.grid > x_turn) & (traj.grid < 0.9 * period)
    stops = [float(x) for x in traj.grid[sel]]
    assert len(stops) >= 3

    x0 = traj.metadata["x0"]
    d0, dp0 = _startup_state(j_x, gamma, x0)
    xs, ys, status, _, _ = _kernels.kernel.integrate_d2(
        j_x, gamma, x0, d0, dp0, max(stops), 1e-10, 1e-10, False, stops,
        1_000_000)
    assert status == _kernels.kernel.STATUS_REACHED
    direct = {float(x): (float(y[0]), float(y[1])) for x, y in zip(xs, ys)}
    tiled_d = traj.column("D")[sel]
    tiled_dp = traj.column("D_prime")[sel]
    for x, d_ref, dp_ref in zip(stops, tiled_d, tiled_dp):
        d_val, dp_val = direct[x]
        assert d_val == pytest.approx(d_ref, abs=1e-6)
        assert dp_val == pytest.approx(dp_ref, abs=1e-6)


@pytest.mark.parametrize("gamma,x_end", [(0.0, 2.0), (1.5, 2.0), (2.0, 50.0),
                                         (2.5, 2.0), (3.0, 2.0)])
def test_first_integral_conservation(gamma: float, x_end: float) -> None:
    traj = integrate_D(1.0, gamma, x_end)
    residual = first_integral_residual(traj, 1.0, gamma)
    assert np.max(residual) <= 1e-8


def test_deflection_point_unbounded_is_none() -> None:
    assert deflection_point(integrate_D(1.0, 0.0, 1.0)) is None


def test_x_stops_land_exactly() -> None:
    stops = [0.5, 1.0, 1.5]
    traj = integrate_D(1.0, 0.0, 2.0, x_stops=stops)
    for s in stops:
        assert s in traj.grid
    traj2 = integrate_D(1.0, 2.0, 2.0, x_stops=stops)
    for s in stops:
        assert s in traj2.grid


def test_argument_validation() -> None:
    with pytest.raises(ValueError, match="j_x must be positive"):
        integrate_D(0.0, 1.0, 2.0)
    with pytest.raises(ValueError, match="startup offset"):
        integrate_D(1.0, 1.0, 2.0, x0=0.1)
    with pytest.raises(ValueError, match="x_end must exceed"):
        integrate_D(1.0, 1.0, 1e-7)
    with pytest.raises(ValueError, match="gamma must be finite"):
        integrate_D(1.0, float("nan"), 2.0)
    with pytest.raises(ValueError, match="x_stops is not supported"):
        integrate_D(1.0, 3.0, 2.0, x_stops=[0.5])


def test_turn_search_cap_failure_is_reported() -> None:
    with pytest.raises(RuntimeError, match="no turning point below"):
        regime_report(1.0, 3.0, x_cap=0.1)


def test_metadata_records_run_parameters() -> None:
    traj = integrate_D(2.0, 0.5, 1.0, rtol=1e-9, atol=1e-11)
    meta = traj.metadata
    assert meta["j_x"] == 2.0
    assert meta["gamma"] == 0.5
    assert meta["rtol"] == 1e-9
    assert meta["atol"] == 1e-11
    assert meta["origin"] == {"x": 0.0, "D": 0.0, "D_prime": 0.0}
    assert meta["n_steps"] > 0
    assert meta["n_rejected"] >= 0


def test_regime_report_shapes() -> None:
    unbounded = regime_report(1.0, 0.0)
    assert unbounded.regime is Regime.UNBOUNDED
    assert unbounded.turning_point is None
    assert unbounded.period is None

    boundary = regime_report(1.0, 2.0)
    assert boundary.regime is Regime.ASYMPTOTIC_TO_ONE
    assert boundary.turning_point == 1.0
    assert boundary.period is None

    periodic = regime_report(1.0, 3.0)
    assert periodic.regime is Regime.PERIODIC
    assert periodic.turning_point == pytest.approx(0.14589803375031546,
                                                   abs=1e-12)
    assert periodic.period == pytest.approx(0.5560336272166557, abs=1e-8)
