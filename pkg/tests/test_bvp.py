"""Two-potential boundary value problem: startup, contact, shooting."""

import math

import numpy as np
import pytest

from midiode import (
    child_langmuir_check,
    effective_gamma,
    find_x_star,
    integrate_D,
    integrate_uv,
    shoot,
)
from midiode.bvp import series_startup_uv


def theta_of(state) -> float:
    u, _, v, _ = state
    return u * u - 1.0 - v * v


def test_startup_matches_current_identity() -> None:
    for j_x in (0.25, 1.0, 3.0):
        u, up, v, vp = series_startup_uv(j_x, 0.7, 1e-6)
        # recovering the amplitude from u - 1 cancels ~8 digits
        a = (u - 1.0) / 1e-6 ** (4.0 / 3.0)
        assert (2.0 * a) ** 1.5 == pytest.approx(4.5 * j_x, rel=1e-6)


def test_startup_theta_leading_order() -> None:
    j_x, beta, x0 = 1.0, 0.5, 1e-6
    state = series_startup_uv(j_x, beta, x0)
    a = (9.0 * j_x / (4.0 * math.sqrt(2.0))) ** (2.0 / 3.0)
    # theta = 2A x^(4/3) at leading order; the beta x term cancels exactly
    # against the quadratic part of u^2 only at the next order, so compare
    # with a relative slack of order x0^(2/3)
    assert theta_of(state) == pytest.approx(2.0 * a * x0 ** (4.0 / 3.0),
                                            rel=1e-3)


def test_startup_powers_from_short_integration() -> None:
    run = integrate_uv(1.0, 0.5, x_end=1e-3)
    traj = run.trajectory
    x = traj.grid
    u = traj.column("u")
    theta = traj.column("theta")
    sel = x >= 1e-5
    slope_u = np.polyfit(np.log(x[sel]), np.log(u[sel] - 1.0), 1)[0]
    slope_t = np.polyfit(np.log(x[sel]), np.log(theta[sel]), 1)[0]
    assert slope_u == pytest.approx(4.0 / 3.0, abs=0.05)
    assert slope_t == pytest.approx(4.0 / 3.0, abs=0.05)


def test_effective_gamma_value_and_validation() -> None:
    assert effective_gamma(0.5, 0.3) == pytest.approx(0.09, rel=1e-15)
    assert effective_gamma(2.0, 0.0) == 0.0
    assert effective_gamma(1.0, 2.0) == 2.0
    with pytest.raises(ValueError, match="j_x must be positive"):
        effective_gamma(0.0, 1.0)


def test_reaching_the_collector(backend: str) -> None:
    run = integrate_uv(0.5, 0.3)
    assert run.flags == ()
    assert run.x_star is None
    assert run.trajectory.metadata["blocked"] is False
    assert run.trajectory.grid[-1] == 1.0
    u_end, v_end = run.end_values
    assert u_end == pytest.approx(1.9135974520797951, abs=1e-8)
    assert v_end == pytest.approx(0.3359075338153203, abs=1e-8)
    assert find_x_star(run) is None


def test_theta_tracks_effective_potential(backend: str) -> None:
    # theta of the two-potential run obeys the one-potential equation at
    # gamma = +beta^2 / (2 j_x); the negated sign must visibly disagree
    j_x, beta = 0.5, 0.3
    probes = [float(s) for s in np.linspace(0.1, 0.9, 9)]
    run = integrate_uv(j_x, beta, x_stops=probes)
    gamma = effective_gamma(j_x, beta)
    matched = integrate_D(j_x, gamma, 1.0, x_stops=probes)
    negated = integrate_D(j_x, -gamma, 1.0, x_stops=probes)

    theta_at = dict(zip(run.trajectory.grid, run.trajectory.column("theta")))
    d_at = dict(zip(matched.grid, matched.column("D")))
    neg_at = dict(zip(negated.grid, negated.column("D")))
    gap = max(abs(theta_at[p] - d_at[p]) for p in probes)
    neg_gap = max(abs(theta_at[p] - neg_at[p]) for p in probes)
    assert gap <= 1e-6
    assert neg_gap >= 1e-2


def test_insulated_contact(backend: str) -> None:
    run = integrate_uv(1.0, 3.0)
    assert run.flags == ("insulated",)
    assert run.end_values is None
    assert run.trajectory.metadata["blocked"] is True
    assert run.x_star == pytest.approx(0.2575394039, abs=1e-7)
    assert run.x_star_slope < 0.0
    assert np.all(run.trajectory.column("theta") > 0.0)
    assert run.trajectory.grid[-1] < run.x_star
    assert find_x_star(run) == (run.x_star, run.x_star_slope)


def test_contact_point_decreases_with_deflection() -> None:
    stars = [integrate_uv(1.0, beta).x_star for beta in (3.0, 3.5, 4.0, 5.0)]
    assert stars[0] == pytest.approx(0.25753940391123564, abs=1e-7)
    assert stars[3] == pytest.approx(0.050878994209491636, abs=1e-7)
    assert all(a > b for a, b in zip(stars, stars[1:]))


def test_beta_zero_keeps_v_identically_zero() -> None:
    run = integrate_uv(1.0, 0.0)
    assert np.all(run.trajectory.column("v") == 0.0)
    assert np.all(run.trajectory.column("v_prime") == 0.0)
    assert run.end_values[1] == 0.0


def test_integrate_uv_validation() -> None:
    with pytest.raises(ValueError, match="beta must be nonnegative"):
        integrate_uv(1.0, -0.1)
    with pytest.raises(ValueError, match="startup offset"):
        integrate_uv(1.0, 0.5, x0=0.01)
    with pytest.raises(ValueError, match="x_end must exceed"):
        integrate_uv(1.0, 0.5, x_end=1e-7)


def test_shoot_round_trip(backend: str) -> None:
    fwd = integrate_uv(0.5, 0.3)
    result = shoot(fwd.end_values, (0.4, 0.2))
    assert result.converged
    assert result.iterations <= 25
    assert result.j_x == pytest.approx(0.5, abs=1e-6)
    assert result.beta == pytest.approx(0.3, abs=1e-6)
    assert np.max(np.abs(result.residual)) <= 1e-8


def test_shoot_zero_deflection_target() -> None:
    result = shoot((1.6, 0.0), (1.0, 0.0))
    assert result.converged
    assert result.beta == 0.0
    assert result.j_x == pytest.approx(0.2755124496122165, abs=1e-6)


def test_shoot_frozen_coordinates() -> None:
    frozen_j = shoot((1.6, 0.3), (0.3, 0.2), freeze="j_x")
    assert frozen_j.converged
    assert frozen_j.j_x == 0.3
    assert frozen_j.beta == pytest.approx(0.27619538994261034, abs=1e-6)
    # the frozen coordinate leaves a one-dimensional problem, so only the
    # matching residual component is driven to zero
    assert abs(frozen_j.residual[1]) <= 1e-8

    frozen_b = shoot((1.6, 0.0), (0.5, 0.0), freeze="beta")
    assert frozen_b.converged
    assert frozen_b.beta == 0.0
    assert frozen_b.j_x == pytest.approx(0.2755124496122165, abs=1e-6)


def test_shoot_penalized_iterate_is_flagged() -> None:
    result = shoot((1.5, 0.5), (1.0, 4.0), max_iter=1)
    assert result.converged is False
    assert "penalized" in result.flags


def test_shoot_validation() -> None:
    with pytest.raises(ValueError, match="alpha must exceed 1"):
        shoot((1.0, 0.0), (1.0, 0.0))
    with pytest.raises(ValueError, match="a_L must be nonnegative"):
        shoot((1.5, -0.1), (1.0, 0.0))
    with pytest.raises(ValueError, match="freeze must be"):
        shoot((1.5, 0.0), (1.0, 0.0), freeze="gamma")
    with pytest.raises(ValueError, match="initial guess"):
        shoot((1.5, 0.0), (-1.0, 0.0))


def test_child_langmuir_equality_point() -> None:
    j_eq = 32.0 * math.sqrt(6.0) / 45.0
    report = child_langmuir_check(2.0, j_eq)
    assert report["lower_inequality"]["holds"] is True
    assert report["lower_inequality"]["lhs"] == pytest.approx(32.0,
                                                              rel=1e-15)
    assert report["subsolution_grid"]["violations"] == 0
    assert report["subsolution_grid"]["max_excess"] <= 1e-10


def test_child_langmuir_violated_case() -> None:
    report = child_langmuir_check(0.5, 1.0)
    assert report["lower_inequality"]["holds"] is False
    assert report["subsolution_grid"]["violations"] > 0
    assert report["subsolution_grid"]["max_excess"] > 0.0


def test_child_langmuir_with_upper_condition() -> None:
    report = child_langmuir_check(1.2, 0.5, phi_L=1.44)
    assert report["lower_inequality"]["holds"] is True
    assert report["subsolution_grid"]["violations"] == 0
    assert report["phi_L"] == 1.44
    assert report["upper_inequality"]["holds"] is True
    assert report["upper_inequality"]["rhs"] == pytest.approx(1.44,
                                                              rel=1e-15)

    tighter = child_langmuir_check(1.2, 0.5, phi_L=1.0)
    assert tighter["upper_inequality"]["holds"] is False


def test_child_langmuir_grid_agrees_with_inequality() -> None:
    # the x = 1 inequality is the binding instance of the grid comparison,
    # so the two routes must agree on either side of the threshold
    j_eq = 32.0 * math.sqrt(6.0) / 45.0
    for j_x, expect in ((j_eq * (1.0 - 1e-6), True),
                        (j_eq * (1.0 + 1e-6), False)):
        report = child_langmuir_check(2.0, j_x)
        assert report["lower_inequality"]["holds"] is expect
        assert (report["subsolution_grid"]["violations"] == 0) is expect


def test_child_langmuir_validation() -> None:
    with pytest.raises(ValueError, match="must be positive"):
        child_langmuir_check(0.0, 1.0)
    with pytest.raises(ValueError, match="must be positive"):
        child_langmuir_check(1.0, -2.0)
    with pytest.raises(ValueError, match="grid_n"):
        child_langmuir_check(1.0, 1.0, grid_n=1)
