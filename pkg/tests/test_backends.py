"""Compiled and pure-python kernels must produce bit-for-bit equal results.

Both backends run the same algorithms in the same evaluation order with the
same libm entry points, so parity here is exact equality, not a tolerance.
"""

import importlib

import numpy as np
import pytest

from midiode._kernels import _pykernels

_core = pytest.importorskip(
    "midiode._kernels._core",
    reason="compiled backend not built in this environment")

_SITES = ("midiode._kernels", "midiode.cubic", "midiode.potential",
          "midiode.bvp", "midiode.bifurcation")


def call_on(mod, fn):
    """Run fn with every kernel call site bound to one backend module."""
    with pytest.MonkeyPatch.context() as mp:
        for site in _SITES:
            mp.setattr(importlib.import_module(site), "kernel", mod)
        return fn()


def test_backend_names() -> None:
    assert _pykernels.BACKEND_NAME == "python"
    assert _core.BACKEND_NAME == "compiled"


def test_status_and_case_constants_match() -> None:
    for name in ("CASE_ONE_REAL", "CASE_TRIPLE", "CASE_DOUBLE",
                 "CASE_THREE_REAL", "CASE_NEED_ORACLE", "STATUS_REACHED",
                 "STATUS_EVENT", "STATUS_UNDERFLOW", "STATUS_MAX_STEPS"):
        assert getattr(_pykernels, name) == getattr(_core, name)


def test_cubic_grid_is_bitwise_identical() -> None:
    rng = np.random.default_rng(7)
    ks = rng.uniform(-5.0, 5.0, 500)
    bs = rng.uniform(-5.0, 5.0, 500)
    roots_py, cases_py = _pykernels.cubic_closed_grid(ks, bs)
    roots_c, cases_c = _core.cubic_closed_grid(ks, bs)
    assert np.array_equal(np.asarray(cases_py), np.asarray(cases_c))
    assert np.array_equal(np.asarray(roots_py), np.asarray(roots_c))


def test_cubic_single_point_matches_grid() -> None:
    for k, b in ((1.7, 0.3), (-3.0, 0.5), (2.0, 0.0), (-2.0, 0.0)):
        one_py = _pykernels.cubic_closed_one(k, b)
        one_c = _core.cubic_closed_one(k, b)
        assert one_py == one_c


def test_discriminant_bitwise() -> None:
    rng = np.random.default_rng(11)
    for k, b in rng.uniform(-5.0, 5.0, (200, 2)):
        assert _pykernels.discriminant(k, b) == _core.discriminant(k, b)


def _d2_run(mod):
    from midiode.potential import _startup_state
    d0, dp0 = _startup_state(1.0, 0.0, 1e-6)
    return mod.integrate_d2(1.0, 0.0, 1e-6, d0, dp0, 2.0, 1e-10, 1e-10,
                            False, None, 1_000_000)


def test_second_order_integrator_parity() -> None:
    xs_p, ys_p, st_p, n_p, rej_p = _d2_run(_pykernels)
    xs_c, ys_c, st_c, n_c, rej_c = _d2_run(_core)
    assert st_p == st_c
    assert (n_p, rej_p) == (n_c, rej_c)
    assert np.array_equal(np.asarray(xs_p), np.asarray(xs_c))
    assert np.array_equal(np.asarray(ys_p), np.asarray(ys_c))


def _d1_run(mod):
    from midiode.potential import _startup_state
    d0, _ = _startup_state(1.0, 2.0, 1e-6)
    return mod.integrate_d1(1.0, 2.0, 1.0, 1e-6, d0, 50.0, 1e-10, 1e-10,
                            None, 1_000_000)


def test_manifold_integrator_parity() -> None:
    xs_p, ds_p, dps_p, st_p, n_p, rej_p = _d1_run(_pykernels)
    xs_c, ds_c, dps_c, st_c, n_c, rej_c = _d1_run(_core)
    assert st_p == st_c
    assert (n_p, rej_p) == (n_c, rej_c)
    assert np.array_equal(np.asarray(xs_p), np.asarray(xs_c))
    assert np.array_equal(np.asarray(ds_p), np.asarray(ds_c))
    assert np.array_equal(np.asarray(dps_p), np.asarray(dps_c))


def test_two_potential_run_parity() -> None:
    from midiode.bvp import integrate_uv
    run_p = call_on(_pykernels, lambda: integrate_uv(0.5, 0.3))
    run_c = call_on(_core, lambda: integrate_uv(0.5, 0.3))
    assert np.array_equal(run_p.trajectory.grid, run_c.trajectory.grid)
    assert np.array_equal(run_p.trajectory.states, run_c.trajectory.states)
    assert run_p.end_values == run_c.end_values


def test_contact_refinement_parity() -> None:
    from midiode.bvp import integrate_uv
    run_p = call_on(_pykernels, lambda: integrate_uv(1.0, 3.0))
    run_c = call_on(_core, lambda: integrate_uv(1.0, 3.0))
    assert run_p.flags == run_c.flags == ("insulated",)
    assert run_p.x_star == run_c.x_star
    assert run_p.x_star_slope == run_c.x_star_slope


def test_shoot_parity() -> None:
    from midiode.bvp import shoot
    res_p = call_on(_pykernels, lambda: shoot((1.6, 0.3), (0.5, 0.2)))
    res_c = call_on(_core, lambda: shoot((1.6, 0.3), (0.5, 0.2)))
    assert res_p.converged and res_c.converged
    assert res_p.iterations == res_c.iterations
    assert res_p.j_x == res_c.j_x
    assert res_p.beta == res_c.beta


def test_periodic_construction_parity() -> None:
    from midiode.potential import integrate_D
    t_p = call_on(_pykernels, lambda: integrate_D(1.0, 3.0, 2.0))
    t_c = call_on(_core, lambda: integrate_D(1.0, 3.0, 2.0))
    assert t_p.metadata["period"] == t_c.metadata["period"]
    assert np.array_equal(t_p.grid, t_c.grid)
    assert np.array_equal(t_p.states, t_c.states)
