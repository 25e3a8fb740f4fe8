"""Two-potential system, free-boundary detection and shooting solver.

The reduced system is u'' = j_x u / sqrt(theta), v'' = j_x v / sqrt(theta)
with theta = u^2 - 1 - v^2 and emitter conditions u(0) = 1, u'(0) = 0,
v(0) = 0, v'(0) = beta. theta vanishes at the emitter, so the right side is
singular there and integration starts from a series startup at x0 > 0.

theta coincides with the effective potential D of :mod:`midiode.potential`
for gamma = effective_gamma(j_x, beta) = +beta^2 / (2 j_x); substituting
the series startup into theta'' = 2(u'^2 - v'^2) + 2 u u'' - 2 v v''
reproduces the D-equation with exactly that sign, and the agreement is
enforced by tests. The reduced sweep coordinate of
:func:`midiode.model.reduce_params` carries the opposite sign by
construction of the deflection cubic and is not interchangeable with this
value.

When the magnetic term wins, theta returns to 0 at an interior contact
point x* (tangentially, like (x* - x)^(4/3)); the run is then insulated:
electrons never cross x*, and the system is not defined beyond it. The
contact is located by bisection with short re-integrations.
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import backend_name, kernel
from .model import ShootResult, Trajectory

UV_COLUMNS = ("u", "u_prime", "v", "v_prime", "theta")

# refinement targets for the contact point
_THETA_TARGET = 1e-10
_X_TOL = 1e-15
_MAX_BISECT = 300


def effective_gamma(j_x: float, beta: float) -> float:
    """The gamma at which theta of the uv-system obeys the D-equation.

    Equal to +beta^2 / (2 j_x). Always nonnegative, so the oscillatory
    regimes gamma >= 2 are reached by raising beta at fixed current.
    """
    if j_x <= 0.0:
        raise ValueError(f"j_x must be positive, got {j_x}")
    return beta * beta / (2.0 * j_x)


def series_startup_uv(j_x: float, beta: float,
                      x0: float) -> tuple[float, float, float, float]:
    """Series state (u, u', v, v') of the two-potential system at x0 > 0.

    u = 1 + A x^(4/3) with A = (9 j_x / (4 sqrt(2)))^(2/3) and
    v = beta x + B x^(7/3) with B = 9 j_x beta / (28 sqrt(2A)); derivatives
    are the termwise ones. The induced theta matches the D-startup:
    theta = 2A x^(4/3) + O(x^2) and (2A)^(3/2) = (9/2) j_x.
    """
    if not x0 > 0.0:
        raise ValueError(f"startup offset must be positive, got {x0}")
    if j_x <= 0.0:
        raise ValueError(f"j_x must be positive, got {j_x}")
    a = (9.0 * j_x / (4.0 * math.sqrt(2.0))) ** (2.0 / 3.0)
    b = 9.0 * j_x * beta / (28.0 * math.sqrt(2.0 * a))
    u = 1.0 + a * x0 ** (4.0 / 3.0)
    up = (4.0 * a / 3.0) * x0 ** (1.0 / 3.0)
    v = beta * x0 + b * x0 ** (7.0 / 3.0)
    vp = beta + (7.0 * b / 3.0) * x0 ** (4.0 / 3.0)
    return u, up, v, vp


def _theta(y) -> float:
    return y[0] * y[0] - 1.0 - y[2] * y[2]


def _theta_slope(y) -> float:
    return 2.0 * (y[0] * y[1] - y[2] * y[3])


def _refine_contact(j_x: float, x_from: float, y_from, x_hint: float,
                    x_limit: float, rtol: float, atol: float):
    """Bisect the contact point from the last healthy state.

    Predicate: x is beyond the contact when the integrator cannot carry the
    state there with theta held above a floor well under the refinement
    target. The floor matters: near the contact theta only grazes zero, and
    a floor-free integrator can step across the collapse onto a spurious
    branch with theta positive again. Tightens until theta at the left
    endpoint drops below the target. Returns (x_star, slope, theta_left) or
    None when no contact exists up to x_limit.
    """

    def advance(x_a: float, y_a, x_to: float):
        xs, ys, status, _, _, _ = kernel.integrate_uv(
            j_x, x_a, y_a, x_to, rtol, atol, 0.25 * _THETA_TARGET, 0.0,
            None, 20000)
        return tuple(float(c) for c in ys[-1]), status

    xa, ya = x_from, tuple(float(c) for c in y_from)
    theta_a = _theta(ya)
    xb = min(max(x_hint, xa + _X_TOL * max(1.0, xa)), x_limit)
    # establish a blocked right bracket, expanding toward x_limit
    while True:
        ym, status = advance(xa, ya, xb)
        if status != kernel.STATUS_REACHED or _theta(ym) <= 0.0:
            break
        xa, ya, theta_a = xb, ym, _theta(ym)
        if xb >= x_limit:
            return None
        xb = min(xb + 2.0 * (xb - x_from) + _X_TOL, x_limit)
    for _ in range(_MAX_BISECT):
        if theta_a < _THETA_TARGET or xb - xa <= _X_TOL * max(1.0, xb):
            break
        xm = 0.5 * (xa + xb)
        ym, status = advance(xa, ya, xm)
        if status == kernel.STATUS_REACHED and _theta(ym) > 0.0:
            xa, ya, theta_a = xm, ym, _theta(ym)
        else:
            xb = xm
    slope = _theta_slope(ya)
    if slope < 0.0:
        # tangential contact: theta ~ C (x* - x)^(4/3) gives
        # x* - x = (4/3) theta / |theta'|
        x_star = min(xa + (4.0 / 3.0) * theta_a / -slope, xb)
    else:
        x_star = 0.5 * (xa + xb)
    return x_star, slope, theta_a


def integrate_uv(j_x: float, beta: float, x_end: float = 1.0, *,
                 rtol: float = 1e-10, atol: float = 1e-10, x0: float = 1e-6,
                 x_stops=None, theta_rel_floor: float = 1e-8,
                 max_steps: int = 1_000_000) -> ShootResult:
    """Integrate the two-potential system from the series startup.

    Runs toward x_end (the collector at 1 by default). If theta collapses
    at an interior contact the trajectory stops at the last healthy sample,
    the refined x* and approach slope are recorded and the result carries
    an "insulated" flag; otherwise end_values holds (u, v) at x_end.
    Trajectory columns are ("u", "u_prime", "v", "v_prime", "theta") with
    theta computed identically from the states.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if not 0.0 < x0 <= 1e-3:
        raise ValueError(f"startup offset must lie in (0, 1e-3], got {x0}")
    if not (x_end > x0 and math.isfinite(x_end)):
        raise ValueError(f"x_end must exceed the startup offset, got {x_end}")
    y0 = series_startup_uv(j_x, beta, x0)
    if _theta(y0) <= 0.0:
        raise ValueError("theta not positive at startup; offset too large "
                         f"for beta = {beta}")
    stops = None if x_stops is None else sorted(float(s) for s in x_stops)
    xs, ys, status, n_steps, n_rej, x_blocked = kernel.integrate_uv(
        j_x, x0, y0, x_end, rtol, atol, 0.0, theta_rel_floor, stops,
        max_steps)
    if status == kernel.STATUS_MAX_STEPS:
        raise RuntimeError("two-potential integration: step budget "
                           "exhausted")

    meta = {"j_x": j_x, "beta": beta, "x0": x0, "rtol": rtol, "atol": atol,
            "x_end": x_end, "theta_rel_floor": theta_rel_floor,
            "backend": backend_name(),
            "origin": {"x": 0.0, "u": 1.0, "u_prime": 0.0, "v": 0.0,
                       "v_prime": beta, "theta": 0.0},
            "n_steps": n_steps, "n_rejected": n_rej,
            "blocked": status != kernel.STATUS_REACHED,
            "x_blocked": None if status == kernel.STATUS_REACHED
            else float(x_blocked)}

    theta = ys[:, 0] ** 2 - 1.0 - ys[:, 2] ** 2
    traj = Trajectory(grid=xs, states=np.column_stack([ys, theta]),
                      columns=UV_COLUMNS, metadata=meta)

    end_values = None
    x_star = x_star_slope = None
    flags: tuple = ()
    if status == kernel.STATUS_REACHED:
        end_values = (float(ys[-1, 0]), float(ys[-1, 2]))
    else:
        refined = _refine_contact(j_x, float(xs[-1]), ys[-1],
                                  float(x_blocked), x_end, rtol, atol)
        if refined is None:
            flags = ("floor_event_unresolved",)
        else:
            x_star, x_star_slope, theta_left = refined
            flags = ("insulated",)
            if theta_left >= _THETA_TARGET:
                flags += ("x_star_tolerance",)
    return ShootResult(j_x=j_x, beta=beta, trajectory=traj,
                       end_values=end_values, x_star=x_star,
                       x_star_slope=x_star_slope, flags=flags)


def find_x_star(traj):
    """Contact point of an integrated trajectory, or None.

    Accepts the Trajectory from integrate_uv (or the ShootResult wrapping
    it) and repeats the refinement from its final sample: None when theta
    stayed positive to the end, else (x_star, approach slope).
    """
    if hasattr(traj, "trajectory"):
        traj = traj.trajectory
    meta = traj.metadata
    if not meta.get("blocked"):
        return None
    y_last = tuple(float(c) for c in traj.states[-1, :4])
    refined = _refine_contact(meta["j_x"], float(traj.grid[-1]), y_last,
                              float(meta["x_blocked"]), meta["x_end"],
                              meta["rtol"], meta["atol"])
    if refined is None:
        return None
    x_star, slope, _ = refined
    return x_star, slope


def shoot(targets: tuple, init_guess: tuple, tol: float = 1e-8, *,
          max_iter: int = 25, freeze: str | None = None, rtol: float = 1e-10,
          atol: float = 1e-10, x0: float = 1e-6) -> ShootResult:
    """Damped Newton solve of (j_x, beta) -> (u(1) - alpha, v(1) - a_L).

    targets = (alpha, a_L) with alpha > 1, a_L >= 0; init_guess = (j_x,
    beta). The Jacobian is forward finite differences with 1e-6 relative
    step; steps are halved until the residual norm drops and parameters
    stay admissible. freeze = "j_x" or "beta" pins that coordinate and
    solves the 1-D problem in the other. An insulated iterate gets a
    penalized residual steering the iteration back to runs that reach the
    collector; beta = 0 with a_L = 0 stays on the v = 0 invariant.
    """
    alpha, a_l = float(targets[0]), float(targets[1])
    if not alpha > 1.0:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if a_l < 0.0:
        raise ValueError(f"a_L must be nonnegative, got {a_l}")
    if freeze not in (None, "j_x", "beta"):
        raise ValueError(f"freeze must be 'j_x' or 'beta', got {freeze!r}")
    j_x, beta = float(init_guess[0]), float(init_guess[1])
    if j_x <= 0.0 or beta < 0.0:
        raise ValueError("initial guess needs j_x > 0 and beta >= 0, got "
                         f"({j_x}, {beta})")

    def admissible(p):
        return p[0] > 0.0 and p[1] >= 0.0

    def residual(p):
        run = integrate_uv(p[0], p[1], 1.0, rtol=rtol, atol=atol, x0=x0)
        if run.end_values is not None:
            u_end, v_end = run.end_values
            return np.array([u_end - alpha, v_end - a_l]), run, False
        # insulated iterate: extend by a linear penalty in the shortfall so
        # the residual stays defined and pushes away from early contact
        x_e = run.x_star if run.x_star is not None else float(
            run.trajectory.grid[-1])
        short = 1.0 - x_e
        u_end = float(run.trajectory.column("u")[-1])
        v_end = float(run.trajectory.column("v")[-1])
        return (np.array([u_end - alpha - 10.0 * short,
                          v_end - a_l + 10.0 * short]), run, True)

    p = np.array([j_x, beta])
    frozen = None if freeze is None else ("j_x", "beta").index(freeze)
    active = np.array([frozen != 0, frozen != 1])
    r, run, penalized = residual(p)
    flags = ("penalized",) if penalized else ()
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if np.max(np.abs(r[active])) <= tol and not penalized:
            converged = True
            iterations -= 1
            break
        jac = np.zeros((2, 2))
        for col in range(2):
            if col == frozen:
                continue
            h = 1e-6 * max(abs(p[col]), 1.0)
            pd = p.copy()
            pd[col] += h
            rd, _, _ = residual(pd)
            jac[:, col] = (rd - r) / h
        r_solve = r.copy()
        if frozen is not None:
            # pin the frozen coordinate and silence its paired residual row
            jac[frozen, :] = 0.0
            jac[:, frozen] = 0.0
            jac[frozen, frozen] = 1.0
            r_solve[frozen] = 0.0
        try:
            step = np.linalg.solve(jac, -r_solve)
        except np.linalg.LinAlgError:
            flags += ("singular_jacobian",)
            break
        lam = 1.0
        improved = False
        r_norm = float(np.max(np.abs(r[active])))
        while lam >= 1.0 / 1024.0:
            p_new = p + lam * step
            if admissible(p_new):
                r_new, run_new, pen_new = residual(p_new)
                if (float(np.max(np.abs(r_new[active]))) < r_norm
                        or pen_new < penalized):
                    p, r, run, penalized = p_new, r_new, run_new, pen_new
                    improved = True
                    break
            lam *= 0.5
        if penalized and "penalized" not in flags:
            flags += ("penalized",)
        if not improved:
            flags += ("stalled",)
            break
    if not converged and np.max(np.abs(r[active])) <= tol and not penalized:
        converged = True
    if not converged and "stalled" not in flags:
        flags += ("no_convergence",)

    return ShootResult(j_x=float(p[0]), beta=float(p[1]),
                       trajectory=run.trajectory,
                       end_values=run.end_values,
                       residual=(float(r[0]), float(r[1])),
                       x_star=run.x_star, x_star_slope=run.x_star_slope,
                       converged=converged, iterations=iterations,
                       flags=flags + run.flags)


def child_langmuir_check(delta: float, j_x_max: float,
                         phi_L: float | None = None, grid_n: int = 512,
                         tol: float = 1e-12) -> dict:
    """Evaluate the space-charge-limit inequalities and their grid witness.

    The lower-solution condition 4 delta^3 >= 9 j_x_max (1 + delta^2) /
    sqrt(2 + delta^2) is the x = 1 instance of the comparison property
    that u0 = delta^2 x^(4/3) stays a lower solution of the beta = 0
    collector problem: u0'' >= j_x (1 + u0) / sqrt(u0 (2 + u0)) on (0, 1].
    The grid check evaluates that comparison directly and reports the worst
    violation, which must be zero exactly when the inequality holds. The
    upper-solution condition is phi_L >= delta^2 (skipped when phi_L is
    None).
    """
    if delta <= 0.0 or j_x_max <= 0.0:
        raise ValueError("delta and j_x_max must be positive, got "
                         f"({delta}, {j_x_max})")
    if grid_n < 2:
        raise ValueError(f"grid_n must be at least 2, got {grid_n}")
    lhs = 4.0 * delta ** 3
    rhs = 9.0 * j_x_max * (1.0 + delta * delta) / math.sqrt(
        2.0 + delta * delta)
    scale = 1.0 + abs(lhs) + abs(rhs)
    lower_holds = lhs - rhs >= -tol * scale

    x = np.linspace(0.0, 1.0, grid_n + 1)[1:]
    u0 = delta * delta * x ** (4.0 / 3.0)
    u0_dd = (4.0 / 9.0) * delta * delta * x ** (-2.0 / 3.0)
    f = j_x_max * (1.0 + u0) / np.sqrt(u0 * (2.0 + u0))
    excess = f - u0_dd
    violations = excess > tol * (1.0 + np.abs(f))
    report = {
        "delta": delta,
        "j_x_max": j_x_max,
        "lower_inequality": {"lhs": lhs, "rhs": rhs, "holds": lower_holds},
        "subsolution_grid": {
            "n": int(grid_n),
            "violations": int(np.count_nonzero(violations)),
            "max_excess": float(np.max(excess)),
        },
    }
    if phi_L is not None:
        report["phi_L"] = phi_L
        report["upper_inequality"] = {
            "lhs": float(phi_L), "rhs": delta * delta,
            "holds": phi_L - delta * delta >= -tol * (
                1.0 + abs(phi_L) + delta * delta)}
    return report
