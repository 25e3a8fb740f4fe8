"""Singular initial value problem for the effective potential D(x).

The equation is D'' = j_x (6 sqrt(D) + 2/sqrt(D) - 4 gamma) with
D(0) = D'(0) = 0. The right side is singular at the start, so integration
begins at a small offset x0 > 0 from a series startup and the origin values
are carried in trajectory metadata. Solutions conserve the first integral

    (D')^2 = 8 j_x Phi(D),    Phi(D) = D^(3/2) - gamma D + sqrt(D),

which fixes the qualitative behavior: for gamma < 2 the potential Phi is
positive for all D > 0 and D grows without bound; for gamma > 2 it has a
zero at D_t < 1 where the solution turns around, giving a periodic train of
arches; at gamma = 2 the zero sits exactly at D = 1 and the solution creeps
up to the plateau without reaching it.

The plateau is a saddle of the second-order flow, so near gamma = 2 forward
integration of the second-order form is exponentially unstable: roundoff
excites the departing direction and the trajectory leaves the plateau on a
timescale much shorter than the integration windows of interest. The
asymptotic regime is therefore integrated in the energy-reduced first-order
form D' = sqrt(8 j_x Phi(D)), which has the plateau as a stable endpoint.
The periodic regime is built from a single resolved arch: integrate the
ascent, locate the turning point by bisection, mirror the ascent for the
descent (the first integral makes arches reflection-symmetric) and tile.
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import backend_name, kernel
from .model import Regime, RegimeReport, Trajectory

GAMMA_BAND = 1e-12
# largest D the asymptotic-regime integrator will move through; at and
# beyond it the manifold rate is treated as zero
D_FREEZE = 1.0

_BISECT_TOL = 1e-12


def startup_amplitude(j_x: float) -> float:
    """Leading startup coefficient A with D ~ A x^(4/3), A^(3/2) = 9 j_x / 2."""
    return (4.5 * j_x) ** (2.0 / 3.0)


def series_startup_D(j_x: float, x):
    """Leading-order startup values (D, D') at small x > 0.

    D = A x^(4/3) and D' = (4A/3) x^(1/3) with A = (9 j_x / 2)^(2/3). The
    gamma term enters only at the next order, so the leading series is the
    same for every regime.
    """
    x = np.asarray(x, dtype=float)
    a = startup_amplitude(j_x)
    return a * x ** (4.0 / 3.0), (4.0 * a / 3.0) * x ** (1.0 / 3.0)


def effective_potential(d, gamma: float):
    """Phi(D) = D^(3/2) - gamma D + sqrt(D); requires D >= 0."""
    d = np.asarray(d, dtype=float)
    s = np.sqrt(d)
    return s * (d - gamma * s + 1.0)


def turning_point(gamma: float):
    """Smallest positive zero D_t of Phi for gamma >= 2, else None.

    D_t = ((gamma - sqrt(gamma^2 - 4)) / 2)^2, which is 1 at gamma = 2 and
    decreases toward 0 as gamma grows.
    """
    if gamma < 2.0:
        return None
    r = 0.5 * (gamma - math.sqrt(gamma * gamma - 4.0))
    return r * r


def classify_regime(gamma: float, band: float = GAMMA_BAND) -> Regime:
    """Regime of the D-equation at one gamma value.

    gamma within ``band`` of 2 counts as the asymptotic boundary case.
    """
    if abs(gamma - 2.0) <= band:
        return Regime.ASYMPTOTIC_TO_ONE
    if gamma < 2.0:
        return Regime.UNBOUNDED
    return Regime.PERIODIC


def first_integral_residual(traj: Trajectory, j_x: float,
                            gamma: float) -> np.ndarray:
    """Per-sample defect of the first integral, |(D')^2 - 8 j_x Phi(D)|,
    normalized by 1 + (D')^2."""
    d = traj.column("D")
    dp = traj.column("D_prime")
    return np.abs(dp * dp - 8.0 * j_x * effective_potential(d, gamma)) / (
        1.0 + dp * dp)


def deflection_point(traj: Trajectory):
    """x of the first interior maximum of D, or None.

    Found from the first sign change of D' in the sample data (linearly
    interpolated, exact when a zero sample is present). A plateau where D'
    decays to zero without going negative has no interior maximum and
    returns None.
    """
    dp = traj.column("D_prime")
    negative = dp < 0.0
    if not negative.any():
        return None
    after = int(np.argmax(negative))
    before = after - 1
    while before >= 0 and dp[before] < 0.0:
        before -= 1
    if before < 0:
        return float(traj.grid[after])
    if dp[before] == 0.0:
        return float(traj.grid[before])
    x1, x2 = traj.grid[before], traj.grid[after]
    return float(x1 + dp[before] * (x2 - x1) / (dp[before] - dp[after]))


def _startup_state(j_x: float, gamma: float, x0: float):
    """Series state at x0, pinned to the first-integral manifold.

    D gets the next-order gamma correction B x^2 with B = -(9/5) j_x gamma;
    D' is then taken from the first integral, so the startup defect is the
    series truncation error in D alone (order x0^(8/3)) rather than the
    larger raw slope error.
    """
    a = startup_amplitude(j_x)
    b = -1.8 * j_x * gamma
    d0 = a * x0 ** (4.0 / 3.0) + b * x0 * x0
    if d0 <= 0.0:
        raise ValueError(f"startup offset {x0} too large for gamma {gamma}")
    phi = effective_potential(d0, gamma)
    if phi <= 0.0:
        raise ValueError(f"startup offset {x0} leaves the accessible region")
    dp0 = math.sqrt(8.0 * j_x * float(phi))
    return d0, dp0


def _check_args(j_x: float, x0: float, x_end: float):
    if not (j_x > 0.0 and math.isfinite(j_x)):
        raise ValueError(f"j_x must be positive and finite, got {j_x}")
    if not 0.0 < x0 <= 1e-3:
        raise ValueError(f"startup offset must lie in (0, 1e-3], got {x0}")
    if not (x_end > x0 and math.isfinite(x_end)):
        raise ValueError(f"x_end must exceed the startup offset, got {x_end}")


def _raise_on_bad_status(status, what: str):
    if status == kernel.STATUS_MAX_STEPS:
        raise RuntimeError(f"{what}: step budget exhausted")
    if status == kernel.STATUS_UNDERFLOW:
        raise RuntimeError(f"{what}: step size underflow")


def _ascend_to_turn(j_x: float, gamma: float, x0: float, rtol: float,
                    atol: float, max_steps: int, x_cap: float):
    """Integrate the ascent and bisect the first turning point.

    Returns (ascent samples (n, 3) as x, D, D' rows, x_turn, d_turn,
    n_steps, n_rejected).
    """
    d0, dp0 = _startup_state(j_x, gamma, x0)
    xs, ys, status, n_steps, n_rej = kernel.integrate_d2(
        j_x, gamma, x0, d0, dp0, x_cap, rtol, atol, True, None, max_steps)
    if status != kernel.STATUS_EVENT:
        _raise_on_bad_status(status, "turning-point search")
        raise RuntimeError(
            f"no turning point below x = {x_cap}; gamma = {gamma} is too "
            "close to the asymptotic boundary for a periodic construction")
    xa, (da, dpa) = float(xs[-2]), (float(ys[-2, 0]), float(ys[-2, 1]))
    xb = float(xs[-1])
    while xb - xa > _BISECT_TOL * max(1.0, xb):
        xm = 0.5 * (xa + xb)
        dm, dpm, st = kernel.advance_d2(j_x, gamma, xa, da, dpa, xm,
                                        rtol, atol)
        if st != kernel.STATUS_REACHED:
            _raise_on_bad_status(st, "turning-point bisection")
        if dpm > 0.0:
            xa, da, dpa = xm, dm, dpm
        else:
            xb = xm
    x_turn = 0.5 * (xa + xb)
    d_turn, _, st = kernel.advance_d2(j_x, gamma, xa, da, dpa, x_turn,
                                      rtol, atol)
    if st != kernel.STATUS_REACHED:
        _raise_on_bad_status(st, "turning-point evaluation")
    keep = (ys[:, 1] > 0.0) & (xs < x_turn)
    ascent = np.column_stack([xs[keep], ys[keep, 0], ys[keep, 1]])
    return ascent, x_turn, float(d_turn), n_steps, n_rej


def _tile_periodic(ascent: np.ndarray, x_turn: float, d_turn: float,
                   x_end: float) -> np.ndarray:
    """Tile one resolved arch into [0, x_end] sample rows (x, D, D').

    The descent is the x-reflection of the ascent through the turning
    point; contacts between arches get exact (D, D') = (0, 0) samples. The
    startup contact at x = 0 is left to trajectory metadata, so rows start
    at the first ascent sample.
    """
    period = 2.0 * x_turn
    descent = ascent[::-1].copy()
    descent[:, 0] = period - descent[:, 0]
    descent[:, 2] = -descent[:, 2]
    arch = np.vstack([ascent, [[x_turn, d_turn, 0.0]], descent])
    rows = [arch]
    base = period
    while base <= x_end:
        shifted = arch.copy()
        shifted[:, 0] += base
        rows.append(np.vstack([[[base, 0.0, 0.0]], shifted]))
        base += period
    tiled = np.vstack(rows)
    return tiled[tiled[:, 0] <= x_end]


def integrate_D(j_x: float, gamma: float, x_end: float, *,
                rtol: float = 1e-10, atol: float = 1e-10, x0: float = 1e-6,
                x_stops=None, max_steps: int = 1_000_000) -> Trajectory:
    """Solve the D-equation from rest at the emitter up to x_end.

    Dispatches on the regime: direct second-order integration for
    gamma < 2, the first-order manifold form at the gamma = 2 boundary, and
    the resolved-arch periodic construction for gamma > 2. Columns are
    ("D", "D_prime"). For the periodic regime the grid ends at the last
    arch sample at or before x_end (arches are tiled, not re-integrated)
    and x_stops is not supported; the other regimes land on x_end exactly.
    """
    _check_args(j_x, x0, x_end)
    if not math.isfinite(gamma):
        raise ValueError(f"gamma must be finite, got {gamma}")
    regime = classify_regime(gamma)
    meta = {"j_x": j_x, "gamma": gamma, "x0": x0, "rtol": rtol, "atol": atol,
            "regime": regime.value, "backend": backend_name(),
            "origin": {"x": 0.0, "D": 0.0, "D_prime": 0.0}}

    if regime is Regime.PERIODIC:
        if x_stops is not None:
            raise ValueError("x_stops is not supported in the periodic "
                             "regime; samples repeat the resolved arch")
        x_cap = max(2.0 * x_end, 1e3)
        ascent, x_turn, d_turn, n_steps, n_rej = _ascend_to_turn(
            j_x, gamma, x0, rtol, atol, max_steps, x_cap)
        rows = _tile_periodic(ascent, x_turn, d_turn, x_end)
        meta.update({"turning_point_x": x_turn, "turning_point_D": d_turn,
                     "period": 2.0 * x_turn,
                     "n_arches": int(math.ceil(x_end / (2.0 * x_turn))),
                     "n_steps": n_steps, "n_rejected": n_rej})
        return Trajectory(grid=rows[:, 0], states=rows[:, 1:],
                          columns=("D", "D_prime"), metadata=meta)

    stops = None if x_stops is None else sorted(float(s) for s in x_stops)
    if regime is Regime.ASYMPTOTIC_TO_ONE:
        d0, _ = _startup_state(j_x, gamma, x0)
        xs, ds, dps, status, n_steps, n_rej = kernel.integrate_d1(
            j_x, gamma, D_FREEZE, x0, d0, x_end, rtol, atol, stops, max_steps)
        _raise_on_bad_status(status, "asymptotic-regime integration")
        meta.update({"d_freeze": D_FREEZE, "n_steps": n_steps,
                     "n_rejected": n_rej})
        return Trajectory(grid=xs, states=np.column_stack([ds, dps]),
                          columns=("D", "D_prime"), metadata=meta)

    d0, dp0 = _startup_state(j_x, gamma, x0)
    xs, ys, status, n_steps, n_rej = kernel.integrate_d2(
        j_x, gamma, x0, d0, dp0, x_end, rtol, atol, False, stops, max_steps)
    _raise_on_bad_status(status, "unbounded-regime integration")
    meta.update({"n_steps": n_steps, "n_rejected": n_rej})
    return Trajectory(grid=xs, states=ys, columns=("D", "D_prime"),
                      metadata=meta)


def regime_report(j_x: float, gamma: float, *, rtol: float = 1e-10,
                  atol: float = 1e-10, x0: float = 1e-6,
                  max_steps: int = 1_000_000,
                  x_cap: float = 1e3) -> RegimeReport:
    """Classify gamma and measure the periodic-regime period.

    turning_point is the analytic potential zero (the plateau height 1 at
    the boundary); period is twice the bisected first turning point of an
    integrated ascent, present only in the periodic regime.
    """
    _check_args(j_x, x0, 2.0 * x0)
    regime = classify_regime(gamma)
    if regime is Regime.UNBOUNDED:
        return RegimeReport(gamma=gamma, regime=regime)
    if regime is Regime.ASYMPTOTIC_TO_ONE:
        return RegimeReport(gamma=gamma, regime=regime, turning_point=1.0)
    _, x_turn, _, _, _ = _ascend_to_turn(j_x, gamma, x0, rtol, atol,
                                         max_steps, x_cap)
    return RegimeReport(gamma=gamma, regime=regime,
                        turning_point=turning_point(gamma),
                        period=2.0 * x_turn)
