"""Pure-Python stepping kernels.

Hot numerical cores of the package: the closed-form deflection-cubic solver
and embedded Dormand-Prince 5(4) integrators for the two singular initial
value problems (the effective-potential equation and the coupled two-potential
system). ``midiode._kernels._core`` is a compiled twin of this module; the
package selects whichever imports. Both implement the identical algorithm
(same tableau, same controller, same guards), so keep them in sync.

All steppers record every accepted step. Error control uses the RMS norm of
the per-component error over ``atol + rtol*max(|y|, |y_new|)`` with the
standard controller h <- h * clip(0.9 * err**(-1/5), 0.2, 5), growth capped
at 1.0 right after a rejection. Stage evaluations that leave the domain of
the right-hand side (negative radicand) reject the step and halve h.
"""

import math

import numpy as np

BACKEND_NAME = "python"

# classification codes shared with the compiled core
CASE_NEED_ORACLE = 0
CASE_ONE_REAL = 1
CASE_TRIPLE = 2
CASE_DOUBLE = 3
CASE_THREE_REAL = 4

# statuses returned by the steppers
STATUS_REACHED = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3

_CBRT4 = 4.0 ** (1.0 / 3.0)
_SQRT3 = math.sqrt(3.0)
_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def discriminant(k, b):
    """Discriminant of u^3 + k u^2 + u + b."""
    return 18.0 * k * b + k * k - 4.0 - 4.0 * k ** 3 * b - 27.0 * b * b


def cubic_closed_one(k, b, band_scale=1e-10, triple_scale=1e-6):
    """Closed-form roots of u^3 + k u^2 + u + b.

    Returns (r1, r2, r3, case). Cases: one real root plus a conjugate pair
    (radical form), triple root, double root (rational forms on the
    discriminant-zero band), three distinct real roots (trigonometric form),
    or need-oracle when no closed form applies (positive discriminant with
    k^2 <= 3 cannot occur exactly; the code path is a roundoff guard).
    """
    disc = discriminant(k, b)
    band = band_scale * (1.0 + abs(k) ** 3 + b * b)
    if abs(disc) <= band:
        if abs(3.0 - k * k) <= triple_scale * (1.0 + k * k):
            r = complex(-k / 3.0, 0.0)
            return r, r, r, CASE_TRIPLE
        r1 = complex((k ** 3 - 4.0 * k + 9.0 * b) / (3.0 - k * k), 0.0)
        r2 = complex((9.0 * b - k) / (2.0 * k * k - 6.0), 0.0)
        return r1, r2, r2, CASE_DOUBLE
    if disc < 0.0:
        a1 = -54.0 * k ** 3 + 243.0 * k - 729.0 * b
        a2 = math.sqrt(max(a1 * a1 + 2916.0 * (3.0 - k * k) ** 3, 0.0))
        # the smaller of a1 +- a2 cancels catastrophically near k^2 = 3;
        # recover it from the product (a1 + a2)(a1 - a2) = -2916 (3 - k^2)^3
        if a1 >= 0.0:
            big = a1 + a2
        else:
            big = a1 - a2
        small = 0.0 if big == 0.0 else -2916.0 * (3.0 - k * k) ** 3 / big
        if a1 >= 0.0:
            cp, cm = _cbrt(big), _cbrt(small)
        else:
            cp, cm = _cbrt(small), _cbrt(big)
        s = _CBRT4 * (cp + cm) / 18.0
        t = _SQRT3 * _CBRT4 * (cp - cm) / 36.0
        r1 = complex(-k / 3.0 + s, 0.0)
        re = -k / 3.0 - 0.5 * s
        return r1, complex(re, t), complex(re, -t), CASE_ONE_REAL
    if k * k <= 3.0:
        return 0j, 0j, 0j, CASE_NEED_ORACLE
    root = math.sqrt(k * k - 3.0)
    a3 = (2.0 / 3.0) * root
    a4 = (2.0 * k ** 3 - 9.0 * k + 27.0 * b) / ((6.0 - 2.0 * k * k) * root)
    a4 = min(1.0, max(-1.0, a4))
    phi = math.acos(a4) / 3.0
    r1 = complex(a3 * math.cos(phi) - k / 3.0, 0.0)
    r2 = complex(a3 * math.cos(phi + _TWO_THIRDS_PI) - k / 3.0, 0.0)
    r3 = complex(a3 * math.cos(phi + 2.0 * _TWO_THIRDS_PI) - k / 3.0, 0.0)
    return r1, r2, r3, CASE_THREE_REAL


def cubic_closed_grid(ks, bs, band_scale=1e-10, triple_scale=1e-6):
    """Vectorized cubic_closed_one over parallel parameter arrays."""
    n = len(ks)
    roots = np.empty((n, 3), dtype=np.complex128)
    cases = np.empty(n, dtype=np.uint8)
    for i in range(n):
        r1, r2, r3, case = cubic_closed_one(float(ks[i]), float(bs[i]),
                                            band_scale, triple_scale)
        roots[i, 0] = r1
        roots[i, 1] = r2
        roots[i, 2] = r3
        cases[i] = case
    return roots, cases


# Dormand-Prince 5(4) coefficients (FSAL)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0


def _hmin(x):
    return 1e-15 * max(1.0, abs(x))


def _d_rhs(jx, gamma, d, dp):
    # effective-potential equation D'' = j_x (6 sqrt(D) + 2/sqrt(D) - 4 gamma)
    if d <= 0.0:
        return None
    s = math.sqrt(d)
    return dp, jx * (6.0 * s + 2.0 / s - 4.0 * gamma)


def integrate_d2(jx, gamma, x0, d0, dp0, x_end, rtol, atol,
                 stop_at_turn, x_stops, max_steps):
    """Step the second-order effective-potential system from (x0, d0, dp0).

    Samples every accepted step. With stop_at_turn, returns as soon as an
    accepted step lands with D' <= 0; the last two samples bracket the
    turning point. x_stops (sorted, optional) are forced step endpoints.
    Returns (xs, ys, status, n_steps, n_rejected).
    """
    xs = [x0]
    ys = [(d0, dp0)]
    x, d, dp = x0, d0, dp0
    stops = list(x_stops) if x_stops is not None else []
    stop_i = 0
    while stop_i < len(stops) and stops[stop_i] <= x:
        stop_i += 1
    f = _d_rhs(jx, gamma, d, dp)
    if f is None:
        return (np.array(xs), np.array(ys), STATUS_UNDERFLOW, 0, 0)
    h = 0.01 * x0
    n_steps = n_rej = 0
    just_rejected = False
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            return (np.array(xs), np.array(ys), STATUS_MAX_STEPS,
                    n_steps, n_rej)
        target = stops[stop_i] if stop_i < len(stops) else x_end
        target = min(target, x_end)
        clamped = x + h >= target
        if clamped:
            h = target - x
        k1 = f
        bad = False
        k2 = _d_rhs(jx, gamma, d + h * _A21 * k1[0], dp + h * _A21 * k1[1])
        bad = k2 is None
        if not bad:
            k3 = _d_rhs(jx, gamma,
                        d + h * (_A31 * k1[0] + _A32 * k2[0]),
                        dp + h * (_A31 * k1[1] + _A32 * k2[1]))
            bad = k3 is None
        if not bad:
            k4 = _d_rhs(jx, gamma,
                        d + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
                        dp + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]))
            bad = k4 is None
        if not bad:
            k5 = _d_rhs(jx, gamma,
                        d + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0]
                                 + _A54 * k4[0]),
                        dp + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1]
                                  + _A54 * k4[1]))
            bad = k5 is None
        if not bad:
            k6 = _d_rhs(jx, gamma,
                        d + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0]
                                 + _A64 * k4[0] + _A65 * k5[0]),
                        dp + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1]
                                  + _A64 * k4[1] + _A65 * k5[1]))
            bad = k6 is None
        if not bad:
            d_new = d + h * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0]
                             + _B5 * k5[0] + _B6 * k6[0])
            dp_new = dp + h * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1]
                               + _B5 * k5[1] + _B6 * k6[1])
            k7 = _d_rhs(jx, gamma, d_new, dp_new)
            bad = k7 is None
        if bad:
            n_rej += 1
            just_rejected = True
            h *= 0.5
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej)
            continue
        e0 = h * (_E1 * k1[0] + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0]
                  + _E6 * k6[0] + _E7 * k7[0])
        e1 = h * (_E1 * k1[1] + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1]
                  + _E6 * k6[1] + _E7 * k7[1])
        s0 = atol + rtol * max(abs(d), abs(d_new))
        s1 = atol + rtol * max(abs(dp), abs(dp_new))
        err = math.sqrt(0.5 * ((e0 / s0) ** 2 + (e1 / s1) ** 2))
        if err <= 1.0:
            x = target if clamped else x + h
            d, dp = d_new, dp_new
            f = k7
            xs.append(x)
            ys.append((d, dp))
            n_steps += 1
            if clamped and stop_i < len(stops) and x >= stops[stop_i]:
                stop_i += 1
            fac = _FAC_MAX if err == 0.0 else min(
                _FAC_MAX, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if just_rejected:
                fac = min(fac, 1.0)
            just_rejected = False
            h = max(h * fac, _hmin(x))
            if stop_at_turn and dp <= 0.0:
                return (np.array(xs), np.array(ys), STATUS_EVENT,
                        n_steps, n_rej)
        else:
            n_rej += 1
            just_rejected = True
            h *= min(1.0, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej)
    return np.array(xs), np.array(ys), STATUS_REACHED, n_steps, n_rej


def advance_d2(jx, gamma, x, d, dp, x_to, rtol, atol, max_steps=20000):
    """Error-controlled advance of the D-system to an exact endpoint.

    Returns (d, dp, status); no sampling, no events. Used by bisection
    refinements, so it must be cheap on short intervals.
    """
    xs, ys, status, _, _ = integrate_d2(jx, gamma, x, d, dp, x_to, rtol, atol,
                                        False, None, max_steps)
    return float(ys[-1, 0]), float(ys[-1, 1]), status


def _d1_rhs(jx, gamma, d_freeze, d):
    # first-integral manifold rate D' = sqrt(8 j_x Phi(D)), frozen past the
    # plateau so roundoff overshoot cannot re-excite the unstable direction
    if d <= 0.0 or d >= d_freeze:
        return 0.0
    s = math.sqrt(d)
    phi = s * (d - gamma * s + 1.0)
    if phi <= 0.0:
        return 0.0
    return math.sqrt(8.0 * jx * phi)


def integrate_d1(jx, gamma, d_freeze, x0, d0, x_end, rtol, atol,
                 x_stops, max_steps):
    """Step the energy-reduced first-order form of the D-equation.

    Used for the asymptotic regime where the second-order form is unstable
    around the plateau. Returns (xs, ds, dps, status, n_steps, n_rejected)
    with dps the manifold rate at each sample.
    """
    xs = [x0]
    ds = [d0]
    x, d = x0, d0
    stops = list(x_stops) if x_stops is not None else []
    stop_i = 0
    while stop_i < len(stops) and stops[stop_i] <= x:
        stop_i += 1
    f = _d1_rhs(jx, gamma, d_freeze, d)
    h = 0.01 * x0
    n_steps = n_rej = 0
    just_rejected = False
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            break
        target = stops[stop_i] if stop_i < len(stops) else x_end
        target = min(target, x_end)
        clamped = x + h >= target
        if clamped:
            h = target - x
        k1 = f
        k2 = _d1_rhs(jx, gamma, d_freeze, d + h * _A21 * k1)
        k3 = _d1_rhs(jx, gamma, d_freeze, d + h * (_A31 * k1 + _A32 * k2))
        k4 = _d1_rhs(jx, gamma, d_freeze,
                     d + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = _d1_rhs(jx, gamma, d_freeze,
                     d + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = _d1_rhs(jx, gamma, d_freeze,
                     d + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4
                              + _A65 * k5))
        d_new = d + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _d1_rhs(jx, gamma, d_freeze, d_new)
        e = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6
                 + _E7 * k7)
        scale = atol + rtol * max(abs(d), abs(d_new))
        err = abs(e) / scale
        if err <= 1.0:
            x = target if clamped else x + h
            d = d_new
            f = k7
            xs.append(x)
            ds.append(d)
            n_steps += 1
            if clamped and stop_i < len(stops) and x >= stops[stop_i]:
                stop_i += 1
            fac = _FAC_MAX if err == 0.0 else min(
                _FAC_MAX, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if just_rejected:
                fac = min(fac, 1.0)
            just_rejected = False
            h = max(h * fac, _hmin(x))
        else:
            n_rej += 1
            just_rejected = True
            h *= min(1.0, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if h < _hmin(x):
                break
    status = STATUS_REACHED if x >= x_end else STATUS_UNDERFLOW
    if n_steps + n_rej >= max_steps and x < x_end:
        status = STATUS_MAX_STEPS
    xs = np.array(xs)
    ds = np.array(ds)
    dps = np.array([_d1_rhs(jx, gamma, d_freeze, di) for di in ds])
    return xs, ds, dps, status, n_steps, n_rej


def _uv_rhs(jx, u, up, v, vp):
    # two-potential system u'' = j_x u / sqrt(theta), v'' = j_x v / sqrt(theta)
    theta = u * u - 1.0 - v * v
    if theta <= 0.0:
        return None
    s = math.sqrt(theta)
    return up, jx * u / s, vp, jx * v / s


def integrate_uv(jx, x0, y0, x_end, rtol, atol, theta_abs_floor,
                 theta_rel_floor, x_stops, max_steps):
    """Step the two-potential system from (x0, y0 = (u, u', v, v')).

    Stops in event mode when an accepted step would land with
    theta <= max(theta_abs_floor, theta_rel_floor * max theta seen): the
    offending point is not recorded and its x is returned as x_blocked.
    Returns (xs, ys, status, n_steps, n_rejected, x_blocked).
    """
    xs = [x0]
    ys = [tuple(y0)]
    x = x0
    u, up, v, vp = y0
    theta_max = u * u - 1.0 - v * v
    stops = list(x_stops) if x_stops is not None else []
    stop_i = 0
    while stop_i < len(stops) and stops[stop_i] <= x:
        stop_i += 1
    f = _uv_rhs(jx, u, up, v, vp)
    if f is None:
        return (np.array(xs), np.array(ys), STATUS_EVENT, 0, 0, x0)
    h = 0.01 * x0
    n_steps = n_rej = 0
    just_rejected = False
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            return (np.array(xs), np.array(ys), STATUS_MAX_STEPS,
                    n_steps, n_rej, x)
        target = stops[stop_i] if stop_i < len(stops) else x_end
        target = min(target, x_end)
        clamped = x + h >= target
        if clamped:
            h = target - x
        k1 = f
        stages = [k1]
        coeffs = [(_A21,), (_A31, _A32), (_A41, _A42, _A43),
                  (_A51, _A52, _A53, _A54), (_A61, _A62, _A63, _A64, _A65)]
        bad = False
        for row in coeffs:
            yi = [u, up, v, vp]
            for c, kk in zip(row, stages):
                for j in range(4):
                    yi[j] += h * c * kk[j]
            ki = _uv_rhs(jx, *yi)
            if ki is None:
                bad = True
                break
            stages.append(ki)
        if not bad:
            k1, k2, k3, k4, k5, k6 = stages
            y_new = []
            for j in range(4):
                y_new.append((u, up, v, vp)[j] + h * (
                    _B1 * k1[j] + _B3 * k3[j] + _B4 * k4[j] + _B5 * k5[j]
                    + _B6 * k6[j]))
            k7 = _uv_rhs(jx, *y_new)
            bad = k7 is None
        if bad:
            n_rej += 1
            just_rejected = True
            h *= 0.5
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej, x + 2.0 * h)
            continue
        err2 = 0.0
        for j in range(4):
            e = h * (_E1 * k1[j] + _E3 * k3[j] + _E4 * k4[j] + _E5 * k5[j]
                     + _E6 * k6[j] + _E7 * k7[j])
            s = atol + rtol * max(abs((u, up, v, vp)[j]), abs(y_new[j]))
            err2 += (e / s) ** 2
        err = math.sqrt(err2 / 4.0)
        if err <= 1.0:
            theta_new = y_new[0] * y_new[0] - 1.0 - y_new[2] * y_new[2]
            floor = max(theta_abs_floor, theta_rel_floor * theta_max)
            if theta_new <= floor:
                return (np.array(xs), np.array(ys), STATUS_EVENT,
                        n_steps, n_rej, x + h)
            x = target if clamped else x + h
            u, up, v, vp = y_new
            theta_max = max(theta_max, theta_new)
            f = k7
            xs.append(x)
            ys.append((u, up, v, vp))
            n_steps += 1
            if clamped and stop_i < len(stops) and x >= stops[stop_i]:
                stop_i += 1
            fac = _FAC_MAX if err == 0.0 else min(
                _FAC_MAX, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if just_rejected:
                fac = min(fac, 1.0)
            just_rejected = False
            h = max(h * fac, _hmin(x))
        else:
            n_rej += 1
            just_rejected = True
            h *= min(1.0, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej, x + 2.0 * h)
    return np.array(xs), np.array(ys), STATUS_REACHED, n_steps, n_rej, x_end


def advance_uv(jx, x, y4, x_to, rtol, atol, max_steps=20000):
    """Advance the uv-system to an exact endpoint with no floor events.

    Returns (y4, status, x_reached). A non-REACHED status means the state
    could not be carried to x_to (theta collapsed or steps underflowed),
    which bisection callers interpret as "the contact lies before x_to".
    """
    xs, ys, status, _, _, _ = integrate_uv(jx, x, y4, x_to, rtol, atol,
                                           0.0, 0.0, None, max_steps)
    y_last = tuple(float(c) for c in ys[-1])
    return y_last, status, float(xs[-1])
