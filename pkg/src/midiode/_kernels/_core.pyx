# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure-Python stepping kernels.

Same API, same case and status codes, same branch structure, and the same
floating-point evaluation order as _pykernels, so both backends produce the
same trajectories step for step. Only the loop machinery is typed. Keep the
two files in lockstep: every semantic change lands in both.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, acos, copysign, cos, fabs, sqrt
# real libm pow: err ** -0.2 would lower to C99 complex cpow, whose exp/log
# route rounds differently from CPython's pow and breaks step-for-step parity
# with the fallback kernels
from libc.math cimport pow as cpow

cnp.import_array()

BACKEND_NAME = "compiled"

# classification codes shared with the pure-Python twin; the cdef copies
# exist because the closed-form core runs without the GIL
cdef int _CASE_NEED_ORACLE = 0
cdef int _CASE_ONE_REAL = 1
cdef int _CASE_TRIPLE = 2
cdef int _CASE_DOUBLE = 3
cdef int _CASE_THREE_REAL = 4
CASE_NEED_ORACLE = _CASE_NEED_ORACLE
CASE_ONE_REAL = _CASE_ONE_REAL
CASE_TRIPLE = _CASE_TRIPLE
CASE_DOUBLE = _CASE_DOUBLE
CASE_THREE_REAL = _CASE_THREE_REAL

# statuses returned by the steppers
STATUS_REACHED = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3

cdef double _CBRT4 = cpow(4.0, 1.0 / 3.0)
cdef double _SQRT3 = sqrt(3.0)
cdef double _TWO_THIRDS_PI = 2.0 * M_PI / 3.0

# Dormand-Prince 5(4) coefficients (FSAL)
cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0
cdef double _E4 = 71.0 / 1920.0, _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0

cdef double _SAFETY = 0.9
cdef double _FAC_MIN = 0.2
cdef double _FAC_MAX = 5.0


cdef inline double _cbrt(double x) nogil:
    return copysign(cpow(fabs(x), 1.0 / 3.0), x)


cdef inline double _hmin(double x) nogil:
    cdef double ax = fabs(x)
    return 1e-15 * (ax if ax > 1.0 else 1.0)


def discriminant(double k, double b):
    """Discriminant of u^3 + k u^2 + u + b."""
    return 18.0 * k * b + k * k - 4.0 - 4.0 * k ** 3 * b - 27.0 * b * b


cdef int _cubic_core(double k, double b, double band_scale,
                     double triple_scale, double* rr, double* ri) nogil:
    cdef double disc = 18.0 * k * b + k * k - 4.0 - 4.0 * k ** 3 * b \
        - 27.0 * b * b
    cdef double band = band_scale * (1.0 + fabs(k) ** 3 + b * b)
    cdef double a1, a2, a2sq, big, small, cp, cm, s, t, re, root, a3, a4, phi
    ri[0] = ri[1] = ri[2] = 0.0
    if fabs(disc) <= band:
        if fabs(3.0 - k * k) <= triple_scale * (1.0 + k * k):
            rr[0] = rr[1] = rr[2] = -k / 3.0
            return _CASE_TRIPLE
        rr[0] = (k ** 3 - 4.0 * k + 9.0 * b) / (3.0 - k * k)
        rr[1] = rr[2] = (9.0 * b - k) / (2.0 * k * k - 6.0)
        return _CASE_DOUBLE
    if disc < 0.0:
        a1 = -54.0 * k ** 3 + 243.0 * k - 729.0 * b
        a2sq = a1 * a1 + 2916.0 * (3.0 - k * k) ** 3
        a2 = sqrt(a2sq if a2sq > 0.0 else 0.0)
        # the smaller of a1 +- a2 cancels catastrophically near k^2 = 3;
        # recover it from the product (a1 + a2)(a1 - a2) = -2916 (3 - k^2)^3
        if a1 >= 0.0:
            big = a1 + a2
        else:
            big = a1 - a2
        small = 0.0 if big == 0.0 else -2916.0 * (3.0 - k * k) ** 3 / big
        if a1 >= 0.0:
            cp = _cbrt(big)
            cm = _cbrt(small)
        else:
            cp = _cbrt(small)
            cm = _cbrt(big)
        s = _CBRT4 * (cp + cm) / 18.0
        t = _SQRT3 * _CBRT4 * (cp - cm) / 36.0
        re = -k / 3.0 - 0.5 * s
        rr[0] = -k / 3.0 + s
        rr[1] = re
        ri[1] = t
        rr[2] = re
        ri[2] = -t
        return _CASE_ONE_REAL
    if k * k <= 3.0:
        rr[0] = rr[1] = rr[2] = 0.0
        return _CASE_NEED_ORACLE
    root = sqrt(k * k - 3.0)
    a3 = (2.0 / 3.0) * root
    a4 = (2.0 * k ** 3 - 9.0 * k + 27.0 * b) / ((6.0 - 2.0 * k * k) * root)
    if a4 > 1.0:
        a4 = 1.0
    elif a4 < -1.0:
        a4 = -1.0
    phi = acos(a4) / 3.0
    rr[0] = a3 * cos(phi) - k / 3.0
    rr[1] = a3 * cos(phi + _TWO_THIRDS_PI) - k / 3.0
    rr[2] = a3 * cos(phi + 2.0 * _TWO_THIRDS_PI) - k / 3.0
    return _CASE_THREE_REAL


def cubic_closed_one(double k, double b, double band_scale=1e-10,
                     double triple_scale=1e-6):
    """Closed-form roots of u^3 + k u^2 + u + b.

    Returns (r1, r2, r3, case); see the pure-Python twin for the case map.
    """
    cdef double rr[3]
    cdef double ri[3]
    cdef int case = _cubic_core(k, b, band_scale, triple_scale, rr, ri)
    return (complex(rr[0], ri[0]), complex(rr[1], ri[1]),
            complex(rr[2], ri[2]), case)


def cubic_closed_grid(ks, bs, double band_scale=1e-10,
                      double triple_scale=1e-6):
    """Vectorized cubic_closed_one over parallel parameter arrays."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ka = np.ascontiguousarray(
        ks, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ba = np.ascontiguousarray(
        bs, dtype=np.float64)
    cdef Py_ssize_t n = ka.shape[0]
    roots = np.empty((n, 3), dtype=np.complex128)
    cases = np.empty(n, dtype=np.uint8)
    cdef double complex[:, ::1] rv = roots
    cdef unsigned char[::1] cv = cases
    cdef double rr[3]
    cdef double ri[3]
    cdef Py_ssize_t i
    for i in range(n):
        cv[i] = <unsigned char> _cubic_core(ka[i], ba[i], band_scale,
                                            triple_scale, rr, ri)
        rv[i, 0] = rr[0] + 1j * ri[0]
        rv[i, 1] = rr[1] + 1j * ri[1]
        rv[i, 2] = rr[2] + 1j * ri[2]
    return roots, cases


cdef inline bint _d_rhs(double jx, double gamma, double d, double dp,
                        double* out) nogil:
    # effective-potential equation D'' = j_x (6 sqrt(D) + 2/sqrt(D) - 4 gamma)
    cdef double s
    if d <= 0.0:
        return 0
    s = sqrt(d)
    out[0] = dp
    out[1] = jx * (6.0 * s + 2.0 / s - 4.0 * gamma)
    return 1


def integrate_d2(double jx, double gamma, double x0, double d0, double dp0,
                 double x_end, double rtol, double atol, bint stop_at_turn,
                 x_stops, long max_steps):
    """Step the second-order effective-potential system from (x0, d0, dp0).

    Twin of the pure-Python stepper: samples every accepted step, turn event
    when an accepted step lands with D' <= 0, x_stops are forced endpoints.
    Returns (xs, ys, status, n_steps, n_rejected).
    """
    cdef list xs = [x0]
    cdef list ys = [(d0, dp0)]
    cdef double x = x0, d = d0, dp = dp0
    stops_arr = (np.ascontiguousarray(x_stops, dtype=np.float64)
                 if x_stops is not None else np.empty(0))
    cdef double[:] stops = stops_arr
    cdef Py_ssize_t n_stops = stops.shape[0]
    cdef Py_ssize_t stop_i = 0
    while stop_i < n_stops and stops[stop_i] <= x:
        stop_i += 1
    cdef double f[2]
    cdef double k1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef double k5[2]
    cdef double k6[2]
    cdef double k7[2]
    cdef double h, target, d_new, dp_new, e0, e1, s0, s1, err, fac
    cdef double ad, adn, adp, adpn, hm
    cdef bint clamped, bad, just_rejected = 0
    cdef long n_steps = 0, n_rej = 0
    if not _d_rhs(jx, gamma, d, dp, f):
        return (np.array(xs), np.array(ys), STATUS_UNDERFLOW, 0, 0)
    h = 0.01 * x0
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            return (np.array(xs), np.array(ys), STATUS_MAX_STEPS,
                    n_steps, n_rej)
        target = stops[stop_i] if stop_i < n_stops else x_end
        if target > x_end:
            target = x_end
        clamped = x + h >= target
        if clamped:
            h = target - x
        k1[0] = f[0]
        k1[1] = f[1]
        bad = not _d_rhs(jx, gamma, d + h * _A21 * k1[0],
                         dp + h * _A21 * k1[1], k2)
        if not bad:
            bad = not _d_rhs(jx, gamma,
                             d + h * (_A31 * k1[0] + _A32 * k2[0]),
                             dp + h * (_A31 * k1[1] + _A32 * k2[1]), k3)
        if not bad:
            bad = not _d_rhs(jx, gamma,
                             d + h * (_A41 * k1[0] + _A42 * k2[0]
                                      + _A43 * k3[0]),
                             dp + h * (_A41 * k1[1] + _A42 * k2[1]
                                       + _A43 * k3[1]), k4)
        if not bad:
            bad = not _d_rhs(jx, gamma,
                             d + h * (_A51 * k1[0] + _A52 * k2[0]
                                      + _A53 * k3[0] + _A54 * k4[0]),
                             dp + h * (_A51 * k1[1] + _A52 * k2[1]
                                       + _A53 * k3[1] + _A54 * k4[1]), k5)
        if not bad:
            bad = not _d_rhs(jx, gamma,
                             d + h * (_A61 * k1[0] + _A62 * k2[0]
                                      + _A63 * k3[0] + _A64 * k4[0]
                                      + _A65 * k5[0]),
                             dp + h * (_A61 * k1[1] + _A62 * k2[1]
                                       + _A63 * k3[1] + _A64 * k4[1]
                                       + _A65 * k5[1]), k6)
        if not bad:
            d_new = d + h * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0]
                             + _B5 * k5[0] + _B6 * k6[0])
            dp_new = dp + h * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1]
                               + _B5 * k5[1] + _B6 * k6[1])
            bad = not _d_rhs(jx, gamma, d_new, dp_new, k7)
        if bad:
            n_rej += 1
            just_rejected = 1
            h *= 0.5
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej)
            continue
        e0 = h * (_E1 * k1[0] + _E3 * k3[0] + _E4 * k4[0] + _E5 * k5[0]
                  + _E6 * k6[0] + _E7 * k7[0])
        e1 = h * (_E1 * k1[1] + _E3 * k3[1] + _E4 * k4[1] + _E5 * k5[1]
                  + _E6 * k6[1] + _E7 * k7[1])
        ad = fabs(d)
        adn = fabs(d_new)
        s0 = atol + rtol * (ad if ad > adn else adn)
        adp = fabs(dp)
        adpn = fabs(dp_new)
        s1 = atol + rtol * (adp if adp > adpn else adpn)
        err = sqrt(0.5 * ((e0 / s0) ** 2 + (e1 / s1) ** 2))
        if err <= 1.0:
            x = target if clamped else x + h
            d = d_new
            dp = dp_new
            f[0] = k7[0]
            f[1] = k7[1]
            xs.append(x)
            ys.append((d, dp))
            n_steps += 1
            if clamped and stop_i < n_stops and x >= stops[stop_i]:
                stop_i += 1
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * cpow(err, -0.2)
                if fac < _FAC_MIN:
                    fac = _FAC_MIN
                if fac > _FAC_MAX:
                    fac = _FAC_MAX
            if just_rejected and fac > 1.0:
                fac = 1.0
            just_rejected = 0
            h = h * fac
            hm = _hmin(x)
            if h < hm:
                h = hm
            if stop_at_turn and dp <= 0.0:
                return (np.array(xs), np.array(ys), STATUS_EVENT,
                        n_steps, n_rej)
        else:
            n_rej += 1
            just_rejected = 1
            fac = _SAFETY * cpow(err, -0.2)
            if fac < _FAC_MIN:
                fac = _FAC_MIN
            if fac > 1.0:
                fac = 1.0
            h *= fac
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej)
    return np.array(xs), np.array(ys), STATUS_REACHED, n_steps, n_rej


def advance_d2(double jx, double gamma, double x, double d, double dp,
               double x_to, double rtol, double atol, long max_steps=20000):
    """Error-controlled advance of the D-system to an exact endpoint.

    Returns (d, dp, status); no sampling, no events.
    """
    xs, ys, status, _, _ = integrate_d2(jx, gamma, x, d, dp, x_to, rtol,
                                        atol, 0, None, max_steps)
    cdef Py_ssize_t last = ys.shape[0] - 1
    return float(ys[last, 0]), float(ys[last, 1]), status


cdef inline double _d1_rhs(double jx, double gamma, double d_freeze,
                           double d) nogil:
    # first-integral manifold rate D' = sqrt(8 j_x Phi(D)), frozen past the
    # plateau so roundoff overshoot cannot re-excite the unstable direction
    cdef double s, phi
    if d <= 0.0 or d >= d_freeze:
        return 0.0
    s = sqrt(d)
    phi = s * (d - gamma * s + 1.0)
    if phi <= 0.0:
        return 0.0
    return sqrt(8.0 * jx * phi)


def integrate_d1(double jx, double gamma, double d_freeze, double x0,
                 double d0, double x_end, double rtol, double atol,
                 x_stops, long max_steps):
    """Step the energy-reduced first-order form of the D-equation.

    Twin of the pure-Python stepper; returns (xs, ds, dps, status, n_steps,
    n_rejected) with dps the manifold rate at each sample.
    """
    cdef list xs = [x0]
    cdef list ds = [d0]
    cdef double x = x0, d = d0
    stops_arr = (np.ascontiguousarray(x_stops, dtype=np.float64)
                 if x_stops is not None else np.empty(0))
    cdef double[:] stops = stops_arr
    cdef Py_ssize_t n_stops = stops.shape[0]
    cdef Py_ssize_t stop_i = 0
    while stop_i < n_stops and stops[stop_i] <= x:
        stop_i += 1
    cdef double f = _d1_rhs(jx, gamma, d_freeze, d)
    cdef double h = 0.01 * x0
    cdef long n_steps = 0, n_rej = 0
    cdef bint just_rejected = 0, clamped
    cdef double target, k1, k2, k3, k4, k5, k6, k7
    cdef double d_new, e, scale, err, fac, ad, adn, hm
    cdef int status
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            break
        target = stops[stop_i] if stop_i < n_stops else x_end
        if target > x_end:
            target = x_end
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
        ad = fabs(d)
        adn = fabs(d_new)
        scale = atol + rtol * (ad if ad > adn else adn)
        err = fabs(e) / scale
        if err <= 1.0:
            x = target if clamped else x + h
            d = d_new
            f = k7
            xs.append(x)
            ds.append(d)
            n_steps += 1
            if clamped and stop_i < n_stops and x >= stops[stop_i]:
                stop_i += 1
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * cpow(err, -0.2)
                if fac < _FAC_MIN:
                    fac = _FAC_MIN
                if fac > _FAC_MAX:
                    fac = _FAC_MAX
            if just_rejected and fac > 1.0:
                fac = 1.0
            just_rejected = 0
            h = h * fac
            hm = _hmin(x)
            if h < hm:
                h = hm
        else:
            n_rej += 1
            just_rejected = 1
            fac = _SAFETY * cpow(err, -0.2)
            if fac < _FAC_MIN:
                fac = _FAC_MIN
            if fac > 1.0:
                fac = 1.0
            h *= fac
            if h < _hmin(x):
                break
    status = STATUS_REACHED if x >= x_end else STATUS_UNDERFLOW
    if n_steps + n_rej >= max_steps and x < x_end:
        status = STATUS_MAX_STEPS
    xs_arr = np.array(xs)
    ds_arr = np.array(ds)
    dps_arr = np.array([_d1_rhs(jx, gamma, d_freeze, di) for di in ds])
    return xs_arr, ds_arr, dps_arr, status, n_steps, n_rej


cdef inline bint _uv_rhs(double jx, double u, double up, double v, double vp,
                         double* out) nogil:
    # two-potential system u'' = j_x u / sqrt(theta), v'' = j_x v / sqrt(theta)
    cdef double theta = u * u - 1.0 - v * v
    cdef double s
    if theta <= 0.0:
        return 0
    s = sqrt(theta)
    out[0] = up
    out[1] = jx * u / s
    out[2] = vp
    out[3] = jx * v / s
    return 1


def integrate_uv(double jx, double x0, y0, double x_end, double rtol,
                 double atol, double theta_abs_floor, double theta_rel_floor,
                 x_stops, long max_steps):
    """Step the two-potential system from (x0, y0 = (u, u', v, v')).

    Twin of the pure-Python stepper: stops in event mode when an accepted
    step would land with theta at or below the floor; the offending point is
    not recorded and its x is returned as x_blocked.
    Returns (xs, ys, status, n_steps, n_rejected, x_blocked).
    """
    cdef double y[4]
    y[0] = y0[0]
    y[1] = y0[1]
    y[2] = y0[2]
    y[3] = y0[3]
    cdef list xs = [x0]
    cdef list ys = [(y[0], y[1], y[2], y[3])]
    cdef double x = x0
    cdef double theta_max = y[0] * y[0] - 1.0 - y[2] * y[2]
    stops_arr = (np.ascontiguousarray(x_stops, dtype=np.float64)
                 if x_stops is not None else np.empty(0))
    cdef double[:] stops = stops_arr
    cdef Py_ssize_t n_stops = stops.shape[0]
    cdef Py_ssize_t stop_i = 0
    while stop_i < n_stops and stops[stop_i] <= x:
        stop_i += 1
    cdef double f[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef double yi[4]
    cdef double y_new[4]
    cdef double h, target, err, err2, e, s, fac, theta_new, floor
    cdef double a0, a1, hm
    cdef bint clamped, bad, just_rejected = 0
    cdef long n_steps = 0, n_rej = 0
    cdef int j
    if not _uv_rhs(jx, y[0], y[1], y[2], y[3], f):
        return (np.array(xs), np.array(ys), STATUS_EVENT, 0, 0, x0)
    h = 0.01 * x0
    while x < x_end:
        if n_steps + n_rej >= max_steps:
            return (np.array(xs), np.array(ys), STATUS_MAX_STEPS,
                    n_steps, n_rej, x)
        target = stops[stop_i] if stop_i < n_stops else x_end
        if target > x_end:
            target = x_end
        clamped = x + h >= target
        if clamped:
            h = target - x
        for j in range(4):
            k1[j] = f[j]
        # stage sums accumulate term by term, matching the Python twin
        for j in range(4):
            yi[j] = y[j] + h * _A21 * k1[j]
        bad = not _uv_rhs(jx, yi[0], yi[1], yi[2], yi[3], k2)
        if not bad:
            for j in range(4):
                yi[j] = y[j] + h * _A31 * k1[j] + h * _A32 * k2[j]
            bad = not _uv_rhs(jx, yi[0], yi[1], yi[2], yi[3], k3)
        if not bad:
            for j in range(4):
                yi[j] = (y[j] + h * _A41 * k1[j] + h * _A42 * k2[j]
                         + h * _A43 * k3[j])
            bad = not _uv_rhs(jx, yi[0], yi[1], yi[2], yi[3], k4)
        if not bad:
            for j in range(4):
                yi[j] = (y[j] + h * _A51 * k1[j] + h * _A52 * k2[j]
                         + h * _A53 * k3[j] + h * _A54 * k4[j])
            bad = not _uv_rhs(jx, yi[0], yi[1], yi[2], yi[3], k5)
        if not bad:
            for j in range(4):
                yi[j] = (y[j] + h * _A61 * k1[j] + h * _A62 * k2[j]
                         + h * _A63 * k3[j] + h * _A64 * k4[j]
                         + h * _A65 * k5[j])
            bad = not _uv_rhs(jx, yi[0], yi[1], yi[2], yi[3], k6)
        if not bad:
            for j in range(4):
                y_new[j] = y[j] + h * (_B1 * k1[j] + _B3 * k3[j]
                                       + _B4 * k4[j] + _B5 * k5[j]
                                       + _B6 * k6[j])
            bad = not _uv_rhs(jx, y_new[0], y_new[1], y_new[2], y_new[3], k7)
        if bad:
            n_rej += 1
            just_rejected = 1
            h *= 0.5
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej, x + 2.0 * h)
            continue
        err2 = 0.0
        for j in range(4):
            e = h * (_E1 * k1[j] + _E3 * k3[j] + _E4 * k4[j] + _E5 * k5[j]
                     + _E6 * k6[j] + _E7 * k7[j])
            a0 = fabs(y[j])
            a1 = fabs(y_new[j])
            s = atol + rtol * (a0 if a0 > a1 else a1)
            err2 += (e / s) ** 2
        err = sqrt(err2 / 4.0)
        if err <= 1.0:
            theta_new = y_new[0] * y_new[0] - 1.0 - y_new[2] * y_new[2]
            floor = theta_rel_floor * theta_max
            if theta_abs_floor > floor:
                floor = theta_abs_floor
            if theta_new <= floor:
                return (np.array(xs), np.array(ys), STATUS_EVENT,
                        n_steps, n_rej, x + h)
            x = target if clamped else x + h
            for j in range(4):
                y[j] = y_new[j]
                f[j] = k7[j]
            if theta_new > theta_max:
                theta_max = theta_new
            xs.append(x)
            ys.append((y[0], y[1], y[2], y[3]))
            n_steps += 1
            if clamped and stop_i < n_stops and x >= stops[stop_i]:
                stop_i += 1
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * cpow(err, -0.2)
                if fac < _FAC_MIN:
                    fac = _FAC_MIN
                if fac > _FAC_MAX:
                    fac = _FAC_MAX
            if just_rejected and fac > 1.0:
                fac = 1.0
            just_rejected = 0
            h = h * fac
            hm = _hmin(x)
            if h < hm:
                h = hm
        else:
            n_rej += 1
            just_rejected = 1
            fac = _SAFETY * cpow(err, -0.2)
            if fac < _FAC_MIN:
                fac = _FAC_MIN
            if fac > 1.0:
                fac = 1.0
            h *= fac
            if h < _hmin(x):
                return (np.array(xs), np.array(ys), STATUS_UNDERFLOW,
                        n_steps, n_rej, x + 2.0 * h)
    return np.array(xs), np.array(ys), STATUS_REACHED, n_steps, n_rej, x_end


def advance_uv(double jx, double x, y4, double x_to, double rtol,
               double atol, long max_steps=20000):
    """Advance the uv-system to an exact endpoint with no floor events.

    Returns (y4, status, x_reached); a non-REACHED status means the state
    could not be carried to x_to.
    """
    xs, ys, status, _, _, _ = integrate_uv(jx, x, y4, x_to, rtol, atol,
                                           0.0, 0.0, None, max_steps)
    cdef Py_ssize_t last = ys.shape[0] - 1
    y_last = tuple(float(c) for c in ys[last])
    return y_last, status, float(xs[last])
