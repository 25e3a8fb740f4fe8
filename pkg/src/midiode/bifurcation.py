"""Parameter sweeps of the deflection cubic and branch assembly.

Sweeps run over the reduced plane (k_hat, b_hat), either along a line with
one coordinate fixed (1-D) or over a full grid (surface). Each grid point
records the cubic's solutions (u-space) or the induced candidates
theta = u^2 for roots with positive real part (theta-space), together with
the discriminant.

Bifurcation points of a 1-D sweep are parameter values where the
discriminant reaches zero. Transversal zeros are found from sign changes;
the repeated-root set also supports tangential zeros (the discriminant
touches zero at a local extremum without changing sign, as happens at the
triple-root point), found by bisecting the analytic parameter derivative
of the discriminant and accepting extrema within a small band of zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import kernel
from .cubic import solve_numeric_oracle
from .model import ComplexValue, RootClass

_PARAM_NAMES = ("k_hat", "b_hat")

_CASE_TO_CLASS = {
    kernel.CASE_ONE_REAL: RootClass.ONE_REAL_CONJUGATE_PAIR,
    kernel.CASE_TRIPLE: RootClass.TRIPLE_ROOT,
    kernel.CASE_DOUBLE: RootClass.DOUBLE_ROOT,
    kernel.CASE_THREE_REAL: RootClass.THREE_DISTINCT_REAL,
}


@dataclass(frozen=True)
class ScanResult:
    """Solutions of the deflection cubic over a parameter sweep.

    solutions[i] is a tuple of (value, multiplicity) pairs at grid point i
    (roots in u-space, candidates in theta-space). mask is present for
    theta-space sweeps and marks grid points with no candidate; coverage is
    the fraction of points carrying at least one entry. bifurcation_points
    is filled by 1-D sweeps only.
    """

    sweep_spec: dict
    k_values: np.ndarray
    b_values: np.ndarray
    discriminants: np.ndarray
    solutions: tuple
    classifications: tuple
    bifurcation_points: tuple = ()
    coverage: float = 1.0
    mask: np.ndarray | None = None

    def to_dict(self):
        return {
            "sweep_spec": self.sweep_spec,
            "k_values": self.k_values.tolist(),
            "b_values": self.b_values.tolist(),
            "discriminants": self.discriminants.tolist(),
            "solutions": [[[ComplexValue.from_complex(z).to_dict(), m]
                           for z, m in sols] for sols in self.solutions],
            "classifications": [c.value for c in self.classifications],
            "bifurcation_points": list(self.bifurcation_points),
            "coverage": self.coverage,
            "mask": None if self.mask is None else [bool(v)
                                                    for v in self.mask],
        }


@dataclass(frozen=True)
class Branch:
    """One assembled branch of a 1-D sweep.

    kind "real" carries a real root along the run; "conjugate_pair" carries
    the upper-half-plane member of a conjugate pair (its mirror is implied).
    left_event/right_event hold the bifurcation parameter the branch ends
    at, when it ends at one; closed_loop marks a conjugate pair whose both
    ends terminate at bifurcation points inside the sweep.
    """

    kind: str
    start: int
    end: int
    param: np.ndarray
    values: np.ndarray
    left_event: float | None = None
    right_event: float | None = None
    closed_loop: bool = False
    flags: tuple = field(default=())

    def to_dict(self):
        return {"kind": self.kind, "start": self.start, "end": self.end,
                "param": self.param.tolist(),
                "values": [ComplexValue.from_complex(z).to_dict()
                           for z in self.values],
                "left_event": self.left_event,
                "right_event": self.right_event,
                "closed_loop": self.closed_loop,
                "flags": list(self.flags)}


def _grouped_point(case, row):
    """Kernel grid row -> ((value, mult), ...) sorted by (re, im)."""
    if case == kernel.CASE_TRIPLE:
        return ((complex(row[0]), 3),)
    if case == kernel.CASE_DOUBLE:
        pairs = [(complex(row[0]), 1), (complex(row[1]), 2)]
    else:
        pairs = [(complex(row[0]), 1), (complex(row[1]), 1),
                 (complex(row[2]), 1)]
    pairs.sort(key=lambda p: (p[0].real, p[0].imag))
    return tuple(pairs)


def _solve_points(ks, bs):
    """Grouped solutions and classifications over parallel arrays."""
    roots, cases = kernel.cubic_closed_grid(ks, bs)
    solutions = []
    classifications = []
    for i in range(len(ks)):
        case = int(cases[i])
        if case == kernel.CASE_NEED_ORACLE:
            root_set = solve_numeric_oracle(float(ks[i]), float(bs[i]))
            solutions.append(tuple((value.to_complex(), mult)
                                   for value, mult in root_set.roots))
            classifications.append(root_set.classification)
        else:
            solutions.append(_grouped_point(case, roots[i]))
            classifications.append(_CASE_TO_CLASS[case])
    return tuple(solutions), tuple(classifications)


def _theta_point(solutions):
    """Map one point's roots to theta candidates (positive-real-part rule)."""
    return tuple((z * z, m) for z, m in solutions if z.real > 0.0)


def _to_theta(solutions):
    return tuple(_theta_point(sols) for sols in solutions)


def _coverage_and_mask(solutions, space):
    filled = np.array([len(sols) > 0 for sols in solutions])
    coverage = float(np.count_nonzero(filled)) / len(filled)
    mask = ~filled if space == "theta" else None
    return coverage, mask


def _check_space(space):
    if space not in ("u", "theta"):
        raise ValueError(f"space must be 'u' or 'theta', got {space!r}")


def _disc_on_line(fixed_name, fixed_value):
    if fixed_name == "k_hat":
        return lambda p: kernel.discriminant(fixed_value, p)
    return lambda p: kernel.discriminant(p, fixed_value)


def _disc_slope_on_line(fixed_name, fixed_value):
    # analytic parameter derivative of the discriminant along the sweep line
    if fixed_name == "k_hat":
        k = fixed_value
        return lambda b: 18.0 * k - 4.0 * k ** 3 - 54.0 * b
    b = fixed_value
    return lambda k: 18.0 * b + 2.0 * k - 12.0 * k * k * b


def _bisect_zero(fun, lo, hi, f_lo, f_hi, tol):
    """Standard bisection of a bracketed sign change."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) != (f_mid < 0.0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def find_bifurcation_points(fixed_name: str, fixed_value: float, lo: float,
                            hi: float, n: int, *, bisect_tol: float = 1e-10,
                            band: float = 1e-8) -> tuple:
    """Discriminant zeros along a sweep line, as varied-parameter values.

    Sign changes between grid neighbors are bisected to ``bisect_tol``.
    Tangential zeros are recovered from sign changes of the analytic
    discriminant slope: the bracketed extremum is bisected and accepted
    when |discriminant| <= ``band`` there. Results are sorted and deduped
    within ``band`` parameter distance.
    """
    disc = _disc_on_line(fixed_name, fixed_value)
    slope = _disc_slope_on_line(fixed_name, fixed_value)
    grid = np.linspace(lo, hi, n)
    d_vals = np.array([disc(p) for p in grid])
    s_vals = np.array([slope(p) for p in grid])
    points = []
    for i in range(n - 1):
        if (d_vals[i] < 0.0) != (d_vals[i + 1] < 0.0):
            points.append(_bisect_zero(disc, float(grid[i]),
                                       float(grid[i + 1]), float(d_vals[i]),
                                       float(d_vals[i + 1]), bisect_tol))
    for i in range(n - 1):
        if (s_vals[i] < 0.0) != (s_vals[i + 1] < 0.0):
            p_ext = _bisect_zero(slope, float(grid[i]), float(grid[i + 1]),
                                 float(s_vals[i]), float(s_vals[i + 1]),
                                 bisect_tol)
            if abs(disc(p_ext)) <= band:
                points.append(p_ext)
    points.sort()
    deduped: list[float] = []
    for p in points:
        if not deduped or p - deduped[-1] > band:
            deduped.append(p)
    return tuple(deduped)


def scan_1d(space: str, fixed: tuple, varied: tuple, *,
            bisect_tol: float = 1e-10, band: float = 1e-8) -> ScanResult:
    """Sweep one reduced parameter with the other fixed.

    fixed = (name, value) and varied = (name, (lo, hi), n) with names from
    {"k_hat", "b_hat"}. Solutions are closed-form roots (u-space) or theta
    candidates; bifurcation points are discriminant zeros along the line.
    """
    _check_space(space)
    fixed_name, fixed_value = fixed
    varied_name, (lo, hi), n = varied
    if {fixed_name, varied_name} != set(_PARAM_NAMES):
        raise ValueError("fixed and varied must name k_hat and b_hat, got "
                         f"({fixed_name!r}, {varied_name!r})")
    if n < 2:
        raise ValueError(f"sweep needs at least 2 points, got {n}")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid sweep range ({lo}, {hi})")
    grid = np.linspace(float(lo), float(hi), int(n))
    if varied_name == "k_hat":
        ks, bs = grid, np.full(n, float(fixed_value))
    else:
        ks, bs = np.full(n, float(fixed_value)), grid
    solutions, classifications = _solve_points(ks, bs)
    if space == "theta":
        solutions = _to_theta(solutions)
    coverage, mask = _coverage_and_mask(solutions, space)
    disc = np.array([kernel.discriminant(float(k), float(b))
                     for k, b in zip(ks, bs)])
    bif = find_bifurcation_points(fixed_name, float(fixed_value), float(lo),
                                  float(hi), int(n), bisect_tol=bisect_tol,
                                  band=band)
    spec = {"mode": "1d", "space": space,
            "fixed": {"name": fixed_name, "value": float(fixed_value)},
            "varied": {"name": varied_name, "lo": float(lo), "hi": float(hi),
                       "n": int(n)}}
    return ScanResult(sweep_spec=spec, k_values=ks, b_values=bs,
                      discriminants=disc, solutions=solutions,
                      classifications=classifications,
                      bifurcation_points=bif, coverage=coverage, mask=mask)


def scan_surface(space: str, k_range: tuple, b_range: tuple, n_k: int,
                 n_b: int, z: str = "re") -> ScanResult:
    """Sweep the full (k_hat, b_hat) grid, row-major in k then b.

    z picks the surface height ("re" or "im") for downstream plotting
    formats; it does not affect the stored solutions.
    """
    _check_space(space)
    if z not in ("re", "im"):
        raise ValueError(f"z must be 're' or 'im', got {z!r}")
    if n_k < 2 or n_b < 2:
        raise ValueError(f"surface resolutions must be >= 2, got "
                         f"({n_k}, {n_b})")
    k_grid = np.linspace(float(k_range[0]), float(k_range[1]), int(n_k))
    b_grid = np.linspace(float(b_range[0]), float(b_range[1]), int(n_b))
    ks = np.repeat(k_grid, n_b)
    bs = np.tile(b_grid, n_k)
    solutions, classifications = _solve_points(ks, bs)
    if space == "theta":
        solutions = _to_theta(solutions)
    coverage, mask = _coverage_and_mask(solutions, space)
    disc = np.array([kernel.discriminant(float(k), float(b))
                     for k, b in zip(ks, bs)])
    spec = {"mode": "surface", "space": space, "z": z,
            "k_range": [float(k_range[0]), float(k_range[1])],
            "b_range": [float(b_range[0]), float(b_range[1])],
            "n_k": int(n_k), "n_b": int(n_b)}
    return ScanResult(sweep_spec=spec, k_values=ks, b_values=bs,
                      discriminants=disc, solutions=solutions,
                      classifications=classifications, coverage=coverage,
                      mask=mask)


def _expand_roots(solutions):
    """(N, 3) complex strand-candidate array, multiplicity-expanded."""
    n = len(solutions)
    out = np.empty((n, 3), dtype=complex)
    for i, sols in enumerate(solutions):
        row = []
        for z, m in sols:
            row.extend([z] * m)
        row.sort(key=lambda z: (z.real, z.imag))
        out[i] = row
    return out


_PERMS = tuple(itertools.permutations(range(3)))


def _link_strands(expanded):
    """Greedy nearest-neighbor continuation; returns (strands, ambiguous).

    Each step picks the assignment of the next point's roots to the three
    strands with minimal total complex distance; candidates are pre-sorted
    by (re, im) and the first minimal permutation wins, so ties break
    deterministically. ambiguous lists indices where two assignments were
    closer than a relative 1e-9.
    """
    strands = expanded.copy()
    ambiguous = []
    for i in range(1, len(strands)):
        prev = strands[i - 1]
        cand = strands[i].copy()
        costs = [sum(abs(prev[j] - cand[p[j]]) for j in range(3))
                 for p in _PERMS]
        best = min(range(len(_PERMS)), key=lambda idx: costs[idx])
        scale = 1.0 + float(np.max(np.abs(cand)))
        near = [c for c in costs if c - costs[best] <= 1e-9 * scale]
        if len(near) > 1:
            ambiguous.append(i)
        strands[i] = cand[list(_PERMS[best])]
    return strands, ambiguous


def assemble_branches(scan: ScanResult) -> tuple:
    """Link a 1-D sweep's solutions into continuous branches.

    Returns Branch objects ordered by (start index, kind). Pair runs are
    split at interior bifurcation points, so a conjugate pair born and
    collapsing inside the sweep comes out closed_loop = True.
    """
    if scan.sweep_spec.get("mode") != "1d":
        raise ValueError("branch assembly needs a 1-D scan")
    if scan.sweep_spec["space"] != "u":
        raise ValueError("branch assembly runs in u-space")
    n = len(scan.solutions)
    param = (scan.k_values
             if scan.sweep_spec["varied"]["name"] == "k_hat"
             else scan.b_values)
    strands, ambiguous = _link_strands(_expand_roots(scan.solutions))
    is_pair = np.array([c is RootClass.ONE_REAL_CONJUGATE_PAIR
                        for c in scan.classifications])

    # maximal constant-pattern runs, then split pair runs at interior
    # bifurcation parameters
    runs = []
    start = 0
    for i in range(1, n + 1):
        if i == n or is_pair[i] != is_pair[start]:
            runs.append((start, i - 1, bool(is_pair[start])))
            start = i
    split_runs = []
    for a, b, pair in runs:
        if not pair:
            split_runs.append((a, b, pair, None, None))
            continue
        cuts = [p for p in scan.bifurcation_points
                if param[a] < p < param[b]]
        left_ev = None
        for p in sorted(cuts):
            s = int(np.searchsorted(param[a:b + 1], p)) + a
            if s <= a or s > b:
                continue
            split_runs.append((a, s - 1, pair, left_ev, p))
            a, left_ev = s, p
        split_runs.append((a, b, pair, left_ev, None))
    split_runs.sort()

    def boundary_event(index, side):
        # nearest bifurcation parameter within one grid cell of the
        # classification change next to `index`
        if side == "left":
            if index == 0:
                return None
            lo, hi = param[index - 1], param[index]
        else:
            if index == n - 1:
                return None
            lo, hi = param[index], param[index + 1]
        step = abs(hi - lo)
        for p in scan.bifurcation_points:
            if lo - 0.5 * step <= p <= hi + 0.5 * step:
                return p
        return None

    branches = []
    for a, b, pair, left_ev, right_ev in split_runs:
        if left_ev is None:
            left_ev = boundary_event(a, "left")
        if right_ev is None:
            right_ev = boundary_event(b, "right")
        flags = ()
        if any(a <= i <= b for i in ambiguous):
            flags = ("ambiguous_link",)
        seg = strands[a:b + 1]
        if pair:
            upper = np.where(seg[:, 0].imag > 0.0, seg[:, 0],
                             np.where(seg[:, 1].imag > 0.0, seg[:, 1],
                                      seg[:, 2]))
            real_strand = np.where(seg[:, 0].imag == 0.0, seg[:, 0],
                                   np.where(seg[:, 1].imag == 0.0, seg[:, 1],
                                            seg[:, 2]))
            closed = left_ev is not None and right_ev is not None
            branches.append(Branch(kind="real", start=a, end=b,
                                   param=param[a:b + 1].copy(),
                                   values=real_strand,
                                   left_event=left_ev, right_event=right_ev,
                                   flags=flags))
            branches.append(Branch(kind="conjugate_pair", start=a, end=b,
                                   param=param[a:b + 1].copy(), values=upper,
                                   left_event=left_ev, right_event=right_ev,
                                   closed_loop=closed, flags=flags))
        else:
            for j in range(3):
                branches.append(Branch(kind="real", start=a, end=b,
                                       param=param[a:b + 1].copy(),
                                       values=seg[:, j].copy(),
                                       left_event=left_ev,
                                       right_event=right_ev, flags=flags))
    branches.sort(key=lambda br: (br.start, br.kind))
    return tuple(branches)
