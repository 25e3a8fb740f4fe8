"""Closed-form analysis of the deflection cubic u^3 + k_hat u^2 + u + b_hat.

The sign of the discriminant selects the solution formula: radical form for
one real root plus a conjugate pair, trigonometric form for three distinct
real roots, rational forms on the discriminant-zero set. A companion-matrix
eigenvalue solver is kept alongside as an independent oracle; the public
solver only falls back to it in the measure-zero corner where roundoff puts
a positive discriminant at k_hat^2 <= 3, which the exact arithmetic forbids.
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import kernel
from .model import ComplexValue, RootClass, RootSet, ThetaCandidates

_CASE_TO_CLASS = {
    kernel.CASE_ONE_REAL: RootClass.ONE_REAL_CONJUGATE_PAIR,
    kernel.CASE_TRIPLE: RootClass.TRIPLE_ROOT,
    kernel.CASE_DOUBLE: RootClass.DOUBLE_ROOT,
    kernel.CASE_THREE_REAL: RootClass.THREE_DISTINCT_REAL,
}


def discriminant(k_hat: float, b_hat: float) -> float:
    """Discriminant of the deflection cubic.

    Positive for three distinct real roots, negative for one real root plus
    a conjugate pair, zero on the repeated-root set.
    """
    return kernel.discriminant(float(k_hat), float(b_hat))


def triple_root_locus() -> tuple[float, float, float]:
    """The unique parameter point with a triple root, and that root.

    Returns (k_hat, b_hat, root) = (sqrt(3), sqrt(3)/9, -sqrt(3)/3); the
    mirror point is (-k_hat, -b_hat, -root).
    """
    s = math.sqrt(3.0)
    return s, s / 9.0, -s / 3.0


def _grouped(case, r1: complex, r2: complex, r3: complex):
    """(value, multiplicity) pairs for a kernel case, sorted by (re, im)."""
    if case == kernel.CASE_TRIPLE:
        pairs = [(r1, 3)]
    elif case == kernel.CASE_DOUBLE:
        pairs = [(r1, 1), (r2, 2)]
    else:
        pairs = [(r1, 1), (r2, 1), (r3, 1)]
    pairs.sort(key=lambda p: (p[0].real, p[0].imag))
    return tuple((ComplexValue.from_complex(z), m) for z, m in pairs)


def solve_closed_form(k_hat: float, b_hat: float, band_scale: float = 1e-10,
                      triple_scale: float = 1e-6) -> RootSet:
    """Solve the deflection cubic by the closed formulas.

    band_scale sets the relative half-width of the discriminant band treated
    as zero; triple_scale does the same for the triple-root test on
    3 - k_hat^2 inside that band. Falls back to the numeric oracle, with an
    "oracle_fallback" flag, if roundoff lands outside every formula's domain.
    """
    k = float(k_hat)
    b = float(b_hat)
    r1, r2, r3, case = kernel.cubic_closed_one(k, b, band_scale, triple_scale)
    if case == kernel.CASE_NEED_ORACLE:
        oracle = solve_numeric_oracle(k, b)
        return RootSet(discriminant=oracle.discriminant,
                       classification=oracle.classification,
                       roots=oracle.roots,
                       flags=oracle.flags + ("oracle_fallback",))
    return RootSet(discriminant=kernel.discriminant(k, b),
                   classification=_CASE_TO_CLASS[case],
                   roots=_grouped(case, r1, r2, r3))


def solve_numeric_oracle(k_hat: float, b_hat: float,
                         cluster_tol: float = 1e-8) -> RootSet:
    """Solve the deflection cubic by companion-matrix eigenvalues.

    Independent of the closed forms; used to cross-check them and to cover
    their roundoff gaps. Eigenvalues closer than cluster_tol (relative to
    the root magnitude) are merged into one root with summed multiplicity,
    and the discriminant sign disambiguates real triples from conjugate
    pairs near the boundary.
    """
    k = float(k_hat)
    b = float(b_hat)
    companion = np.array([[-k, -1.0, -b],
                          [1.0, 0.0, 0.0],
                          [0.0, 1.0, 0.0]])
    eig = sorted(np.linalg.eigvals(companion).tolist(),
                 key=lambda z: (z.real, z.imag))
    scale = 1.0 + max(abs(z) for z in eig)
    tol = cluster_tol * scale
    clusters: list[list[complex]] = []
    for z in eig:
        for members in clusters:
            if abs(z - members[0]) <= tol:
                members.append(z)
                break
        else:
            clusters.append([z])
    pairs = [(sum(members) / len(members), len(members))
             for members in clusters]

    disc = kernel.discriminant(k, b)
    mults = sorted(m for _, m in pairs)
    if mults == [3]:
        classification = RootClass.TRIPLE_ROOT
        pairs = [(complex(pairs[0][0].real, 0.0), 3)]
    elif mults == [1, 2]:
        classification = RootClass.DOUBLE_ROOT
        pairs = [(complex(z.real, 0.0), m) for z, m in pairs]
    elif disc < 0.0:
        classification = RootClass.ONE_REAL_CONJUGATE_PAIR
        real = min(pairs, key=lambda p: abs(p[0].imag))[0]
        others = sorted((z for z, _ in pairs if z is not real),
                        key=lambda z: z.imag)
        re = 0.5 * (others[0].real + others[1].real)
        im = 0.5 * (others[1].imag - others[0].imag)
        pairs = [(complex(real.real, 0.0), 1), (complex(re, im), 1),
                 (complex(re, -im), 1)]
    else:
        classification = RootClass.THREE_DISTINCT_REAL
        pairs = [(complex(z.real, 0.0), 1) for z, m in pairs]

    pairs.sort(key=lambda p: (p[0].real, p[0].imag))
    return RootSet(discriminant=disc, classification=classification,
                   roots=tuple((ComplexValue.from_complex(z), m)
                               for z, m in pairs))


def theta_candidates(root_set: RootSet) -> ThetaCandidates:
    """Effective-potential candidates theta = u^2 from physical roots.

    theta = u^2 with u = sqrt(theta) on the principal branch requires
    Re(u) > 0, so only those roots induce candidates; the rest are counted
    in ``dropped``.
    """
    values = []
    counts = []
    provenance = []
    dropped = 0
    for idx, (value, mult) in enumerate(root_set.roots):
        if value.re > 0.0:
            u = value.to_complex()
            values.append(ComplexValue.from_complex(u * u))
            counts.append(mult)
            provenance.append(idx)
        else:
            dropped += mult
    return ThetaCandidates(values=tuple(values), counts=tuple(counts),
                           provenance=tuple(provenance), dropped=dropped)


def theta_residual(theta: complex, k_hat: float, b_hat: float) -> float:
    """|s^3 + k_hat s^2 + s + b_hat| with s the principal sqrt of theta."""
    s = np.sqrt(complex(theta))
    return abs(s ** 3 + k_hat * s ** 2 + s + b_hat)
