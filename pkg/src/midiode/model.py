"""Parameter and result types for the insulated-diode model.

The physical state is described by a current density j_x, the collector
potential phi_L, the collector magnetic potential a_L and the magnetic-field
slope beta at the emitter. The reduced description used by the closed-form
analysis consists of the cubic coefficients (k_hat, b_hat) and the
effective-potential parameter gamma.

gamma is stored independently of beta so that the full parameter plane is
reachable in sweeps: the reduction map below gives gamma <= 0, while the
oscillatory and asymptotic regimes of the effective-potential equation live
at gamma >= 2. See bvp.effective_gamma for the sign convention that ties the
two-potential system to the effective-potential equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class RootClass(str, Enum):
    """Root structure of the deflection cubic."""

    ONE_REAL_CONJUGATE_PAIR = "OneRealConjugatePair"
    TRIPLE_ROOT = "TripleRoot"
    DOUBLE_ROOT = "DoubleRoot"
    THREE_DISTINCT_REAL = "ThreeDistinctReal"


class Regime(str, Enum):
    """Long-time behavior of the effective potential."""

    UNBOUNDED = "Unbounded"
    ASYMPTOTIC_TO_ONE = "AsymptoticToOne"
    PERIODIC = "Periodic"


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class DiodeParams:
    """Physical diode parameters; alpha = 1 + phi_L is derived."""

    j_x: float
    phi_L: float
    a_L: float
    beta: float
    alpha: float = field(init=False)

    def __post_init__(self):
        for name in ("j_x", "phi_L", "a_L", "beta"):
            _require_finite(name, getattr(self, name))
        if self.j_x <= 0.0:
            raise ValueError(f"j_x must be positive, got {self.j_x}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        object.__setattr__(self, "alpha", 1.0 + self.phi_L)

    def to_dict(self):
        return {"j_x": self.j_x, "phi_L": self.phi_L, "a_L": self.a_L,
                "beta": self.beta, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, data):
        params = cls(j_x=data["j_x"], phi_L=data["phi_L"], a_L=data["a_L"],
                     beta=data["beta"])
        if "alpha" in data and data["alpha"] != params.alpha:
            raise ValueError("alpha inconsistent with 1 + phi_L")
        return params


@dataclass(frozen=True)
class ReducedParams:
    """Reduced sweep-space parameters (k_hat, b_hat, gamma)."""

    k_hat: float
    b_hat: float
    gamma: float

    def __post_init__(self):
        for name in ("k_hat", "b_hat", "gamma"):
            _require_finite(name, getattr(self, name))

    def to_dict(self):
        return {"k_hat": self.k_hat, "b_hat": self.b_hat, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data):
        return cls(k_hat=data["k_hat"], b_hat=data["b_hat"],
                   gamma=data["gamma"])


def reduce_params(k: float, params: DiodeParams) -> ReducedParams:
    """Map the physical parameters to the reduced sweep coordinates.

    k_hat = k / (8 j_x), b_hat = beta^2 / (2 j_x), gamma = -beta^2 / (2 j_x),
    where k is the free first-integral coefficient of the effective-potential
    equation. The triple (k_hat, b_hat) parametrizes the deflection cubic
    u^3 + k_hat u^2 + u + b_hat; b_hat and -gamma coincide on this map. Note
    the stored gamma is the sweep coordinate, not the value that reproduces
    theta of the two-potential system (see bvp.effective_gamma).
    """
    _require_finite("k", k)
    b_hat = params.beta ** 2 / (2.0 * params.j_x)
    return ReducedParams(k_hat=k / (8.0 * params.j_x), b_hat=b_hat,
                         gamma=-b_hat)


@dataclass(frozen=True)
class ComplexValue:
    """JSON-friendly complex number with re/im fields."""

    re: float
    im: float

    def __post_init__(self):
        _require_finite("re", self.re)
        _require_finite("im", self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexValue":
        return cls(re=z.real, im=z.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def to_dict(self):
        return {"re": self.re, "im": self.im}

    @classmethod
    def from_dict(cls, data):
        return cls(re=data["re"], im=data["im"])


@dataclass(frozen=True)
class RootSet:
    """Roots of the deflection cubic with multiplicities.

    roots holds (value, multiplicity) pairs sorted by (re, im); the
    multiplicities sum to 3. flags records solver caveats (for example a
    closed-form domain miss that fell back to the numeric oracle).
    """

    discriminant: float
    classification: RootClass
    roots: tuple
    flags: tuple = ()

    def __post_init__(self):
        total = sum(m for _, m in self.roots)
        if total != 3:
            raise ValueError(f"root multiplicities must sum to 3, got {total}")

    def as_complex(self):
        """Roots expanded by multiplicity, as a list of three complex."""
        out = []
        for value, mult in self.roots:
            out.extend([value.to_complex()] * mult)
        return out

    def to_dict(self):
        return {"discriminant": self.discriminant,
                "class": self.classification.value,
                "roots": [[value.to_dict(), mult] for value, mult in
                          self.roots],
                "flags": list(self.flags)}

    @classmethod
    def from_dict(cls, data):
        roots = tuple((ComplexValue.from_dict(value), int(mult))
                      for value, mult in data["roots"])
        return cls(discriminant=data["discriminant"],
                   classification=RootClass(data["class"]), roots=roots,
                   flags=tuple(data.get("flags", ())))


@dataclass(frozen=True)
class ThetaCandidates:
    """Candidate effective-potential deflection values theta = u^2.

    Only roots with Re(u) > 0 induce candidates; values, counts and
    provenance (index of the source root in the RootSet) are parallel.
    dropped counts the total multiplicity of discarded roots.
    """

    values: tuple
    counts: tuple
    provenance: tuple
    dropped: int

    def to_dict(self):
        return {"values": [value.to_dict() for value in self.values],
                "counts": list(self.counts),
                "provenance": list(self.provenance),
                "dropped": self.dropped}

    @classmethod
    def from_dict(cls, data):
        return cls(values=tuple(ComplexValue.from_dict(v)
                                for v in data["values"]),
                   counts=tuple(int(c) for c in data["counts"]),
                   provenance=tuple(int(p) for p in data["provenance"]),
                   dropped=int(data["dropped"]))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one of the initial value problems.

    grid is strictly increasing and starts at the startup offset x0 > 0; the
    analytic values at x = 0 are recorded in metadata["origin"]. states has
    one row per grid point, columns named by ``columns``.
    """

    grid: np.ndarray
    states: np.ndarray
    columns: tuple
    metadata: dict

    def __post_init__(self):
        if self.grid.ndim != 1 or self.states.shape != (len(self.grid),
                                                        len(self.columns)):
            raise ValueError("grid/states/columns shapes disagree")
        if len(self.grid) > 1 and not np.all(np.diff(self.grid) > 0.0):
            raise ValueError("grid must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    def to_dict(self):
        return {"grid": self.grid.tolist(),
                "states": self.states.tolist(),
                "columns": list(self.columns),
                "metadata": self.metadata}

    @classmethod
    def from_dict(cls, data):
        return cls(grid=np.asarray(data["grid"], dtype=float),
                   states=np.asarray(data["states"], dtype=float),
                   columns=tuple(data["columns"]),
                   metadata=dict(data["metadata"]))


@dataclass(frozen=True)
class RegimeReport:
    """Regime classification of the effective potential at one gamma.

    turning_point is the positive zero of the potential (the plateau or
    apex height) for gamma >= 2; period is the measured full period of the
    bouncing solution for gamma > 2.
    """

    gamma: float
    regime: Regime
    turning_point: float | None = None
    period: float | None = None

    def to_dict(self):
        return {"gamma": self.gamma, "regime": self.regime.value,
                "turning_point": self.turning_point, "period": self.period}

    @classmethod
    def from_dict(cls, data):
        return cls(gamma=data["gamma"], regime=Regime(data["regime"]),
                   turning_point=data.get("turning_point"),
                   period=data.get("period"))


@dataclass(frozen=True)
class ShootResult:
    """Outcome of a two-potential integration or shooting solve."""

    j_x: float
    beta: float
    trajectory: Trajectory
    end_values: tuple | None = None
    residual: tuple | None = None
    x_star: float | None = None
    x_star_slope: float | None = None
    converged: bool | None = None
    iterations: int | None = None
    flags: tuple = ()

    def to_dict(self):
        return {"j_x": self.j_x, "beta": self.beta,
                "trajectory": self.trajectory.to_dict(),
                "end_values": (list(self.end_values)
                               if self.end_values is not None else None),
                "residual": (list(self.residual)
                             if self.residual is not None else None),
                "x_star": self.x_star, "x_star_slope": self.x_star_slope,
                "converged": self.converged, "iterations": self.iterations,
                "flags": list(self.flags)}

    @classmethod
    def from_dict(cls, data):
        return cls(j_x=data["j_x"], beta=data["beta"],
                   trajectory=Trajectory.from_dict(data["trajectory"]),
                   end_values=(tuple(data["end_values"])
                               if data.get("end_values") is not None
                               else None),
                   residual=(tuple(data["residual"])
                             if data.get("residual") is not None else None),
                   x_star=data.get("x_star"),
                   x_star_slope=data.get("x_star_slope"),
                   converged=data.get("converged"),
                   iterations=data.get("iterations"),
                   flags=tuple(data.get("flags", ())))


def to_json(obj, indent=2) -> str:
    """Serialize any model object (or plain data) to deterministic JSON."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(data, indent=indent, sort_keys=True)
