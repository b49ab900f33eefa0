"""Trap and interaction potentials.

Units are hbar = 2m = 1 throughout the package: the kinetic operator is
-laplacian and every potential carries units of 1/length^2.

Two families live here.

* :class:`TrapPotential`: external confinement V, evaluated radially.
* :class:`InteractionPotential`: spherically symmetric pair potential
  v(r), possibly with a hard core, given in closed form or tabulated.

Each interaction kind knows its own closed-form tail pieces, so the
scattering certificates (:func:`tail_integral`) come out exact where a
closed form exists and adaptive quadrature is only used for tabulated
or callable parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

_HOMOGENEITY_RTOL = 1e-12


# ---------------------------------------------------------------------------
# traps
# ---------------------------------------------------------------------------

@dataclass
class TrapPotential:
    """External trap V evaluated as a function of radius.

    kind is one of "harmonic", "power", "tabulated", "zero-in-box".
    ``homogeneous_order`` is the degree s with V(lambda x) = lambda^s V(x)
    when the trap is homogeneous, None otherwise.  ``symmetric`` and
    ``convex`` are declarations used by the structural checks on GP
    minimizers; they are verified here as far as sampling allows.
    """

    kind: str
    coefficient: float = 1.0
    order: float | None = None
    table_r: np.ndarray | None = None
    table_v: np.ndarray | None = None
    symmetric: bool = True
    convex: bool = True
    homogeneous_order: float | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("harmonic", "power", "tabulated", "zero-in-box"):
            raise DomainError(f"unknown trap kind {self.kind!r}")
        if self.kind == "harmonic":
            self.order = 2.0
            self.homogeneous_order = 2.0
        elif self.kind == "power":
            if self.order is None or self.order <= 0:
                raise DomainError("power trap needs order s > 0")
            self.homogeneous_order = float(self.order)
        elif self.kind == "zero-in-box":
            self.coefficient = 0.0
            self.homogeneous_order = None
        elif self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 4:
                raise DomainError("tabulated trap needs matching 1d r, V samples")
            if not np.all(np.diff(r) > 0) or r[0] < 0:
                raise DomainError("tabulated radii must be increasing and nonnegative")
            if np.any(v < 0):
                raise DomainError("trap must be nonnegative (shift it first)")
            self.table_r, self.table_v = r, v
            self._interp = PchipInterpolator(r, v, extrapolate=False)
        if self.kind in ("harmonic", "power") and self.coefficient <= 0:
            raise DomainError("trap coefficient must be positive")
        self._verify_homogeneity()

    def _verify_homogeneity(self):
        s = self.homogeneous_order
        if s is None:
            return
        r = np.array([0.5, 1.0, 1.7, 3.1])
        rtol = _HOMOGENEITY_RTOL
        if self.kind == "tabulated":
            r = r * (self.table_r[-1] / 6.2)
            # off-node samples of the monotone cubic carry interpolation
            # error, so the check can only run at that accuracy
            rtol = 1e-4
        for lam in (0.5, 2.0):
            lhs = self(lam * r)
            rhs = lam ** s * self(r)
            scale = np.maximum(np.abs(rhs), 1e-300)
            if np.any(np.abs(lhs - rhs) / scale > rtol):
                raise DomainError(
                    f"declared homogeneous order {s} fails sampled check")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "harmonic":
            return self.coefficient * r * r
        if self.kind == "power":
            return self.coefficient * r ** self.order
        if self.kind == "zero-in-box":
            return np.zeros_like(r)
        out = self._interp(r)
        if np.any(np.isnan(out)):
            raise DomainError(
                f"tabulated trap sampled outside its range [0, {self.table_r[-1]}]")
        return out

    @classmethod
    def harmonic(cls, coefficient: float = 1.0) -> "TrapPotential":
        return cls(kind="harmonic", coefficient=coefficient)

    @classmethod
    def power(cls, s: float, coefficient: float = 1.0) -> "TrapPotential":
        return cls(kind="power", coefficient=coefficient, order=s,
                   convex=s >= 1.0)

    @classmethod
    def zero_in_box(cls) -> "TrapPotential":
        return cls(kind="zero-in-box", convex=False)

    @classmethod
    def tabulated(cls, r: Sequence[float], v: Sequence[float],
                  symmetric: bool = True, convex: bool = False,
                  homogeneous_order: float | None = None) -> "TrapPotential":
        return cls(kind="tabulated", table_r=np.asarray(r), table_v=np.asarray(v),
                   symmetric=symmetric, convex=convex,
                   homogeneous_order=homogeneous_order)


# ---------------------------------------------------------------------------
# interactions
# ---------------------------------------------------------------------------

@dataclass
class InteractionPotential:
    """Spherically symmetric pair potential with optional hard core and tail.

    Kinds:

    * "hard-sphere": v = +inf for r < d, 0 beyond.
    * "square-barrier": v = V0 on [0, R0), 0 beyond.
    * "hard-core-well": hard core of radius d, then -|well(r)| on (d, R0].
    * "power-tail": v = A r^-p for r >= r_on (0 between core and r_on).
    * "tabulated": monotone-cubic interpolation of radial samples, with an
      optional matched A r^-p tail beyond the last sample.

    ``cutoff`` truncates the finite part and drops the tail beyond the
    given radius; :func:`truncate_with_certificate` in the scattering
    module is the supported way to set it.
    """

    kind: str
    core_radius: float = 0.0
    V0: float = 0.0
    R0: float = 0.0
    A: float = 0.0
    p: float = 0.0
    r_on: float = 0.0
    well: Callable[[np.ndarray], np.ndarray] | None = None
    table_r: np.ndarray | None = None
    table_v: np.ndarray | None = None
    tail_exponent: float | None = None
    cutoff: float | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False)
    _tail_A: float = field(default=0.0, repr=False)

    def __post_init__(self):
        kinds = ("hard-sphere", "square-barrier", "hard-core-well",
                 "power-tail", "tabulated")
        if self.kind not in kinds:
            raise DomainError(f"unknown interaction kind {self.kind!r}")
        if self.core_radius < 0:
            raise DomainError("core radius must be nonnegative")
        if self.kind == "hard-sphere" and self.core_radius <= 0:
            raise DomainError("hard sphere needs diameter d > 0")
        if self.kind == "square-barrier":
            if self.V0 < 0 or self.R0 <= 0:
                raise DomainError("square barrier needs V0 >= 0, R0 > 0")
        if self.kind == "hard-core-well":
            if self.R0 <= self.core_radius:
                raise DomainError("well must extend beyond the core")
            if self.well is None:
                raise DomainError("hard-core-well needs a well profile")
        if self.kind == "power-tail":
            if self.p <= 3:
                raise DomainError(
                    "tail exponent p <= 3 gives an infinite scattering length")
            if self.r_on <= max(self.core_radius, 0.0):
                raise DomainError("tail onset must sit beyond the core")
            if self.A < 0:
                raise DomainError("power tail must be repulsive (A >= 0)")
        if self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 4:
                raise DomainError("tabulated interaction needs matching samples")
            if not np.all(np.diff(r) > 0):
                raise DomainError("tabulated radii must be increasing")
            if r[0] <= self.core_radius and self.core_radius > 0:
                raise DomainError("samples must start beyond the hard core")
            self.table_r, self.table_v = r, v
            self._interp = PchipInterpolator(r, v, extrapolate=False)
            if self.tail_exponent is not None:
                if self.tail_exponent <= 3:
                    raise DomainError(
                        "tail exponent p <= 3 gives an infinite scattering length")
                self._tail_A = float(v[-1]) * float(r[-1]) ** self.tail_exponent

    # -- constructors -------------------------------------------------------

    @classmethod
    def hard_sphere(cls, d: float) -> "InteractionPotential":
        return cls(kind="hard-sphere", core_radius=d)

    @classmethod
    def square_barrier(cls, V0: float, R0: float) -> "InteractionPotential":
        return cls(kind="square-barrier", V0=V0, R0=R0)

    @classmethod
    def hard_core_well(cls, d: float, R0: float,
                       well: float | Callable) -> "InteractionPotential":
        if not callable(well):
            depth = float(well)
            well = lambda r: np.full_like(np.asarray(r, dtype=float), depth)
        return cls(kind="hard-core-well", core_radius=d, R0=R0, well=well)

    @classmethod
    def power_tail(cls, A: float, p: float, r_on: float = 1.0,
                   core_radius: float = 0.0) -> "InteractionPotential":
        return cls(kind="power-tail", A=A, p=p, r_on=r_on,
                   core_radius=core_radius)

    @classmethod
    def tabulated(cls, r: Sequence[float], v: Sequence[float],
                  tail_exponent: float | None = None,
                  core_radius: float = 0.0) -> "InteractionPotential":
        return cls(kind="tabulated", table_r=np.asarray(r),
                   table_v=np.asarray(v), tail_exponent=tail_exponent,
                   core_radius=core_radius)

    @classmethod
    def zero(cls) -> "InteractionPotential":
        """The trivial v = 0 (scattering length 0)."""
        return cls(kind="square-barrier", V0=0.0, R0=1.0)

    # -- structure ----------------------------------------------------------

    @property
    def has_hard_core(self) -> bool:
        return self.core_radius > 0

    @property
    def nonnegative(self) -> bool:
        return self.kind != "hard-core-well"

    @property
    def finite_range(self) -> float | None:
        """Radius beyond which v vanishes identically, None for tails."""
        if self.cutoff is not None:
            return self.cutoff
        if self.kind == "hard-sphere":
            return self.core_radius
        if self.kind in ("square-barrier", "hard-core-well"):
            return self.R0
        if self.kind == "tabulated" and self.tail_exponent is None:
            return float(self.table_r[-1])
        return None

    def breakpoints(self) -> list[float]:
        """Radii where v is not smooth, for segmented integration."""
        pts = []
        if self.core_radius > 0:
            pts.append(self.core_radius)
        if self.kind in ("square-barrier", "hard-core-well"):
            pts.append(self.R0)
        if self.kind == "power-tail":
            pts.append(self.r_on)
        if self.kind == "tabulated":
            pts.extend(float(x) for x in self.table_r)
        if self.cutoff is not None:
            pts.append(self.cutoff)
        return sorted(set(pts))

    def finite_part(self, r) -> np.ndarray:
        """v(r) outside the hard core (0 reported inside the core)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "hard-sphere":
            out = np.zeros_like(r)
        elif self.kind == "square-barrier":
            out = np.where(r < self.R0, self.V0, 0.0)
        elif self.kind == "hard-core-well":
            inside = (r > self.core_radius) & (r <= self.R0)
            w = -np.abs(self.well(r))
            out = np.where(inside, w, 0.0)
        elif self.kind == "power-tail":
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = self.A * np.where(r > 0, r, 1.0) ** (-self.p)
            out = np.where(r >= self.r_on, tail, 0.0)
        else:
            out = np.zeros_like(r)
            inside = (r >= self.table_r[0]) & (r <= self.table_r[-1])
            if np.any(inside):
                out[inside] = self._interp(r[inside])
            if self.tail_exponent is not None:
                beyond = r > self.table_r[-1]
                out[beyond] = self._tail_A * r[beyond] ** (-self.tail_exponent)
            out[r < self.table_r[0]] = 0.0
        if self.cutoff is not None:
            out = np.where(r > self.cutoff, 0.0, out)
        return out

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = self.finite_part(r)
        if self.has_hard_core:
            out = np.where(r < self.core_radius, np.inf, out)
        return out


# ---------------------------------------------------------------------------
# scaling and tails
# ---------------------------------------------------------------------------

def scale_interaction(v1: InteractionPotential, a1: float,
                      a: float) -> InteractionPotential:
    """Rescale v1 of scattering length a1 to scattering length a.

    The map v(r) = (a1/a)^2 v1(a1 r / a) multiplies every length in v1
    by lambda = a/a1 and every energy by 1/lambda^2; the zero-energy
    solution rescales with it, so the new scattering length is exactly
    lambda a1 = a.
    """
    if a1 <= 0 or a <= 0:
        raise DomainError("scattering lengths must be positive to rescale")
    lam = a / a1
    v = v1
    if v.kind == "hard-sphere":
        out = InteractionPotential.hard_sphere(lam * v.core_radius)
    elif v.kind == "square-barrier":
        out = InteractionPotential.square_barrier(v.V0 / lam ** 2, lam * v.R0)
    elif v.kind == "hard-core-well":
        inner = v.well
        out = InteractionPotential.hard_core_well(
            lam * v.core_radius, lam * v.R0,
            lambda r, _w=inner, _lam=lam: np.asarray(_w(np.asarray(r) / _lam)) / _lam ** 2)
    elif v.kind == "power-tail":
        out = InteractionPotential.power_tail(
            v.A * lam ** (v.p - 2), v.p, lam * v.r_on, lam * v.core_radius)
    else:
        out = InteractionPotential.tabulated(
            lam * v.table_r, v.table_v / lam ** 2,
            tail_exponent=v.tail_exponent, core_radius=lam * v.core_radius)
    if v.cutoff is not None:
        out.cutoff = lam * v.cutoff
    return out


def _power_tail_integral(A: float, p: float, R: float) -> float:
    # (1/2) int_R^inf A r^(2-p) dr
    return A * R ** (3.0 - p) / (2.0 * (p - 3.0))


def tail_integral(v: InteractionPotential, R: float) -> float:
    """Certificate integral (1/2) int_R^inf v(r) r^2 dr.

    This bounds the scattering-length defect of truncating v at R from
    above, and with R = 0 it is the Spruch-Rosenberg upper bound on the
    scattering length itself.  Closed forms are used wherever the kind
    provides them; tabulated segments fall back to adaptive quadrature
    at 1e-10 tolerance.
    """
    if R < 0:
        raise DomainError("tail radius must be nonnegative")
    if v.has_hard_core and R < v.core_radius:
        raise DomainError(
            f"radius {R} sits inside the hard core (d = {v.core_radius}); "
            "the integral diverges there")
    cut = v.cutoff if v.cutoff is not None else math.inf

    if v.kind == "hard-sphere":
        return 0.0

    if v.kind == "square-barrier":
        hi = min(v.R0, cut)
        if R >= hi:
            return 0.0
        return 0.5 * v.V0 * (hi ** 3 - R ** 3) / 3.0

    if v.kind == "hard-core-well":
        lo = max(R, v.core_radius)
        hi = min(v.R0, cut)
        if lo >= hi:
            return 0.0
        val, _ = quad(lambda r: -abs(float(v.well(r))) * r * r, lo, hi,
                      epsabs=1e-12, epsrel=1e-10, limit=200)
        return 0.5 * val

    if v.kind == "power-tail":
        lo = max(R, v.r_on)
        if math.isinf(cut):
            return _power_tail_integral(v.A, v.p, lo)
        if lo >= cut:
            return 0.0
        return (_power_tail_integral(v.A, v.p, lo)
                - _power_tail_integral(v.A, v.p, cut))

    # tabulated
    r_last = float(v.table_r[-1])
    total = 0.0
    lo = max(R, float(v.table_r[0]))
    hi = min(r_last, cut)
    if lo < hi:
        # the interpolant is cubic on each knot interval, so v(r) r^2 is
        # degree five there and 3-point Gauss integrates it exactly
        nodes, wts = np.polynomial.legendre.leggauss(3)
        knots = np.asarray(v.table_r, dtype=float)
        cuts = np.unique(np.concatenate(
            ([lo], np.clip(knots, lo, hi), [hi])))
        acc = 0.0
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            if x1 <= x0:
                continue
            mid = 0.5 * (x0 + x1)
            half = 0.5 * (x1 - x0)
            s = mid + half * nodes
            acc += half * float(np.sum(wts * v._interp(s) * s * s))
        total += 0.5 * acc
    if v.tail_exponent is not None and cut > r_last:
        lo_t = max(R, r_last)
        total += _power_tail_integral(v._tail_A, v.tail_exponent, lo_t)
        if not math.isinf(cut):
            total -= _power_tail_integral(v._tail_A, v.tail_exponent, cut)
    return total
