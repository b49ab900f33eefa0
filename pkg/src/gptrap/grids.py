"""Finite-difference grids for the GP energy functional.

Two discretizations share one variational recipe: energies are defined
directly as quadratic/quartic forms in the node values, and every
gradient used by the minimizer is the exact derivative of the discrete
energy.  That keeps the solver's iterates honest upper bounds of the
discrete minimum and makes the finite-difference gradient check an
identity rather than an approximation.

* radial: nodes r_i = i h on [0, R], trapezoid quadrature with weight
  4 pi r^2 h, kinetic energy from midpoint differences
  T = 4 pi sum h r_mid^2 ((phi_(i+1) - phi_i)/h)^2, which discretizes
  int |grad Phi|^2 for spherically symmetric fields and keeps the
  3d Laplacian's r^2-divergence structure.
* cartesian: a cube of side 2R, tensor trapezoid weights, per-axis
  difference quadratic forms.

Boundaries: "decay" clamps the outer node(s) to zero (Dirichlet),
"neumann" leaves them free, which for these variational forms is
exactly the natural zero-derivative condition.

The flow metric matches the quadrature weights except at the radial
origin, whose trapezoid weight vanishes; it gets the volume of the
half-cell ball so the origin stays a live degree of freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.linalg import solveh_banded

from .errors import DomainError

_MIN_POINTS = 32


@dataclass(frozen=True)
class Grid:
    """Grid parameters: kind "radial" or "cartesian", spacing h, extent R,
    boundary "decay" or "neumann".  R/h must be an integer, and the domain
    (radius R, or the cube [-R, R]^3) must span at least 32 intervals."""

    kind: str
    h: float
    R: float
    boundary: str

    def __post_init__(self):
        if self.kind not in ("radial", "cartesian"):
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if self.boundary not in ("decay", "neumann"):
            raise DomainError(f"unknown boundary {self.boundary!r}")
        if self.h <= 0 or self.R <= 0:
            raise DomainError("grid needs h > 0 and R > 0")
        ratio = self.R / self.h
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise DomainError(f"R/h = {ratio} is not an integer")
        spans = round(ratio) if self.kind == "radial" else 2 * round(ratio)
        if spans < _MIN_POINTS:
            raise DomainError(
                f"{spans} grid intervals across the domain is below {_MIN_POINTS}")

    @property
    def n_intervals(self) -> int:
        return round(self.R / self.h)


@dataclass
class WaveField:
    """Node values of a (real, nonnegative) condensate wave function
    carrying particle number N on its grid."""

    grid: Grid
    values: np.ndarray
    N: float


class RadialGeometry:
    """Discrete calculus on the radial grid."""

    def __init__(self, grid: Grid):
        if grid.kind != "radial":
            raise DomainError("RadialGeometry needs a radial grid")
        self.grid = grid
        M = grid.n_intervals
        h = grid.h
        self.r = h * np.arange(M + 1)
        c = np.ones(M + 1)
        c[0] = c[-1] = 0.5
        w = 4.0 * math.pi * self.r ** 2 * c * h
        # half-cell ball around the origin instead of the trapezoid zero;
        # the same weights serve as quadrature and as flow metric, which
        # keeps the energy, the norm constraint and the residual mutually
        # consistent (the residual then vanishes at the discrete minimizer)
        w[0] = math.pi * h ** 3 / 6.0
        self.q = w
        self.m = w
        rmid = self.r[:-1] + 0.5 * h
        self.kmid = 4.0 * math.pi * rmid ** 2 / h
        self.dirichlet = grid.boundary == "decay"
        self.volume = 4.0 * math.pi * grid.R ** 3 / 3.0
        self.shape = (M + 1,)

    # -- quadrature ---------------------------------------------------------

    def integral(self, f: np.ndarray) -> float:
        return float(self.q @ f)

    def norm2(self, phi: np.ndarray) -> float:
        return float(self.q @ (phi * phi))

    def kinetic(self, phi: np.ndarray) -> float:
        d = np.diff(phi)
        return float(self.kmid @ (d * d))

    def kinetic_grad(self, phi: np.ndarray) -> np.ndarray:
        """Half the derivative of kinetic() with respect to the nodes."""
        d = np.diff(phi) * self.kmid
        out = np.empty_like(phi)
        out[0] = -d[0]
        out[-1] = d[-1]
        out[1:-1] = d[:-1] - d[1:]
        return out

    def enforce_bc(self, phi: np.ndarray) -> np.ndarray:
        if self.dirichlet:
            phi[-1] = 0.0
        return phi

    def mask_bc(self, g: np.ndarray) -> np.ndarray:
        if self.dirichlet:
            g[-1] = 0.0
        return g

    supports_diag = True

    def make_preconditioner(self, Vvals: np.ndarray):
        """Build a solver for (alpha m + A + diag(q V + extra)) x = m g,
        with A the kinetic form's matrix; exact tridiagonal solve.
        Keeping the trap (and, per call, the interaction curvature) in
        the operator is what makes the descent stable out where the
        local potential is much larger than the chemical potential."""
        qV = self.q * np.asarray(Vvals, dtype=float)
        cache: dict[int, np.ndarray] = {}

        def assemble(alpha: float, extra) -> np.ndarray:
            k = self.kmid
            diag = alpha * self.m + qV
            if extra is not None:
                diag = diag + extra
            diag[:-1] += k
            diag[1:] += k
            ab = np.zeros((2, diag.size))
            ab[1] = diag
            ab[0, 1:] = -k
            if self.dirichlet:
                ab[1, -1] = 1.0
                ab[0, -1] = 0.0
            return ab

        def prec(g: np.ndarray, alpha: float, diag=None) -> np.ndarray:
            if diag is None:
                key = round(math.log(alpha) * 64) if alpha > 0 else 0
                ab = cache.get(key)
                if ab is None:
                    ab = assemble(alpha, None)
                    if len(cache) > 8:
                        cache.pop(next(iter(cache)))
                    cache[key] = ab
            else:
                ab = assemble(alpha, diag)
            rhs = self.m * g
            if self.dirichlet:
                rhs[-1] = 0.0
            return solveh_banded(ab, rhs)

        return prec

    def positions_radius(self) -> np.ndarray:
        return self.r


class CartesianGeometry:
    """Discrete calculus on the cube [-R, R]^3."""

    def __init__(self, grid: Grid):
        if grid.kind != "cartesian":
            raise DomainError("CartesianGeometry needs a cartesian grid")
        self.grid = grid
        M = 2 * grid.n_intervals
        h = grid.h
        self.x = -grid.R + h * np.arange(M + 1)
        c = np.ones(M + 1)
        c[0] = c[-1] = 0.5
        self._c = c
        self.q = h ** 3 * (c[:, None, None] * c[None, :, None] * c[None, None, :])
        self.m = self.q
        self.dirichlet = grid.boundary == "decay"
        self.volume = (2.0 * grid.R) ** 3
        self.shape = (M + 1, M + 1, M + 1)
        # transverse trapezoid weights for the three edge families
        self._w_edges = [
            c[None, :, None] * c[None, None, :],
            c[:, None, None] * c[None, None, :],
            c[:, None, None] * c[None, :, None],
        ]
        n = M + 1
        if self.dirichlet:
            lam1d = 2.0 - 2.0 * np.cos(math.pi * np.arange(1, n - 1) / (n - 1))
        else:
            lam1d = 2.0 - 2.0 * np.cos(math.pi * np.arange(n) / n)
        lam = (lam1d[:, None, None] + lam1d[None, :, None]
               + lam1d[None, None, :]) / h ** 2
        self._lam = lam

    def integral(self, f: np.ndarray) -> float:
        return float(np.sum(self.q * f))

    def norm2(self, phi: np.ndarray) -> float:
        return float(np.sum(self.q * phi * phi))

    def kinetic(self, phi: np.ndarray) -> float:
        # int |grad Phi|^2 ~ h * sum over edge families of w_transverse
        # times the squared raw difference (the 1/h^2 of the derivative
        # cancels two powers of the h^3 cell volume)
        h = self.grid.h
        t = 0.0
        for ax in range(3):
            d = np.diff(phi, axis=ax)
            t += float(np.sum(self._w_edges[ax] * d * d))
        return t * h

    def kinetic_grad(self, phi: np.ndarray) -> np.ndarray:
        """Half the derivative of kinetic() with respect to the nodes."""
        h = self.grid.h
        out = np.zeros_like(phi)
        for ax in range(3):
            d = np.diff(phi, axis=ax) * h
            w = self._w_edges[ax]
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[ax] = slice(0, -1)
            hi[ax] = slice(1, None)
            out[tuple(lo)] -= w * d
            out[tuple(hi)] += w * d
        return out

    def enforce_bc(self, phi: np.ndarray) -> np.ndarray:
        if self.dirichlet:
            for ax in range(3):
                sl = [slice(None)] * 3
                sl[ax] = 0
                phi[tuple(sl)] = 0.0
                sl[ax] = -1
                phi[tuple(sl)] = 0.0
        return phi

    def mask_bc(self, g: np.ndarray) -> np.ndarray:
        return self.enforce_bc(g)

    supports_diag = False

    def make_preconditioner(self, Vvals: np.ndarray):
        """Build an approximate inverse of (alpha + L + V) through the
        separable transform that diagonalizes the unweighted difference
        Laplacian (DCT-II for free ends, DST-I for clamped ends).  The
        transform cannot carry a varying potential, so the spread of V is
        folded into the shift instead; that keeps every mode contractive
        at the price of slower convergence in strongly confined runs.
        The trapezoid weights are dropped here as well; backtracking on
        the true energy absorbs the mismatch."""
        V = np.asarray(Vvals, dtype=float)
        vspan = float(np.max(V) - np.min(V)) if V.size else 0.0

        def prec(g: np.ndarray, alpha: float) -> np.ndarray:
            shift = alpha + vspan
            if self.dirichlet:
                inner = g[1:-1, 1:-1, 1:-1]
                ghat = scipy.fft.dstn(inner, type=1, norm="ortho")
                ghat /= shift + self._lam
                out = np.zeros_like(g)
                out[1:-1, 1:-1, 1:-1] = scipy.fft.idstn(
                    ghat, type=1, norm="ortho")
                return out
            ghat = scipy.fft.dctn(g, type=2, norm="ortho")
            ghat /= shift + self._lam
            return scipy.fft.idctn(ghat, type=2, norm="ortho")

        return prec

    def positions_radius(self) -> np.ndarray:
        xx = self.x[:, None, None]
        yy = self.x[None, :, None]
        zz = self.x[None, None, :]
        return np.sqrt(xx * xx + yy * yy + zz * zz)


def make_geometry(grid: Grid):
    if grid.kind == "radial":
        return RadialGeometry(grid)
    return CartesianGeometry(grid)
