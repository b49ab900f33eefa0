"""Gross-Pitaevskii ground states by monotone projected descent.

The discrete energy of a field Phi with int |Phi|^2 = N is

    E[Phi] = int |grad Phi|^2 + V |Phi|^2 + 4 pi a |Phi|^4,

assembled from the grid's quadratic forms, so every iterate is a true
variational value of the discrete problem.  Minimization is projected
gradient descent in the quadrature metric: take the GP residual

    res = -lap Phi + V Phi + 8 pi a Phi^3 - mu Phi,
    mu  = (T + P + 2 U) / N,

precondition it with an inverse shifted Laplacian (a Sobolev gradient),
step, renormalize to N, and backtrack until the energy does not
increase.  Convergence is declared on the metric norm of the residual
scaled by sqrt(N), which is invariant under the exact scaling
E(N, a) = N E(1, Na).

A second solve at twice the spacing provides an h^2 Richardson estimate
for every reported energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, NormalizationError
from .grids import Grid, WaveField, make_geometry
from .potentials import TrapPotential

_FLOOR = 1e-300


@lru_cache(maxsize=6)
def _geometry(grid: Grid):
    return make_geometry(grid)


@dataclass
class EnergyParts:
    total: float
    kinetic: float
    potential: float
    interaction: float
    norm: float


@dataclass
class GpSolution:
    """A converged (or best-effort) GP minimizer and its invariants."""

    field: WaveField
    trap: TrapPotential
    a: float
    N: float
    energy: float
    kinetic: float
    potential: float
    interaction: float
    mu: float
    rho_bar: float
    residual: float
    iterations: int
    converged: bool
    tol: float
    energy_error_estimate: float | None = None
    meta: dict = dc_field(default_factory=dict)


class _GpNonlinearity:
    """The quartic term 4 pi a int Phi^4 and its derivatives."""

    def __init__(self, geom, a: float):
        self.geom = geom
        self.coef = 4.0 * math.pi * a

    def energy(self, phi: np.ndarray) -> float:
        p2 = phi * phi
        return self.coef * float(np.sum(self.geom.q * p2 * p2))

    def half_grad(self, phi: np.ndarray) -> np.ndarray:
        return (2.0 * self.coef) * self.geom.q * phi ** 3

    def stiffness(self, phi: np.ndarray) -> float:
        return 6.0 * self.coef * float(np.max(phi * phi))

    def diag(self, phi: np.ndarray) -> np.ndarray:
        """Exact diagonal of the interaction Hessian (coordinate form)."""
        return (6.0 * self.coef) * self.geom.q * phi * phi


def _gaussian_init(geom, V: TrapPotential, a: float, N: float) -> np.ndarray:
    """Normalized Gaussian whose width tracks the trap scale, widened
    toward the Thomas-Fermi radius when the interaction dominates.
    A flat box starts from the constant, which is already its ground
    state under free boundaries."""
    if V.kind == "zero-in-box":
        return np.ones(geom.shape)
    sigma = 1.0
    if V.kind in ("harmonic", "power"):
        s = float(V.homogeneous_order)
        v0 = V.coefficient
        sigma = v0 ** (-1.0 / (s + 2.0))
        g = 4.0 * math.pi * a * N
        if g > 1.0:
            mu_tf = (2.0 * a * N * v0 ** (3.0 / s)
                     * 3.0 * (s + 3.0) / s) ** (s / (s + 3.0))
            r_tf = (mu_tf / v0) ** (1.0 / s)
            sigma = max(sigma, 0.5 * r_tf)
    sigma = min(sigma, geom.grid.R / 3.0)
    r = geom.positions_radius()
    phi = np.exp(-(r / sigma) ** 2 / 2.0)
    return phi


def _descend(geom, Vvals, N: float, nonlin, tol: float, max_iter: int,
             phi0: np.ndarray, alpha_floor: float = 1.0):
    """Shared monotone descent driver.  Returns (phi, info)."""
    m = geom.m
    phi = np.array(phi0, dtype=float)
    geom.enforce_bc(phi)
    phi = np.maximum(phi, _FLOOR)
    geom.enforce_bc(phi)
    phi *= math.sqrt(N / geom.norm2(phi))

    def pieces(p):
        T = geom.kinetic(p)
        P = float(np.sum(geom.q * Vvals * p * p))
        W = nonlin.energy(p)
        return T, P, W

    T, P, W = pieces(phi)
    E = T + P + W
    prec = geom.make_preconditioner(Vvals)
    # steps beyond 1.0 overdrive the stiffest preconditioned modes (their
    # amplification factor is 1 - dt at best), so cap the growth there
    dt = 0.25
    dt_max = 1.0
    floor_hit = False
    res_norm = math.inf
    best_res = math.inf
    best_phi = phi.copy()
    since_best = 0
    it = 0
    for it in range(max_iter):
        half = geom.kinetic_grad(phi) + geom.q * Vvals * phi + nonlin.half_grad(phi)
        geom.mask_bc(half)
        mu = float(np.sum(half * phi)) / N
        G = half / m
        res = G - mu * phi
        geom.mask_bc(res)
        res_norm = math.sqrt(float(np.sum(m * res * res)) / N)
        if res_norm < best_res:
            best_res = res_norm
            best_phi[:] = phi.reshape(best_phi.shape)
            since_best = 0
        else:
            since_best += 1
        if res_norm < tol:
            break
        if since_best > 500:
            # residual noise floor of the energy line search
            break
        if geom.supports_diag:
            # exact interaction curvature goes into the banded operator
            alpha = max(alpha_floor, abs(mu))
            dirn = prec(res, alpha, nonlin.diag(phi))
        else:
            alpha = max(alpha_floor, abs(mu), nonlin.stiffness(phi))
            dirn = prec(res, alpha)
        geom.mask_bc(dirn)
        accepted = False
        for _ in range(60):
            cand = phi - dt * dirn
            np.maximum(cand, _FLOOR, out=cand)
            geom.enforce_bc(cand)
            # exact equality marks nodes the positivity clamp produced
            # (boundary nodes are zeroed separately and do not count)
            clamped = bool(np.any(cand == _FLOOR))
            nrm = geom.norm2(cand)
            if nrm <= 0:
                dt *= 0.5
                continue
            cand *= math.sqrt(N / nrm)
            Tc, Pc, Wc = pieces(cand)
            Ec = Tc + Pc + Wc
            if Ec <= E + 1e-14 * (abs(E) + 1.0):
                if clamped:
                    floor_hit = True
                phi, T, P, W, E = cand, Tc, Pc, Wc, Ec
                accepted = True
                dt = min(dt * 1.25, dt_max)
                break
            dt *= 0.5
        if not accepted:
            # the line search cannot move at float resolution
            break
    if best_res < res_norm:
        phi = best_phi
        res_norm = best_res
        T, P, W = pieces(phi)
        E = T + P + W
    mu = (T + P + float(np.sum(nonlin.half_grad(phi) * phi))) / N
    info = {
        "kinetic": T, "potential": P, "nonlinear": W, "energy": E,
        "mu": mu, "residual": res_norm, "iterations": it + 1,
        "converged": res_norm < tol, "floor_hit": floor_hit,
    }
    return phi, info


def evaluate_energy(fieldv: WaveField, V: TrapPotential, a: float,
                    require_normalized: bool = True) -> EnergyParts:
    """Evaluate the GP energy of a field.  With require_normalized the
    quadrature norm must match the field's N to 1e-8 relative; the
    actual norm is reported in the error otherwise."""
    geom = _geometry(fieldv.grid)
    phi = fieldv.values
    nrm = geom.norm2(phi)
    if require_normalized and abs(nrm - fieldv.N) > 1e-8 * max(fieldv.N, 1.0):
        raise NormalizationError(
            f"field carries norm {nrm!r}, expected N = {fieldv.N!r}")
    Vvals = V(geom.positions_radius())
    T = geom.kinetic(phi)
    P = float(np.sum(geom.q * Vvals * phi * phi))
    U = _GpNonlinearity(geom, a).energy(phi)
    return EnergyParts(total=T + P + U, kinetic=T, potential=P,
                       interaction=U, norm=nrm)


def energy_gradient(fieldv: WaveField, V: TrapPotential, a: float) -> np.ndarray:
    """Exact derivative of the discrete GP energy with respect to the
    node values (quadrature weights included), as used by the solver."""
    geom = _geometry(fieldv.grid)
    phi = fieldv.values
    Vvals = V(geom.positions_radius())
    nl = _GpNonlinearity(geom, a)
    return 2.0 * (geom.kinetic_grad(phi) + geom.q * Vvals * phi
                  + nl.half_grad(phi))


def _suggest_extent(V: TrapPotential, mu: float, R: float) -> float:
    target = mu + 20.0
    Rs = R
    for _ in range(60):
        if float(V(np.array([Rs]))[0]) >= target:
            return Rs
        Rs *= 1.25
    return Rs


def minimize(V: TrapPotential, a: float, N: float, grid: Grid,
             tol: float = 1e-8, max_iter: int = 100_000,
             init: WaveField | None = None, richardson: bool = True,
             check_extent: bool = True) -> GpSolution:
    """Minimize the GP functional on the grid.

    Raises DomainError for a < 0 (the functional loses its variational
    floor and the minimizer may not exist), ConvergenceError when the
    iteration budget runs out, and DomainError when a decay grid is too
    small for the computed chemical potential (V(R) < mu + 20), with a
    suggested extent in the message.
    """
    if a < 0:
        raise DomainError(
            "negative scattering length: the GP minimum is not certified "
            "to exist, refusing to iterate")
    if N <= 0:
        raise DomainError("particle number must be positive")
    geom = _geometry(grid)
    Vvals = V(geom.positions_radius())
    if init is not None:
        if init.grid != grid:
            raise DomainError("init field lives on a different grid")
        phi0 = np.array(init.values, dtype=float)
    else:
        phi0 = _gaussian_init(geom, V, a, N)
    nl = _GpNonlinearity(geom, a)
    phi, info = _descend(geom, Vvals, N, nl, tol, max_iter, phi0)
    if not info["converged"]:
        if info["residual"] > 100.0 * tol:
            raise ConvergenceError(
                f"GP descent stalled at residual {info['residual']:.3e} "
                f"(tolerance {tol:.3e}) after {info['iterations']} iterations")
    mu = info["mu"]
    if check_extent and grid.boundary == "decay":
        v_edge = float(V(np.array([grid.R]))[0])
        if v_edge < mu + 20.0:
            raise DomainError(
                f"grid extent R = {grid.R} too small: V(R) = {v_edge:.4g} "
                f"< mu + 20 = {mu + 20.0:.4g}; suggest R >= "
                f"{_suggest_extent(V, mu, grid.R):.4g}")
    err_est = None
    if richardson:
        err_est = _richardson_estimate(V, a, N, grid, tol, max_iter, phi,
                                       info["energy"])
    U = info["nonlinear"]
    rho_bar = U / (4.0 * math.pi * a * N) if a > 0 else 0.0
    sol = GpSolution(
        field=WaveField(grid=grid, values=phi, N=N), trap=V, a=a, N=N,
        energy=info["energy"], kinetic=info["kinetic"],
        potential=info["potential"], interaction=U, mu=mu,
        rho_bar=rho_bar, residual=info["residual"],
        iterations=info["iterations"], converged=info["converged"], tol=tol,
        energy_error_estimate=err_est,
        meta={"volume": geom.volume, "floor_hit": info["floor_hit"]})
    return sol


def _richardson_estimate(V, a, N, grid, tol, max_iter, phi_fine, e_fine):
    """|E_h - E_2h| / 3, the leading h^2 error estimate, from a warm
    half-resolution solve.  None when the coarse grid would be illegal."""
    n2 = grid.n_intervals // 2
    if grid.n_intervals % 2 or n2 < 32:
        return None
    coarse = Grid(kind=grid.kind, h=2.0 * grid.h, R=grid.R,
                  boundary=grid.boundary)
    geomc = _geometry(coarse)
    if grid.kind == "radial":
        init = phi_fine[::2]
    else:
        init = phi_fine[::2, ::2, ::2]
    nl = _GpNonlinearity(geomc, a)
    Vvals = V(geomc.positions_radius())
    _, info = _descend(geomc, Vvals, N, nl, tol, max_iter, np.array(init))
    return abs(info["energy"] - e_fine) / 3.0


def chemical_potential(sol: GpSolution, dN: float | None = None) -> dict:
    """Compare mu = E/N + 4 pi a rho_bar with a centered finite
    difference of the ground energy in N (two extra solves, dN <= N/100)."""
    N = sol.N
    if dN is None:
        dN = 0.01 * N
    if dN > 0.01 * N + 1e-12 * N:
        raise DomainError("dN must stay within one percent of N")
    mu_formula = sol.energy / N + 4.0 * math.pi * sol.a * sol.rho_bar
    outs = []
    for Nq in (N - dN, N + dN):
        scaled = WaveField(grid=sol.field.grid,
                           values=sol.field.values * math.sqrt(Nq / N), N=Nq)
        s = minimize(sol.trap, sol.a, Nq, sol.field.grid, tol=sol.tol,
                     init=scaled, richardson=False)
        outs.append(s.energy)
    mu_fd = (outs[1] - outs[0]) / (2.0 * dN)
    denom = max(abs(mu_formula), 1e-300)
    return {"mu": mu_formula, "mu_solution": sol.mu, "mu_fd": mu_fd,
            "dN": dN, "rel_diff": abs(mu_fd - mu_formula) / denom}


def virial_residual(sol: GpSolution) -> float:
    """(2/3) T - (s/3) P + U, which vanishes at the exact minimizer for
    a trap homogeneous of order s.  Errors for non-homogeneous traps."""
    s = sol.trap.homogeneous_order
    if s is None:
        raise DomainError("virial residual needs a homogeneous trap")
    return (2.0 / 3.0) * sol.kinetic - (s / 3.0) * sol.potential \
        + sol.interaction


def check_scaling(V: TrapPotential, a: float, N: float, grid: Grid,
                  tol: float = 1e-8) -> dict:
    """Verify E(N, a) = N E(1, Na) and the density identity
    rho_(N,a) = N rho_(1,Na) on one grid; returns the measured gaps."""
    big = minimize(V, a, N, grid, tol=tol, richardson=False)
    one = minimize(V, N * a, 1.0, grid, tol=tol, richardson=False)
    e_big = big.energy
    e_scaled = N * one.energy
    rho_big = big.field.values ** 2
    rho_scaled = N * one.field.values ** 2
    scale = float(np.max(rho_scaled))
    return {
        "energy_left": e_big,
        "energy_right": e_scaled,
        "energy_rel_diff": abs(e_big - e_scaled) / max(abs(e_scaled), 1e-300),
        "density_max_rel_diff": float(np.max(np.abs(rho_big - rho_scaled))) / scale,
        "tol": tol,
    }


def structural_assertions(sol: GpSolution) -> dict:
    """Qualitative properties of the minimizer, each reported as
    {applicable, ok, value}.  Radial grids only for the shape checks."""
    geom = _geometry(sol.field.grid)
    phi = sol.field.values
    out = {}
    out["positive"] = {
        "applicable": True,
        "ok": bool(np.all(phi >= 0.0)) and not sol.meta.get("floor_hit", False),
        "value": float(np.min(phi)),
    }
    nrm = geom.norm2(phi)
    out["normalized"] = {
        "applicable": True,
        "ok": abs(nrm - sol.N) <= 1e-10 * max(sol.N, 1.0),
        "value": nrm,
    }
    radial = sol.field.grid.kind == "radial"
    symmetric = bool(getattr(sol.trap, "symmetric", False))
    if radial and symmetric:
        d = np.diff(phi)
        tolm = 1e-9 * float(np.max(phi))
        out["radial_monotone"] = {
            "applicable": True,
            "ok": bool(np.all(d <= tolm)),
            "value": float(np.max(d)),
        }
    else:
        out["radial_monotone"] = {"applicable": False, "ok": True, "value": 0.0}
    if radial and symmetric and bool(getattr(sol.trap, "convex", False)):
        live = phi > 1e-250
        lp = np.log(phi[live])
        d2 = lp[2:] - 2.0 * lp[1:-1] + lp[:-2]
        # mirrored triple across the origin: phi(-h) = phi(h)
        d2_0 = 2.0 * (lp[1] - lp[0]) if lp.size >= 2 else 0.0
        worst = max(float(np.max(d2)) if d2.size else 0.0, d2_0)
        out["log_concave"] = {
            "applicable": True,
            "ok": worst <= 1e-6,
            "value": worst,
        }
    else:
        out["log_concave"] = {"applicable": False, "ok": True, "value": 0.0}
    if radial and sol.field.grid.boundary == "decay":
        r = geom.r
        outer = r >= 0.75 * sol.field.grid.R
        ph = phi[outer]
        live = ph > 1e-250
        grow = np.exp(r[outer][live]) * ph[live]
        d = np.diff(grow)
        ok = bool(np.all(d <= 1e-9 * float(np.max(grow)))) if grow.size > 1 else True
        out["exponential_tail"] = {
            "applicable": True,
            "ok": ok,
            "value": float(np.max(grow)) if grow.size else 0.0,
        }
    else:
        out["exponential_tail"] = {"applicable": False, "ok": True, "value": 0.0}
    return out


def solve_neumann_box(V: TrapPotential, a: float, N: float,
                      R_list, h: float | None = None, tol: float = 1e-9,
                      max_iter: int = 100_000) -> list[GpSolution]:
    """GP minimizers on finite Neumann domains of increasing size.

    Flat (zero-in-box) potentials use the cube of side 2R, whose exact
    minimizer is the constant with E = 4 pi a N^2 / (2R)^3; symmetric
    traps use the Neumann ball of radius R on the radial grid, whose
    energies converge to the full-space value superexponentially fast
    for growing traps.
    """
    sols = []
    for R in R_list:
        if V.kind == "zero-in-box":
            hh = h if h is not None else R / 32.0
            grid = Grid(kind="cartesian", h=hh, R=R, boundary="neumann")
        else:
            hh = h if h is not None else R / 400.0
            grid = Grid(kind="radial", h=hh, R=R, boundary="neumann")
        sols.append(minimize(V, a, N, grid, tol=tol, max_iter=max_iter,
                             richardson=False))
    return sols
