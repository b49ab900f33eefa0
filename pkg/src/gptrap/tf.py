"""Thomas-Fermi description of the trapped gas.

Dropping the gradient term from the Gross-Pitaevskii functional leaves

    F[rho] = int ( V rho + 4 pi a rho^2 ) d^3x,   int rho = N,

whose minimizer is the inverted-trap profile

    rho_F(x) = (8 pi a)^(-1) [mu - V(x)]_+

with mu fixed by the particle number.  For power-law traps everything
is available in closed form; general symmetric traps fall back to
quadrature plus bisection in mu.  Both routes are kept so they can be
checked against each other.

The module also builds an explicit smooth trial state out of rho_F
(capping the density near the support edge with a tangent parabola so
the gradient energy stays finite), which turns the Thomas-Fermi
profile into a certified upper bound for the full GP energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError
from .gp import _geometry, minimize
from .grids import Grid
from .potentials import TrapPotential

__all__ = [
    "TfSolution",
    "tf_minimize",
    "tf_scaling_checks",
    "tf_upper_trial",
    "gp_tf_convergence",
]


@dataclass
class TfSolution:
    """Thomas-Fermi minimizer for (trap, a, N)."""

    trap: TrapPotential
    a: float
    N: float
    mu: float
    energy: float
    support_radius: float
    interaction: float  # 4 pi a int rho^2
    method: str

    def density(self, r) -> np.ndarray:
        """rho_F(r) = [mu - V(r)]_+ / (8 pi a)."""
        r = np.asarray(r, dtype=float)
        v = self.trap(r)
        return np.maximum(self.mu - v, 0.0) / (8.0 * math.pi * self.a)


def _closed_form(V: TrapPotential, a: float, N: float) -> TfSolution:
    """Power trap v0 r^s: mu, F and the support radius in closed form."""
    s = float(V.homogeneous_order)
    v0 = V.coefficient
    mu = (6.0 * a * N * (s + 3.0) * v0 ** (3.0 / s) / s) ** (s / (s + 3.0))
    R = (mu / v0) ** (1.0 / s)
    # int_0^R (mu - v0 r^s)^2 r^2 dr = mu^2 R^3 (1/3 - 2/(s+3) + 1/(2s+3))
    c2 = 1.0 / 3.0 - 2.0 / (s + 3.0) + 1.0 / (2.0 * s + 3.0)
    quart = mu * mu * R ** 3 * c2 / (4.0 * a)  # 4 pi a int rho^2 d^3x
    energy = mu * N - quart
    return TfSolution(trap=V, a=a, N=N, mu=mu, energy=energy,
                      support_radius=R, interaction=quart,
                      method="closed-form")


def _gap_integral(V: TrapPotential, mu: float, R: float,
                  squared: bool) -> float:
    """int_0^R (mu - V)^k r^2 dr with k = 1 or 2.

    Tabulated traps are piecewise cubic, so (mu - V)^k r^2 has degree
    5 or 8 per knot interval and a fixed Gauss rule integrates it
    exactly; adaptive quadrature would chase phantom roundoff across
    the knots.  Smooth traps keep the adaptive route."""
    if V.kind == "tabulated":
        knots = np.asarray(V.table_r, dtype=float)
        inner = knots[(knots > 0.0) & (knots < R)]
        cuts = np.unique(np.concatenate(([0.0], inner, [R])))
        nodes, wts = np.polynomial.legendre.leggauss(5 if squared else 3)
        mid = 0.5 * (cuts[:-1] + cuts[1:])
        half = 0.5 * (cuts[1:] - cuts[:-1])
        s = mid[:, None] + half[:, None] * nodes[None, :]
        g = mu - V(s.ravel()).reshape(s.shape)
        if squared:
            g = g * g
        return float(np.sum(half * ((g * s * s) @ wts)))

    def integrand(r):
        d = mu - float(V(np.array([r]))[0])
        return (d * d if squared else d) * r * r

    val, _ = quad(integrand, 0.0, R, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def _number_and_radius(V: TrapPotential, a: float, mu: float,
                       r_hi: float) -> tuple[float, float]:
    """Particle number at chemical potential mu, and the support edge."""
    if float(V(np.array([r_hi]))[0]) <= mu:
        raise DomainError(
            f"trap stays below mu = {mu:g} out to r = {r_hi:g}; "
            "the Thomas-Fermi profile would not close")
    R = brentq(lambda r: float(V(np.array([r]))[0]) - mu, 0.0, r_hi,
               xtol=1e-14, rtol=1e-15)
    return _gap_integral(V, mu, R, squared=False) / (2.0 * a), R


def _bisect(V: TrapPotential, a: float, N: float, r_hi: float,
            tol: float) -> TfSolution:
    """General symmetric trap: bisection in mu on the particle number."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        n_hi, _ = _number_and_radius(V, a, hi, r_hi)
        if n_hi >= N:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the chemical potential")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        n_mid, _ = _number_and_radius(V, a, mid, r_hi)
        if n_mid < N:
            lo = mid
        else:
            hi = mid
        if abs(n_mid - N) <= tol * N:
            break
    else:
        raise ConvergenceError(
            f"chemical-potential bisection stalled at |dN|/N = "
            f"{abs(n_mid - N) / N:.3e}")
    mu = mid
    _, R = _number_and_radius(V, a, mu, r_hi)
    # 4 pi a int rho^2 d^3x
    quart = _gap_integral(V, mu, R, squared=True) / (4.0 * a)
    energy = mu * N - quart
    return TfSolution(trap=V, a=a, N=N, mu=mu, energy=energy,
                      support_radius=R, interaction=quart, method="bisection")


def tf_minimize(V: TrapPotential, a: float, N: float,
                method: str = "auto", r_hi: float | None = None,
                tol: float = 1e-12) -> TfSolution:
    """Minimize the Thomas-Fermi functional.

    method "auto" takes the closed form for power traps and bisection
    otherwise; "closed-form" and "bisection" force one route (useful to
    cross-check the two).  r_hi bounds the support search for the
    bisection route.
    """
    if a <= 0:
        raise DomainError("Thomas-Fermi needs a > 0")
    if N <= 0:
        raise DomainError("Thomas-Fermi needs N > 0")
    if not V.symmetric:
        raise DomainError("only symmetric traps are handled")
    if V.kind == "zero-in-box":
        raise DomainError(
            "a flat box does not confine; use the homogeneous-gas "
            "formula 4 pi a N^2 / volume instead")
    is_power = V.kind in ("harmonic", "power")
    if method == "auto":
        method = "closed-form" if is_power else "bisection"
    if method == "closed-form":
        if not is_power:
            raise DomainError("closed form only exists for power traps")
        return _closed_form(V, a, N)
    if method != "bisection":
        raise DomainError(f"unknown method {method!r}")
    if r_hi is None:
        if is_power:
            r_hi = 4.0 * _closed_form(V, a, N).support_radius
        elif V.kind == "tabulated":
            r_hi = float(V.table_r[-1])
        else:
            raise DomainError("r_hi is required for this trap")
    return _bisect(V, a, N, r_hi, tol)


def tf_scaling_checks(V: TrapPotential, a: float, N: float) -> dict:
    """Measure the exact scaling identities of the TF functional:
    F(N, a) = N F(1, N a), and for a power trap of order s also
    F(1, Na) = (Na)^(s/(s+3)) F(1, 1) together with the density
    rescaling rho_(1,a)(x) = a^(-3/(s+3)) rho_(1,1)(a^(-1/(s+3)) x)."""
    big = tf_minimize(V, a, N)
    one = tf_minimize(V, N * a, 1.0)
    out = {
        "energy_rel_diff": abs(big.energy - N * one.energy)
        / max(abs(N * one.energy), 1e-300),
    }
    s = V.homogeneous_order
    if s is not None and V.kind in ("harmonic", "power"):
        base = tf_minimize(V, 1.0, 1.0)
        lam = (N * a) ** (s / (s + 3.0))
        out["power_law_rel_diff"] = abs(one.energy - lam * base.energy) \
            / max(abs(lam * base.energy), 1e-300)
        scale = (N * a) ** (1.0 / (s + 3.0))
        r = np.linspace(0.0, 0.999 * base.support_radius, 512)
        lhs = one.density(scale * r)
        rhs = base.density(r) * (N * a) ** (-3.0 / (s + 3.0))
        denom = float(np.max(rhs))
        out["density_rescale_max_rel_diff"] = float(
            np.max(np.abs(lhs - rhs))) / denom
    return out


def tf_upper_trial(V: TrapPotential, a: float, N: float,
                   delta_frac: float = 1e-3) -> dict:
    """Certified GP upper bound from the smoothed Thomas-Fermi profile.

    The square root of rho_F has infinite gradient energy at the
    support edge, so within a collar of width delta = delta_frac * R
    the density is replaced by the tangent parabola c (r* - r)^2 that
    matches value and slope at R - delta and reaches zero flatly at
    r* = R + delta.  The capped profile is renormalized and its full GP
    energy evaluated by quadrature; minimizing over nothing, this is a
    plain trial state, hence an upper bound.
    """
    sol = tf_minimize(V, a, N)
    R = sol.support_radius
    delta = delta_frac * R
    r_in = R - delta
    rho_in = float(sol.density(np.array([r_in]))[0])
    # slope of the true profile at the matching point
    eps = 1e-6 * R
    drho = (float(sol.density(np.array([r_in + eps]))[0])
            - float(sol.density(np.array([r_in - eps]))[0])) / (2.0 * eps)
    if drho >= 0 or rho_in <= 0:
        raise DomainError("degenerate edge; increase delta_frac")
    # c (r* - r)^2 with value and slope matched at r_in
    r_star = r_in + 2.0 * rho_in / (-drho)
    c_cap = rho_in / (r_star - r_in) ** 2

    def rho_trial(r):
        if r <= r_in:
            return float(sol.density(np.array([r]))[0])
        if r >= r_star:
            return 0.0
        return c_cap * (r_star - r) ** 2

    def drho_trial(r):
        if r <= r_in:
            v = float(V(np.array([r + eps]))[0]) - float(V(np.array([r - eps]))[0])
            return -v / (2.0 * eps) / (8.0 * math.pi * a)
        if r >= r_star:
            return 0.0
        return -2.0 * c_cap * (r_star - r)

    def kin_integrand(r):
        rho = rho_trial(r)
        if rho <= 0:
            return 0.0
        # |d sqrt(rho)/dr|^2 = (rho')^2 / (4 rho)
        return drho_trial(r) ** 2 / (4.0 * rho) * 4.0 * math.pi * r * r

    def pot_integrand(r):
        return float(V(np.array([r]))[0]) * rho_trial(r) * 4.0 * math.pi * r * r

    def sq_integrand(r):
        return rho_trial(r) ** 2 * 4.0 * math.pi * r * r

    def mass_integrand(r):
        return rho_trial(r) * 4.0 * math.pi * r * r

    pts = [0.0, r_in, R, r_star]
    mass = sum(quad(mass_integrand, lo, hi, epsabs=1e-13, epsrel=1e-11,
                    limit=200)[0] for lo, hi in zip(pts[:-1], pts[1:]))
    T = sum(quad(kin_integrand, lo, hi, epsabs=1e-13, epsrel=1e-11,
                 limit=200)[0] for lo, hi in zip(pts[:-1], pts[1:]))
    P = sum(quad(pot_integrand, lo, hi, epsabs=1e-13, epsrel=1e-11,
                 limit=200)[0] for lo, hi in zip(pts[:-1], pts[1:]))
    S = sum(quad(sq_integrand, lo, hi, epsabs=1e-13, epsrel=1e-11,
                 limit=200)[0] for lo, hi in zip(pts[:-1], pts[1:]))
    # renormalize the trial to carry exactly N particles
    c2 = N / mass
    energy = c2 * (T + P) + c2 * c2 * 4.0 * math.pi * a * S
    return {
        "energy_trial": energy,
        "tf_energy": sol.energy,
        "gradient_correction": c2 * T,
        "delta": delta,
        "mass_before_renormalization": mass,
    }


def gp_tf_convergence(V: TrapPotential, Na_list, h: float | None = None,
                      tol: float = 1e-9) -> list[dict]:
    """Table of the GP-to-TF energy ratio E(1, Na)/F(1, Na) and the
    relative L^2 distance between the two densities, for growing Na.
    The ratio decreases toward 1; the final row reports the analytic
    limit.  Each GP solve sizes its own grid off the TF support."""
    rows = []
    for Na in Na_list:
        tfs = tf_minimize(V, float(Na), 1.0)
        R_tf = tfs.support_radius
        R = max(2.0 * R_tf, R_tf + 4.0, 6.0)
        hh = h if h is not None else R / 1600.0
        R = math.ceil(R / hh) * hh
        grid = Grid(kind="radial", h=hh, R=R, boundary="decay")
        gps = minimize(V, float(Na), 1.0, grid, tol=tol, richardson=False)
        geom = _geometry(grid)
        rho_gp = gps.field.values ** 2
        rho_tf = tfs.density(geom.positions_radius())
        num = float(np.sum(geom.q * (rho_gp - rho_tf) ** 2))
        den = float(np.sum(geom.q * rho_tf ** 2))
        rows.append({
            "Na": float(Na),
            "gp_energy": gps.energy,
            "tf_energy": tfs.energy,
            "ratio": gps.energy / tfs.energy,
            "density_l2_rel": math.sqrt(num / den),
        })
    rows.append({
        "Na": math.inf,
        "gp_energy": None,
        "tf_energy": None,
        "ratio": 1.0,
        "density_l2_rel": 0.0,
    })
    return rows
