"""Independent oracles for the test suite.

Everything here is computed from closed forms or from plain
numpy/scipy quadrature on analytic expressions, never through the
package's own integrators, so an agreement between the two routes is
evidence and not an identity.
"""
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize as opt_minimize

# Units: hbar = 2m = 1.  The unit harmonic trap V = r^2 then has the
# linear ground energy 3 with gaussian ground state pi^(-3/4) e^(-r^2/2).
HARMONIC_LINEAR_ENERGY = 3.0


def gaussian_ground_state(r):
    return math.pi ** -0.75 * np.exp(-np.asarray(r, dtype=float) ** 2 / 2.0)


# ---------------------------------------------------------------------------
# scattering closed forms


def barrier_scattering_length(V0: float, R0: float) -> float:
    """Square barrier of height V0 on [0, R0]: with kappa = sqrt(V0 / 2)
    the zero-energy solution is sinh(kappa r) inside, giving
    a = R0 - tanh(kappa R0) / kappa."""
    kappa = math.sqrt(V0 / 2.0)
    return R0 - math.tanh(kappa * R0) / kappa


def well_scattering_length(depth: float, R0: float) -> float:
    """Square well of depth > 0 on [0, R0]: u = sin(k r) inside with
    k = sqrt(depth / 2), so a = R0 - tan(k R0) / k.  Valid while
    k R0 < pi / 2 (no zero-energy bound state)."""
    k = math.sqrt(depth / 2.0)
    return R0 - math.tan(k * R0) / k


def hard_core_well_scattering_length(d: float, R0: float,
                                     depth: float) -> float:
    """Hard core of radius d surrounded by a well of depth > 0 out to
    R0: u = sin(k (r - d)) between d and R0."""
    k = math.sqrt(depth / 2.0)
    return R0 - math.tan(k * (R0 - d)) / k


def sr_bound_barrier(V0: float, R0: float) -> float:
    """(1/2) int_0^R0 V0 r^2 dr = V0 R0^3 / 6."""
    return V0 * R0 ** 3 / 6.0


def power_tail_integral(A: float, p: float, R: float) -> float:
    """(1/2) int_R^inf A r^(2 - p) dr for p > 3."""
    return 0.5 * A * R ** (3.0 - p) / (p - 3.0)


def power_tail4_scattering_length(A: float, r_on: float = 1.0) -> float:
    """Exact length for v = A / r^4 switched on at r_on (zero inside).

    The outer zero-energy solutions of -u'' + (A / 2 r^4) u = 0 are
    r exp(+-beta/r) with beta = sqrt(A/2).  Inside r_on the solution is
    the straight line u = r, so the log derivative at r_on is 1/r_on;
    matching kills the derivative of the exponential mixture there and
    the large-r intercept works out to a = beta tanh(beta / r_on).
    """
    beta = math.sqrt(0.5 * A)
    return beta * math.tanh(beta / r_on)


# ---------------------------------------------------------------------------
# Thomas-Fermi via numeric normalization, not the closed form


def tf_density(mu: float, V, a: float):
    return lambda r: max(mu - V(r), 0.0) / (8.0 * math.pi * a)


def tf_harmonic_mu(a: float, N: float) -> float:
    """Normalization of [mu - r^2]_+ / (8 pi a) gives mu = (15 a N)^(2/5)."""
    return (15.0 * a * N) ** 0.4


def tf_energy_by_quadrature(V, a: float, N: float, r_hi: float) -> dict:
    """Solve the normalization for mu by bracketing, then integrate the
    functional int V rho + 4 pi a int rho^2 directly."""

    def edge_of(mu: float):
        # support edge V(r) = mu, handed to quad as a kink hint
        if not 0 < mu < V(r_hi):
            return None
        return [brentq(lambda r: V(r) - mu, 0.0, r_hi,
                       xtol=1e-14, rtol=1e-15)]

    def number(mu: float) -> float:
        rho = tf_density(mu, V, a)
        val, _ = quad(lambda r: rho(r) * 4.0 * math.pi * r * r, 0.0, r_hi,
                      limit=400, epsabs=1e-13, epsrel=1e-12,
                      points=edge_of(mu))
        return val - N

    mu = brentq(number, 1e-12, V(r_hi), xtol=1e-14, rtol=1e-15)
    rho = tf_density(mu, V, a)
    edge = edge_of(mu)
    pot, _ = quad(lambda r: V(r) * rho(r) * 4.0 * math.pi * r * r,
                  0.0, r_hi, limit=400, epsabs=1e-13, epsrel=1e-12,
                  points=edge)
    quart, _ = quad(lambda r: rho(r) ** 2 * 4.0 * math.pi * r * r,
                    0.0, r_hi, limit=400, epsabs=1e-13, epsrel=1e-12,
                    points=edge)
    return {"mu": mu, "energy": pot + 4.0 * math.pi * a * quart}


# ---------------------------------------------------------------------------
# homogeneous gas and the dilute lower-bound formula


def box_energy(a: float, N: float, volume: float) -> float:
    return 4.0 * math.pi * a * N * N / volume


def dilute_lower_bound(a: float, N: float, L: float, C: float,
                       exponent: float) -> float:
    Y = a ** 3 * N / L ** 3
    return 4.0 * math.pi * a * (N * N / L ** 3) * (1.0 - C * Y ** exponent)


# ---------------------------------------------------------------------------
# hard-sphere pair-function integrals in closed form
#
# For a hard sphere of radius a the zero-energy solution beyond the
# core is u = r - a, so f(r) = (1 + eps)(1 - a/r) on [a, b] with
# eps = a / (b - a).  The three integrals over the ball of radius b
# (core volume counting fully toward I) are elementary.


def hard_sphere_ingredients(a: float, b: float) -> dict:
    eps = a / (b - a)
    g = (1.0 + eps) ** 2
    shell = (b ** 3 - a ** 3) / 3.0 - a * (b * b - a * a) + a * a * (b - a)
    I = 4.0 * math.pi * (a ** 3 / 3.0
                         + (b ** 3 - a ** 3) / 3.0 - g * shell)
    J = 4.0 * math.pi * g * a * a * (1.0 / a - 1.0 / b)
    K = 4.0 * math.pi * g * a * ((b - a) - a * math.log(b / a))
    return {"epsilon": eps, "I": I, "J": J, "K": K}


def dyson_bound_formula(tp: float, a: float, quartic_integral: float,
                        x: float, c: float) -> float:
    """E <= (T + P)/(1 - x)^3 + 4 pi a (int Phi^4) B(x, c)/(1 - x)^8
    with B = 1 + (2/c) x - (2/c) x^2 + (1/(2c)) x^3."""
    B = 1.0 + (2.0 / c) * x - (2.0 / c) * x * x + (0.5 / c) * x ** 3
    return tp / (1.0 - x) ** 3 \
        + 4.0 * math.pi * a * quartic_integral * B / (1.0 - x) ** 8


# ---------------------------------------------------------------------------
# brute-force variational upper bound for the trapped GP energy
#
# A two-gaussian mixture minimized over widths and weight gives an
# upper bound on the continuum ground energy through independent
# trapezoid quadrature.  It lands within a fraction of a percent of
# the true minimum for moderate couplings, which is tight enough to
# certify the solver's discrete value from above.


def gp_trial_upper_bound(a: float, V=None, r_hi: float = 14.0,
                         n: int = 14001) -> float:
    r = np.linspace(0.0, r_hi, n)
    w = 4.0 * math.pi * r * r
    if V is None:
        Vv = r * r
    else:
        Vv = V(r)

    def energy(params) -> float:
        s1, s2, t = params
        if s1 <= 0.05 or s2 <= 0.05 or not 0.0 <= t <= 1.0:
            return 1e9
        psi = np.exp(-r * r / (2.0 * s1 * s1)) \
            + t * np.exp(-r * r / (2.0 * s2 * s2))
        nrm = np.trapezoid(w * psi * psi, r)
        psi = psi / math.sqrt(nrm)
        dpsi = np.gradient(psi, r, edge_order=2)
        kin = np.trapezoid(w * dpsi * dpsi, r)
        pot = np.trapezoid(w * Vv * psi * psi, r)
        quart = np.trapezoid(w * psi ** 4, r)
        return kin + pot + 4.0 * math.pi * a * quart

    best = math.inf
    for start in ([1.0, 2.0, 0.3], [0.8, 1.6, 0.8], [1.2, 2.5, 0.1]):
        res = opt_minimize(energy, start, method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-10,
                                    "maxiter": 4000})
        best = min(best, float(res.fun))
    return best
