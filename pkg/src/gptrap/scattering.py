"""Zero-energy scattering length with two-sided certificates.

The scattering length a of a pair potential v (units hbar = 2m = 1, so
the two-body kinetic operator is -2 laplacian in relative coordinates
and the radial zero-energy equation reads)

    -u''(r) + (1/2) v(r) u(r) = 0,   u(0) = 0,  u'(r) -> 1 as r -> inf,

is a = lim_(r->inf) (r - u(r)/u'(r)).  For v >= 0 the running estimate
h(r) = r - u/u' is nondecreasing, so h(r_max) is a lower bound, and the
tail certificate

    a - h(r_max) <= (1/2) int_(r_max)^inf v(r) r^2 dr

closes a two-sided bracket.  The reported scattering length is the
bracket midpoint and the half-width is the reported uncertainty.

Integration is fixed-step RK4, segmented at the potential's breakpoints
so discontinuities never sit inside a step, with a Richardson error
estimate from a half-step run.  Slowly decaying tails push the
certificate radius out by many decades; there u and u' grow linearly
and h = r - u/u' would come out of a catastrophic cancellation, so past
the structured region the solver marches h itself via the Riccati form
h' = (1/2) v (r - h)^2, which keeps every quantity O(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ScatteringRegimeError, TruncationToleranceError
from .potentials import InteractionPotential, tail_integral, _power_tail_integral

_MIN_STEPS = 100


@dataclass
class ScatteringResult:
    """Scattering length with its certificates and the radial solution.

    ``a`` is the midpoint of [a_lower, a_upper]; a_lower = h(r_max) is
    certified for v >= 0 (monotonicity of h), a_upper adds the tail
    integral.  ``sr_bound`` is the Spruch-Rosenberg upper bound
    (1/2) int v r^2 dr, infinite for hard cores.  The sampled arrays
    ``r``, ``u``, ``du``, ``h`` cover the structured region, a few times
    the potential's last breakpoint; the certificates refer to ``r_max``
    which can lie far beyond it.  ``u`` and ``du`` are normalized so
    u' = 1 at the last sampled radius.
    """

    a: float
    a_lower: float
    a_upper: float
    tail_bound: float
    sr_bound: float
    r_max: float
    steps: int
    error_estimate: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    potential: InteractionPotential = field(repr=False)


def _rk4_segment(v: InteractionPotential, r0: float, r1: float, n: int,
                 u0: float, du0: float):
    """March u'' = v u / 2 over [r0, r1] with n RK4 steps.

    Returns sample arrays (r, u, du) including both endpoints.  The
    potential is evaluated at step midpoints and endpoints only, never
    across a breakpoint (the caller aligns segments to breakpoints).
    """
    hs = (r1 - r0) / n
    r = r0 + hs * np.arange(n + 1)
    # evaluate v from inside the segment so endpoint discontinuities
    # (which sit exactly on segment boundaries) take one-sided limits
    eps = 1e-9 * hs
    v_nodes = v.finite_part(np.clip(r, r0 + eps, r1 - eps))
    v_mid = v.finite_part(r[:-1] + 0.5 * hs)
    u = np.empty(n + 1)
    du = np.empty(n + 1)
    u[0], du[0] = u0, du0
    for i in range(n):
        y, dy = u[i], du[i]
        va, vm, vb = v_nodes[i], v_mid[i], v_nodes[i + 1]
        k1u = dy
        k1d = 0.5 * va * y
        k2u = dy + 0.5 * hs * k1d
        k2d = 0.5 * vm * (y + 0.5 * hs * k1u)
        k3u = dy + 0.5 * hs * k2d
        k3d = 0.5 * vm * (y + 0.5 * hs * k2u)
        k4u = dy + hs * k3d
        k4d = 0.5 * vb * (y + hs * k3u)
        u[i + 1] = y + hs / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du[i + 1] = dy + hs / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
    return r, u, du


def _structured_end(v: InteractionPotential, r_max: float) -> float:
    """Radius where the potential stops having structure worth resolving
    uniformly: a few times the last breakpoint, at least one unit past
    the core, capped at r_max."""
    start = v.core_radius
    breaks = [b for b in v.breakpoints() if start < b < r_max]
    end = max([start + 1.0] + breaks)
    if breaks:
        end *= 4.0
    return min(end, r_max)


def integrate_zero_energy(v: InteractionPotential, r_max: float,
                          steps: int = 2000):
    """Integrate the zero-energy radial equation out to r_max.

    Starts at the hard-core edge (or the origin) with u = 0, u' = 1 and
    returns raw, unnormalized samples (r, u, du).  The step budget is
    spread uniformly over the structured region (out to a few times the
    last potential breakpoint), at least 4 steps per smooth segment so
    the nominal O(h^4) accuracy survives discontinuities.  Beyond that
    the integration continues on octave segments [s, 2s] with a fixed
    step count per octave: slowly decaying tails need certificate radii
    many decades out, where uniform spacing would either starve the
    near region or blow the budget, while the solution itself flattens
    toward a straight line and octave resolution tracks it.

    Raises ScatteringRegimeError if u develops a zero or u' turns
    non-positive beyond the core: there the potential supports a bound
    state (or worse) and no scattering length is defined by this method.
    """
    if steps < _MIN_STEPS:
        raise DomainError(f"need at least {_MIN_STEPS} steps, got {steps}")
    start = v.core_radius
    if r_max <= start:
        raise DomainError(f"r_max = {r_max} does not clear the core {start}")
    uniform_end = _structured_end(v, r_max)
    breaks = [b for b in v.breakpoints() if start < b < uniform_end]
    cuts = [start] + breaks + [uniform_end]
    # cap segment count so tabulated knots do not starve the step budget
    if len(cuts) - 1 > steps // 4:
        keep = np.linspace(0, len(cuts) - 1, steps // 4 + 1).round().astype(int)
        cuts = [cuts[i] for i in sorted(set(keep))]
    total = uniform_end - start
    rs, us, dus = [], [], []
    u_cur, du_cur = 0.0, 1.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(4, int(round(steps * (hi - lo) / total)))
        r, u, du = _rk4_segment(v, lo, hi, n, u_cur, du_cur)
        u_cur, du_cur = u[-1], du[-1]
        if rs:
            r, u, du = r[1:], u[1:], du[1:]
        rs.append(r)
        us.append(u)
        dus.append(du)
    n_octave = max(24, steps // 16)
    cur = uniform_end
    while cur < r_max * (1.0 - 1e-12):
        nxt = min(2.0 * cur, r_max)
        r, u, du = _rk4_segment(v, cur, nxt, n_octave, u_cur, du_cur)
        u_cur, du_cur = u[-1], du[-1]
        rs.append(r[1:])
        us.append(u[1:])
        dus.append(du[1:])
        cur = nxt
    r = np.concatenate(rs)
    u = np.concatenate(us)
    du = np.concatenate(dus)
    interior = r > start + 1e-12 * max(1.0, start)
    if np.any(u[interior] <= 0):
        raise ScatteringRegimeError(
            "u develops a zero beyond the core: bound state present, "
            "scattering length undefined for this solver")
    if du[-1] <= 0:
        raise ScatteringRegimeError(
            "u' is non-positive at r_max: negative or undefined "
            "scattering regime")
    return r, u, du


def _march_h_tail(v: InteractionPotential, r0: float, h0: float,
                  r_max: float, n_octave: int) -> float:
    """Continue h(r) = r - u/u' from r0 out to r_max.

    In the far tail u and u' both grow linearly with r, so forming h by
    subtraction loses roughly r/a digits; at certificate radii many
    decades out the roundoff swamps the answer.  h itself satisfies the
    scalar Riccati equation h' = (1/2) v (r - h)^2 and stays O(a), so a
    fixed-step RK4 march on octave segments [s, 2s] holds machine
    accuracy for any r_max.
    """
    bps = [b for b in v.breakpoints() if r0 < b < r_max]
    h = h0
    cur = r0
    while cur < r_max * (1.0 - 1e-12):
        nxt = min(2.0 * cur, r_max)
        ahead = [b for b in bps if cur < b < nxt]
        if ahead:
            nxt = ahead[0]
        step = (nxt - cur) / n_octave
        edges = cur + step * np.arange(n_octave + 1)
        # one-sided limits: discontinuities sit on segment boundaries,
        # so sample v strictly inside the segment
        eps = 1e-9 * step
        w_edge = 0.5 * v.finite_part(np.clip(edges, cur + eps, nxt - eps))
        w_mid = 0.5 * v.finite_part(edges[:-1] + 0.5 * step)
        for i in range(n_octave):
            r = edges[i]
            rm = r + 0.5 * step
            k1 = w_edge[i] * (r - h) ** 2
            k2 = w_mid[i] * (rm - (h + 0.5 * step * k1)) ** 2
            k3 = w_mid[i] * (rm - (h + 0.5 * step * k2)) ** 2
            k4 = w_edge[i + 1] * (edges[i + 1] - (h + step * k3)) ** 2
            h += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(h) or h >= nxt:
            raise ScatteringRegimeError(
                f"running scattering length left (0, r) near r = {nxt:.4g}: "
                "u' lost positivity in the tail, no scattering length by "
                "this method")
        cur = nxt
    return h


def _default_r_max(v: InteractionPotential, tol: float) -> float:
    rng = v.finite_range
    if rng is not None:
        return max(rng, v.core_radius + 1.0)
    # power tail: solve (1/2) int_R^inf A r^(2-p) dr = tol / 2 in closed form
    if v.kind == "power-tail":
        A, p = v.A, v.p
    else:
        A, p = v._tail_A, float(v.tail_exponent)
    if A <= 0:
        return max(v.core_radius + 1.0, 1.0)
    R = (tol * (p - 3.0) / A) ** (1.0 / (3.0 - p))
    lo = v.r_on if v.kind == "power-tail" else float(v.table_r[-1])
    return max(R, lo, v.core_radius + 1.0)


def scattering_length(v: InteractionPotential, r_max: float | None = None,
                      steps: int = 4000, tol: float | None = None
                      ) -> ScatteringResult:
    """Compute the scattering length of v with a two-sided certificate.

    When r_max is omitted it is taken at the potential's finite range
    (making the tail certificate exactly zero) or, for tail kinds, at
    the radius where the tail integral drops below tol/2 (tol defaults
    to 1e-8).  If tol is given and the tail certificate at r_max still
    exceeds it, TruncationToleranceError is raised carrying a suggested
    radius.
    """
    want = 1e-8 if tol is None else tol
    if r_max is None:
        r_max = _default_r_max(v, want)
    if v.kind == "hard-sphere" or (v.finite_range is not None
                                   and v.finite_range <= v.core_radius):
        # beyond the core u = r - d exactly; no integration needed
        d = v.core_radius
        r = np.linspace(d, max(r_max, d + 1.0), 201)
        u = r - d
        du = np.ones_like(r)
        h = np.full_like(r, d)
        return ScatteringResult(
            a=d, a_lower=d, a_upper=d, tail_bound=0.0,
            sr_bound=spruch_rosenberg(v), r_max=float(r[-1]), steps=200,
            error_estimate=0.0, r=r, u=u, du=du, h=h, potential=v)

    r_switch = _structured_end(v, r_max)
    r, u, du = integrate_zero_energy(v, r_switch, steps)
    r2, u2, du2 = integrate_zero_energy(v, r_switch, 2 * steps)
    h_end = r[-1] - u[-1] / du[-1]
    h_end2 = r2[-1] - u2[-1] / du2[-1]
    if r_max > r_switch:
        n_octave = max(24, steps // 16)
        h_end = _march_h_tail(v, r_switch, h_end, r_max, n_octave)
        h_end2 = _march_h_tail(v, r_switch, h_end2, r_max, 2 * n_octave)
    err = abs(h_end2 - h_end) / 15.0
    # keep the fine run
    r, u, du = r2, u2, du2
    scale = du[-1]
    u = u / scale
    du = du / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(du > 0, r - u / np.where(du > 0, du, 1.0), np.nan)
    tail = tail_integral(v, float(r_max))
    if tol is not None and tail > tol:
        raise TruncationToleranceError(
            f"tail certificate {tail:.3e} at r_max = {r_max} exceeds "
            f"tolerance {tol:.3e}; integrate further out",
            suggested_r_max=_default_r_max(v, tol))
    a_lo = float(h_end2)
    a_hi = a_lo + tail
    return ScatteringResult(
        a=0.5 * (a_lo + a_hi), a_lower=a_lo, a_upper=a_hi, tail_bound=tail,
        sr_bound=spruch_rosenberg(v), r_max=float(r_max), steps=2 * steps,
        error_estimate=float(err), r=r, u=u, du=du, h=h, potential=v)


def spruch_rosenberg(v: InteractionPotential) -> float:
    """Upper bound a <= (1/2) int_0^inf v(r) r^2 dr, valid for v >= 0.

    Hard cores make the integral diverge, so those kinds return inf
    (the bound is true but empty).  For potentials with negative parts
    the inequality is not guaranteed; callers should check
    ``v.nonnegative``.
    """
    if v.has_hard_core:
        return math.inf
    return tail_integral(v, 0.0)


def truncate_with_certificate(v: InteractionPotential, R: float
                              ) -> tuple[InteractionPotential, float]:
    """Truncate v at radius R and certify the scattering-length defect.

    Returns (v_truncated, bound) with a(v) - a(v_truncated) in [0, bound]
    for v >= 0: dropping repulsion can only lower the scattering length,
    and the loss is at most the tail integral (1/2) int_R^inf v r^2 dr.
    """
    if v.has_hard_core and R < v.core_radius:
        raise DomainError("cannot truncate inside the hard core")
    bound = tail_integral(v, R)
    out = InteractionPotential(
        kind=v.kind, core_radius=v.core_radius, V0=v.V0, R0=v.R0, A=v.A,
        p=v.p, r_on=v.r_on, well=v.well, table_r=v.table_r,
        table_v=v.table_v, tail_exponent=v.tail_exponent,
        cutoff=R if v.cutoff is None else min(R, v.cutoff))
    return out, bound


def truncation_defect_lower_bound(v: InteractionPotential, R: float,
                                  a: float) -> float:
    """Diagnostic lower estimate of the truncation defect,

        a - a_truncated >= (1/2) int_max(R, a)^inf v(r) (r - a)^2 dr,

    for v >= 0.  Not used in the certified bracket (the bracket needs
    only the upper tail certificate); exposed for sharpness studies.
    """
    lo = max(R, a)
    if v.kind == "power-tail":
        base = max(lo, v.r_on)
        hi = v.cutoff if v.cutoff is not None else math.inf
        if base >= hi:
            return 0.0
        A, p = v.A, v.p

        def piece(x: float) -> float:
            return 0.5 * A * (x ** (3 - p) / (p - 3)
                              - 2 * a * x ** (2 - p) / (p - 2)
                              + a * a * x ** (1 - p) / (p - 1))

        return piece(base) - (0.0 if math.isinf(hi) else piece(hi))
    rng = v.finite_range
    hi = rng if rng is not None else lo + 50.0
    if lo >= hi:
        return 0.0
    val, _ = quad(lambda s: float(v.finite_part(s)) * (s - a) ** 2, lo, hi,
                  epsabs=1e-12, epsrel=1e-10, limit=400)
    if rng is None and v.tail_exponent is not None and hi > float(v.table_r[-1]):
        pass  # tabulated tails beyond 50 are negligible for diagnostics
    return 0.5 * val
