"""Zero-energy scattering lengths, certificates and regime errors."""
import math

import numpy as np
import pytest

from gptrap import (
    DomainError,
    InteractionPotential,
    ScatteringRegimeError,
    integrate_zero_energy,
    scattering_length,
    spruch_rosenberg,
    truncate_with_certificate,
    truncation_defect_lower_bound,
)

import oracles


def test_hard_sphere_is_exact():
    for d in (0.25, 1.0, 3.0):
        res = scattering_length(InteractionPotential.hard_sphere(d))
        assert abs(res.a - d) <= 1e-12 * d


def test_square_barrier_closed_form():
    for V0, R0 in ((2.0, 1.0), (10.0, 0.5), (0.3, 2.0)):
        res = scattering_length(InteractionPotential.square_barrier(V0, R0))
        exact = oracles.barrier_scattering_length(V0, R0)
        assert res.a == pytest.approx(exact, abs=1e-10)


def test_square_well_negative_length():
    """A deep enough well pulls the scattering length negative; the
    closed form a = R0 - tan(k R0)/k covers the whole regime below the
    first zero-energy resonance."""
    for depth in (1.0, 3.0, 4.5):
        v = InteractionPotential.hard_core_well(1e-12, 1.0, depth)
        res = scattering_length(v)
        exact = oracles.well_scattering_length(depth, 1.0)
        assert res.a == pytest.approx(exact, abs=1e-8)
    assert scattering_length(
        InteractionPotential.hard_core_well(1e-12, 1.0, 4.5)).a < 0


def test_hard_core_well_closed_form():
    d, R0, depth = 0.3, 1.2, 2.0
    res = scattering_length(InteractionPotential.hard_core_well(d, R0, depth))
    exact = oracles.hard_core_well_scattering_length(d, R0, depth)
    assert res.a == pytest.approx(exact, abs=1e-9)


def test_bracket_contains_value():
    corpus = [
        InteractionPotential.hard_sphere(1.0),
        InteractionPotential.square_barrier(2.0, 1.0),
        InteractionPotential.power_tail(1.0, 4.0),
        InteractionPotential.power_tail(0.5, 6.0, r_on=0.5),
    ]
    for v in corpus:
        res = scattering_length(v)
        assert res.a_lower <= res.a <= res.a_upper
        assert res.a_upper - res.a_lower == pytest.approx(
            res.tail_bound, rel=1e-6, abs=1e-15)


def test_spruch_rosenberg_corpus():
    """a <= (1/2) int v r^2 dr on every nonnegative potential."""
    corpus = [
        InteractionPotential.square_barrier(2.0, 1.0),
        InteractionPotential.square_barrier(40.0, 0.3),
        InteractionPotential.power_tail(1.0, 4.0),
        InteractionPotential.power_tail(3.0, 5.0, r_on=0.7),
        InteractionPotential.tabulated(
            np.linspace(0.1, 2.0, 60),
            1.0 / (1.0 + np.linspace(0.1, 2.0, 60) ** 4)),
    ]
    for v in corpus:
        assert v.nonnegative
        res = scattering_length(v)
        assert res.a <= spruch_rosenberg(v) * (1.0 + 1e-12)
    assert math.isinf(
        spruch_rosenberg(InteractionPotential.hard_sphere(1.0)))


def test_sr_barrier_closed_form():
    assert spruch_rosenberg(InteractionPotential.square_barrier(2.0, 1.0)) \
        == pytest.approx(oracles.sr_bound_barrier(2.0, 1.0), rel=1e-13)


def test_h_function_monotone_for_repulsive():
    """h(r) = r - u/u' never decreases when v >= 0, which is what
    certifies a_lower = h(r_max)."""
    for v in (InteractionPotential.square_barrier(5.0, 1.0),
              InteractionPotential.power_tail(1.0, 5.0)):
        r, u, du = integrate_zero_energy(v, r_max=6.0, steps=4000)
        keep = (r > 1e-6) & (du > 0)
        h = r[keep] - u[keep] / du[keep]
        assert np.all(np.diff(h) >= -1e-11)


def test_truncation_bracket_contains_refined_value():
    """Crude-run brackets must contain the refined run's value for
    potentials with genuine tails."""
    tails = [
        InteractionPotential.power_tail(1.0, 4.0),
        InteractionPotential.power_tail(0.5, 5.0),
        InteractionPotential.power_tail(2.0, 6.0, r_on=0.8),
    ]
    for v in tails:
        crude = scattering_length(v, r_max=8.0, steps=2000)
        refined = scattering_length(v, r_max=32.0, steps=32000)
        assert crude.tail_bound > 0
        assert crude.a_lower - 1e-11 <= refined.a <= crude.a_upper + 1e-11


def test_truncate_with_certificate():
    v = InteractionPotential.power_tail(1.0, 4.0)
    full = scattering_length(v)
    vt, defect = truncate_with_certificate(v, 6.0)
    trunc = scattering_length(vt)
    assert defect == pytest.approx(oracles.power_tail_integral(1.0, 4.0, 6.0),
                                   rel=1e-12)
    # the default run certifies full.a to ~1e-8, so the truncation gap is
    # known to far better than the bounds below probe it
    gap = full.a - trunc.a
    assert 0.0 <= gap <= defect + 1e-8
    assert gap >= 0.8 * defect
    lower = truncation_defect_lower_bound(v, 6.0, full.a)
    assert 0.0 <= lower <= gap + 1e-8
    assert lower >= 0.9 * gap


def test_truncate_inside_core_rejected():
    v = InteractionPotential.hard_sphere(1.0)
    with pytest.raises(DomainError):
        truncate_with_certificate(v, 0.5)


def test_supercritical_well_raises_regime_error():
    """Past depth 2 (pi / (2 R0))^2 the zero-energy solution leaves the
    well with u' < 0, so no scattering length exists by this method."""
    depth = 2.0 * (1.1 * math.pi / 2.0) ** 2
    v = InteractionPotential.hard_core_well(1e-12, 1.0, depth)
    with pytest.raises(ScatteringRegimeError):
        scattering_length(v)


def test_bound_state_well_raises_regime_error():
    """Deeper still, u crosses zero inside the well: a bound state."""
    depth = 2.0 * (1.2 * math.pi) ** 2
    v = InteractionPotential.hard_core_well(1e-12, 1.0, depth)
    with pytest.raises(ScatteringRegimeError):
        scattering_length(v)


def test_inverse_quartic_tail_closed_form():
    """v = A / r^4 beyond r_on has the exact length beta tanh(beta/r_on)
    with beta = sqrt(A/2); the certified bracket must straddle it and the
    midpoint must sit within the tail half-width."""
    for A, r_on in ((1.0, 1.0), (0.5, 1.0), (2.0, 0.5)):
        v = InteractionPotential.power_tail(A, 4.0, r_on)
        res = scattering_length(v)
        exact = oracles.power_tail4_scattering_length(A, r_on)
        assert res.a_lower - 1e-11 <= exact <= res.a_upper + 1e-11
        assert res.a == pytest.approx(exact, abs=6e-9)


def test_error_estimate_is_small():
    res = scattering_length(InteractionPotential.square_barrier(2.0, 1.0))
    assert res.error_estimate <= 1e-10
