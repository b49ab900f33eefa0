"""Trap and interaction constructors, scaling and tail integrals."""
import math

import numpy as np
import pytest

from gptrap import (
    DomainError,
    InteractionPotential,
    TrapPotential,
    scale_interaction,
    scattering_length,
    tail_integral,
)

import oracles


def test_harmonic_values():
    V = TrapPotential.harmonic()
    r = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(V(r), r * r, rtol=0, atol=0)
    assert V.homogeneous_order == 2.0


def test_power_trap_values():
    V = TrapPotential.power(4.0, coefficient=0.5)
    r = np.linspace(0.0, 3.0, 7)
    np.testing.assert_allclose(V(r), 0.5 * r ** 4, rtol=1e-15)
    assert V.homogeneous_order == 4.0


def test_zero_in_box_is_flat():
    V = TrapPotential.zero_in_box()
    assert np.all(V(np.linspace(0, 5, 11)) == 0.0)


def test_tabulated_trap_homogeneity_claim_is_verified():
    r = np.linspace(0.0, 4.0, 200)
    TrapPotential.tabulated(r, r ** 2, symmetric=True, convex=True,
                            homogeneous_order=2.0)
    with pytest.raises(DomainError):
        TrapPotential.tabulated(r, r ** 3 + 1.0, symmetric=True,
                                convex=True, homogeneous_order=2.0)


def test_interaction_kind_properties():
    hs = InteractionPotential.hard_sphere(0.5)
    assert hs.has_hard_core and hs.nonnegative
    assert hs.finite_range == 0.5

    sb = InteractionPotential.square_barrier(2.0, 1.0)
    assert not sb.has_hard_core and sb.nonnegative
    assert sb.finite_range == 1.0
    assert float(sb.finite_part(np.array([0.5]))[0]) == 2.0
    assert float(sb.finite_part(np.array([1.5]))[0]) == 0.0

    hw = InteractionPotential.hard_core_well(0.3, 1.0, 2.0)
    assert hw.has_hard_core and not hw.nonnegative
    assert float(hw.finite_part(np.array([0.6]))[0]) == -2.0

    pt = InteractionPotential.power_tail(1.0, 4.0)
    assert pt.nonnegative and pt.finite_range is None


def test_power_tail_needs_integrable_tail():
    with pytest.raises(DomainError):
        InteractionPotential.power_tail(1.0, 3.0)


def test_bad_parameters_rejected():
    with pytest.raises(DomainError):
        InteractionPotential.hard_sphere(0.0)
    with pytest.raises(DomainError):
        InteractionPotential.square_barrier(-1.0, 1.0)


def test_tail_integral_closed_form():
    pt = InteractionPotential.power_tail(2.0, 5.0)
    for R in (1.0, 2.0, 4.0):
        assert tail_integral(pt, R) == pytest.approx(
            oracles.power_tail_integral(2.0, 5.0, R), rel=1e-12)


def test_tail_integral_barrier():
    sb = InteractionPotential.square_barrier(2.0, 1.0)
    assert tail_integral(sb, 0.0) == pytest.approx(
        oracles.sr_bound_barrier(2.0, 1.0), rel=1e-12)
    assert tail_integral(sb, 1.0) == 0.0


def test_scale_interaction_hard_sphere_exact():
    v1 = InteractionPotential.hard_sphere(1.0)
    v = scale_interaction(v1, 1.0, 0.01)
    assert v.core_radius == pytest.approx(0.01, rel=1e-15)
    assert scattering_length(v).a == pytest.approx(0.01, rel=1e-12)


def test_scale_interaction_preserves_scattering_length():
    """Length rescaling v(r) -> (a1/a)^2 v(r a1 / a) maps the
    scattering length exactly from a1 to a, for any shape."""
    v1 = InteractionPotential.square_barrier(2.0, 1.0)
    a1 = scattering_length(v1).a
    for target in (a1 / 7.0, a1 / 150.0):
        v = scale_interaction(v1, a1, target)
        assert scattering_length(v).a == pytest.approx(target, rel=1e-8)
