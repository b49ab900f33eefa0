"""Thomas-Fermi routes, identities and the smoothed trial state."""
import math

import numpy as np
import pytest

from gptrap import (
    DomainError,
    TrapPotential,
    gp_tf_convergence,
    tf_minimize,
    tf_scaling_checks,
    tf_upper_trial,
)

import oracles


def test_harmonic_closed_form_against_quadrature_oracle():
    tf = tf_minimize(TrapPotential.harmonic(), 1.0, 1.0)
    o = oracles.tf_energy_by_quadrature(TrapPotential.harmonic(), 1.0, 1.0,
                                        r_hi=8.0)
    assert tf.mu == pytest.approx(o["mu"], rel=1e-13)
    assert tf.energy == pytest.approx(o["energy"], rel=1e-13)
    assert tf.energy == pytest.approx(2.1101263850448415, rel=1e-12)


def test_quartic_closed_form_against_quadrature_oracle():
    V = TrapPotential.power(4.0)
    tf = tf_minimize(V, 1.0, 1.0)
    o = oracles.tf_energy_by_quadrature(V, 1.0, 1.0, r_hi=8.0)
    assert tf.mu == pytest.approx(o["mu"], rel=1e-12)
    assert tf.energy == pytest.approx(o["energy"], rel=1e-12)


def test_harmonic_mu_power_law():
    for a, N in ((1.0, 1.0), (0.5, 20.0), (1.0, 1000.0)):
        tf = tf_minimize(TrapPotential.harmonic(), a, N)
        assert tf.mu == pytest.approx(oracles.tf_harmonic_mu(a, N), rel=1e-13)


def test_bisection_route_agrees_with_closed_form():
    ref = tf_minimize(TrapPotential.harmonic(), 1.0, 1.0)
    bi = tf_minimize(TrapPotential.harmonic(), 1.0, 1.0, method="bisection")
    assert bi.method == "bisection" and ref.method == "closed-form"
    assert bi.energy == pytest.approx(ref.energy, rel=1e-11)
    assert bi.mu == pytest.approx(ref.mu, rel=1e-11)
    assert bi.support_radius == pytest.approx(ref.support_radius, rel=1e-11)


def test_identities_and_support():
    """mu N = F + 4 pi a int rho^2, and the support edge solves
    V(R) = mu (so R = sqrt(mu) for the harmonic trap)."""
    tf = tf_minimize(TrapPotential.harmonic(), 0.7, 50.0)
    assert tf.mu * tf.N == pytest.approx(tf.energy + tf.interaction,
                                         rel=1e-13)
    assert tf.support_radius == pytest.approx(math.sqrt(tf.mu), rel=1e-13)
    rho = oracles.tf_density(tf.mu, lambda s: s * s, 0.7)
    for r in (0.0, 0.4, 0.9 * tf.support_radius, 2.0 * tf.support_radius):
        assert float(tf.density(np.array([r]))[0]) == pytest.approx(
            rho(r), abs=1e-14)


def test_tabulated_trap_takes_bisection_route():
    r = np.linspace(0.0, 8.0, 400)
    tt = tf_minimize(TrapPotential.tabulated(r, r ** 2), 1.0, 1.0)
    ref = tf_minimize(TrapPotential.harmonic(), 1.0, 1.0)
    assert tt.method == "bisection"
    # limited by the interpolation of r^2, not by the quadrature
    assert tt.energy == pytest.approx(ref.energy, rel=1e-7)


def test_scaling_checks_are_machine_tight():
    out = tf_scaling_checks(TrapPotential.harmonic(), 0.7, 250.0)
    assert out["energy_rel_diff"] < 1e-12
    assert out["power_law_rel_diff"] < 1e-12
    assert out["density_rescale_max_rel_diff"] < 1e-12


def test_smoothed_trial_bounds_gp_from_above():
    """The capped-edge profile is a genuine GP trial state: its energy
    must sit above the GP minimum and close to it for strong coupling."""
    V = TrapPotential.harmonic()
    up = tf_upper_trial(V, 1.0, 1000.0)
    row = gp_tf_convergence(V, [1000.0])[0]
    gp = row["gp_energy"] * 1000.0  # row reports E(1, Na) = E(N, a)/N
    assert up["energy_trial"] > gp
    assert up["energy_trial"] < 1.02 * gp
    assert up["tf_energy"] < gp
    assert up["gradient_correction"] > 0.0
    assert up["mass_before_renormalization"] == pytest.approx(1000.0,
                                                              rel=1e-2)


def test_gp_to_tf_ratio_decreases_toward_one():
    rows = gp_tf_convergence(TrapPotential.harmonic(), [1.0, 10.0, 100.0])
    ratios = [row["ratio"] for row in rows[:-1]]
    dens = [row["density_l2_rel"] for row in rows[:-1]]
    assert all(r > 1.0 for r in ratios)
    assert ratios == sorted(ratios, reverse=True)
    assert dens == sorted(dens, reverse=True)
    last = rows[-1]
    assert math.isinf(last["Na"]) and last["ratio"] == 1.0


def test_domain_errors():
    V = TrapPotential.harmonic()
    with pytest.raises(DomainError):
        tf_minimize(V, 0.0, 1.0)
    with pytest.raises(DomainError):
        tf_minimize(V, 1.0, -2.0)
    with pytest.raises(DomainError):
        tf_minimize(TrapPotential.zero_in_box(), 1.0, 1.0)
    r = np.linspace(0.0, 4.0, 50)
    with pytest.raises(DomainError):
        tf_minimize(TrapPotential.tabulated(r, r ** 2), 1.0, 1.0,
                    method="closed-form")
    with pytest.raises(DomainError):
        tf_minimize(V, 1.0, 1.0, method="shooting")
