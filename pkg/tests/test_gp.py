"""GP minimizer: energies, identities, invariants and failure modes."""
import math

import numpy as np
import pytest

from gptrap import (
    ConvergenceError,
    DomainError,
    Grid,
    NormalizationError,
    TrapPotential,
    WaveField,
    check_scaling,
    chemical_potential,
    energy_gradient,
    evaluate_energy,
    minimize,
    solve_neumann_box,
    structural_assertions,
    virial_residual,
)

import oracles


def test_harmonic_unit_energy_brackets(harmonic_solution):
    """E(1, 1) must land between the no-interaction floor of 3 and the
    energy of an explicit two-gaussian trial state."""
    E = harmonic_solution.energy
    assert E > 3.0
    trial = oracles.gp_trial_upper_bound(1.0)
    assert trial == pytest.approx(3.6421320241978297, rel=1e-6)
    assert E < trial


def test_harmonic_unit_energy_regression(harmonic_solution):
    assert harmonic_solution.energy == pytest.approx(3.6224112686474483,
                                                     abs=1e-9)
    assert harmonic_solution.converged
    assert harmonic_solution.residual <= harmonic_solution.tol
    assert harmonic_solution.energy_error_estimate is not None
    assert harmonic_solution.energy_error_estimate < 1e-4
    parts = (harmonic_solution.kinetic + harmonic_solution.potential
             + harmonic_solution.interaction)
    assert parts == pytest.approx(harmonic_solution.energy, rel=1e-13)


def test_virial_identity(harmonic_solution, quartic_solution):
    assert abs(virial_residual(harmonic_solution)) < 1e-4
    assert abs(virial_residual(quartic_solution)) < 3e-4


def test_virial_needs_homogeneous_trap(harmonic_solution):
    r = np.linspace(0.0, 8.0, 200)
    sol = minimize(
        TrapPotential.tabulated(r, r ** 2 + np.exp(-r)),
        1.0, 1.0, harmonic_solution.field.grid, richardson=False,
        check_extent=False)
    with pytest.raises(DomainError):
        virial_residual(sol)


def test_flat_box_minimizer_is_exact():
    """On a flat Neumann box the constant is the exact minimizer and
    every discretization reproduces E = 4 pi a N^2 / V to roundoff."""
    a, N, R = 0.001, 100.0, 4.0
    sol = solve_neumann_box(TrapPotential.zero_in_box(), a, N, [R],
                            h=0.25)[0]
    exact = oracles.box_energy(a, N, (2.0 * R) ** 3)
    assert sol.energy == pytest.approx(exact, rel=1e-12)
    assert sol.mu == pytest.approx(2.0 * exact / N, rel=1e-12)
    spread = float(np.ptp(sol.field.values))
    assert spread <= 1e-10 * float(np.max(sol.field.values))
    assert sol.iterations <= 2


def test_scaling_identity_is_exact_on_the_grid():
    """E(N, a) = N E(1, N a) maps the discrete functionals onto each
    other exactly, so the measured gap is solver noise, not physics."""
    out = check_scaling(TrapPotential.harmonic(), 0.5, 8.0,
                        Grid(kind="radial", h=0.04, R=8.0, boundary="decay"))
    assert out["energy_rel_diff"] < 1e-12
    assert out["density_max_rel_diff"] < 1e-10


def test_chemical_potential_formula_matches_fd(harmonic_solution):
    out = chemical_potential(harmonic_solution)
    assert out["rel_diff"] < 1e-4
    assert out["mu"] == pytest.approx(harmonic_solution.mu, rel=1e-10)
    with pytest.raises(DomainError):
        chemical_potential(harmonic_solution, dN=0.5)


def test_structural_assertions_all_pass(harmonic_solution):
    out = structural_assertions(harmonic_solution)
    for name in ("positive", "normalized", "radial_monotone",
                 "log_concave", "exponential_tail"):
        assert out[name]["applicable"], name
        assert out[name]["ok"], (name, out[name])


def test_energy_gradient_matches_finite_differences():
    grid = Grid(kind="radial", h=0.1, R=4.0, boundary="neumann")
    from gptrap.grids import make_geometry
    geom = make_geometry(grid)
    rng = np.random.default_rng(5)
    phi = 0.5 + rng.random(geom.r.size)
    field = WaveField(grid=grid, values=phi, N=1.0)
    V = TrapPotential.harmonic()
    g = energy_gradient(field, V, 0.7)
    d = 1e-6

    def energy_of(vals):
        f = WaveField(grid=grid, values=vals, N=1.0)
        return evaluate_energy(f, V, 0.7, require_normalized=False).total

    # the quotient inherits roundoff of order eps * E / d from the total
    # energy, which dwarfs the gradient at the tiny-weight origin node
    for i in (0, 3, geom.r.size // 2, geom.r.size - 1):
        e = np.zeros_like(phi)
        e[i] = d
        fd = (energy_of(phi + e) - energy_of(phi - e)) / (2 * d)
        assert fd == pytest.approx(g[i], rel=1e-4, abs=2e-6)


def test_evaluate_energy_checks_normalization(harmonic_solution):
    field = harmonic_solution.field
    bad = WaveField(grid=field.grid, values=2.0 * field.values, N=field.N)
    with pytest.raises(NormalizationError):
        evaluate_energy(bad, harmonic_solution.trap, 1.0)
    parts = evaluate_energy(bad, harmonic_solution.trap, 1.0,
                            require_normalized=False)
    assert parts.norm == pytest.approx(4.0 * field.N, rel=1e-10)


def test_neumann_ball_energies_close_superexponentially(harmonic_solution):
    balls = solve_neumann_box(TrapPotential.harmonic(), 1.0, 1.0,
                              [3.0, 4.0, 5.0])
    es = [s.energy for s in balls]
    assert es[0] < es[1] < es[2]
    gaps = [harmonic_solution.energy - e for e in es]
    assert gaps[0] / max(gaps[1], 1e-300) > 100.0
    assert abs(gaps[2]) < 1e-4


def test_domain_errors():
    grid = Grid(kind="radial", h=0.02, R=8.0, boundary="decay")
    V = TrapPotential.harmonic()
    with pytest.raises(DomainError):
        minimize(V, -0.1, 1.0, grid)
    with pytest.raises(DomainError):
        minimize(V, 1.0, 0.0, grid)
    other = Grid(kind="radial", h=0.04, R=8.0, boundary="decay")
    from gptrap.grids import make_geometry
    vals = np.ones(make_geometry(other).r.size)
    with pytest.raises(DomainError):
        minimize(V, 1.0, 1.0, grid,
                 init=WaveField(grid=other, values=vals, N=1.0))


def test_small_grid_reports_suggested_extent():
    grid = Grid(kind="radial", h=0.02, R=4.0, boundary="decay")
    with pytest.raises(DomainError, match="suggest R >="):
        minimize(TrapPotential.harmonic(), 1.0, 1000.0, grid,
                 richardson=False)


def test_tiny_iteration_budget_raises(radial_grid):
    with pytest.raises(ConvergenceError):
        minimize(TrapPotential.harmonic(), 1.0, 1.0, radial_grid,
                 tol=1e-10, max_iter=3, richardson=False)
