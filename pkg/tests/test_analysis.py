import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logistic_harvest.analysis import (
    check_solution_report,
    decompose,
    domain_perturbation_study,
    energy_diagnostics,
    profile_distance,
    rescaled_norm_bounds,
    rescaled_solution,
    solve_dirichlet_logistic,
)
from logistic_harvest.continuation import ContinuationOptions, trace_from_neumann
from logistic_harvest.domain import Field, build_mesh, h1_inner, norms
from logistic_harvest.errors import InvalidArgument, NumericFailure
from logistic_harvest.forms import Params
from logistic_harvest.newton import NewtonOptions, Solution, newton_ramp

def orthogonal_part(mesh, phi, g):
    return Field(mesh, g.values - h1_inner(mesh, g, phi) * phi.values)

def test_decompose_eigenfunction(interval_mesh, interval_pair):
    phi = interval_pair.func
    parts = decompose(interval_mesh, phi, phi)
    assert parts.s == pytest.approx(1.0)
    assert np.max(np.abs(parts.v.values)) < 1e-12

    double = decompose(interval_mesh, phi.scaled(2.0), phi)
    assert double.s == pytest.approx(2.0)

def test_decompose_orthogonal_complement(interval_mesh, interval_pair):
    phi = interval_pair.func
    w = orthogonal_part(interval_mesh, phi, Field.from_function(interval_mesh, np.cos))
    parts = decompose(interval_mesh, Field(interval_mesh, phi.values + w.values), phi)
    assert parts.s == pytest.approx(1.0)
    assert np.allclose(parts.v.values, w.values, atol=1e-12)

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_decompose_recombines(interval_mesh, interval_pair, seed):
    phi = interval_pair.func
    u = Field(interval_mesh, np.random.default_rng(seed).standard_normal(interval_mesh.size))
    parts = decompose(interval_mesh, u, phi)

    back = Field(interval_mesh, parts.s * phi.values + parts.v.values)
    error = norms(interval_mesh, Field(interval_mesh, back.values - u.values)).h1
    assert error <= 1e-13 * norms(interval_mesh, u).h1
    assert parts.orth_defect <= 1e-10 * max(norms(interval_mesh, parts.v).h1, 1.0)

def test_decompose_needs_unit_phi(interval_mesh, interval_pair):
    with pytest.raises(InvalidArgument):
        decompose(interval_mesh, interval_pair.func, interval_pair.func.scaled(2.0))

@pytest.mark.parametrize("scale", [1e-3, 1.0, 1e3])
def test_profile_distance_is_scale_invariant(interval_mesh, interval_pair, scale):
    phi = interval_pair.func
    u = Field(interval_mesh, phi.values + 0.1 * np.sin(2 * interval_mesh.nodes))
    reference = profile_distance(interval_mesh, u, phi)
    assert profile_distance(interval_mesh, u.scaled(scale), phi) == pytest.approx(reference, rel=1e-12)
    assert profile_distance(interval_mesh, phi.scaled(scale), phi) == pytest.approx(0.0, abs=1e-12)

def test_profile_distance_extremes(interval_mesh, interval_pair):
    phi = interval_pair.func
    assert profile_distance(interval_mesh, phi.scaled(-1.0), phi) == pytest.approx(2.0)
    with pytest.raises(InvalidArgument):
        profile_distance(interval_mesh, Field.constant(interval_mesh, 0.0), phi)

def test_energy_diagnostics_vanish_on_eigenfunction(interval_mesh, interval_pair):
    diag = energy_diagnostics(interval_mesh, interval_pair.func.scaled(0.3), 1.0, interval_pair, 0.5)
    assert diag.s == pytest.approx(0.3)
    assert diag.E_of_v == pytest.approx(0.0, abs=1e-12)
    assert diag.boundary_q1_integral == pytest.approx(0.0, abs=1e-12)
    assert diag.I_value == pytest.approx(0.0, abs=1e-12)

def test_energy_diagnostics_zero_boundary_trace(interval_mesh, interval_pair):
    phi = interval_pair.func
    bump = Field.from_function(interval_mesh, lambda x: np.sin(2 * x) ** 2)
    diag = energy_diagnostics(interval_mesh, Field(interval_mesh, phi.values + bump.values), 2.0, interval_pair, 0.5)
    assert diag.boundary_q1_integral == pytest.approx(0.0, abs=1e-12)
    assert diag.I_value == pytest.approx(0.0, abs=1e-12)

def test_dirichlet_below_resonance(wide_mesh):
    solution = solve_dirichlet_logistic(wide_mesh, 1.0, 2.0)
    values = solution.field.values
    assert not solution.trivial
    assert np.all(values[wide_mesh.interior] > 0)
    assert np.all(values[wide_mesh.boundary] == 0)
    assert np.max(values) < 1
    assert solution.beta_omega == pytest.approx(0.25, abs=1e-3)
    assert solution.iterations > 0
    assert solution.residual_norm <= 1e-10

def test_dirichlet_solution_solves_interior_equations(wide_mesh):
    solution = solve_dirichlet_logistic(wide_mesh, 1.0, 2.0)
    u = solution.field.values
    interior = wide_mesh.interior
    r = wide_mesh.stiffness @ u - wide_mesh.quad_weights * (u - u ** 2)
    assert np.max(np.abs(r[interior])) <= 1e-8

def test_dirichlet_newton_failure_is_numeric(wide_mesh):
    with pytest.raises(NumericFailure):
        solve_dirichlet_logistic(wide_mesh, 1.0, 2.0, options=NewtonOptions(max_iter=0))

def test_perturbation_study_on_coarse_meshes():
    report = domain_perturbation_study(math.pi, [4, 8], 64)
    assert not any(report.trivial)
    assert report.h1_decreasing
    assert all(0 < i < math.inf for i in report.extension_norms)

@pytest.mark.parametrize("extent", [math.pi, math.pi / 2])
def test_dirichlet_at_or_above_resonance(extent):
    mesh = build_mesh("interval", extent, 128)
    solution = solve_dirichlet_logistic(mesh, 1.0, 2.0)
    assert solution.trivial
    assert np.all(solution.field.values == 0)

def test_rescaling_multiplier(coarse_mesh):
    u = Field.constant(coarse_mesh, 0.5)
    params = Params(p=3.0, q=0.5, lam=0.25)
    rescaled = rescaled_solution(coarse_mesh, Solution(u, params, 0.0, math.nan, 0))
    assert rescaled.kappa == pytest.approx(1 / 16)
    assert np.allclose(rescaled.field.values, 8.0)

    same = rescaled_solution(coarse_mesh, Solution(u, params.with_lambda(1.0), 0.0, math.nan, 0))
    assert np.allclose(same.field.values, u.values)

    with pytest.raises(InvalidArgument):
        rescaled_solution(coarse_mesh, Solution(u, params.with_lambda(0.0), 0.0, math.nan, 0))

def test_rescaled_residual_of_a_solution(coarse_mesh):
    params = Params(p=3.0, q=0.5)
    solution = newton_ramp(coarse_mesh, Field.constant(coarse_mesh, 1.0), params, [0.0, 0.1, 0.25])[-1]
    assert rescaled_solution(coarse_mesh, solution).residual_norm <= 1e-8

def test_report_on_constant_state(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5)
    one = Field.constant(coarse_mesh, 1.0)
    report = check_solution_report(coarse_mesh, Solution(one, params, 0.0, 2.0, 0), coarse_pair)
    assert report.gap_to_one == 0
    assert report.neumann_state
    assert report.boundary_positive_weight == pytest.approx(2.0)
    assert report.energy_defect == pytest.approx(0.0, abs=1e-12)

def test_report_gap_is_positive(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5)
    solution = newton_ramp(coarse_mesh, Field.constant(coarse_mesh, 1.0), params, [0.0, 0.5])[-1]
    report = check_solution_report(coarse_mesh, solution, coarse_pair)
    assert report.gap_to_one > 0
    assert not report.neumann_state
    assert report.boundary_positive_weight > 0

def test_perturbation_needs_resonant_interval():
    with pytest.raises(InvalidArgument):
        domain_perturbation_study(2 * math.pi, [4, 8], 64)
    with pytest.raises(InvalidArgument):
        domain_perturbation_study(math.pi, [8, 4], 64)

@pytest.mark.slow
def test_perturbation_study_converges():
    report = domain_perturbation_study(math.pi, [4, 8, 16, 32], 128)
    assert not any(report.trivial)
    assert report.h1_decreasing
    assert report.profile_decreasing

def test_rescaled_norm_bounds_at_given_lambdas(coarse_mesh):
    params = Params(p=3.0, q=0.5)
    branch = trace_from_neumann(coarse_mesh, params, ContinuationOptions(lambda_cap=1.0, stability=False))
    low, high = rescaled_norm_bounds(coarse_mesh, branch, lambdas=[0.25, 0.5])

    direct = newton_ramp(coarse_mesh, Field.constant(coarse_mesh, 1.0), params, [0.0, 0.25, 0.5])
    sizes = [norms(coarse_mesh, rescaled_solution(coarse_mesh, i).field).h1 for i in direct[1:]]
    assert low == pytest.approx(min(sizes), rel=1e-6)
    assert high == pytest.approx(max(sizes), rel=1e-6)

    tail = rescaled_norm_bounds(coarse_mesh, branch, count=3)
    assert 0 < tail[0] <= tail[1] < math.inf

    with pytest.raises(InvalidArgument):
        rescaled_norm_bounds(coarse_mesh, branch, lambdas=[0.0])
