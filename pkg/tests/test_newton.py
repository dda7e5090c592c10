import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from logistic_harvest.domain import Field
from logistic_harvest.errors import InvalidArgument, MonotonicityFailure, NonConvergence
from logistic_harvest.forms import Params, residual_vector
from logistic_harvest.newton import (
    MonotoneOptions,
    NewtonOptions,
    build_subsolution,
    damped_newton,
    monotone_iterate,
    newton_ramp,
    newton_solve,
    subsolution_certificate,
    subsolution_recipe,
    tau_range,
    trivial_threshold,
)

def test_exact_root_needs_no_iteration(coarse_mesh):
    solution = newton_solve(coarse_mesh, Field.constant(coarse_mesh, 1.0), Params(p=3.0, q=0.5))
    assert solution.iterations <= 1
    assert np.allclose(solution.field.values, 1.0)
    assert solution.mu1 == pytest.approx(2.0, rel=1e-8)

def test_converges_to_neumann_constant(coarse_mesh):
    params = Params(p=2.0, q=0.5, beta=0.25)
    start = Field.constant(coarse_mesh, params.neumann_constant + 0.01)
    solution = newton_solve(coarse_mesh, start, params)
    assert np.allclose(solution.field.values, 0.25, atol=1e-9)
    assert not solution.trivial

def test_small_lambda_solution(coarse_mesh):
    params = Params(p=3.0, q=0.5, lam=0.05)
    solution = newton_solve(coarse_mesh, Field.constant(coarse_mesh, 1.0), params)
    assert solution.residual_norm <= 1e-10
    assert 0 < solution.sup_norm < 1
    assert not solution.trivial
    assert solution.boundary_min > 0

def test_unreachable_tolerance(coarse_mesh):
    params = Params(p=3.0, q=0.5, lam=0.05)
    with pytest.raises(NonConvergence) as e:
        newton_solve(coarse_mesh, Field.constant(coarse_mesh, 0.9), params, NewtonOptions(tol=1e-30))
    assert e.value.iterate is not None

def test_ramp_follows_lambda(coarse_mesh):
    params = Params(p=3.0, q=0.5)
    solutions = newton_ramp(coarse_mesh, Field.constant(coarse_mesh, 1.0), params, [0.0, 0.25, 0.5, 1.0])
    sups = [s.sup_norm for s in solutions]
    assert [s.params.lam for s in solutions] == [0.0, 0.25, 0.5, 1.0]
    assert all(b < a for a, b in zip(sups, sups[1:]))

    with pytest.raises(InvalidArgument):
        newton_ramp(coarse_mesh, Field.constant(coarse_mesh, 1.0), params, [])

def test_trivial_threshold(coarse_mesh):
    assert trivial_threshold(coarse_mesh) == pytest.approx(10 * coarse_mesh.h ** 2)

def test_subsolution_boundary_value(interval_mesh, interval_pair):
    sub = build_subsolution(interval_mesh, interval_pair.func, 0.1, 1.5)
    assert np.min(sub.values) == pytest.approx(0.1 ** 2.5)
    assert np.allclose(sub.boundary_values, 3.1622776601683794e-3)

def test_subsolution_increases_with_eps(interval_mesh, interval_pair):
    low = build_subsolution(interval_mesh, interval_pair.func, 0.05, 1.5)
    high = build_subsolution(interval_mesh, interval_pair.func, 0.1, 1.5)
    assert np.all(low.values < high.values)

    with pytest.raises(InvalidArgument):
        build_subsolution(interval_mesh, interval_pair.func, 0.0, 1.5)

def test_recipe_constants(fine_mesh, fine_pair):
    recipe = subsolution_recipe(fine_mesh, 3.0, 0.5, 1.5, 1.0, fine_pair)
    max_phi = float(np.max(fine_pair.func.values))

    assert recipe.c1 == pytest.approx(1 / math.sqrt(math.pi), abs=2e-3)
    assert max_phi == pytest.approx(1 / math.sqrt(math.pi), abs=1e-3)
    assert recipe.eps_bar_1 == pytest.approx(0.99 * (1 / (1 + max_phi) ** 3) ** (1 / 0.5))
    assert recipe.eps_bar == min(recipe.eps_bar_1, recipe.eps_bar_2)
    assert recipe.K == pytest.approx(4.0)
    assert recipe.M > recipe.Lambda * 0.5 * recipe.boundary_value ** -0.5

def test_recipe_shrinks_with_lambda_cap(interval_mesh, interval_pair):
    small = subsolution_recipe(interval_mesh, 3.0, 0.5, 1.5, 1.0, interval_pair)
    large = subsolution_recipe(interval_mesh, 3.0, 0.5, 1.5, 1e6, interval_pair)
    assert large.eps_bar_2 < small.eps_bar_2 * 1e-3

@pytest.mark.parametrize("p, q, tau", [
    (2.0, 0.5, 1.5),
    (1.5, 0.5, 1.5),
    (3.0, 0.5, 0.5),
    (3.0, 0.5, 2.5),
])
def test_recipe_rejects(interval_mesh, interval_pair, p, q, tau):
    with pytest.raises(InvalidArgument):
        subsolution_recipe(interval_mesh, p, q, tau, 1.0, interval_pair)

def test_tau_range():
    assert tau_range(3.0, 0.5) == (1.0, 2.0)

def test_subsolution_certificate(interval_mesh, interval_pair):
    params = Params(p=3.0, q=0.5)
    recipe = subsolution_recipe(interval_mesh, 3.0, 0.5, 1.5, 1.0, interval_pair)
    assert subsolution_certificate(interval_mesh, recipe, interval_pair, params).ok

def test_monotone_on_exact_solution(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5)
    recipe = subsolution_recipe(coarse_mesh, 3.0, 0.5, 1.5, 1.0, coarse_pair)
    one = Field.constant(coarse_mesh, 1.0)
    result = monotone_iterate(coarse_mesh, one, one, params, recipe)
    assert result.iterations == 0
    assert result.minimal is result.maximal

def test_monotone_rejects_unordered_pair(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5, lam=0.05)
    recipe = subsolution_recipe(coarse_mesh, 3.0, 0.5, 1.5, 1.0, coarse_pair)
    sub = build_subsolution(coarse_mesh, coarse_pair.func, recipe.eps_bar, recipe.tau)
    with pytest.raises(MonotonicityFailure):
        monotone_iterate(coarse_mesh, Field.constant(coarse_mesh, 1.0), sub, params, recipe)

@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.05, 0.5, 5.0, 50.0])
def test_monotone_minimal_and_maximal(coarse_mesh, coarse_pair, lam):
    params = Params(p=3.0, q=0.5, lam=lam)
    recipe = subsolution_recipe(coarse_mesh, 3.0, 0.5, 1.5, max(lam, 1.0), coarse_pair)
    sub = build_subsolution(coarse_mesh, coarse_pair.func, recipe.eps_bar, recipe.tau)
    result = monotone_iterate(coarse_mesh, sub, Field.constant(coarse_mesh, 1.0), params, recipe)

    lo, hi = result.minimal, result.maximal
    assert np.all(lo.field.values <= hi.field.values + 1e-8)
    assert max(lo.residual_norm, hi.residual_norm) <= 1e-10
    assert hi.sup_norm < 1
    assert np.all(lo.field.values >= sub.values - 1e-8)
    assert np.all(hi.field.values <= 1 + 1e-8)
    assert not lo.trivial

    r = residual_vector(coarse_mesh, hi.field.values.copy(), params)
    assert np.linalg.norm(r) <= 1e-8

@pytest.mark.slow
def test_monotone_solution_is_unique_near_zero(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5, lam=0.05)
    recipe = subsolution_recipe(coarse_mesh, 3.0, 0.5, 1.5, 1.0, coarse_pair)
    sub = build_subsolution(coarse_mesh, coarse_pair.func, recipe.eps_bar, recipe.tau)
    result = monotone_iterate(coarse_mesh, sub, Field.constant(coarse_mesh, 1.0), params, recipe)
    gap = np.max(np.abs(result.minimal.field.values - result.maximal.field.values))
    assert gap <= 1e-8

def test_monotone_sweeps_must_settle(coarse_mesh, coarse_pair):
    params = Params(p=3.0, q=0.5, lam=0.5)
    recipe = subsolution_recipe(coarse_mesh, 3.0, 0.5, 1.5, 1.0, coarse_pair)
    sub = build_subsolution(coarse_mesh, coarse_pair.func, recipe.eps_bar, recipe.tau)
    with pytest.raises(NonConvergence) as e:
        monotone_iterate(
            coarse_mesh, sub, Field.constant(coarse_mesh, 1.0), params, recipe, MonotoneOptions(max_sweeps=1)
        )
    lower, upper = e.value.iterate
    assert np.all(lower.values <= upper.values)

@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.1, max_value=100.0))
def test_damped_newton_square_roots(c):
    target = np.full(4, c)
    x, r, norm, iterations = damped_newton(
        np.full(4, 1.0),
        residual=lambda x: x ** 2 - target,
        jacobian=lambda x, previous: sp.diags(2 * x),
        measure=lambda x, r: float(np.linalg.norm(r)) / (1 + float(np.linalg.norm(x))),
        options=NewtonOptions(tol=1e-12),
    )
    assert norm <= 1e-12
    assert np.allclose(x, math.sqrt(c), rtol=1e-10)
    assert iterations <= NewtonOptions().max_iter

def test_damped_newton_reports_best_iterate():
    with pytest.raises(NonConvergence) as e:
        damped_newton(
            np.array([1.0]),
            residual=lambda x: x ** 2 + 1,
            jacobian=lambda x, previous: sp.diags(2 * x),
            measure=lambda x, r: float(np.linalg.norm(r)),
            options=NewtonOptions(max_iter=5),
        )
    assert e.value.iterate.shape == (1,)
    assert e.value.residual_norm >= 1
