import math

import numpy as np
import pytest

from logistic_harvest.continuation import (
    Branch,
    ContinuationOptions,
    Endpoint,
    EndpointKind,
    detect_folds,
    estimate_lambda_star,
    fold_lambda,
    hausdorff_distance,
    homotopy_limit,
    limit_regime,
    make_point,
    solutions_at,
    start_from_neumann,
    tail_exponent,
    tail_limit,
    trace_branch,
    trace_from_neumann,
    trace_regularized_continuum,
)
from logistic_harvest.domain import build_mesh
from logistic_harvest.errors import InvalidArgument
from logistic_harvest.forms import Params, Regime
from logistic_harvest.spectra import regularized_bifurcation_lambda

def synthetic_branch(mesh, pair, lambdas, levels, params=None):
    """Branch of constant fields, for the pure branch-analysis helpers"""
    params = params or Params(p=3.0, q=0.5)
    points = [
        make_point(mesh, np.full(mesh.size, c), lam, params, pair, stability=False)
        for lam, c in zip(lambdas, levels)
    ]
    ends = (
        Endpoint(EndpointKind.Seed, points[0].lam, points[0].sup_norm),
        Endpoint(EndpointKind.Truncated, points[-1].lam, points[-1].sup_norm),
    )
    branch = Branch(points, params, ends, [], 1e-2)
    branch.folds = detect_folds(branch)
    return branch

def test_neumann_start(coarse_mesh, coarse_pair):
    point = start_from_neumann(coarse_mesh, Params(p=3.0, q=0.5), coarse_pair)
    du, dl = point.tangent
    assert point.lam == 0
    assert np.allclose(point.field.values, 1.0)
    assert dl > 0
    assert np.all(du <= 0)
    assert point.mu1 > 0

def test_neumann_start_below_resonance(coarse_mesh, coarse_pair):
    point = start_from_neumann(coarse_mesh, Params(p=2.0, q=0.5, beta=0.25), coarse_pair, stability=False)
    assert np.allclose(point.field.values, 0.25)
    assert math.isnan(point.mu1)

def test_neumann_start_needs_zero_lambda(coarse_mesh, coarse_pair):
    with pytest.raises(InvalidArgument):
        start_from_neumann(coarse_mesh, Params(p=3.0, q=0.5, lam=1.0), coarse_pair)

def test_zero_cap_gives_single_point(coarse_mesh, coarse_pair):
    branch = trace_from_neumann(coarse_mesh, Params(p=3.0, q=0.5), ContinuationOptions(lambda_cap=0.0), coarse_pair)
    assert len(branch) == 1
    assert branch.endpoints[1].kind == EndpointKind.RangeExhausted
    assert branch.folds == []

def test_zero_tangent_is_rejected(coarse_mesh, coarse_pair):
    seed = start_from_neumann(coarse_mesh, Params(p=3.0, q=0.5), coarse_pair)
    with pytest.raises(InvalidArgument):
        trace_branch(coarse_mesh, seed, Params(p=3.0, q=0.5), tangent=(np.zeros(coarse_mesh.size), 0.0))

def test_trivial_seed_is_rejected(coarse_mesh, coarse_pair):
    params = Params(p=2.0, q=0.5, alpha=1e-2, beta=0.5)
    seed = make_point(coarse_mesh, np.zeros(coarse_mesh.size), 0.01, params, coarse_pair, stability=False)
    with pytest.raises(InvalidArgument):
        trace_branch(coarse_mesh, seed, params, tangent=(np.zeros(coarse_mesh.size), 0.0))

def test_detect_folds(coarse_mesh, coarse_pair):
    branch = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0, 1.5, 1.0], [1.0, 0.9, 0.8, 0.7, 0.6])
    assert len(branch.folds) == 1
    assert branch.folds[0].index == 2
    assert branch.folds[0].lam >= 2.0
    assert branch.lambda_bar == branch.folds[0].lam
    assert branch.lambda_max == 2.0

def test_no_folds_on_short_or_monotone_branch(coarse_mesh, coarse_pair):
    short = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0], [1.0, 0.9])
    assert detect_folds(short) == []
    monotone = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0, 3.0], [1.0, 0.9, 0.8, 0.7])
    assert detect_folds(monotone) == []
    assert math.isnan(fold_lambda([]))

def test_solutions_at_counts_crossings(coarse_mesh, coarse_pair):
    branch = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0, 1.5, 1.0], [1.0, 0.9, 0.8, 0.7, 0.6])
    crossings = solutions_at(branch, 1.2)
    assert len(crossings) == 2
    assert crossings[0].field.sup > crossings[1].field.sup
    assert solutions_at(branch, 3.0) == []

@pytest.mark.parametrize("gamma, regime, limit", [
    (0.5, Regime.Sublinear, 0.0),
    (-1.0, Regime.Superlinear, math.inf),
])
def test_tail_exponent(coarse_mesh, coarse_pair, gamma, regime, limit):
    levels = [0.5, 0.4, 0.3, 0.2, 0.1]
    branch = synthetic_branch(coarse_mesh, coarse_pair, [c ** gamma for c in levels], levels)
    assert tail_exponent(branch) == pytest.approx(gamma)
    assert limit_regime(tail_exponent(branch)) == regime
    assert tail_limit(branch) == limit

def test_flat_tail_extrapolates(coarse_mesh, coarse_pair):
    levels = [0.5, 0.4, 0.3, 0.2, 0.1]
    branch = synthetic_branch(coarse_mesh, coarse_pair, [2.0 + 0.01 * c for c in levels], levels)
    assert limit_regime(tail_exponent(branch)) == Regime.Critical
    assert tail_limit(branch) == pytest.approx(2.0)

def test_hausdorff_distance(coarse_mesh, coarse_pair):
    a = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0], [1.0, 0.9, 0.8])
    b = synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0], [1.1, 1.0, 0.9])
    assert hausdorff_distance(a, a) == 0
    assert hausdorff_distance(a, b) == pytest.approx(0.1, rel=1e-2)

def test_homotopy_limit(coarse_mesh, coarse_pair):
    family = [
        synthetic_branch(coarse_mesh, coarse_pair, [0.0, 1.0, 2.0], [1.0 + d, 0.9 + d, 0.8 + d])
        for d in (0.4, 0.1, 0.01, 0.0)
    ]
    report = homotopy_limit(family, step=0.01)
    assert report.decreasing
    assert not report.diverging
    assert report.converged
    assert report.limit is family[-1]

    with pytest.raises(InvalidArgument):
        homotopy_limit(family[:1])

def test_lambda_star_needs_critical_regime(coarse_mesh):
    with pytest.raises(InvalidArgument):
        estimate_lambda_star(coarse_mesh, 3.0, 0.5)

@pytest.mark.slow
def test_nonresonant_branch_is_monotone():
    mesh = build_mesh("interval", 2 * math.pi, 64)
    opts = ContinuationOptions(lambda_cap=5.0, stability=False)
    branch = trace_from_neumann(mesh, Params(p=2.0, q=0.5, beta=1.0), opts)

    assert branch.folds == []
    assert branch.endpoints[0].kind == EndpointKind.NeumannState
    assert branch.endpoints[1].kind == EndpointKind.RangeExhausted
    assert branch.lambda_max == pytest.approx(5.0)
    sups = branch.sup_norms
    assert np.all(np.diff(sups) < 0)
    assert all(p.residual_norm <= opts.tol for p in branch.points)

@pytest.mark.slow
def test_resonant_superlinear_branch_has_no_fold(coarse_mesh, coarse_pair):
    opts = ContinuationOptions(lambda_cap=2.0, stability=False)
    branch = trace_from_neumann(coarse_mesh, Params(p=3.0, q=0.5), opts, coarse_pair)

    assert branch.folds == []
    assert np.all(np.diff(branch.sup_norms) < 0)
    assert all(p.sup_norm < 1 for p in branch.points if p.lam > 0)

@pytest.mark.slow
def test_regularized_continuum_joins_bifurcation_to_constant(interval_mesh, interval_pair):
    beta, alpha, p, q = 0.5, 1e-2, 2.0, 0.5
    branch = trace_regularized_continuum(interval_mesh, alpha, beta, p, q, pair=interval_pair)

    expected = regularized_bifurcation_lambda(interval_mesh, beta, alpha, q)
    start, end = branch.endpoints
    assert abs(start.lam - expected) / expected <= 0.02
    assert end.kind == EndpointKind.NeumannState
    assert end.lam <= 1e-3
    assert end.sup_norm == pytest.approx(beta ** (1 / (p - 1)), abs=1e-3)

@pytest.mark.slow
def test_sublinear_branch_folds_with_two_ordered_solutions(coarse_mesh, coarse_pair):
    params = Params(p=1.5, q=0.5, beta=0.99)
    branch = trace_from_neumann(coarse_mesh, params, ContinuationOptions(stability=False), coarse_pair)

    lam_bar = fold_lambda(detect_folds(branch))
    assert lam_bar > 0
    assert branch.endpoints[1].kind == EndpointKind.TrivialLine

    witness = solutions_at(branch, lam_bar / 2, polish=True)
    assert len(witness) >= 2
    lower, upper = sorted((w.field.values for w in witness[:2]), key=lambda x: float(np.max(x)))
    assert np.all(lower < upper)

@pytest.mark.slow
def test_lambda_star_is_stable_under_refinement(coarse_mesh):
    estimate = estimate_lambda_star(coarse_mesh, 2.0, 0.5, levels=[64, 128, 256])
    assert estimate.levels == [64, 128, 256]
    assert all(i > 0 for i in estimate.estimates)
    assert estimate.relative_spread <= 0.05
    assert all(e <= m for e, m in zip(estimate.estimates, estimate.lambda_max))
