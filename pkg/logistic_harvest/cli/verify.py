# MIT License

# Copyright (c) 2026 logistic-harvest developers

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""Verification scenarios

Every scenario runs a fixed problem setup and records named checks. A check
that raises counts as failed. Informational checks are written to the report
but never fail a run.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import tqdm

from ..analysis import (
    dirichlet_convergence,
    domain_perturbation_study,
    tail_energy_check,
    profile_distance,
    regime_dichotomy,
    rescaled_norm_bounds,
    solve_dirichlet_logistic,
)
from ..config import env
from ..continuation import (
    EndpointKind,
    detect_folds,
    estimate_lambda_star,
    fold_lambda,
    homotopy_limit,
    solutions_at,
    tail_limit,
    trace_family,
    trace_from_neumann,
    trace_regularized_continuum,
)
from ..domain import Field, build_mesh, norms
from ..errors import HarvestException, VerificationFailure
from ..forms import Params, jacobian_matrix, residual_vector
from ..newton import (
    MonotoneOptions,
    build_subsolution,
    monotone_iterate,
    newton_solve,
    subsolution_certificate,
    subsolution_recipe,
    tau_range,
)
from ..spectra import (
    bessel_j0_zero,
    dirichlet_principal,
    regularized_bifurcation_lambda,
    steklov_closed_form,
    steklov_principal,
)
from ..utils import is_strictly_decreasing
from .command import (
    continuation_options,
    newton_options,
    run_sweep,
    sweep_summary,
)

log = logging.getLogger(__name__)

VERIFY_HEADER = ["scenario", "check", "passed", "value", "limit", "required"]

# Converged positive solutions the a priori bound must be checked on
MIN_BOUND_SAMPLES = 200

# Relative change of the rescaled norm bounds allowed between n and 2n
RESCALED_REFINEMENT_TOL = 0.02

@dataclass(frozen=True)
class Check:
    scenario: str
    name: str
    passed: bool
    value: object = None
    limit: object = None
    required: bool = True

    def row(self):
        return (self.scenario, self.name, self.passed, self.value, self.limit, self.required)

class Checks:
    def __init__(self, scenario):
        self.scenario = scenario
        self.items = []

    def add(self, name, passed, value=None, limit=None, required=True):
        check = Check(self.scenario, name, bool(passed), value, limit, required)
        self.items.append(check)
        if not check.passed:
            level = logging.ERROR if required else logging.WARNING
            log.log(level, f"[{self.scenario}] {name} failed (value {value!r}, limit {limit!r})")
        return check

    def at_most(self, name, value, limit, required=True):
        return self.add(name, value <= limit, value, limit, required)

    def at_least(self, name, value, limit, required=True):
        return self.add(name, value >= limit, value, limit, required)

def _resonant_mesh(cfg, n=None):
    return build_mesh("interval", math.pi, n or cfg.n)

def _monotone_pair(cfg, mesh, pair, params):
    low, high = tau_range(params.p, params.q)
    tau = cfg.tau if cfg.tau is not None else (low + high) / 2
    Lambda = cfg.Lambda if cfg.Lambda is not None else max(params.lam, 1.0)
    recipe = subsolution_recipe(mesh, params.p, params.q, tau, Lambda, pair)
    sub = build_subsolution(mesh, pair.func, recipe.eps_bar, tau)
    upper = Field.constant(mesh, 1.0)
    result = monotone_iterate(mesh, sub, upper, params, recipe, MonotoneOptions(newton=newton_options(cfg)))
    return recipe, result

def check_eigen_oracles(cfg, checks):
    pair = dirichlet_principal(_resonant_mesh(cfg))
    checks.at_most("interval(0,pi) |beta_Omega - 1|", abs(pair.value - 1), 1e-3)

    wide = build_mesh("interval", 2 * math.pi, cfg.n)
    checks.at_most("interval(0,2pi) |beta_Omega - 0.25|", abs(dirichlet_principal(wide).value - 0.25), 3e-4)

    disk = build_mesh("radial-disk", bessel_j0_zero(), max(cfg.n, 512))
    checks.at_most("disk(j01) |beta_Omega - 1|", abs(dirichlet_principal(disk).value - 1), 2e-3)

    steklov = steklov_principal(_resonant_mesh(cfg), 0.25)
    checks.at_most("Steklov beta = 0.25 |lambda_beta - 0.5|", abs(steklov.value - 0.5), 1e-3)
    checks.at_most(
        "Steklov closed form",
        abs(steklov.value - steklov_closed_form(math.pi, 0.25)),
        1e-3
    )

def check_jacobian(cfg, checks):
    mesh = build_mesh("interval", math.pi, min(cfg.n, 64))
    rng = np.random.default_rng(0)
    eps = 1e-6
    worst = 0.0
    for alpha in (0.0, 0.1):
        params = Params(p=3.0, q=0.5, lam=1.0, alpha=alpha)
        for _ in range(20):
            u = rng.uniform(0.05, 1.05, mesh.size)
            v = rng.standard_normal(mesh.size)
            exact = jacobian_matrix(mesh, u, params) @ v
            approx = (residual_vector(mesh, u + eps * v, params) - residual_vector(mesh, u - eps * v, params)) / (2 * eps)
            error = np.linalg.norm(exact - approx) / max(np.linalg.norm(exact), 1e-300)
            worst = max(worst, float(error))
    checks.at_most("finite-difference relative error", worst, 1e-6)

def check_a_priori_bound(cfg, checks):
    rows = run_sweep(cfg, _resonant_mesh(cfg), cfg.p_list, cfg.q_list, cfg.lambdas)
    summary = sweep_summary(rows)
    checks.at_least("converged positive solutions", summary["solutions"], MIN_BOUND_SAMPLES)
    checks.add("every sup norm < 1", summary["all_below_one"], summary["max_sup_norm"], 1.0)
    checks.at_most("energy identity defect", summary["max_energy_defect"], 1e-8)

def check_superlinear_uniqueness(cfg, checks):
    mesh = _resonant_mesh(cfg)
    pair = dirichlet_principal(mesh)
    params = Params(p=3.0, q=0.5, lam=0.05)
    recipe, result = _monotone_pair(cfg, mesh, pair, params)

    checks.add("subsolution certificate", subsolution_certificate(mesh, recipe, pair, params).ok)
    gap = float(np.max(np.abs(result.minimal.field.values - result.maximal.field.values)))
    checks.at_most("sup |maximal - minimal|", gap, 1e-8)

def check_superlinear_order(cfg, checks):
    mesh = _resonant_mesh(cfg)
    pair = dirichlet_principal(mesh)
    for lam in cfg.lambdas:
        if not lam > 0:
            continue
        params = Params(p=3.0, q=0.5, lam=float(lam))
        _, result = _monotone_pair(cfg, mesh, pair, params)
        lo, hi = result.minimal, result.maximal
        excess = float(np.max(lo.field.values - hi.field.values))
        checks.at_most(f"lambda = {lam}: minimal <= maximal", excess, 1e-8)
        checks.at_most(f"lambda = {lam}: residuals", max(lo.residual_norm, hi.residual_norm), cfg.tol)
        checks.add(f"lambda = {lam}: maximal < 1", hi.field.sup < 1, hi.field.sup, 1.0)

def check_superlinear_asymptotics(cfg, checks):
    mesh = _resonant_mesh(cfg)
    pair = dirichlet_principal(mesh)
    params = Params(p=3.0, q=0.5)
    branch = trace_from_neumann(mesh, params, continuation_options(cfg), pair)

    checks.at_least("lambda_max", branch.lambda_max, cfg.lambda_cap)
    checks.add("no folds", not branch.folds, len(branch.folds), 0)
    positive = [i for i in branch.points if i.lam > 0]
    checks.add("sup norm < 1", all(i.sup_norm < 1 for i in positive), max(i.sup_norm for i in positive), 1.0)
    checks.add("h1 norm decreasing in lambda", is_strictly_decreasing([i.h1_norm for i in positive]))

    half = positive[len(positive) // 2:]
    distances = [profile_distance(mesh, i.field, pair.func) for i in half]
    checks.add("profile distance decreasing over the final half", is_strictly_decreasing(distances))
    checks.at_most("profile distance at the end", distances[-1], 0.1)

    report = regime_dichotomy(branch)
    checks.add("tail regime", report.agrees, report.tail_exponent, report.expected.value)

def check_sublinear_folds(cfg, checks):
    mesh = _resonant_mesh(cfg)
    pair = dirichlet_principal(mesh)
    params = Params(p=1.5, q=0.5)
    branches = trace_family(mesh, params, betas=cfg.beta_list, options=continuation_options(cfg))
    report = homotopy_limit(branches, step=cfg.step)
    limit = report.limit

    lam_bar = fold_lambda(detect_folds(limit))
    checks.add("fold present", lam_bar > 0, lam_bar, 0.0)

    witness = solutions_at(limit, lam_bar / 2, polish=True, options=newton_options(cfg))
    checks.at_least("solutions below the fold", len(witness), 2)
    if len(witness) >= 2:
        a, b = sorted((w.field.values for w in witness[:2]), key=lambda x: float(np.max(x)))
        checks.add("two solutions strictly ordered", bool(np.all(a < b)), float(np.min(b - a)), 0.0)

    start, end = limit.endpoints
    checks.add("starts at the constant state", start.kind == EndpointKind.NeumannState, start.kind.value)
    checks.add("ends on the trivial line", end.kind == EndpointKind.TrivialLine, end.kind.value)
    checks.at_most("trivial-line contact lambda", tail_limit(limit), 1e-3)

    dichotomy = regime_dichotomy(limit)
    checks.add("tail regime", dichotomy.agrees, dichotomy.tail_exponent, dichotomy.expected.value)

    flags = tail_energy_check(mesh, limit, pair, params.q)
    checks.add("energy bound on the branch tail", all(flags), sum(flags), len(flags), required=False)

def check_borderline_uniqueness(cfg, checks):
    mesh = _resonant_mesh(cfg)
    params = Params(p=2.0, q=0.5)
    opts = continuation_options(cfg)
    branch = trace_from_neumann(mesh, params, opts)
    end = branch.endpoints[1]

    checks.add("ends on the trivial line", end.kind == EndpointKind.TrivialLine, end.kind.value)
    checks.add("contact at a positive lambda", end.lam > 0, end.lam, 0.0)

    for fraction in (0.1, 0.2, 0.3):
        lam = fraction * end.lam
        count = len(solutions_at(branch, lam))
        checks.add(f"one solution at lambda = {lam:.4g}", count == 1, count, 1)

    low, high = rescaled_norm_bounds(mesh, branch, count=10)
    checks.add("rescaled norms bounded away from 0", 0 < low <= high < math.inf, low, high)

    estimate = estimate_lambda_star(mesh, params.p, params.q, cfg.levels, continuation_options(cfg, stability=False))
    checks.at_most("lambda* relative spread", estimate.relative_spread, 0.05)
    checks.add(
        "lambda* below lambda_max",
        all(e <= m for e, m in zip(estimate.estimates, estimate.lambda_max)),
        estimate.estimates,
        estimate.lambda_max,
    )

    # same tail window on the refined mesh
    fine_mesh = _resonant_mesh(cfg, 2 * cfg.n)
    fine = trace_from_neumann(fine_mesh, params, opts)
    contact = min(end.lam, fine.endpoints[1].lam)
    checks.add("refined contact at a positive lambda", contact > 0, contact, 0.0)
    if not contact > 0:
        return

    window = np.linspace(0.5, 0.9, 10) * contact
    coarse_bounds = rescaled_norm_bounds(mesh, branch, lambdas=window, options=newton_options(cfg))
    fine_bounds = rescaled_norm_bounds(fine_mesh, fine, lambdas=window, options=newton_options(cfg))
    for name, a, b in zip(("C1", "C2"), coarse_bounds, fine_bounds):
        checks.at_most(f"rescaled {name} change under refinement", abs(a - b) / b, RESCALED_REFINEMENT_TOL)

    coarse_ratio = coarse_bounds[1] / coarse_bounds[0]
    fine_ratio = fine_bounds[1] / fine_bounds[0]
    checks.add("rescaled C2/C1 finite", math.isfinite(fine_ratio), fine_ratio)
    checks.at_most(
        "rescaled C2/C1 change under refinement",
        abs(fine_ratio - coarse_ratio) / coarse_ratio,
        RESCALED_REFINEMENT_TOL
    )

def check_continuum(cfg, checks):
    mesh = _resonant_mesh(cfg)
    pair = dirichlet_principal(mesh)
    beta, alpha, p, q = 0.5, 1e-2, 2.0, 0.5
    opts = continuation_options(cfg)
    branch = trace_regularized_continuum(mesh, alpha, beta, p, q, opts, pair)

    expected = regularized_bifurcation_lambda(mesh, beta, alpha, q)
    start, end = branch.endpoints
    checks.at_most("start lambda relative error", abs(start.lam - expected) / expected, 0.02)
    checks.at_most("end lambda", end.lam, 1e-3)
    checks.at_most("end constant error", abs(end.sup_norm - beta ** (1 / (p - 1))), 1e-3)

    branches = trace_family(
        mesh,
        Params(p=p, q=q, alpha=alpha, beta=beta),
        alphas=cfg.alpha_list,
        options=opts,
        seed_from="bifurcation"
    )
    report = homotopy_limit(branches, step=cfg.step)
    checks.add("Hausdorff distances decreasing", report.decreasing, report.distances)

def check_nonresonant(cfg, checks):
    mesh = build_mesh("interval", 2 * math.pi, cfg.n)
    pair = dirichlet_principal(mesh)
    params = Params(p=2.0, q=0.5)
    cap = max(cfg.lambda_cap, 50.0)
    branch = trace_from_neumann(mesh, params, continuation_options(cfg, lambda_cap=cap), pair)

    checks.at_least("lambda_max", branch.lambda_max, cap)
    checks.add("no folds", not branch.folds, len(branch.folds), 0)
    checks.add("sup norm decreasing", is_strictly_decreasing(list(branch.sup_norms)))

    dirichlet = solve_dirichlet_logistic(mesh, 1.0, params.p, pair, newton_options(cfg))
    checks.add("Dirichlet solution positive", not dirichlet.trivial)
    distances = dirichlet_convergence(mesh, branch, dirichlet, (10.0, 20.0, 50.0), newton_options(cfg))
    checks.add("l2 distance to the Dirichlet solution decreasing", is_strictly_decreasing(distances), distances)

def check_perturbation(cfg, checks):
    report = domain_perturbation_study(math.pi, cfg.k_list, cfg.n)
    checks.add("no trivial solution", not any(report.trivial), report.trivial)
    checks.add("h1 norms decreasing", report.h1_decreasing, report.h1_norms)
    checks.add("profile distances decreasing", report.profile_decreasing, report.profile_distances)

def check_refinement(cfg, checks):
    n = max(cfg.n // 4, 16)
    errors = [abs(dirichlet_principal(_resonant_mesh(cfg, n * 2 ** i)).value - 1) for i in range(2)]
    checks.at_least("eigenvalue error ratio", errors[0] / errors[1], 3.5)

    params = Params(p=3.0, q=0.5, lam=0.5)
    solutions = []
    for i in range(3):
        mesh = _resonant_mesh(cfg, n * 2 ** i)
        solutions.append(newton_solve(mesh, Field.constant(mesh, 0.9), params, newton_options(cfg), False))

    coarse = solutions[0].field.values - solutions[1].field.values[::2]
    fine = solutions[1].field.values[::2] - solutions[2].field.values[::4]
    checks.at_least("solution error ratio", float(np.max(np.abs(coarse)) / np.max(np.abs(fine))), 3.5)

    mesh = _resonant_mesh(cfg, n)
    again = newton_solve(mesh, Field.constant(mesh, 0.9), params, newton_options(cfg), False)
    checks.add("deterministic solve", np.array_equal(again.field.values, solutions[0].field.values))

scenarios = {
    "eigen-oracles": check_eigen_oracles,
    "jacobian": check_jacobian,
    "a-priori-bound": check_a_priori_bound,
    "superlinear-uniqueness": check_superlinear_uniqueness,
    "superlinear-order": check_superlinear_order,
    "superlinear-asymptotics": check_superlinear_asymptotics,
    "sublinear-folds": check_sublinear_folds,
    "borderline-uniqueness": check_borderline_uniqueness,
    "continuum": check_continuum,
    "nonresonant": check_nonresonant,
    "perturbation": check_perturbation,
    "refinement": check_refinement,
}

def run_checks(cfg, name):
    checks = Checks(name)
    try:
        scenarios[name](cfg, checks)
    except HarvestException as e:
        checks.add(f"error: {e.__class__.__name__}", False, str(e))
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        checks.add(f"error: {e.__class__.__name__}", False, str(e))
    return checks.items

def run_scenario(cfg, output):
    """Run the scenario named in ``cfg`` (every scenario if none is named)
    and write ``verify.csv`` and ``verify.json``

    Raises
    -------
    VerificationFailure
        A required check failed
    """
    names = [cfg.scenario] if cfg.scenario else list(scenarios)
    items = []
    for name in tqdm.tqdm(names, desc='Verify', unit='scenario', disable=env.no_progress_bar or cfg.no_progress_bar):
        log.info(f"Running scenario '{name}'")
        items.extend(run_checks(cfg, name))

    failed = [i for i in items if i.required and not i.passed]
    report = {
        "scenarios": names,
        "passed": not failed,
        "checks": [dict(zip(VERIFY_HEADER, i.row())) for i in items],
        "first_failure": dict(zip(VERIFY_HEADER, failed[0].row())) if failed else None,
    }
    output.csv('verify', VERIFY_HEADER, [i.row() for i in items])
    output.json('verify', report)

    if failed:
        first = failed[0]
        raise VerificationFailure(
            f"{len(failed)} check(s) failed, first: [{first.scenario}] {first.name} " \
            f"(value {first.value!r}, limit {first.limit!r})",
            report=report
        )
    log.info(f"All {len(items)} checks passed")
    return report
