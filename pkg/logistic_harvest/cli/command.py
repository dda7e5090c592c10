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

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..analysis import (
    check_solution_report,
    domain_perturbation_study,
    rescaled_solution,
)
from ..config import env
from ..continuation import (
    ContinuationOptions,
    estimate_lambda_star,
    homotopy_limit,
    tail_exponent,
    trace_family,
    trace_from_neumann,
    trace_regularized_continuum,
)
from ..domain import Field
from ..errors import DomainError, NonConvergence, PartialBranch
from ..format import get_format
from ..forms import energy_identity_defect
from ..newton import (
    NewtonOptions,
    MonotoneOptions,
    build_subsolution,
    monotone_iterate,
    newton_ramp,
    newton_solve,
    subsolution_certificate,
    subsolution_recipe,
    tau_range,
)
from ..spectra import dirichlet_principal, steklov_principal

log = logging.getLogger(__name__)

BRANCH_HEADER = ["index", "lambda", "sup_norm", "h1_norm", "s_comp", "energy", "mu1", "residual"]

class Output:
    """Writers for one output directory"""
    def __init__(self, path):
        self.path = Path(path)

    def _write(self, fmt, name, data):
        return get_format(fmt)(self.path).write(name, data)

    def csv(self, name, header, rows):
        return self._write('csv', name, (header, rows))

    def json(self, name, data):
        return self._write('json', name, data)

    def plot(self, name, labels, rows, script=False, title=None):
        file = self._write('plot', name, (labels, rows))
        if script:
            self._write('gnuplot', name, (file.name, labels[0], labels[1], title or name))
        return file

def newton_options(cfg):
    return NewtonOptions(tol=cfg.tol, max_iter=cfg.max_iter)

def continuation_options(cfg, **overrides):
    values = dict(
        step=cfg.step,
        max_step=cfg.max_step,
        max_points=cfg.max_points,
        lambda_cap=cfg.lambda_cap,
        tol=cfg.tol,
        stability=cfg.stability,
        progress=not cfg.no_progress_bar,
    )
    values.update(overrides)
    return ContinuationOptions(**values)

def params_metadata(params):
    return {
        "p": params.p,
        "q": params.q,
        "lambda": params.lam,
        "alpha": params.alpha,
        "beta": params.beta,
        "regime": params.regime.value,
    }

def mesh_metadata(mesh):
    return {"kind": mesh.kind.value, "extent": mesh.extent, "n": mesh.n}

def branch_rows(branch):
    return [(i,) + point.row() for i, point in enumerate(branch.points)]

def branch_metadata(branch):
    return {
        "mesh": mesh_metadata(branch.mesh),
        "params": params_metadata(branch.params),
        "regime": branch.params.regime.value,
        "points": len(branch.points),
        "lambda_max": branch.lambda_max,
        "lambda_bar": branch.lambda_bar,
        "tail_exponent": tail_exponent(branch),
        "endpoints": [
            {
                "kind": end.kind.value,
                "lambda": end.lam,
                "sup_norm": end.sup_norm,
                "limit_lambda": end.limit_lambda,
            }
            for end in branch.endpoints
        ],
        "folds": [{"index": f.index, "lambda": f.lam} for f in branch.folds],
        "diagnostic": branch.diagnostic,
    }

def write_branch(output, name, branch, script=False, extra=None):
    output.csv(name, BRANCH_HEADER, branch_rows(branch))
    meta = branch_metadata(branch)
    meta.update(extra or {})
    output.json(name, meta)
    output.plot(
        name,
        ["lambda", "sup_norm"],
        [(p.lam, p.sup_norm) for p in branch.points],
        script=script,
        title=f"{branch.params.regime.value} branch"
    )

def cmd_eig(cfg, out):
    """Dirichlet principal pair, plus the Steklov pair when ``beta`` is
    below ``beta_Omega``"""
    output = Output(out)
    mesh = cfg.mesh()
    pair = dirichlet_principal(mesh)

    meta = {
        "mesh": mesh_metadata(mesh),
        "beta_Omega": pair.value,
        "residual": pair.residual_norm,
        "iterations": pair.iterations,
        "c1": pair.c1,
        "flux": pair.flux,
    }
    columns = [pair.func.values]
    header = ["index", "node", "phi"]

    if cfg.beta < pair.value and cfg.beta < 1:
        steklov = steklov_principal(mesh, cfg.beta, beta_omega=pair.value)
        meta["lambda_beta"] = steklov.value
        meta["lambda_beta_residual"] = steklov.residual_norm
        if cfg.alpha > 0:
            meta["lambda_alpha_beta"] = steklov.value * cfg.alpha ** (1 - cfg.q)
        columns.append(steklov.func.values)
        header.append("phi_beta")

    rows = [(i, x) + tuple(float(c[i]) for c in columns) for i, x in enumerate(mesh.nodes)]
    output.csv('eig', header, rows)
    output.json('eig', meta)
    log.info(f"beta_Omega = {pair.value!r}")

def _solve_newton(cfg, mesh, params):
    constant = Field.constant(mesh, params.neumann_constant)
    if params.lam == 0:
        return newton_solve(mesh, constant, params, newton_options(cfg))

    steps = np.linspace(0, params.lam, 11)
    last = newton_ramp(mesh, constant, params, steps, newton_options(cfg))[-1]
    return newton_solve(mesh, last.field, params, newton_options(cfg))

def _solution_metadata(mesh, solution, pair):
    report = check_solution_report(mesh, solution, pair)
    meta = {
        "params": params_metadata(solution.params),
        "residual": solution.residual_norm,
        "iterations": solution.iterations,
        "trivial": solution.trivial,
        "mu1": solution.mu1,
        "max_value": report.max_value,
        "gap_to_one": report.gap_to_one,
        "boundary_min": report.boundary_min,
        "boundary_positive_weight": report.boundary_positive_weight,
        "energy_defect": report.energy_defect,
        "profile_distance": report.profile_distance,
        "neumann_state": report.neumann_state,
    }
    if solution.params.lam > 0:
        rescaled = rescaled_solution(mesh, solution)
        meta["kappa"] = rescaled.kappa
        meta["rescaled_residual"] = rescaled.residual_norm
    return meta

def cmd_solve(cfg, out):
    """Single solve at ``lambda``, by Newton or by monotone iteration"""
    output = Output(out)
    mesh = cfg.mesh()
    params = cfg.params()
    pair = dirichlet_principal(mesh)

    if cfg.method == "newton":
        solution = _solve_newton(cfg, mesh, params)
        rows = [(i, x, u) for i, (x, u) in enumerate(zip(mesh.nodes, solution.field.values))]
        output.csv('solution', ["index", "node", "u"], rows)
        meta = _solution_metadata(mesh, solution, pair)
        meta["mesh"] = mesh_metadata(mesh)
        output.json('solution', meta)
        return

    low, high = tau_range(params.p, params.q)
    tau = cfg.tau if cfg.tau is not None else (low + high) / 2
    Lambda = cfg.Lambda if cfg.Lambda is not None else max(params.lam, 1.0)
    recipe = subsolution_recipe(mesh, params.p, params.q, tau, Lambda, pair)
    certificate = subsolution_certificate(mesh, recipe, pair, params)

    sub = build_subsolution(mesh, pair.func, recipe.eps_bar, tau)
    upper = Field.constant(mesh, max(1.0, params.neumann_constant))
    result = monotone_iterate(mesh, sub, upper, params, recipe, MonotoneOptions(newton=newton_options(cfg)))

    rows = [
        (i, x, lo, hi)
        for i, (x, lo, hi) in enumerate(zip(mesh.nodes, result.minimal.field.values, result.maximal.field.values))
    ]
    output.csv('solution', ["index", "node", "minimal", "maximal"], rows)
    output.json('solution', {
        "mesh": mesh_metadata(mesh),
        "recipe": {
            "tau": recipe.tau,
            "eps_bar": recipe.eps_bar,
            "eps_bar_1": recipe.eps_bar_1,
            "eps_bar_2": recipe.eps_bar_2,
            "c1": recipe.c1,
            "K": recipe.K,
            "M": recipe.M,
            "Lambda": recipe.Lambda,
        },
        "certificate_ok": certificate.ok,
        "sweeps": result.iterations,
        "polished": result.polished,
        "minimal": _solution_metadata(mesh, result.minimal, pair),
        "maximal": _solution_metadata(mesh, result.maximal, pair),
        "sup_distance": float(np.max(np.abs(result.minimal.field.values - result.maximal.field.values))),
    })

def cmd_branch(cfg, out):
    """Trace a branch, or a homotopy family and its limit"""
    output = Output(out)
    mesh = cfg.mesh()
    params = cfg.params(lam=0.0)
    opts = continuation_options(cfg)

    if cfg.homotopy != "none":
        if cfg.homotopy == "alpha":
            branches = trace_family(mesh, params, alphas=cfg.alpha_list, options=opts, seed_from=cfg.seed_from)
            values = cfg.alpha_list
        else:
            branches = trace_family(mesh, params, betas=cfg.beta_list, options=opts, seed_from=cfg.seed_from)
            values = cfg.beta_list

        report = homotopy_limit(branches, step=cfg.step)
        for value, branch in zip(values, branches):
            write_branch(output, f"branch-{cfg.homotopy}-{value!r}", branch, cfg.plot_script)

        write_branch(output, 'branch', report.limit, cfg.plot_script, {
            "homotopy": {
                "parameter": cfg.homotopy,
                "values": values,
                "distances": report.distances,
                "converged": report.converged,
                "decreasing": report.decreasing,
                "diverging": report.diverging,
            }
        })
        return

    try:
        if cfg.seed_from == "bifurcation":
            branch = trace_regularized_continuum(mesh, params.alpha, params.beta, params.p, params.q, opts)
        else:
            branch = trace_from_neumann(mesh, params, opts)
    except PartialBranch as e:
        write_branch(output, 'branch', e.branch, cfg.plot_script)
        raise

    write_branch(output, 'branch', branch, cfg.plot_script)

def cmd_lambda_star(cfg, out):
    """Trivial-line contact of the critical branch on every refinement level"""
    output = Output(out)
    mesh = cfg.mesh()
    estimate = estimate_lambda_star(
        mesh,
        cfg.p,
        cfg.q,
        cfg.levels,
        continuation_options(cfg, stability=False)
    )
    output.json('lambda_star', {
        "mesh": mesh_metadata(mesh),
        "levels": estimate.levels,
        "estimates": estimate.estimates,
        "extrapolated": estimate.extrapolated,
        "lambda_max": estimate.lambda_max,
        "mean": estimate.mean,
        "spread": estimate.spread,
        "relative_spread": estimate.relative_spread,
    })
    log.info(f"lambda* = {estimate.mean!r} +- {estimate.spread!r}")

def cmd_perturb(cfg, out):
    """Dirichlet logistic solutions on enlarged intervals around (0, pi)"""
    output = Output(out)
    report = domain_perturbation_study(cfg.extent, cfg.k_list, cfg.n, cfg.p)
    rows = list(zip(
        report.k_values,
        report.h1_norms,
        report.profile_distances,
        report.extension_norms,
        report.trivial,
    ))
    output.csv('perturb', ["k", "h1_norm", "profile_distance", "extension_h1_norm", "trivial"], rows)
    output.json('perturb', {
        "k": report.k_values,
        "h1_decreasing": report.h1_decreasing,
        "profile_decreasing": report.profile_decreasing,
    })

SWEEP_HEADER = ["p", "q", "lambda", "converged", "sup_norm", "energy_defect", "residual", "mu1"]

def sweep_pair(cfg, mesh, p, q, lambdas):
    """Newton ramp along ``lambdas`` for one ``(p, q)``; rows after the first
    failure are marked unconverged"""
    params = cfg.params(p=p, q=q, lam=0.0)
    options = newton_options(cfg)
    solution = newton_solve(mesh, Field.constant(mesh, params.neumann_constant), params, options, False)

    rows = []
    failed = False
    for lam in lambdas:
        if not failed:
            try:
                solution = newton_ramp(
                    mesh, solution.field, params, [solution.params.lam, lam], options, stability=True
                )[-1]
            except (NonConvergence, DomainError) as e:
                log.debug(f"sweep p = {p}, q = {q} stopped at lambda = {lam}: {e}")
                failed = True

        if failed or solution.trivial:
            rows.append((p, q, lam, False, math.nan, math.nan, math.nan, math.nan))
            continue

        rows.append((
            p, q, lam, True,
            solution.sup_norm,
            energy_identity_defect(mesh, solution.field, solution.params),
            solution.residual_norm,
            solution.mu1,
        ))
    return rows

def run_sweep(cfg, mesh, p_list, q_list, lambdas):
    lambdas = sorted(float(i) for i in lambdas)
    grid = list(itertools.product(p_list, q_list))
    with ThreadPoolExecutor(max_workers=env.threads) as executor:
        results = executor.map(lambda pq: sweep_pair(cfg, mesh, pq[0], pq[1], lambdas), grid)
        return [row for rows in results for row in rows]

def sweep_summary(rows):
    converged = [r for r in rows if r[3] and r[2] > 0]
    return {
        "solutions": len(converged),
        "all_below_one": all(r[4] < 1 for r in converged),
        "max_sup_norm": max((r[4] for r in converged), default=math.nan),
        "max_energy_defect": max((abs(r[5]) for r in converged), default=math.nan),
    }

def cmd_sweep(cfg, out):
    """Solutions over the ``(p, q, lambda)`` grid"""
    output = Output(out)
    mesh = cfg.mesh()
    rows = run_sweep(cfg, mesh, cfg.p_list, cfg.q_list, cfg.lambdas)
    output.csv('sweep', SWEEP_HEADER, rows)
    output.json('sweep', sweep_summary(rows))

def cmd_verify(cfg, out):
    from .verify import run_scenario
    run_scenario(cfg, Output(out))

commands = {
    "eig": cmd_eig,
    "solve": cmd_solve,
    "branch": cmd_branch,
    "verify": cmd_verify,
    "lambda-star": cmd_lambda_star,
    "perturb": cmd_perturb,
    "sweep": cmd_sweep,
}
