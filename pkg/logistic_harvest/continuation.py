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

"""Pseudo-arclength continuation in ``lambda``

Branches are traced in the unknown ``(u, lambda)`` with the metric
``||du||_H1^2 + dlambda^2``. Homotopies in ``alpha`` and ``beta`` are done by
re-tracing whole branches and comparing them in the ``(lambda, sup_norm)``
plane.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import tqdm
from scipy.spatial.distance import directed_hausdorff

from .config import env
from .domain import Field, build_mesh, h1_inner, norms
from .errors import (
    DomainError,
    EstimationFailure,
    InvalidArgument,
    NonConvergence,
    NumericFailure,
    PartialBranch,
    TopologyFailure,
)
from .forms import (
    PQ_TOLERANCE,
    Params,
    Regime,
    boundary_derivative,
    boundary_map,
    energy,
    residual_vector,
)
from .newton import (
    NewtonOptions,
    stability_or_nan,
    linearize,
    newton_solve,
    scaled_residual_norm,
    trivial_threshold,
)
from .spectra import dirichlet_principal, steklov_principal
from .utils import is_strictly_decreasing

log = logging.getLogger(__name__)

# Distance (sup norm) to the constant state accepted as reaching it
NEUMANN_TOLERANCE = 1e-3

# Tail slopes of log(lambda) against log(sup_norm) within this band are
# treated as flat
TAIL_BAND = 0.05

class EndpointKind(Enum):
    TrivialLine = "trivial-line" #:
    NeumannState = "neumann-state" #:
    FoldTurnback = "fold-turnback" #:
    RangeExhausted = "range-exhausted" #:
    Truncated = "truncated" #:
    Seed = "seed" #:

@dataclass(frozen=True)
class ContinuationOptions:
    step: float = 1e-2
    max_step: float = 0.5
    max_points: int = 2000
    lambda_cap: float = 50.0
    tol: float = 1e-10
    max_iter: int = 12
    max_halvings: int = 5
    grow_after: int = 4
    grow: float = 1.3
    stability: bool = True
    progress: bool = False

@dataclass(frozen=True)
class BranchPoint:
    lam: float
    field: Field
    sup_norm: float
    h1_norm: float
    s_comp: float
    energy: float
    mu1: float
    residual_norm: float
    tangent: Optional[Tuple[np.ndarray, float]] = dc_field(default=None, repr=False, compare=False)

    def row(self):
        """Values of a branch CSV row after the index"""
        return (
            self.lam,
            self.sup_norm,
            self.h1_norm,
            self.s_comp,
            self.energy,
            self.mu1,
            self.residual_norm,
        )

@dataclass(frozen=True)
class Endpoint:
    kind: EndpointKind
    lam: float
    sup_norm: float
    # Where lambda tends to as the branch approaches the trivial line
    limit_lambda: float = math.nan

@dataclass(frozen=True)
class Fold:
    index: int
    lam: float

@dataclass
class Branch:
    points: List[BranchPoint]
    params: Params
    endpoints: Tuple[Endpoint, Endpoint]
    folds: List[Fold]
    step: float
    diagnostic: Optional[str] = None

    @property
    def mesh(self):
        return self.points[0].field.mesh

    @property
    def lambdas(self):
        return np.array([i.lam for i in self.points])

    @property
    def sup_norms(self):
        return np.array([i.sup_norm for i in self.points])

    @property
    def h1_norms(self):
        return np.array([i.h1_norm for i in self.points])

    @property
    def lambda_max(self):
        return float(np.max(self.lambdas))

    @property
    def lambda_bar(self):
        """Largest fold ``lambda``, ``nan`` without folds"""
        return fold_lambda(self.folds)

    def __len__(self):
        return len(self.points)

# Extended system

def _boundary_vector(mesh, u, params):
    """``d residual / d lambda = B h(u)``"""
    v = np.zeros(mesh.size)
    bd = mesh.boundary
    v[bd] = mesh.boundary_weights * boundary_map(u[bd], params)
    return v

def _residual_at(mesh, u, lam, params):
    # lambda may be slightly negative inside the corrector
    return residual_vector(mesh, u, params.with_lambda(0.0)) + lam * _boundary_vector(mesh, u, params)

def _jacobian_at(mesh, u, lam, params, previous=None):
    if lam >= 0:
        return linearize(mesh, u, params.with_lambda(lam), previous)

    bd = mesh.boundary
    diagonal = np.zeros(mesh.size)
    try:
        diagonal[bd] = lam * mesh.boundary_weights * boundary_derivative(u[bd], params)
    except DomainError:
        pass
    return (linearize(mesh, u, params.with_lambda(0.0)) + sp.diags(diagonal)).tocsr()

def _clamp(mesh, u, params):
    if params.alpha == 0:
        bd = mesh.boundary
        u[bd] = np.maximum(u[bd], 0.0)
    return u

def _w_norm(mesh, du, dl):
    return math.sqrt(max(float(du @ (mesh.h1_gram @ du)), 0.0) + dl * dl)

def _normalize(mesh, du, dl):
    size = _w_norm(mesh, du, dl)
    if not size > 0:
        raise InvalidArgument("zero tangent")
    return du / size, dl / size

def _bordered_solve(J, column, row, corner, rhs):
    matrix = sp.bmat([
        [J, sp.csr_matrix(column.reshape(-1, 1))],
        [sp.csr_matrix(row.reshape(1, -1)), sp.csr_matrix([[corner]])],
    ], format='csc')
    x = spla.spsolve(matrix, rhs)
    if not np.all(np.isfinite(x)):
        raise NumericFailure("singular bordered system")
    return x[:-1], float(x[-1])

def make_point(mesh, u, lam, params, pair, stability=True, tangent=None):
    """Evaluate the per-point diagnostics of a solution ``u`` at ``lam``"""
    field = Field(mesh, u)
    n = norms(mesh, field)
    p = params.with_lambda(lam)
    r = residual_vector(mesh, field.values.copy(), p)
    return BranchPoint(
        lam=float(lam),
        field=field,
        sup_norm=n.sup,
        h1_norm=n.h1,
        s_comp=h1_inner(mesh, field, pair.func),
        energy=energy(mesh, field, params.beta),
        mu1=stability_or_nan(mesh, field.values, p) if stability else math.nan,
        residual_norm=scaled_residual_norm(mesh, field.values, r),
        tangent=tangent,
    )

def start_from_neumann(mesh, params, pair=None, stability=True):
    """Branch point at the constant state ``(0, beta^(1/(p-1)))`` with its
    tangent ``(-J^-1 B h(u0), 1)`` normalized in the branch metric
    """
    if params.lam != 0:
        raise InvalidArgument(f"Neumann start needs lambda = 0, got {params.lam}")

    pair = pair or dirichlet_principal(mesh)
    u0 = np.full(mesh.size, params.neumann_constant)
    J = linearize(mesh, u0, params)
    du = spla.spsolve(J.tocsc(), -_boundary_vector(mesh, u0, params))
    if not np.all(np.isfinite(du)):
        raise NumericFailure("constant state is degenerate, singular Jacobian")

    point = make_point(mesh, u0, 0.0, params, pair, stability=True)
    if not point.mu1 > 0:
        raise NumericFailure(f"constant state is degenerate, mu1 = {point.mu1!r}")

    tangent = _normalize(mesh, du, 1.0)
    if not stability:
        point = replace(point, mu1=math.nan)
    return replace(point, tangent=tangent)

def _classify(mesh, point, params, at_axis=False):
    thr = trivial_threshold(mesh)
    if point.sup_norm < thr:
        return EndpointKind.TrivialLine

    distance = float(np.max(np.abs(point.field.values - params.neumann_constant)))
    if point.lam <= 1e-12 and distance <= NEUMANN_TOLERANCE:
        return EndpointKind.NeumannState
    if at_axis:
        return EndpointKind.FoldTurnback
    return EndpointKind.Seed

class _Corrector:
    def __init__(self, mesh, params, options):
        self.mesh = mesh
        self.params = params
        self.options = options

    def __call__(self, u, lam, tangent, ds):
        """Predict along ``tangent`` and correct on the hyperplane orthogonal to it

        Returns ``None`` on failure.
        """
        mesh, params, opts = self.mesh, self.params, self.options
        tu, tl = tangent
        u_pred = u + ds * tu
        l_pred = lam + ds * tl
        row = mesh.h1_gram @ tu

        x, xl = u_pred.copy(), l_pred
        previous = u
        for it in range(opts.max_iter + 1):
            x = _clamp(mesh, x, params)
            try:
                F = _residual_at(mesh, x, xl, params)
            except DomainError:
                return None

            N = float(row @ (x - u_pred)) + tl * (xl - l_pred)
            norm = scaled_residual_norm(mesh, x, F)
            if norm <= opts.tol and abs(N) <= opts.tol:
                return x, xl, it
            if not math.isfinite(norm) or it == opts.max_iter:
                return None

            try:
                J = _jacobian_at(mesh, x, xl, params, previous)
                column = _boundary_vector(mesh, x, params)
                du, dl = _bordered_solve(J, column, row, tl, -np.append(F, N))
            except (DomainError, NumericFailure):
                return None

            previous = x
            x, xl = x + du, xl + dl

        return None

def _interpolate(u0, l0, u1, l1, target):
    theta = (target - l0) / (l1 - l0)
    return u0 + theta * (u1 - u0)

def trace_branch(mesh, seed, params, tangent=None, options=None, pair=None):
    """Trace a branch from ``seed`` by pseudo-arclength continuation

    Tracing stops when ``lambda`` crosses below 0 or above ``lambda_cap``
    (the crossing point is solved exactly), when the sup norm drops below
    the trivial threshold, or after ``max_points`` points.

    Raises
    -------
    PartialBranch
        The corrector failed after ``max_halvings`` consecutive step
        halvings. The branch traced so far is attached.
    """
    opts = options or ContinuationOptions()
    pair = pair or dirichlet_principal(mesh)
    tangent = tangent if tangent is not None else seed.tangent
    if tangent is None:
        raise InvalidArgument("seed has no tangent")

    tu, tl = tangent
    tu = np.asarray(tu, dtype=float)
    if _w_norm(mesh, tu, tl) == 0:
        raise InvalidArgument("seed tangent is zero")
    tu, tl = _normalize(mesh, tu, tl)

    if seed.residual_norm > opts.tol:
        raise InvalidArgument(f"seed is not a solution (residual {seed.residual_norm:.3e})")

    thr = trivial_threshold(mesh)
    newton_opts = NewtonOptions(tol=opts.tol, max_iter=max(opts.max_iter, 30))
    correct = _Corrector(mesh, params, opts)

    points = [seed]
    start = Endpoint(_classify(mesh, seed, params), seed.lam, seed.sup_norm, seed.lam)

    def finish(kind, diagnostic=None):
        end = points[-1]
        limit = math.nan
        branch = Branch(points, params.with_lambda(points[0].lam), (start, None), [], opts.step, diagnostic)
        if kind == EndpointKind.TrivialLine and len(points) > 1:
            limit = tail_limit(branch)
        branch.endpoints = (start, Endpoint(kind, end.lam, end.sup_norm, limit))
        branch.folds = detect_folds(branch)
        log.info(
            f"Traced {len(points)} points, lambda_max = {branch.lambda_max!r}, " \
            f"end {kind.value} at lambda = {end.lam!r}"
        )
        return branch

    def solve_at(u0, l0, u1, l1, target):
        guess = _clamp(mesh, _interpolate(u0, l0, u1, l1, target), params)
        solution = newton_solve(mesh, Field(mesh, guess), params.with_lambda(target), newton_opts, False)
        return make_point(mesh, solution.field.values.copy(), target, params, pair, opts.stability)

    if seed.lam >= opts.lambda_cap:
        return finish(EndpointKind.RangeExhausted)

    u, lam = seed.field.values.copy(), seed.lam
    ds = opts.step
    clean = 0
    halvings = 0
    kind = EndpointKind.Truncated

    progress_bar = tqdm.tqdm(
        total=opts.max_points,
        desc='branch',
        unit='pt',
        disable=env.no_progress_bar or not opts.progress,
    )
    progress_bar.update(1)

    try:
        while len(points) < opts.max_points:
            result = correct(u, lam, (tu, tl), ds)
            if result is not None:
                u_new, l_new, iterations = result
                if _w_norm(mesh, u_new - u, l_new - lam) > 2 * ds:
                    result = None

            if result is None:
                halvings += 1
                clean = 0
                if halvings > opts.max_halvings:
                    branch = finish(EndpointKind.Truncated, f"corrector failed at lambda = {lam!r}")
                    raise PartialBranch(
                        f"corrector failed after {opts.max_halvings} step halvings at lambda = {lam!r}",
                        branch=branch
                    )
                ds /= 2
                log.warning(f"Corrector failed at lambda = {lam!r}, step halved to {ds!r}")
                continue

            halvings = 0
            tu, tl = _normalize(mesh, u_new - u, l_new - lam)

            if l_new < 0:
                points.append(solve_at(u, lam, u_new, l_new, 0.0))
                kind = _classify(mesh, points[-1], params, at_axis=True)
                break

            if l_new > opts.lambda_cap:
                points.append(solve_at(u, lam, u_new, l_new, opts.lambda_cap))
                kind = EndpointKind.RangeExhausted
                break

            point = make_point(mesh, u_new, l_new, params, pair, opts.stability)
            points.append(point)
            progress_bar.update(1)

            if point.sup_norm < thr and points[-2].sup_norm >= thr:
                kind = EndpointKind.TrivialLine
                break

            u, lam = u_new, l_new
            clean = clean + 1 if iterations <= 4 else 0
            if clean >= opts.grow_after:
                ds = min(ds * opts.grow, opts.max_step)
                clean = 0
    except (NonConvergence, DomainError) as e:
        branch = finish(EndpointKind.Truncated, f"final solve failed: {e}")
        raise PartialBranch(f"final solve of the branch failed: {e}", branch=branch) from None
    finally:
        progress_bar.close()

    return finish(kind)

# Branch analysis

def _arclength(branch):
    mesh = branch.mesh
    s = [0.0]
    for a, b in zip(branch.points, branch.points[1:]):
        s.append(s[-1] + _w_norm(mesh, b.field.values - a.field.values, b.lam - a.lam))
    return np.array(s)

def detect_folds(branch):
    """Turning points of ``lambda`` along the branch

    ``lambda`` at a fold is the vertex of the parabola through the three
    points around the sign change of the ``lambda`` increment.
    """
    if len(branch.points) < 3:
        return []

    lam = branch.lambdas
    s = _arclength(branch)
    inc = np.diff(lam)
    folds = []
    for i in range(1, inc.size):
        if inc[i - 1] * inc[i] >= 0:
            continue

        value = float(lam[i])
        x = s[i - 1:i + 2] - s[i]
        coef = np.polyfit(x, lam[i - 1:i + 2], 2)
        if coef[0] != 0:
            vertex = -coef[1] / (2 * coef[0])
            if x[0] <= vertex <= x[2]:
                value = float(np.polyval(coef, vertex))

        # the vertex of a maximum can only lie above the sampled point
        if inc[i - 1] > 0:
            value = max(value, float(lam[i]))
        else:
            value = min(value, float(lam[i]))
        folds.append(Fold(i, value))
    return folds

def fold_lambda(folds):
    if not folds:
        return math.nan
    return max(i.lam for i in folds)

def _tail(branch, count):
    points = branch.points
    if points[0].sup_norm < points[-1].sup_norm:
        tail = points[:count]
    else:
        tail = points[-count:]
    return [i for i in tail if i.lam > 0 and i.sup_norm > 0]

def tail_exponent(branch, count=5):
    """Slope of ``log(lambda)`` against ``log(sup_norm)`` at the
    small-amplitude end of the branch

    Small solutions balance ``lambda ~ s^(1-pq)``, so the slope is near
    ``1 - pq``: positive when ``lambda -> 0``, zero when ``lambda`` tends to
    a positive limit and negative when ``lambda -> inf``.
    """
    tail = _tail(branch, count)
    if len(tail) < 3:
        return math.nan

    x = np.log([i.sup_norm for i in tail])
    y = np.log([i.lam for i in tail])
    if np.ptp(x) == 0:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])

def tail_limit(branch, count=5):
    """Limit of ``lambda`` as the branch approaches the trivial line"""
    gamma = tail_exponent(branch, count)
    if math.isnan(gamma):
        return math.nan
    if gamma > TAIL_BAND:
        return 0.0
    if gamma < -TAIL_BAND:
        return math.inf

    tail = _tail(branch, count)
    x = np.array([i.sup_norm for i in tail])
    y = np.array([i.lam for i in tail])
    coef = np.polyfit(x, y, 1)
    return max(float(coef[1]), 0.0)

def limit_regime(gamma):
    """Regime suggested by a tail exponent"""
    if math.isnan(gamma):
        return None
    if gamma > TAIL_BAND:
        return Regime.Sublinear
    if gamma < -TAIL_BAND:
        return Regime.Superlinear
    return Regime.Critical

@dataclass(frozen=True)
class Crossing:
    index: int
    theta: float
    field: Field

def solutions_at(branch, lam, polish=False, options=None):
    """All places where the branch crosses ``lambda = lam``

    Fields are linearly interpolated between the neighbouring points, or
    Newton-polished from there with ``polish=True``.
    """
    crossings = []
    points = branch.points
    mesh = branch.mesh
    for i, (a, b) in enumerate(zip(points, points[1:])):
        if a.lam == b.lam or (a.lam - lam) * (b.lam - lam) > 0:
            continue
        # a crossing exactly at a point is counted once
        if b.lam == lam and i + 2 < len(points):
            continue

        theta = (lam - a.lam) / (b.lam - a.lam)
        values = a.field.values + theta * (b.field.values - a.field.values)
        field = Field(mesh, _clamp(mesh, values.copy(), branch.params))
        if polish:
            solution = newton_solve(mesh, field, branch.params.with_lambda(lam), options, False)
            field = solution.field
        crossings.append(Crossing(i, float(theta), field))

    return crossings

def _resample(branch, samples):
    xy = np.column_stack([branch.lambdas, branch.sup_norms])
    seg = np.hypot(*np.diff(xy, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return np.repeat(xy[:1], samples, axis=0)

    t = np.linspace(0, s[-1], samples)
    return np.column_stack([np.interp(t, s, xy[:, 0]), np.interp(t, s, xy[:, 1])])

def hausdorff_distance(a, b, samples=200):
    """Hausdorff distance of two branches as polylines in the
    ``(lambda, sup_norm)`` plane, both resampled at equal arclength
    """
    pa, pb = _resample(a, samples), _resample(b, samples)
    return max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])

@dataclass(frozen=True)
class ConvergenceReport:
    distances: List[float]
    converged: bool
    decreasing: bool
    diverging: bool
    limit: Branch
    step: float

def homotopy_limit(branches, step=None):
    """Hausdorff distances between consecutive branches of a homotopy family
    (``alpha_n -> 0`` or ``beta_n -> 1``)

    The family is declared converged when the last distance is within twice
    the continuation step; the last branch is the numerical limit.
    """
    branches = list(branches)
    if len(branches) < 3:
        raise InvalidArgument(f"homotopy limit needs at least 3 branches, got {len(branches)}")

    step = step if step is not None else branches[-1].step
    distances = [hausdorff_distance(a, b) for a, b in zip(branches, branches[1:])]
    decreasing = is_strictly_decreasing(distances)
    diverging = all(b >= a for a, b in zip(distances, distances[1:]))
    if diverging:
        log.warning(f"Homotopy family does not converge, distances {distances}")

    return ConvergenceReport(
        distances=distances,
        converged=distances[-1] <= 2 * step,
        decreasing=decreasing,
        diverging=diverging,
        limit=branches[-1],
        step=step,
    )

def _tolerate_partial(func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except PartialBranch as e:
        log.warning(f"Using partial branch: {e}")
        return e.branch

def trace_from_neumann(mesh, params, options=None, pair=None):
    """Branch of ``params`` starting at the constant state at ``lambda = 0``"""
    opts = options or ContinuationOptions()
    pair = pair or dirichlet_principal(mesh)
    seed = start_from_neumann(mesh, params.with_lambda(0.0), pair, opts.stability)
    return trace_branch(mesh, seed, params.with_lambda(0.0), options=opts, pair=pair)

def trace_family(mesh, params, alphas=None, betas=None, options=None, seed_from="neumann"):
    """Trace one branch per ``alpha`` (or per ``beta``) in parallel

    Branches come back in parameter order. Partial branches are kept.
    """
    if (alphas is None) == (betas is None):
        raise InvalidArgument("give exactly one of alphas and betas")

    pair = dirichlet_principal(mesh)
    if alphas is not None:
        family = [replace(params, alpha=a, lam=0.0) for a in alphas]
    else:
        family = [replace(params, beta=b, lam=0.0) for b in betas]

    def trace(member):
        if seed_from == "bifurcation":
            return _tolerate_partial(
                trace_regularized_continuum,
                mesh, member.alpha, member.beta, member.p, member.q, options, pair
            )
        return _tolerate_partial(trace_from_neumann, mesh, member, options, pair)

    with ThreadPoolExecutor(max_workers=env.threads) as executor:
        return list(executor.map(trace, family))

def trace_regularized_continuum(mesh, alpha, beta, p, q, options=None, pair=None):
    """Continuum of the regularized problem bifurcating from the trivial line
    at ``(lambda_{alpha,beta}, 0)``

    The branch starts at the solution of amplitude ``delta = 10 h^2`` along
    ``phi_beta``, heads to larger amplitude and is traced until it reaches
    ``lambda = 0``, where it must end at the constant ``beta^(1/(p-1))``.

    Raises
    -------
    TopologyFailure
        The continuum did not reach the constant state
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if not 0 < beta < 1:
        raise InvalidArgument(f"beta must be in (0, 1), got {beta}")

    opts = options or ContinuationOptions()
    pair = pair or dirichlet_principal(mesh)
    params = Params(p=p, q=q, lam=0.0, alpha=alpha, beta=beta)
    steklov = steklov_principal(mesh, beta, beta_omega=pair.value)
    lam0 = steklov.value * alpha ** (1 - q)

    phi = steklov.func.values
    row = mesh.mass @ phi
    delta = 10 * mesh.h ** 2
    target = delta * float(row @ phi)

    u, lam = delta * phi, lam0
    for _ in range(max(opts.max_iter, 30)):
        F = _residual_at(mesh, u, lam, params)
        c = float(row @ u) - target
        if scaled_residual_norm(mesh, u, F) <= opts.tol and abs(c) <= opts.tol * target:
            break

        J = _jacobian_at(mesh, u, lam, params)
        du, dl = _bordered_solve(J, _boundary_vector(mesh, u, params), row, 0.0, -np.append(F, c))
        u, lam = u + du, lam + dl
    else:
        raise NonConvergence(
            f"no solution of amplitude {delta!r} near the bifurcation point {lam0!r}",
            iterate=Field(mesh, u)
        )

    J = _jacobian_at(mesh, u, lam, params)
    rhs = np.zeros(mesh.size + 1)
    rhs[-1] = 1.0
    du, dl = _bordered_solve(J, _boundary_vector(mesh, u, params), row, 0.0, rhs)
    tangent = _normalize(mesh, du, dl)

    seed = make_point(mesh, u, lam, params, pair, opts.stability, tangent=tangent)
    log.info(f"Regularized continuum alpha = {alpha}, beta = {beta} leaves the trivial line at {lam!r}")

    branch = trace_branch(mesh, seed, params, options=opts, pair=pair)
    start = Endpoint(EndpointKind.TrivialLine, seed.lam, seed.sup_norm, lam0)
    end = branch.endpoints[1]
    branch.endpoints = (start, end)

    if end.kind != EndpointKind.NeumannState:
        branch.diagnostic = (
            f"continuum ended as {end.kind.value} at lambda = {end.lam!r}, " \
            f"sup = {end.sup_norm!r} instead of the constant {params.neumann_constant!r}"
        )
        raise TopologyFailure(branch.diagnostic, branch=branch)

    return branch

@dataclass(frozen=True)
class LambdaStarEstimate:
    levels: List[int]
    estimates: List[float]
    extrapolated: List[float]
    lambda_max: List[float]
    mean: float
    spread: float

    @property
    def relative_spread(self):
        return self.spread / self.mean if self.mean else math.inf

def _contact_lambda(branch):
    """``lambda`` where the sup norm drops through the trivial threshold"""
    thr = trivial_threshold(branch.mesh)
    a, b = branch.points[-2], branch.points[-1]
    if a.sup_norm == b.sup_norm:
        return b.lam
    theta = (a.sup_norm - thr) / (a.sup_norm - b.sup_norm)
    return a.lam + theta * (b.lam - a.lam)

def estimate_lambda_star(mesh, p, q, levels=None, options=None):
    """Estimate where the critical (``pq = 1``) branch from ``(0, 1)`` meets
    the trivial line, on every refinement level in ``levels``

    Raises
    -------
    EstimationFailure
        A branch did not reach the trivial line at a positive ``lambda``
    """
    if abs(p * q - 1) > PQ_TOLERANCE:
        raise InvalidArgument(f"lambda* is defined for p*q = 1, got {p * q}")

    levels = [int(i) for i in (levels or [mesh.n])]
    opts = options or ContinuationOptions(stability=False)
    params = Params(p=p, q=q, lam=0.0, alpha=0.0, beta=1.0)

    def trace(n):
        level_mesh = build_mesh(mesh.kind, mesh.extent, n)
        return trace_from_neumann(level_mesh, params, opts)

    with ThreadPoolExecutor(max_workers=env.threads) as executor:
        try:
            branches = list(executor.map(trace, levels))
        except PartialBranch as e:
            raise EstimationFailure(f"branch could not be traced to the trivial line: {e}") from None

    estimates = []
    extrapolated = []
    for n, branch in zip(levels, branches):
        end = branch.endpoints[1]
        if end.kind != EndpointKind.TrivialLine or not end.lam > 0:
            raise EstimationFailure(
                f"n = {n}: branch ended as {end.kind.value} at lambda = {end.lam!r}, " \
                "not on the trivial line at a positive lambda"
            )
        if end.limit_lambda == 0:
            raise EstimationFailure(f"n = {n}: branch tends to the trivial line at lambda = 0")

        estimates.append(_contact_lambda(branch))
        extrapolated.append(end.limit_lambda)
        log.info(f"n = {n}: branch meets the trivial line at lambda = {estimates[-1]!r}")

    return LambdaStarEstimate(
        levels=levels,
        estimates=estimates,
        extrapolated=extrapolated,
        lambda_max=[b.lambda_max for b in branches],
        mean=float(np.mean(estimates)),
        spread=float(np.ptp(estimates)),
    )
