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

"""Damped Newton solves, the explicit subsolution ``eps (phi_Omega + eps^tau)``
and the sub/supersolution monotone iteration.
"""

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import List

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import Field, check_field, norms
from .errors import (
    DomainError,
    InvalidArgument,
    MonotonicityFailure,
    NonConvergence,
    NumericFailure,
)
from .forms import (
    Params,
    boundary_derivative,
    boundary_map,
    bulk_map,
    jacobian_matrix,
    residual_vector,
)
from .spectra import linearized_stability

log = logging.getLogger(__name__)

# Boundary values below this are treated as zero when alpha = 0
BOUNDARY_FLOOR = 1e-12

@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-10
    max_iter: int = 50
    damping: bool = True
    min_step: float = 2.0 ** -20

@dataclass(frozen=True)
class MonotoneOptions:
    max_sweeps: int = 2000
    # Sweeps settle once no node moves by more than this times 1 + max |upper|
    stagnation: float = 1e-6
    # Slack allowed in the ordering checks and the bracket test of polished roots
    order_tol: float = 1e-8
    newton: NewtonOptions = dc_field(default_factory=NewtonOptions)

@dataclass(frozen=True)
class Solution:
    """A converged discrete solution"""
    field: Field
    params: Params
    residual_norm: float
    mu1: float
    iterations: int
    trivial: bool = False

    @property
    def sup_norm(self):
        return self.field.sup

    @property
    def boundary_min(self):
        return float(np.min(self.field.boundary_values))

def trivial_threshold(mesh):
    """Sup norms below ``10 h^2`` cannot be told apart from zero"""
    return 10 * mesh.h ** 2

def scaled_residual_norm(mesh, u, r):
    """``||r|| / (1 + ||u||_H1)``"""
    h1 = math.sqrt(max(float(u @ (mesh.h1_gram @ u)), 0.0))
    return float(np.linalg.norm(r)) / (1 + h1)

def linearize(mesh, u, params, previous=None):
    """Jacobian at ``u`` with the fallback for ``alpha = 0``

    Where a boundary value is below :data:`BOUNDARY_FLOOR` the boundary
    derivative is taken at the ``previous`` iterate instead, or left out if
    that one is small too.
    """
    if params.alpha > 0 or params.lam == 0:
        return jacobian_matrix(mesh, u, params)

    bd = mesh.boundary
    ub = u[bd]
    if np.all(ub > BOUNDARY_FLOOR):
        return jacobian_matrix(mesh, u, params)

    frozen = ub.copy()
    if previous is not None:
        small = frozen <= BOUNDARY_FLOOR
        frozen[small] = previous[bd][small]

    derivative = np.zeros(bd.size)
    usable = frozen > BOUNDARY_FLOOR
    if np.any(usable):
        derivative[usable] = boundary_derivative(frozen[usable], params)
    log.debug(f"boundary derivative frozen at {np.count_nonzero(~usable)} node(s) without a usable value")

    diagonal = np.zeros(mesh.size)
    diagonal[bd] = params.lam * mesh.boundary_weights * derivative
    return (jacobian_matrix(mesh, u, params, boundary=False) + sp.diags(diagonal)).tocsr()

def _admissible(mesh, u, params):
    # alpha = 0 flux is only defined for non-negative boundary values
    if params.alpha == 0:
        bd = mesh.boundary
        u[bd] = np.maximum(u[bd], 0.0)
    return u

def stability_or_nan(mesh, u, params):
    try:
        return linearized_stability(mesh, Field(mesh, u), params)
    except (DomainError, NumericFailure):
        return math.nan

def damped_newton(x0, residual, jacobian, measure, options=None, admissible=None, wrap=None):
    """Damped Newton iteration on a square system

    ``residual(x)`` returns the residual vector, ``jacobian(x, previous)``
    its sparse Jacobian and ``measure(x, r)`` the scaled norm compared
    against ``options.tol``. Trial points go through ``admissible`` when it
    is given, and a trial whose residual raises :class:`DomainError` is
    halved like a rejected one.

    Returns ``(x, r, norm, iterations)``.

    Raises
    -------
    NonConvergence
        ``max_iter`` exceeded or the line search fell below ``min_step``.
        The best iterate, passed through ``wrap``, is attached.
    """
    opts = options or NewtonOptions()
    wrap = wrap or (lambda v: v)

    x = np.array(x0, dtype=float)
    r = residual(x)
    norm = measure(x, r)
    previous = None

    def fail(msg):
        raise NonConvergence(msg, iterate=wrap(x), residual_norm=norm)

    iterations = 0
    while norm > opts.tol:
        if iterations >= opts.max_iter:
            fail(f"Newton did not converge in {opts.max_iter} iterations (residual {norm:.3e})")

        J = jacobian(x, previous)
        dx = spla.spsolve(J.tocsc(), -r)
        if not np.all(np.isfinite(dx)):
            fail("singular Jacobian in Newton step")

        t = 1.0
        while True:
            trial = x + t * dx
            if admissible is not None:
                trial = admissible(trial)
            try:
                r_trial = residual(trial)
            except DomainError:
                r_trial = None

            if r_trial is not None:
                trial_norm = measure(trial, r_trial)
                if not opts.damping or trial_norm < (1 - 1e-4 * t) * norm:
                    break

            t /= 2
            if t < opts.min_step:
                fail(f"line search failed at iteration {iterations} (residual {norm:.3e})")

        if t < 1:
            log.debug(f"Newton step damped to {t!r}")

        previous = x
        x, r, norm = trial, r_trial, trial_norm
        iterations += 1
        log.debug(f"Newton iteration {iterations}: residual {norm:.3e}")

    return x, r, norm, iterations

def newton_solve(mesh, u0, params, options=None, stability=True):
    """Solve the discrete problem by damped Newton from ``u0``

    The returned :class:`Solution` may be the trivial root; it is flagged with
    ``trivial = True`` when its sup norm is below :func:`trivial_threshold`.

    Raises
    -------
    NonConvergence
        ``max_iter`` exceeded or the line search fell below ``min_step``.
        The best iterate is attached.
    """
    check_field(mesh, u0)

    u, _, norm, iterations = damped_newton(
        u0.values,
        residual=lambda x: residual_vector(mesh, x, params),
        jacobian=lambda x, previous: linearize(mesh, x, params, previous),
        measure=lambda x, r: scaled_residual_norm(mesh, x, r),
        options=options,
        admissible=lambda x: _admissible(mesh, x, params),
        wrap=lambda x: Field(mesh, x),
    )

    field = Field(mesh, u)
    mu1 = stability_or_nan(mesh, u, params) if stability else math.nan
    return Solution(
        field=field,
        params=params,
        residual_norm=norm,
        mu1=mu1,
        iterations=iterations,
        trivial=field.sup < trivial_threshold(mesh),
    )

def newton_ramp(mesh, u0, params, lambdas, options=None, stability=False, max_depth=12):
    """Natural-parameter continuation of Newton solves

    Solves at every ``lambda`` of ``lambdas`` in order, each solve seeded with
    the previous one. ``u0`` must be a solution (or a good guess) at
    ``lambdas[0]``. Failing increments are bisected up to ``max_depth``
    times.

    Returns
    --------
    List[:class:`Solution`]
        One solution per entry of ``lambdas``
    """
    lambdas = [float(i) for i in lambdas]
    if not lambdas:
        raise InvalidArgument("lambda ramp is empty")

    first = newton_solve(mesh, u0, params.with_lambda(lambdas[0]), options, stability)
    solutions = [first]

    def advance(start, lam_to, depth):
        try:
            return newton_solve(mesh, start.field, params.with_lambda(lam_to), options, stability)
        except (NonConvergence, DomainError):
            if depth >= max_depth:
                raise
        middle = (start.params.lam + lam_to) / 2
        log.debug(f"bisecting lambda ramp at {middle!r}")
        halfway = advance(start, middle, depth + 1)
        return advance(halfway, lam_to, depth + 1)

    for lam in lambdas[1:]:
        solutions.append(advance(solutions[-1], lam, 0))

    return solutions

# Subsolution

def build_subsolution(mesh, phi, eps, tau):
    """``eps (phi + eps^tau)``, equal to ``eps^(1+tau)`` on the boundary"""
    check_field(mesh, phi)
    if eps <= 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    return Field(mesh, eps * (phi.values + eps ** tau))

@dataclass(frozen=True)
class SubsolutionRecipe:
    tau: float
    eps_bar: float
    eps_bar_1: float
    eps_bar_2: float
    c1: float
    K: float
    M: float
    Lambda: float
    p: float
    q: float

    @property
    def boundary_value(self):
        """``eps_bar^(1+tau)``, the minimum of the subsolution"""
        return self.eps_bar ** (1 + self.tau)

def tau_range(p, q):
    """Open interval of admissible ``tau``"""
    return (1 - q) / q, p - 1

def subsolution_recipe(mesh, p, q, tau, Lambda, pair):
    """Constants making ``eps (phi_Omega + eps^tau)`` a subsolution for every
    ``lambda`` in ``[0, Lambda]`` and ``eps <= eps_bar``

    ``pair`` is the Dirichlet principal pair of ``mesh``. Both bounds on
    ``eps`` are strict, so 0.99 of each is used.
    """
    if not p * q > 1:
        raise InvalidArgument(f"subsolution needs p*q > 1, got {p * q}")

    low, high = tau_range(p, q)
    if not low < tau < high:
        raise InvalidArgument(f"tau must be in ({low}, {high}), got {tau}")
    if not Lambda > 0:
        raise InvalidArgument(f"Lambda must be positive, got {Lambda}")

    c1 = pair.c1
    if not c1 > 0:
        raise NumericFailure(f"boundary flux of phi_Omega is not positive: {c1!r}")

    max_phi = float(np.max(pair.func.values))
    eps_bar_1 = 0.99 * min(1.0, (1 / (1 + max_phi) ** p) ** (1 / (p - tau - 1)))
    eps_bar_2 = 0.99 * (c1 / Lambda) ** (1 / (q + tau * q - 1))
    eps_bar = min(eps_bar_1, eps_bar_2)

    K = p + 1.0
    M = Lambda * q * (eps_bar ** (1 + tau)) ** (q - 1) + 1
    return SubsolutionRecipe(
        tau=tau,
        eps_bar=eps_bar,
        eps_bar_1=eps_bar_1,
        eps_bar_2=eps_bar_2,
        c1=c1,
        K=K,
        M=M,
        Lambda=Lambda,
        p=p,
        q=q,
    )

@dataclass(frozen=True)
class SubsolutionCertificate:
    lambdas: np.ndarray
    interior_max: np.ndarray
    boundary_max: np.ndarray

    @property
    def ok(self):
        return bool(np.all(self.interior_max <= 0) and np.all(self.boundary_max < 0))

def subsolution_certificate(mesh, recipe, pair, params, samples=10):
    """Check the residual signs of the subsolution at ``eps_bar`` for
    ``samples`` values of ``lambda`` spread over ``[0, Lambda]``
    """
    sub = build_subsolution(mesh, pair.func, recipe.eps_bar, recipe.tau)
    lambdas = np.linspace(0, recipe.Lambda, samples)
    interior_max = np.empty(samples)
    boundary_max = np.empty(samples)
    for i, lam in enumerate(lambdas):
        r = residual_vector(mesh, sub.values.copy(), params.with_lambda(lam))
        interior_max[i] = np.max(r[mesh.interior])
        boundary_max[i] = np.max(r[mesh.boundary])

    cert = SubsolutionCertificate(lambdas, interior_max, boundary_max)
    log.debug(f"subsolution certificate over [0, {recipe.Lambda}]: ok = {cert.ok}")
    return cert

# Monotone iteration

@dataclass(frozen=True)
class MonotoneResult:
    minimal: Solution
    maximal: Solution
    iterations: int
    polished: bool = False
    history: List[float] = dc_field(default_factory=list)

class _Sweeper:
    """One monotone sweep

    .. code-block:: text

        (A + K M + Mb B) u_next = (K + beta) M u - M g(u) + Mb B u - lam B h(u)

    The right side is non-decreasing in ``u`` while ``K >= g'(u) - beta`` and
    ``Mb >= lam h'(u)``, and the matrix is an M-matrix, so the map preserves
    order.
    """

    def __init__(self, mesh, params, K, M_cap):
        self.mesh = mesh
        self.params = params
        self.K = K
        self.M_cap = M_cap
        self._factors = {}

    def boundary_constant(self, low, high):
        """``lam max h' + 1`` over boundary values between ``low`` and ``high``, capped"""
        params = self.params
        if params.lam == 0:
            return 1.0

        floor = float(np.min(low))
        if params.alpha == 0 and floor <= 0:
            return self.M_cap
        ends = np.array([floor, max(floor, float(np.max(high)))])
        value = params.lam * float(np.max(boundary_derivative(ends, params))) + 1
        return min(value, self.M_cap)

    def _solver(self, Mb):
        try:
            return self._factors[Mb]
        except KeyError:
            pass

        mesh = self.mesh
        matrix = mesh.stiffness + self.K * mesh.mass + Mb * mesh.boundary_mass
        solve = spla.factorized(matrix.tocsc())
        self._factors = {Mb: solve}
        return solve

    def __call__(self, u, Mb):
        mesh, params = self.mesh, self.params
        w = mesh.quad_weights
        rhs = w * ((self.K + params.beta) * u - bulk_map(u, params.p))
        if params.lam > 0:
            bd = mesh.boundary
            rhs[bd] += mesh.boundary_weights * (Mb * u[bd] - params.lam * boundary_map(u[bd], params))
        else:
            rhs += Mb * (mesh.boundary_mass @ u)
        return self._solver(Mb)(rhs)

def _sign_tol(mesh, u, tol):
    return tol * (1 + norms(mesh, Field(mesh, u)).h1)

def _same_root(a, b, tol):
    return float(np.max(np.abs(a.field.values - b.field.values))) <= tol

def monotone_iterate(mesh, sub, super_, params, recipe, options=None):
    """Minimal and maximal solutions between an ordered sub/supersolution pair

    Increasing sweeps start from ``sub`` and decreasing sweeps from
    ``super_``. Both use one boundary constant bounding ``lam h'`` over the
    boundary values of the current bracket, and a sweep that loses its order is
    redone with ``recipe.M``. Once the sweeps settle, the lower limit is
    polished by Newton into the minimal solution and the upper limit into the
    maximal one. Each polished root must stay between the two limits.

    Raises
    -------
    MonotonicityFailure
        Iterates lost their order, even with ``recipe.M``
    NonConvergence
        Sweeps did not settle in ``max_sweeps`` or a limit could not be
        polished; the iterate pair is attached
    """
    check_field(mesh, sub)
    check_field(mesh, super_)
    opts = options or MonotoneOptions()
    newton_opts = opts.newton

    lower = sub.values.copy()
    upper = super_.values.copy()
    if np.any(lower > upper):
        raise MonotonicityFailure("subsolution is not below the supersolution", iterates=(sub, super_))

    r_lower = residual_vector(mesh, lower, params)
    r_upper = residual_vector(mesh, upper, params)
    if np.any(r_lower > _sign_tol(mesh, lower, newton_opts.tol)):
        raise InvalidArgument("lower function is not a discrete subsolution")
    if np.any(r_upper < -_sign_tol(mesh, upper, newton_opts.tol)):
        raise InvalidArgument("upper function is not a discrete supersolution")

    def converged(u, r):
        return scaled_residual_norm(mesh, u, r) <= newton_opts.tol

    def as_solution(u, r, iterations):
        field = Field(mesh, u)
        return Solution(
            field=field,
            params=params,
            residual_norm=scaled_residual_norm(mesh, u, r),
            mu1=stability_or_nan(mesh, u, params),
            iterations=iterations,
            trivial=field.sup < trivial_threshold(mesh),
        )

    if converged(lower, r_lower) and converged(upper, r_upper):
        minimal = as_solution(lower, r_lower, 0)
        maximal = minimal if np.array_equal(lower, upper) else as_solution(upper, r_upper, 0)
        return MonotoneResult(minimal, maximal, 0)

    K = params.p * max(1.0, float(np.max(upper))) ** (params.p - 1) + 1
    sweep = _Sweeper(mesh, params, K, recipe.M)
    bd = mesh.boundary
    history = []

    def step(u, Mb, increasing, floor=None):
        new = sweep(u, Mb)
        slack = _order_slack(opts, u)
        moved = new - u if increasing else u - new
        ok = bool(np.all(moved >= -slack))
        if ok and floor is not None:
            ok = bool(np.all(new >= floor - slack))
        return new, ok

    def ordered_step(u, Mb, increasing, floor=None):
        new, ok = step(u, Mb, increasing, floor)
        if not ok and Mb < recipe.M:
            log.debug(f"sweep lost its order with Mb = {Mb!r}, retrying with {recipe.M!r}")
            new, ok = step(u, recipe.M, increasing, floor)
        if not ok:
            direction = "increasing" if increasing else "decreasing"
            raise MonotonicityFailure(
                f"{direction} sweep lost its order at sweep {iterations}",
                iterates=(Field(mesh, lower), Field(mesh, upper))
            )
        return new

    stagnated = False
    iterations = 0
    for iterations in range(1, opts.max_sweeps + 1):
        Mb = sweep.boundary_constant(lower[bd], upper[bd])
        new_lower = ordered_step(lower, Mb, True)
        new_upper = ordered_step(upper, Mb, False, floor=new_lower)

        change = max(
            float(np.max(np.abs(new_lower - lower))),
            float(np.max(np.abs(new_upper - upper))),
        )
        history.append(change)
        lower, upper = new_lower, np.maximum(new_upper, new_lower)
        log.debug(f"monotone sweep {iterations}: change {change:.3e}, Mb {Mb:.3e}")

        r_lower = residual_vector(mesh, lower, params)
        r_upper = residual_vector(mesh, upper, params)
        if converged(lower, r_lower) and converged(upper, r_upper):
            return MonotoneResult(
                as_solution(lower, r_lower, iterations),
                as_solution(upper, r_upper, iterations),
                iterations,
                history=history,
            )

        if change < opts.stagnation * (1 + float(np.max(np.abs(upper)))):
            stagnated = True
            break

    if not stagnated:
        raise NonConvergence(
            f"monotone sweeps did not settle in {opts.max_sweeps} sweeps (last change {history[-1]:.3e})",
            iterate=(Field(mesh, lower), Field(mesh, upper)),
        )

    log.debug(f"monotone sweeps settled after {iterations} sweeps, polishing both limits with Newton")
    minimal = _polish(mesh, lower, lower, upper, params, opts, "minimal")
    maximal = _polish(mesh, upper, lower, upper, params, opts, "maximal")

    slack = _order_slack(opts, maximal.field.values)
    if _same_root(minimal, maximal, slack):
        maximal = minimal = min((minimal, maximal), key=lambda s: s.residual_norm)
    elif np.any(minimal.field.values > maximal.field.values + slack):
        raise MonotonicityFailure(
            "polished minimal and maximal solutions are not ordered",
            iterates=(minimal.field, maximal.field)
        )
    if np.any(minimal.field.values < sub.values - slack) or np.any(maximal.field.values > super_.values + slack):
        raise MonotonicityFailure(
            "polished solutions left the sub/supersolution bracket",
            iterates=(minimal.field, maximal.field)
        )

    return MonotoneResult(minimal, maximal, iterations, polished=True, history=history)

def _order_slack(opts, u):
    return opts.order_tol * (1 + float(np.max(np.abs(u))))

def _polish(mesh, start, lower, upper, params, opts, name):
    """Newton from one sweep limit, kept only if it stays between the limits"""
    try:
        solution = newton_solve(mesh, Field(mesh, start), params, opts.newton)
    except (NonConvergence, DomainError) as e:
        raise NonConvergence(
            f"Newton polish of the {name} sweep limit failed: {e}",
            iterate=(Field(mesh, lower), Field(mesh, upper)),
        ) from e

    u = solution.field.values
    slack = _order_slack(opts, upper)
    if solution.trivial or np.any(u < lower - slack) or np.any(u > upper + slack):
        raise NonConvergence(
            f"Newton polish of the {name} sweep limit left the bracket of the sweeps",
            iterate=(Field(mesh, lower), Field(mesh, upper)),
        )
    return solution
