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

"""Diagnostics on computed solutions and branches: the ``phi_Omega``
decomposition, profile distances, energy quantities, the Dirichlet logistic
problem and the shrinking-domain study.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List

import numpy as np
import scipy.sparse as sp

from .config import env
from .continuation import limit_regime, solutions_at, tail_exponent
from .domain import Field, MeshKind, build_mesh, check_field, h1_inner, norms
from .errors import InvalidArgument, NonConvergence, NumericFailure
from .forms import bulk_derivative, bulk_map, energy, energy_identity_defect, rescaled_residual
from .newton import Solution, damped_newton, scaled_residual_norm, trivial_threshold
from .spectra import dirichlet_principal
from .utils import is_strictly_decreasing

log = logging.getLogger(__name__)

@dataclass(frozen=True)
class DecompositionResult:
    s: float
    v: Field
    orth_defect: float

def _check_unit(mesh, phi):
    check_field(mesh, phi)
    size = norms(mesh, phi).h1
    if abs(size - 1) > 1e-8:
        raise InvalidArgument(f"phi must have unit H^1 norm, got {size!r}")

def decompose(mesh, u, phi):
    """``u = s phi + v`` with ``v`` orthogonal to ``phi`` in ``H^1``"""
    check_field(mesh, u)
    _check_unit(mesh, phi)

    s = h1_inner(mesh, u, phi) / h1_inner(mesh, phi, phi)
    v = Field(mesh, u.values - s * phi.values)
    return DecompositionResult(s, v, abs(h1_inner(mesh, v, phi)))

def profile_distance(mesh, u, phi):
    """``|| u / ||u|| - phi ||`` in ``H^1``"""
    check_field(mesh, u)
    check_field(mesh, phi)
    size = norms(mesh, u).h1
    if size == 0:
        raise InvalidArgument("profile of the zero field is undefined")
    return norms(mesh, Field(mesh, u.values / size - phi.values)).h1

@dataclass(frozen=True)
class EnergyDiagnostics:
    s: float
    E_of_v: float
    boundary_q1_integral: float
    I_value: float

    def tail_bound(self, c=0.01):
        """``E(v) + c int_dOmega v^(q+1)``, expected non-positive for small solutions"""
        return self.E_of_v + c * self.boundary_q1_integral

def energy_diagnostics(mesh, u, lam, pair, q):
    """Energy of the ``phi_Omega``-complement of ``u`` and the boundary
    quantities controlling it

    ``I = (lam / 2) int_dOmega v^(q+1) - 2 s int_dOmega (-dphi/dnu) v``
    """
    parts = decompose(mesh, u, pair.func)
    vb = parts.v.values[mesh.boundary]
    weights = mesh.boundary_weights

    boundary_q1 = float(np.dot(weights, np.abs(vb) ** (q + 1)))
    flux_term = float(np.dot(weights, pair.flux * vb))
    return EnergyDiagnostics(
        s=parts.s,
        E_of_v=energy(mesh, parts.v, 1.0),
        boundary_q1_integral=boundary_q1,
        I_value=lam / 2 * boundary_q1 - 2 * parts.s * flux_term,
    )

def tail_energy_check(mesh, branch, pair, q, count=5, c=0.01, tol=1e-8):
    """Evaluate :meth:`EnergyDiagnostics.tail_bound` on the last ``count``
    branch points; violations are logged, not raised
    """
    flags = []
    for point in branch.points[-count:]:
        diag = energy_diagnostics(mesh, point.field, point.lam, pair, q)
        ok = diag.tail_bound(c) <= tol
        if not ok:
            log.warning(
                f"Energy bound E(v) + {c} int v^(q+1) = {diag.tail_bound(c)!r} > 0 at lambda = {point.lam!r}"
            )
        flags.append(ok)
    return flags

# Dirichlet logistic problem

@dataclass(frozen=True)
class DirichletSolution:
    field: Field
    beta: float
    p: float
    beta_omega: float
    residual_norm: float
    iterations: int
    trivial: bool

def lyapunov_schmidt_amplitude(mesh, pair, beta, p):
    """Amplitude ``s`` of ``s phi_Omega`` balancing ``(beta - beta_Omega) int phi^2``
    against ``s^(p-1) int phi^(p+1)``, 0 when ``beta <= beta_Omega``
    """
    if beta <= pair.value:
        return 0.0

    phi = pair.func.values
    w = mesh.quad_weights
    ratio = (beta - pair.value) * np.dot(w, phi ** 2) / np.dot(w, np.abs(phi) ** (p + 1))
    return float(ratio ** (1 / (p - 1)))

def solve_dirichlet_logistic(mesh, beta=1.0, p=2.0, pair=None, options=None):
    """Positive solution of ``-Lap u = beta u - |u|^(p-1) u`` with ``u = 0``
    on the boundary

    When ``beta_Omega >= beta`` only the trivial solution exists and it is
    returned flagged ``trivial``. The same happens when the solution would be
    below the scheme's resolution.

    Raises
    -------
    NumericFailure
        Newton did not converge to a positive solution
    """
    pair = pair or dirichlet_principal(mesh)
    zero = Field.constant(mesh, 0.0)

    def trivial():
        log.info(f"Dirichlet logistic: no positive solution, beta_Omega = {pair.value!r} >= {beta}")
        return DirichletSolution(zero, beta, p, pair.value, 0.0, 0, True)

    amplitude = lyapunov_schmidt_amplitude(mesh, pair, beta, p)
    phi = pair.func.values
    if amplitude * float(np.max(phi)) < trivial_threshold(mesh):
        return trivial()

    interior = mesh.interior
    K = mesh.stiffness.tocsr()[interior][:, interior]
    w = mesh.quad_weights[interior]

    # keep the start below 1, the bound of every solution
    x0 = amplitude * phi[interior]
    x0 *= min(1.0, 0.9 / float(np.max(x0)))

    try:
        x, _, norm, iterations = damped_newton(
            x0,
            residual=lambda x: K @ x - beta * w * x + w * bulk_map(x, p),
            jacobian=lambda x, previous: K + sp.diags(w * (bulk_derivative(x, p) - beta)),
            measure=lambda x, r: scaled_residual_norm(mesh, _pad(mesh, x), r),
            options=options,
            wrap=lambda x: Field(mesh, _pad(mesh, x)),
        )
    except NonConvergence as e:
        raise NumericFailure(f"Dirichlet logistic Newton failed: {e}") from e

    field = Field(mesh, _pad(mesh, x))
    if field.sup < trivial_threshold(mesh):
        return trivial()
    if np.min(x) <= 0:
        raise NumericFailure("Dirichlet logistic Newton converged to a sign-changing solution", iterations=iterations)

    return DirichletSolution(field, beta, p, pair.value, norm, iterations, False)

def _pad(mesh, x):
    u = np.zeros(mesh.size)
    u[mesh.interior] = x
    return u

# Shrinking domains

@dataclass(frozen=True)
class PerturbationReport:
    k_values: List[int]
    h1_norms: List[float]
    profile_distances: List[float]
    extension_norms: List[float]
    trivial: List[bool]

    @property
    def h1_decreasing(self):
        return is_strictly_decreasing(self.h1_norms)

    @property
    def profile_decreasing(self):
        return is_strictly_decreasing(self.profile_distances)

# Half-width of the ball containing every enlarged domain
BALL_MARGIN = 1.0

def domain_perturbation_study(L, k_list, n, p=2.0):
    """Dirichlet logistic solutions on ``(-1/k, pi + 1/k)`` compared on
    ``(0, pi)`` with the zero solution and with ``phi_Omega``

    For every ``k`` the solution is restricted to ``(0, pi)`` and its
    ``H^1(0, pi)`` norm recorded together with the ``H^1(0, pi)`` distance of
    ``u_k / ||u_k||_{Omega_k}`` to ``phi_Omega``. ``extension_norms`` are the
    ``H^1`` norms of the zero extensions to ``(-1, pi + 1)``.
    """
    if abs(L - math.pi) > 1e-12:
        raise InvalidArgument(f"domain perturbation study needs L = pi, got {L}")

    k_list = [int(k) for k in k_list]
    if any(k < 1 for k in k_list) or any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise InvalidArgument(f"k values must be positive and increasing, got {k_list}")

    base = build_mesh(MeshKind.Interval, math.pi, n)
    base_pair = dirichlet_principal(base)
    h = base.h

    ball_extent = math.pi + 2 * BALL_MARGIN
    ball = build_mesh(MeshKind.Interval, ball_extent, int(round(ball_extent / h)))

    def study(k):
        shift = 1.0 / k
        extent = math.pi + 2 * shift
        mesh = build_mesh(MeshKind.Interval, extent, max(n, int(round(extent / h))))
        solution = solve_dirichlet_logistic(mesh, 1.0, p)
        u = solution.field.values

        restricted = Field(base, np.interp(base.nodes + shift, mesh.nodes, u))
        size_k = norms(mesh, solution.field).h1
        if solution.trivial or size_k == 0:
            distance = math.nan
        else:
            distance = norms(base, Field(base, restricted.values / size_k - base_pair.func.values)).h1

        offset = BALL_MARGIN - shift
        extended = np.interp(ball.nodes - offset, mesh.nodes, u, left=0.0, right=0.0)
        log.debug(f"k = {k}: beta_Omega_k = {solution.beta_omega!r}, sup = {solution.field.sup!r}")
        return (
            norms(base, restricted).h1,
            distance,
            norms(ball, Field(ball, extended)).h1,
            solution.trivial,
        )

    with ThreadPoolExecutor(max_workers=env.threads) as executor:
        results = list(executor.map(study, k_list))

    report = PerturbationReport(
        k_values=k_list,
        h1_norms=[i[0] for i in results],
        profile_distances=[i[1] for i in results],
        extension_norms=[i[2] for i in results],
        trivial=[i[3] for i in results],
    )
    if any(report.trivial):
        log.warning(f"Trivial Dirichlet solutions for k in {[k for k, t in zip(k_list, report.trivial) if t]}")
    return report

# Solution reports

@dataclass(frozen=True)
class SolutionReport:
    lam: float
    max_value: float
    gap_to_one: float
    boundary_min: float
    boundary_positive_weight: float
    energy_defect: float
    mu1: float
    profile_distance: float
    neumann_state: bool

def check_solution_report(mesh, solution, pair):
    """Summary of the bounds and positivity properties of a solution

    ``boundary_positive_weight`` is the boundary measure where the solution
    exceeds the trivial threshold.
    """
    u = solution.field
    check_field(mesh, u)
    values = u.values
    bd = mesh.boundary
    positive = values[bd] > trivial_threshold(mesh)
    size = norms(mesh, u).h1

    max_value = float(np.max(values))
    return SolutionReport(
        lam=solution.params.lam,
        max_value=max_value,
        gap_to_one=1 - max_value,
        boundary_min=float(np.min(values[bd])),
        boundary_positive_weight=float(np.sum(mesh.boundary_weights[positive])),
        energy_defect=energy_identity_defect(mesh, u, solution.params),
        mu1=solution.mu1,
        profile_distance=profile_distance(mesh, u, pair.func) if size > 0 else math.nan,
        neumann_state=solution.params.lam == 0,
    )

@dataclass(frozen=True)
class RescaledSolution:
    field: Field
    kappa: float
    residual_norm: float

def rescaled_solution(mesh, solution, q=None):
    """``U = lam^(-1/(1-q)) u`` and the residual of its problem, see
    :func:`~logistic_harvest.forms.rescaled_residual`
    """
    params = solution.params
    q = params.q if q is None else q
    lam = params.lam
    if not lam > 0:
        raise InvalidArgument("rescaling needs lambda > 0")

    kappa = lam ** (1 / (1 - q))
    U = solution.field.values / kappa
    r = rescaled_residual(mesh, U, params if q == params.q else replace(params, q=q), kappa)

    return RescaledSolution(Field(mesh, U), kappa, scaled_residual_norm(mesh, U, r))

def rescaled_norm_bounds(mesh, branch, q=None, count=10, lambdas=None, options=None):
    """Smallest and largest ``H^1`` norm of the rescaled fields

    By default these run over the last ``count`` branch points with positive
    ``lambda``. With ``lambdas`` they run over the Newton-polished branch
    crossings at those values instead, so two mesh levels can be compared at
    the same parameters.
    """
    if lambdas is None:
        samples = [(i.lam, i.field) for i in branch.points if i.lam > 0][-count:]
    else:
        if any(not lam > 0 for lam in lambdas):
            raise InvalidArgument(f"rescaling needs lambda > 0, got {list(lambdas)}")
        samples = [
            (float(lam), crossing.field)
            for lam in lambdas
            for crossing in solutions_at(branch, float(lam), polish=True, options=options)
        ]

    sizes = []
    for lam, field in samples:
        solution = Solution(field, branch.params.with_lambda(lam), math.nan, math.nan, 0)
        sizes.append(norms(mesh, rescaled_solution(mesh, solution, q).field).h1)
    if not sizes:
        raise InvalidArgument("no branch solution with lambda > 0 to rescale")
    return min(sizes), max(sizes)

@dataclass(frozen=True)
class DichotomyReport:
    expected: object
    measured: object
    tail_exponent: float

    @property
    def agrees(self):
        return self.expected == self.measured

def regime_dichotomy(branch, params=None):
    """Compare the regime of ``params`` with the one read off the branch tail"""
    params = params or branch.params
    gamma = tail_exponent(branch)
    return DichotomyReport(params.regime, limit_regime(gamma), gamma)

def dirichlet_convergence(mesh, branch, dirichlet, lambdas, options=None):
    """``L^2`` distances between the branch solution at each ``lambda`` and
    the Dirichlet logistic solution
    """
    distances = []
    for lam in lambdas:
        crossings = solutions_at(branch, lam, polish=True, options=options)
        if not crossings:
            raise InvalidArgument(f"branch does not reach lambda = {lam}")
        if len(crossings) > 1:
            log.warning(f"Branch crosses lambda = {lam} {len(crossings)} times, using the first")

        diff = Field(mesh, crossings[0].field.values - dirichlet.field.values)
        distances.append(norms(mesh, diff).l2)
    return distances
