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

"""Principal eigenpairs: the Dirichlet pair ``(beta_Omega, phi_Omega)``, the
Steklov-type pair ``(lambda_beta, phi_beta)`` and the smallest eigenvalue of
the linearization at a state.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.special import jn_zeros

from .domain import Field, MeshKind, boundary_flux, check_field, get_mesh_kind
from .errors import InvalidArgument, NumericFailure
from .forms import jacobian

log = logging.getLogger(__name__)

# Certificate every returned pair must satisfy, relative to 1 + |value|
CERTIFICATE = 1e-10

@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue, ``H^1``-normalized positive eigenfunction and the residual
    certificate ``||K phi - value M phi||``
    """
    value: float
    func: Field
    residual_norm: float
    iterations: int = 0
    flux: Optional[np.ndarray] = None

    @property
    def c1(self):
        """``min -dphi/dnu`` over the boundary nodes"""
        if self.flux is None:
            raise InvalidArgument("eigenpair carries no boundary flux")
        return float(np.min(self.flux))

def bessel_j0_zero():
    """First positive zero of ``J_0``"""
    return float(jn_zeros(0, 1)[0])

def resonant_extent(kind):
    """Extent for which ``beta_Omega = 1``"""
    kind = get_mesh_kind(kind)
    if kind == MeshKind.RadialDisk:
        return bessel_j0_zero()
    return math.pi

def inverse_iteration(K, M, shift=0.0, x0=None, tol=1e-12, max_iter=500):
    """Shifted inverse power iteration on the symmetric pencil ``(K, M)``

    Converges to the eigenvalue closest to ``shift``. Iteration stops when the
    residual ``||K x - value M x||`` of the ``M``-normalized vector drops
    below ``tol * (1 + |value|)`` or stops improving.

    Returns
    --------
    Tuple[:class:`float`, :class:`numpy.ndarray`, :class:`float`, :class:`int`]
        Rayleigh quotient, eigenvector, residual norm and iteration count
    """
    K = K.tocsc()
    M = M.tocsc()
    try:
        lu = spla.splu((K - shift * M).tocsc())
    except RuntimeError as e:
        raise NumericFailure(f"shifted operator is singular at shift {shift}: {e}", iterations=0) from None

    x = np.ones(K.shape[0]) if x0 is None else np.array(x0, dtype=float)

    def normalize(y):
        return y / math.sqrt(y @ (M @ y))

    x = normalize(x)
    best = (math.inf, math.nan, x, 0)
    stalled = 0
    for it in range(1, max_iter + 1):
        x = normalize(lu.solve(M @ x))
        Kx = K @ x
        value = float(x @ Kx)
        res = float(np.linalg.norm(Kx - value * (M @ x)))
        log.debug(f"inverse iteration {it}: value {value!r}, residual {res:.3e}")

        if res < 0.99 * best[0]:
            stalled = 0
        else:
            stalled += 1
        if res < best[0]:
            best = (res, value, x, it)

        if res <= tol * (1 + abs(value)) or stalled >= 10:
            break

    res, value, x, it = best
    return value, x, res, it

def _orient(x):
    return -x if x.sum() < 0 else x

def _certify(name, value, residual_norm, iterations):
    if not residual_norm <= CERTIFICATE * (1 + abs(value)):
        raise NumericFailure(
            f"{name} eigensolver did not converge after {iterations} iterations " \
            f"(residual {residual_norm:.3e})",
            iterations=iterations
        )

def dirichlet_principal(mesh):
    """Smallest Dirichlet eigenvalue ``beta_Omega`` and its eigenfunction

    The eigenfunction is zero on the boundary nodes, positive inside and
    normalized to ``||phi||_H1 = 1``. The returned pair also carries the
    boundary flux ``-dphi/dnu``.
    """
    interior = mesh.interior
    A = mesh.stiffness.tocsr()
    K = A[interior][:, interior]
    M = mesh.mass.tocsr()[interior][:, interior]

    value, x, _, iterations = inverse_iteration(K, M)

    phi = np.zeros(mesh.size)
    phi[interior] = _orient(x)
    phi /= math.sqrt(phi @ (mesh.h1_gram @ phi))

    xi = phi[interior]
    residual_norm = float(np.linalg.norm(K @ xi - value * (M @ xi)))
    _certify("Dirichlet", value, residual_norm, iterations)
    if np.min(xi) <= 0:
        raise NumericFailure("Dirichlet eigenfunction changes sign", iterations=iterations)

    func = Field(mesh, phi)
    pair = EigenPair(value, func, residual_norm, iterations, boundary_flux(mesh, func))
    log.info(f"beta_Omega = {value!r} on {mesh!r}")
    return pair

def steklov_principal(mesh, beta, beta_omega=None):
    """Principal eigenvalue ``lambda_beta`` of

    .. code-block:: text

        -Lap phi = beta phi in Omega,    dphi/dnu = -lambda phi on dOmega

    The interior is eliminated, leaving the symmetric boundary pencil
    ``(-S, B)`` with ``S`` the Schur complement of ``A - beta M``. Its
    largest eigenvalue is ``lambda_beta`` and the eigenfunction is positive
    on every node.

    ``beta_omega`` skips recomputing the Dirichlet eigenvalue.
    """
    beta = float(beta)
    if beta <= 0:
        raise InvalidArgument(f"beta must be positive, got {beta}")

    if beta_omega is None:
        beta_omega = dirichlet_principal(mesh).value
    if beta >= beta_omega:
        raise InvalidArgument(
            f"beta = {beta} is not below beta_Omega = {beta_omega!r}, " \
            "no positive principal Steklov eigenvalue"
        )

    K = (mesh.stiffness - beta * mesh.mass).tocsr()
    interior, bd = mesh.interior, mesh.boundary
    K_II = K[interior][:, interior].tocsc()
    K_IB = K[interior][:, bd].toarray()
    K_BB = K[bd][:, bd].toarray()

    X = spla.splu(K_II).solve(K_IB)
    S = K_BB - K_IB.T @ X
    S = (S + S.T) / 2
    values, vectors = scipy.linalg.eigh(-S, np.diag(mesh.boundary_weights))
    value = float(values[-1])

    phi = np.zeros(mesh.size)
    phi[bd] = vectors[:, -1]
    phi[interior] = -X @ vectors[:, -1]
    phi = _orient(phi)
    if np.min(phi) <= 0:
        raise NumericFailure("Steklov eigenfunction is not positive", iterations=1)
    phi /= math.sqrt(phi @ (mesh.h1_gram @ phi))

    residual_norm = float(np.linalg.norm(K @ phi + value * (mesh.boundary_mass @ phi)))
    _certify("Steklov", value, residual_norm, 1)

    log.debug(f"lambda_beta = {value!r} at beta = {beta}")
    return EigenPair(value, Field(mesh, phi), residual_norm, 1)

def steklov_closed_form(extent, beta):
    """``sqrt(beta) tan(sqrt(beta) L / 2)`` for the interval ``(0, L)``"""
    root = math.sqrt(beta)
    return root * math.tan(root * extent / 2)

def regularized_bifurcation_lambda(mesh, beta, alpha, q, lambda_beta=None):
    """Bifurcation point ``lambda_{alpha,beta} = lambda_beta alpha^(1-q)`` of
    the regularized problem from the trivial line
    """
    alpha = float(alpha)
    if alpha <= 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if not 0 < q < 1:
        raise InvalidArgument(f"q must be in (0, 1), got {q}")

    if lambda_beta is None:
        lambda_beta = steklov_principal(mesh, beta).value
    return lambda_beta * alpha ** (1 - q)

def linearized_stability(mesh, u, params):
    """Smallest eigenvalue ``mu_1`` of the linearization at ``u`` in the mass
    inner product

    ``mu_1 > 0`` means the state is linearly (asymptotically) stable.
    """
    check_field(mesh, u)
    J = jacobian(mesh, u, params)

    # J + (beta + 1) M is positive definite
    shift = -params.beta - 1.0
    value, _, residual_norm, iterations = inverse_iteration(J, mesh.mass, shift=shift)
    _certify("stability", value, residual_norm, iterations)
    return value
