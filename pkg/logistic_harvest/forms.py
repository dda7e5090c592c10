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

"""Discrete weak forms of the logistic problem with boundary harvesting

.. code-block:: text

    -Lap u = beta u - |u|^(p-1) u          in Omega
    du/dnu = -lam (u + alpha)^(q-1) u      on dOmega

``alpha = 0`` is the original sublinear flux ``-lam u^q``. All forms are
assembled with the lumped operators of :mod:`logistic_harvest.domain`.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .domain import Field, check_field, integrate, integrate_boundary
from .errors import DomainError, InvalidArgument

log = logging.getLogger(__name__)

# Products p*q closer than this to 1 are treated as the critical case
PQ_TOLERANCE = 1e-12

class Regime(Enum):
    """Sign of ``p*q - 1``"""

    Superlinear = "pq>1" #:
    Critical = "pq=1" #:
    Sublinear = "pq<1" #:

def classify_regime(p, q):
    pq = p * q
    if abs(pq - 1) <= PQ_TOLERANCE:
        return Regime.Critical
    elif pq > 1:
        return Regime.Superlinear
    else:
        return Regime.Sublinear

def _check_number(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgument(f"{name} must be a number, got {value!r}") from None

    if not math.isfinite(value):
        raise InvalidArgument(f"{name} must be finite, got {value}")

    return value

@dataclass(frozen=True)
class Params:
    """Coefficients of the problem

    Parameters
    -----------
    p: :class:`float`
        Bulk exponent, ``p > 1``
    q: :class:`float`
        Boundary exponent, ``0 < q < 1``
    lam: :class:`float`
        Harvesting rate ``lambda >= 0``
    alpha: :class:`float`
        Boundary regularization, ``alpha >= 0``
    beta: :class:`float`
        Bulk growth coefficient in ``(0, 1]``
    """
    p: float
    q: float
    lam: float = 0.0
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ('p', 'q', 'lam', 'alpha', 'beta'):
            object.__setattr__(self, name, _check_number(name, getattr(self, name)))

        if not self.p > 1:
            raise InvalidArgument(f"p must be greater than 1, got {self.p}")
        if not 0 < self.q < 1:
            raise InvalidArgument(f"q must be in (0, 1), got {self.q}")
        if self.lam < 0:
            raise InvalidArgument(f"lambda must be non-negative, got {self.lam}")
        if self.alpha < 0:
            raise InvalidArgument(f"alpha must be non-negative, got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise InvalidArgument(f"beta must be in (0, 1], got {self.beta}")

    @property
    def pq(self):
        return self.p * self.q

    @property
    def regime(self):
        return classify_regime(self.p, self.q)

    @property
    def neumann_constant(self):
        """The constant solution ``beta^(1/(p-1))`` at ``lambda = 0``"""
        return self.beta ** (1 / (self.p - 1))

    def with_lambda(self, lam):
        return replace(self, lam=lam)

# Nonlinear maps, on raw arrays

def bulk_map(u, p):
    """``|u|^(p-1) u``"""
    return np.abs(u) ** (p - 1) * u

def bulk_derivative(u, p):
    return p * np.abs(u) ** (p - 1)

def check_boundary_domain(ub, params):
    """Boundary values as an array, checked against the domain of
    :func:`boundary_map`: above ``-alpha``, or non-negative when ``alpha = 0``

    The check does not depend on ``lambda``.
    """
    ub = np.asarray(ub, dtype=float)
    alpha = params.alpha
    if alpha > 0:
        if np.any(ub + alpha <= 0):
            raise DomainError(f"boundary value below -alpha = {-alpha}: min {ub.min()!r}")
    elif np.any(ub < 0):
        raise DomainError(f"negative boundary value {ub.min()!r} with alpha = 0")
    return ub

def boundary_map(ub, params):
    """``(u + alpha)^(q-1) u`` on boundary values, ``u^q`` when ``alpha = 0``"""
    ub = check_boundary_domain(ub, params)
    q, alpha = params.q, params.alpha
    if alpha > 0:
        return (ub + alpha) ** (q - 1) * ub
    return np.maximum(ub, 0.0) ** q

def boundary_derivative(ub, params):
    """Derivative of :func:`boundary_map`

    ``(u + alpha)^(q-2) (q u + alpha)``; with ``alpha = 0`` this is
    ``q u^(q-1)`` and only exists for positive boundary values.
    """
    ub = np.asarray(ub, dtype=float)
    q, alpha = params.q, params.alpha
    if alpha > 0:
        if np.any(ub + alpha <= 0):
            raise DomainError(f"boundary value below -alpha = {-alpha}: min {ub.min()!r}")
        return (ub + alpha) ** (q - 2) * (q * ub + alpha)

    if np.any(ub <= 0):
        raise DomainError(
            f"boundary map is not differentiable at boundary value {ub.min()!r} with alpha = 0"
        )
    return q * ub ** (q - 1)

def residual_vector(mesh, u, params):
    """:func:`residual` on a raw value array"""
    r = mesh.stiffness @ u - params.beta * (mesh.mass @ u) + mesh.quad_weights * bulk_map(u, params.p)
    bd = mesh.boundary
    r[bd] += params.lam * mesh.boundary_weights * boundary_map(u[bd], params)
    return r

def jacobian_matrix(mesh, u, params, boundary=True):
    """:func:`jacobian` on a raw value array

    With ``boundary=False`` the boundary derivative term is left out.
    """
    diagonal = mesh.quad_weights * (bulk_derivative(u, params.p) - params.beta)
    bd = mesh.boundary
    if boundary and params.lam > 0:
        diagonal[bd] += params.lam * mesh.boundary_weights * boundary_derivative(u[bd], params)
    else:
        check_boundary_domain(u[bd], params)
    return (mesh.stiffness + sp.diags(diagonal)).tocsr()

def residual(mesh, u, params):
    """Nodal residual of the discrete weak form

    ``A u - beta M u + M |u|^(p-1) u + lam B h(u)`` where ``A`` is the
    stiffness, ``M`` the lumped mass and ``B`` the boundary mass.
    """
    check_field(mesh, u)
    return Field(mesh, residual_vector(mesh, u.values.copy(), params))

def jacobian(mesh, u, params):
    """Sparse symmetric derivative of :func:`residual` at ``u``"""
    check_field(mesh, u)
    return jacobian_matrix(mesh, u.values.copy(), params)

def energy(mesh, u, beta):
    """``E_beta(u) = int |grad u|^2 - beta int u^2``"""
    check_field(mesh, u)
    v = u.values
    return float(v @ (mesh.stiffness @ v) - beta * np.dot(mesh.quad_weights, v * v))

def energy_identity_defect(mesh, u, params):
    """Left side of the energy identity obtained by testing the weak form
    with ``u`` itself

    ``int |grad u|^2 - beta int u^2 + int |u|^(p+1) + lam int_dOmega (u + alpha)^(q-1) u^2``
    """
    check_field(mesh, u)
    v = u.values
    total = energy(mesh, u, params.beta) + integrate(mesh, Field(mesh, np.abs(v) ** (params.p + 1)))
    g = np.zeros(mesh.size)
    bd = mesh.boundary
    g[bd] = boundary_map(v[bd], params) * v[bd]
    return total + params.lam * integrate_boundary(mesh, Field(mesh, g))

def green_identity_defect(mesh, pair, v):
    """``beta_Omega int phi v - int grad phi . grad v - int_dOmega (-dphi/dnu) v``

    ``pair`` is a Dirichlet principal :class:`~logistic_harvest.spectra.EigenPair`.
    Vanishes up to the discretization error for smooth ``v``.
    """
    check_field(mesh, v)
    phi = pair.func.values
    lhs = pair.value * np.dot(mesh.quad_weights, phi * v.values)
    bulk = float(v.values @ (mesh.stiffness @ phi))
    flux = np.dot(mesh.boundary_weights, pair.flux * v.values[mesh.boundary])
    return float(lhs - bulk - flux)

def rescaled_residual(mesh, U, params, kappa):
    """Nodal residual of the problem solved by ``U = u / kappa``

    .. code-block:: text

        -Lap U = beta U - kappa^(p-1) |U|^(p-1) U     in Omega
        dU/dnu = -(U + alpha/kappa)^(q-1) U           on dOmega

    With ``kappa = lam^(1/(1-q))`` this is ``residual(u) / kappa``.
    """
    if not kappa > 0:
        raise InvalidArgument(f"kappa must be positive, got {kappa}")

    U = np.asarray(U, dtype=float)
    r = mesh.stiffness @ U - params.beta * (mesh.mass @ U) \
        + kappa ** (params.p - 1) * mesh.quad_weights * bulk_map(U, params.p)
    bd = mesh.boundary
    r[bd] += mesh.boundary_weights * boundary_map(U[bd], replace(params, alpha=params.alpha / kappa))
    return r
