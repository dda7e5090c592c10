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

"""Uniform meshes for the interval ``(0, L)`` and the radially symmetric disk
of radius ``R``, together with the discrete integrals and norms every other
module is built on.

Both meshes use the same vertex-centred control volumes: ``stiffness`` is the
edge form of ``int |grad u|^2`` and ``mass`` is the lumped (diagonal) form of
``int u^2``. On the interval this is exactly the ghost-point finite
difference scheme; on the disk the control volume around ``r = 0`` reproduces
the symmetry limit ``2 u''(0)`` of the radial Laplacian.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument

log = logging.getLogger(__name__)

class MeshKind(Enum):
    """Supported domain shapes"""

    Interval = "interval" #:
    RadialDisk = "radial-disk" #:

def get_mesh_kind(kind):
    """Resolve a :class:`MeshKind` from its member name or value"""
    if isinstance(kind, MeshKind):
        return kind

    try:
        return MeshKind[kind]
    except KeyError:
        pass

    try:
        return MeshKind(kind)
    except ValueError:
        values = [i.value for i in MeshKind]
        raise InvalidArgument(f"'{kind}' is not a valid mesh kind, available are {values}") from None

@dataclass(frozen=True, eq=False)
class Mesh:
    """A uniform mesh of ``n`` cells on the interval ``(0, extent)`` or on the
    radius ``[0, extent]`` of a disk.

    Use :func:`build_mesh` to create one. Meshes are immutable; the sparse
    operators are assembled lazily and cached.
    """
    kind: MeshKind
    extent: float
    n: int

    @property
    def key(self):
        return (self.kind, self.extent, self.n)

    def same_as(self, other):
        return self is other or self.key == other.key

    @property
    def h(self):
        return self.extent / self.n

    @property
    def size(self):
        """Number of nodes"""
        return self.n + 1

    @property
    def is_disk(self):
        return self.kind == MeshKind.RadialDisk

    @cached_property
    def nodes(self):
        return np.linspace(0.0, self.extent, self.n + 1)

    @cached_property
    def boundary(self):
        """Indices of the boundary nodes"""
        if self.is_disk:
            return np.array([self.n])
        return np.array([0, self.n])

    @cached_property
    def interior(self):
        """Indices of the nodes that are not boundary nodes"""
        mask = np.ones(self.size, dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    @cached_property
    def quad_weights(self):
        h = self.h
        if not self.is_disk:
            w = np.full(self.size, h)
            w[0] = w[-1] = h / 2
            return w

        # Control volumes: the disk of radius h/2 around the centre, annuli of
        # width h around interior nodes and the half annulus at r = R.
        r = self.nodes
        R = self.extent
        w = 2 * math.pi * r * h
        w[0] = math.pi * (h / 2) ** 2
        w[-1] = math.pi * (R ** 2 - (R - h / 2) ** 2)
        return w

    @cached_property
    def boundary_weights(self):
        """Weights of the boundary nodes, aligned with :attr:`boundary`"""
        if self.is_disk:
            return np.array([2 * math.pi * self.extent])
        return np.array([1.0, 1.0])

    @cached_property
    def volume(self):
        """``|Omega|``"""
        if self.is_disk:
            return math.pi * self.extent ** 2
        return self.extent

    @cached_property
    def conductances(self):
        """Edge weights of the stiffness form, one per cell"""
        h = self.h
        if self.is_disk:
            midpoints = (np.arange(self.n) + 0.5) * h
            return 2 * math.pi * midpoints / h
        return np.full(self.n, 1.0 / h)

    @cached_property
    def stiffness(self):
        """Symmetric positive semi-definite matrix of ``int |grad u|^2``"""
        c = self.conductances
        diagonal = np.zeros(self.size)
        diagonal[:-1] += c
        diagonal[1:] += c
        return sp.diags([-c, diagonal, -c], [-1, 0, 1], format='csr')

    @cached_property
    def mass(self):
        return sp.diags(self.quad_weights, format='csr')

    @cached_property
    def boundary_mass(self):
        """Diagonal matrix holding the boundary weights on the boundary nodes"""
        d = np.zeros(self.size)
        d[self.boundary] = self.boundary_weights
        return sp.diags(d, format='csr')

    @cached_property
    def h1_gram(self):
        return (self.stiffness + self.mass).tocsr()

    def __repr__(self):
        return f"<Mesh kind={self.kind.value} extent={self.extent!r} n={self.n}>"

def build_mesh(kind, extent, n):
    """Build a uniform :class:`Mesh`

    Parameters
    -----------
    kind: Union[:class:`MeshKind`, :class:`str`]
        ``interval`` or ``radial-disk``
    extent: :class:`float`
        Interval length ``L`` or disk radius ``R``
    n: :class:`int`
        Number of cells, at least 2
    """
    kind = get_mesh_kind(kind)

    try:
        extent = float(extent)
    except (TypeError, ValueError):
        raise InvalidArgument(f"extent '{extent}' is not a number") from None

    if not math.isfinite(extent) or extent <= 0:
        raise InvalidArgument(f"extent must be positive, got {extent}")

    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidArgument(f"cell count must be an integer >= 2, got {n}")

    return Mesh(kind, extent, int(n))

@dataclass(frozen=True, eq=False)
class Field:
    """A nodal grid function on a :class:`Mesh`"""
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.size,):
            raise InvalidArgument(
                f"field has {values.size} values but the mesh has {self.mesh.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("field values must be finite")

        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, mesh, c):
        return cls(mesh, np.full(mesh.size, float(c)))

    @classmethod
    def from_function(cls, mesh, func):
        """Sample ``func`` at the mesh nodes"""
        return cls(mesh, func(mesh.nodes))

    def with_values(self, values):
        return Field(self.mesh, values)

    def scaled(self, c):
        return Field(self.mesh, c * self.values)

    @property
    def sup(self):
        return float(np.max(np.abs(self.values)))

    @property
    def boundary_values(self):
        return self.values[self.mesh.boundary]

    def __len__(self):
        return self.values.size

@dataclass(frozen=True)
class Norms:
    l2: float
    h1: float
    sup: float
    grad: float

def check_field(mesh, f):
    """Raise :class:`InvalidArgument` if ``f`` does not live on ``mesh``"""
    if not isinstance(f, Field):
        raise InvalidArgument(f"expected a Field, got {type(f).__name__}")
    if not mesh.same_as(f.mesh):
        raise InvalidArgument(f"field is defined on {f.mesh!r}, not on {mesh!r}")

def integrate(mesh, f):
    """``int_Omega f``, trapezoid rule with the radial Jacobian on the disk"""
    check_field(mesh, f)
    return float(np.dot(mesh.quad_weights, f.values))

def integrate_boundary(mesh, g):
    """``int_{dOmega} g``: ``g(0) + g(L)`` on the interval, ``2 pi R g(R)`` on the disk"""
    check_field(mesh, g)
    return float(np.dot(mesh.boundary_weights, g.values[mesh.boundary]))

def h1_inner(mesh, f, g):
    """Inner product of ``H^1(Omega)``"""
    check_field(mesh, f)
    check_field(mesh, g)
    return float(f.values @ (mesh.h1_gram @ g.values))

def norms(mesh, f):
    """``L^2``, ``H^1`` and sup norms of ``f``

    The gradient part of the ``H^1`` norm is the stiffness form, so
    ``h1 ** 2 == grad ** 2 + l2 ** 2`` holds by construction.
    """
    check_field(mesh, f)
    u = f.values
    l2_sq = float(np.dot(mesh.quad_weights, u * u))
    grad_sq = max(float(u @ (mesh.stiffness @ u)), 0.0)
    return Norms(
        l2=math.sqrt(l2_sq),
        h1=math.sqrt(grad_sq + l2_sq),
        sup=f.sup,
        grad=math.sqrt(grad_sq),
    )

def gradient(mesh, f):
    """Nodal derivative (d/dx or d/dr), second order everywhere"""
    check_field(mesh, f)
    return np.gradient(f.values, mesh.h, edge_order=2)

def boundary_flux(mesh, f):
    """``-df/dnu`` at the boundary nodes, aligned with ``mesh.boundary``

    One-sided second order differences; the outer normal points to ``-x`` at
    ``x = 0`` and to ``+x`` (``+r``) at the right end.
    """
    du = gradient(mesh, f)
    if mesh.is_disk:
        return np.array([-du[-1]])
    return np.array([du[0], -du[-1]])
