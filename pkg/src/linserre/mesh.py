"""Uniform 1D element mesh and the global (block) SBP operators.

Every element owns ``P + 1`` nodes, so interface coordinates appear twice in
the global vector. Neighbouring elements are coupled through interface
operators ``Bt_i``; the penalized derivative

    Dt = D - 1/2 M^{-1} sum_i Bt_i

is SBP on the whole mesh. In periodic mode one extra interface joins the
last node of element N to the first node of element 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla

from linserre.errors import ConfigurationError
from linserre.operators import ReferenceOperators, to_physical


class Mode(str, Enum):
    PERIODIC = "periodic"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class Mesh:
    #: element end points x_1 < ... < x_{N+1}
    breaks: np.ndarray
    degree: int
    #: element nodes, shape (n_elements, degree + 1)
    nodes: np.ndarray

    @property
    def x_left(self) -> float:
        return float(self.breaks[0])

    @property
    def x_right(self) -> float:
        return float(self.breaks[-1])

    @property
    def n_elements(self) -> int:
        return self.breaks.size - 1

    @property
    def dx(self) -> float:
        """Element length (the mean length for non-uniform breakpoints)."""
        return (self.x_right - self.x_left) / self.n_elements

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def npoints(self) -> int:
        return self.degree + 1

    @property
    def ndof(self) -> int:
        return self.n_elements * self.npoints

    @property
    def x(self) -> np.ndarray:
        """Flattened global node coordinates (interfaces duplicated)."""
        return self.nodes.reshape(-1)


def build_mesh(
    x_left: float, x_right: float, n_elements: int, ref: ReferenceOperators
) -> Mesh:
    """Uniform partition of ``[x_left, x_right]`` into ``n_elements`` elements."""
    if not np.isfinite(x_left) or not np.isfinite(x_right) or not x_right > x_left:
        raise ConfigurationError(
            f"degenerate domain [{x_left!r}, {x_right!r}]: need x_right > x_left"
        )
    if int(n_elements) != n_elements or n_elements < 1:
        raise ConfigurationError(f"need at least one element, got {n_elements!r}")
    n_elements = int(n_elements)

    dx = (x_right - x_left) / n_elements
    breaks = x_left + dx * np.arange(n_elements + 1)
    breaks[-1] = x_right
    return mesh_from_breaks(breaks, ref)


def mesh_from_breaks(breaks, ref: ReferenceOperators) -> Mesh:
    """Mesh with explicit element end points (used for two-element audits)."""
    breaks = np.array(breaks, dtype=np.float64)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise ConfigurationError("element breakpoints must be strictly increasing")

    xi = ref.rule.nodes
    left, right = breaks[:-1, None], breaks[1:, None]
    nodes = left + 0.5 * (right - left) * (xi[None, :] + 1.0)
    # pin the endpoints so neighbours agree bit for bit
    nodes[:, 0], nodes[:, -1] = breaks[:-1], breaks[1:]

    breaks.flags.writeable = False
    nodes.flags.writeable = False
    return Mesh(breaks=breaks, degree=ref.degree, nodes=nodes)


@dataclass(frozen=True)
class GlobalOperators:
    mesh: Mesh
    mode: Mode
    #: block-diagonal derivative and diagonal mass matrix
    D: np.ndarray
    M: np.ndarray
    #: diagonal of ``M`` and of its inverse
    m: np.ndarray
    minv: np.ndarray
    #: (minus slot, plus slot) for every interface
    interfaces: tuple[tuple[int, int], ...]
    #: sum of interface operators
    Bt: np.ndarray
    #: penalized derivative
    Dt: np.ndarray

    @property
    def ndof(self) -> int:
        return self.mesh.ndof

    @property
    def e_left(self) -> np.ndarray:
        e = np.zeros(self.ndof)
        e[0] = 1.0
        return e

    @property
    def e_right(self) -> np.ndarray:
        e = np.zeros(self.ndof)
        e[-1] = 1.0
        return e

    def interface_operator(self, i: int) -> np.ndarray:
        return interface_matrix(self.ndof, *self.interfaces[i])

    def apply_D(self, v: np.ndarray) -> np.ndarray:
        """Matrix-free block derivative."""
        n, p1 = self.mesh.n_elements, self.mesh.npoints
        Dref = self.D[:p1, :p1] * (0.5 * self.mesh.lengths[0])
        scale = 2.0 / self.mesh.lengths[:, None]
        return (scale * (v.reshape(n, p1) @ Dref.T)).reshape(-1)

    def apply_Dt(self, v: np.ndarray) -> np.ndarray:
        """Matrix-free penalized derivative."""
        out = self.apply_D(v)
        for a, b in self.interfaces:
            j = v[a] - v[b]
            out[a] -= 0.5 * self.minv[a] * j
            out[b] -= 0.5 * self.minv[b] * j
        return out

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(u * self.m, v))


def interface_matrix(ndof: int, minus: int, plus: int) -> np.ndarray:
    """Interface operator mapping ``v`` to ``v_minus - v_plus`` on both slots."""
    B = np.zeros((ndof, ndof))
    B[minus, minus] = 1.0
    B[minus, plus] = -1.0
    B[plus, minus] = 1.0
    B[plus, plus] = -1.0
    return B


def assemble_global(
    mesh: Mesh, ref: ReferenceOperators, mode: Mode | str = Mode.PERIODIC
) -> GlobalOperators:
    mode = Mode(mode)
    n, p1 = mesh.n_elements, mesh.npoints
    blocks = [to_physical(ref, float(dx)) for dx in mesh.lengths]

    D = sla.block_diag(*(b.D for b in blocks))
    m = np.concatenate([np.diag(b.M) for b in blocks])
    M = np.diag(m)
    minv = 1.0 / m

    interfaces = [((k + 1) * p1 - 1, (k + 1) * p1) for k in range(n - 1)]
    if mode is Mode.PERIODIC:
        interfaces.append((n * p1 - 1, 0))

    Bt = np.zeros_like(D)
    for a, b in interfaces:
        Bt += interface_matrix(mesh.ndof, a, b)
    Dt = D - 0.5 * minv[:, None] * Bt

    for arr in (D, M, m, minv, Bt, Dt):
        arr.flags.writeable = False
    return GlobalOperators(
        mesh=mesh,
        mode=mode,
        D=D,
        M=M,
        m=m,
        minv=minv,
        interfaces=tuple(interfaces),
        Bt=Bt,
        Dt=Dt,
    )


def jump(ops: GlobalOperators, v: np.ndarray, i: int) -> float:
    """``v+ - v-`` across interface ``i``: first node of the right element
    minus last node of the left element."""
    minus, plus = ops.interfaces[i]
    return float(v[plus] - v[minus])
