"""Reference and physical-element summation-by-parts (SBP) operators.

On the reference element the LGL collocation operators satisfy

    M D + D^T M = B,    B = diag(-1, 0, ..., 0, 1),

and the scaled operators on an element of length ``dx`` keep the same
property. Higher derivatives are powers of ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from linserre.errors import ConfigurationError, ContractError
from linserre.quadrature import LglRule, lgl_rule


@dataclass(frozen=True)
class ReferenceOperators:
    rule: LglRule
    M: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    B: np.ndarray

    @property
    def degree(self) -> int:
        return self.rule.degree


@dataclass(frozen=True)
class PhysicalOperators:
    dx: float
    D: np.ndarray
    M: np.ndarray
    B: np.ndarray

    @property
    def npoints(self) -> int:
        return self.D.shape[0]


def lagrange_derivative_matrix(rule: LglRule) -> np.ndarray:
    """``L[i, j] = l_j'(xi_i)`` from the barycentric formula.

    Diagonal entries use the negative-sum trick so rows sum to zero exactly.
    """
    x, w = rule.nodes, rule.barycentric
    n = rule.npoints
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                L[i, j] = (w[j] / w[i]) / (x[i] - x[j])
        L[i, i] = -np.sum(L[i])
    return L


def build_reference_operators(P: int) -> ReferenceOperators:
    rule = lgl_rule(P)
    M = np.diag(rule.weights)
    # Q_ij = sum_k w_k l_i(xi_k) l_j'(xi_k) = w_i l_j'(xi_i)
    Q = rule.weights[:, None] * lagrange_derivative_matrix(rule)
    D = Q / rule.weights[:, None]

    B = np.zeros((P + 1, P + 1))
    B[0, 0], B[-1, -1] = -1.0, 1.0

    for a in (M, Q, D, B):
        a.flags.writeable = False
    return ReferenceOperators(rule=rule, M=M, Q=Q, D=D, B=B)


def to_physical(ref: ReferenceOperators, dx: float) -> PhysicalOperators:
    if not dx > 0 or not math.isfinite(dx):
        raise ConfigurationError(f"element length must be positive, got {dx!r}")
    D = (2.0 / dx) * ref.D
    M = (0.5 * dx) * ref.M
    return PhysicalOperators(dx=float(dx), D=D, M=M, B=ref.B)


def sbp_residual(ops: ReferenceOperators | PhysicalOperators) -> float:
    """Max-norm of ``M D + D^T M - B``."""
    MD = ops.M @ ops.D
    return float(np.max(np.abs(MD + MD.T - ops.B)))


def sbp_identity_check(
    ops: PhysicalOperators, u: np.ndarray, v: np.ndarray, order: int
) -> float:
    """Absolute defect of the discrete integration-by-parts identity of ``order``.

    order 1: <u, D v> = u_n v_n - u_1 v_1 - <D u, v>
    order 2: <u, D^2 v> = u_n (Dv)_n - u_1 (Dv)_1 - <D u, D v>
    order 3: <u, D^3 v> = u_n (D^2 v)_n - u_1 (D^2 v)_1
                 - 1/2 ((Du)_n (Dv)_n - (Du)_1 (Dv)_1)
                 + 1/2 <D^2 u, D v> - 1/2 <D u, D^2 v>
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = ops.npoints
    if u.shape != (n,) or v.shape != (n,):
        raise ContractError(
            f"expected vectors of length {n}, got {u.shape} and {v.shape}"
        )

    D, w = ops.D, np.diag(ops.M)

    def ip(a, b):
        return float(np.dot(a * w, b))

    Du, Dv = D @ u, D @ v
    if order == 1:
        lhs = ip(u, Dv)
        rhs = u[-1] * v[-1] - u[0] * v[0] - ip(Du, v)
    elif order == 2:
        lhs = ip(u, D @ Dv)
        rhs = u[-1] * Dv[-1] - u[0] * Dv[0] - ip(Du, Dv)
    elif order == 3:
        DDu, DDv = D @ Du, D @ Dv
        lhs = ip(u, D @ DDv)
        rhs = (
            u[-1] * DDv[-1]
            - u[0] * DDv[0]
            - 0.5 * (Du[-1] * Dv[-1] - Du[0] * Dv[0])
            + 0.5 * ip(DDu, Dv)
            - 0.5 * ip(Du, DDv)
        )
    else:
        raise ContractError(f"order must be 1, 2 or 3, got {order!r}")

    return abs(lhs - rhs)


def element_nodes(ref: ReferenceOperators, x0: float, dx: float) -> np.ndarray:
    return x0 + 0.5 * dx * (ref.rule.nodes + 1.0)


def truncation_error(
    ref: ReferenceOperators,
    f: Callable[[np.ndarray], np.ndarray],
    dlf: Callable[[np.ndarray], np.ndarray],
    order: int,
    dx: float,
    x0: float = 0.0,
) -> float:
    """Max-norm error of ``D_x^order`` applied to samples of ``f`` on one element."""
    ops = to_physical(ref, dx)
    x = element_nodes(ref, x0, dx)
    approx = np.linalg.matrix_power(ops.D, order) @ f(x)
    return float(np.max(np.abs(approx - dlf(x))))


def truncation_probe(
    ref: ReferenceOperators,
    f: Callable[[np.ndarray], np.ndarray],
    dlf: Callable[[np.ndarray], np.ndarray],
    order: int,
    dx: float,
    x0: float = 0.0,
    floor: float = 1.0e-12,
) -> float:
    """Observed order ``log2(e(dx) / e(dx/2))`` of the ``order``-th derivative.

    Errors below ``floor`` at both resolutions mean the operator is exact for
    ``f``; ``math.inf`` is returned in that case.
    """
    if order not in (1, 2, 3):
        raise ContractError(f"order must be 1, 2 or 3, got {order!r}")
    e1 = truncation_error(ref, f, dlf, order, dx, x0)
    e2 = truncation_error(ref, f, dlf, order, 0.5 * dx, x0)
    if e1 <= floor and e2 <= floor:
        return math.inf
    return math.log2(e1 / max(e2, np.finfo(float).tiny))
