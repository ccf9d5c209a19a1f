"""Legendre-Gauss-Lobatto quadrature and Lagrange interpolation on [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from linserre.errors import ConfigurationError

MAX_DEGREE = 32
_NEWTON_TOL = 1.0e-14
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class LglRule:
    """LGL nodes and weights for polynomial degree ``degree``.

    There are ``degree + 1`` nodes, including both endpoints.
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    barycentric: np.ndarray

    @property
    def npoints(self) -> int:
        return self.degree + 1


def legendre(n: int, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L_n(x), L_n'(x))`` via the three-term recurrence."""
    x = np.asarray(x, dtype=np.float64)
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)

    p1 = x.copy()
    dp0, dp1 = np.zeros_like(x), np.ones_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        # L_k' = L_{k-2}' + (2k - 1) L_{k-1}
        dp0, dp1 = dp1, dp0 + (2 * k - 1) * p0

    return p1, dp1


def _dlegendre2(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # (L_n', L_n'') for interior x, from the Legendre ODE
    p, dp = legendre(n, x)
    ddp = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
    return dp, ddp


def _bisect(n: int, a: float, b: float) -> float:
    fa = legendre(n, a)[1]
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = legendre(n, m)[1]
        if fm == 0.0 or b - a < 1.0e-16:
            return float(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _interior_nodes(P: int) -> np.ndarray:
    if P < 2:
        return np.empty(0)

    # Chebyshev-Gauss-Lobatto guesses, increasing
    guess = -np.cos(np.pi * np.arange(1, P) / P)
    x = guess.copy()
    for _ in range(_NEWTON_MAXIT):
        dp, ddp = _dlegendre2(P, x)
        dx = dp / ddp
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break

    # roots of L_P' interlace with the CGL points; fall back to bisection
    # for anything Newton sent into the wrong bracket
    brackets = np.concatenate([[-1.0], 0.5 * (guess[1:] + guess[:-1]), [1.0]])
    ok = (x > brackets[:-1]) & (x < brackets[1:]) & np.all(np.isfinite(x))
    if not np.all(ok) or np.any(np.diff(x) <= 0):
        x = np.array(
            [_bisect(P, brackets[i], brackets[i + 1]) for i in range(P - 1)]
        )

    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    return x


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lgl_rule(P: int) -> LglRule:
    """Build the LGL rule of degree ``P`` (exact for polynomials of degree 2P-1)."""
    if not isinstance(P, (int, np.integer)) or not 1 <= P <= MAX_DEGREE:
        raise ConfigurationError(
            f"polynomial degree must be an integer in [1, {MAX_DEGREE}], got {P!r}"
        )
    P = int(P)

    nodes = np.concatenate([[-1.0], _interior_nodes(P), [1.0]])
    Lp, _ = legendre(P, nodes)
    weights = 2.0 / (P * (P + 1) * Lp**2)
    # symmetric weights
    weights = 0.5 * (weights + weights[::-1])

    nodes.flags.writeable = False
    weights.flags.writeable = False
    bary = barycentric_weights(nodes)
    bary.flags.writeable = False
    return LglRule(degree=P, nodes=nodes, weights=weights, barycentric=bary)


_SNAP = 1.0e-280


def lagrange_eval(rule: LglRule, j: int, x: float | np.ndarray) -> np.ndarray | float:
    """Evaluate the cardinal polynomial of node ``j`` (0-based) at ``x``.

    Uses the barycentric form; points within ``_SNAP`` of a node return the
    Kronecker delta (closer points would overflow the barycentric quotient).
    """
    xs = np.asarray(x, dtype=np.float64)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)

    diff = xs[:, None] - rule.nodes[None, :]
    hit = np.abs(diff) <= _SNAP
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = rule.barycentric[None, :] / diff
        values = terms[:, j] / np.sum(terms, axis=1)

    rows = np.any(hit, axis=1)
    values[rows] = hit[rows, j].astype(np.float64)
    return float(values[0]) if scalar else values


def lagrange_matrix(rule: LglRule, x: np.ndarray) -> np.ndarray:
    """Interpolation matrix ``V[i, j] = l_j(x_i)``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return np.stack([lagrange_eval(rule, j, x) for j in range(rule.npoints)], axis=1)
