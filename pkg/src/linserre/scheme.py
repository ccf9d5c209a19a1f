"""Semi-discrete SBP-SAT discretization of the linearized Serre equations.

With the penalized derivative ``Dt`` (see :mod:`linserre.mesh`) the interior
scheme reads

    h_t + Dt (H u + U h) + a_h M^{-1} Bt^T Bt h = SAT_h
    u_t + Dt (g h + U u - H^2 U/3 Dt^2 u - H^2/3 Dt u_t) + a_u M^{-1} Bt^T Bt u = SAT_u

The ``u_t`` terms are collected in a constant matrix ``G``, factorized once,
so every right-hand side evaluation costs one LU back-substitution.

The dispersive advection term is never formed as ``Dt^3``. With
``G0 = I - H^2/3 Dt^2`` one has ``Dt (U u - H^2 U/3 Dt^2 u) = U G0 Dt u``, so
its contribution to ``u_t`` is ``-U Dt u`` plus a low-rank correction from
the boundary rows of ``G``. The dense triple product has entries of order
``dx^-3`` and its rounding error pollutes fine-mesh solutions.

Boundary SATs act on the deviation of the numerical trace from boundary
data; with zero data they are the homogeneous penalties. In bounded mode
the boundary penalties are written with ``Dt``, which is itself SBP on the
whole mesh, so the single-element energy argument carries over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla

from linserre.errors import AssemblyError, ConfigurationError, ContractError
from linserre.mesh import GlobalOperators, Mode
from linserre.model import PhysicalParams, WaveTrace

F = Fraction

#: columns of the boundary-data vector
DATA_KEYS = ("h_left", "u_left", "ux_left", "ut_left", "u_right", "ut_right")
_IDX = {k: i for i, k in enumerate(DATA_KEYS)}

_PIVOT_TOL = 1.0e-12


@dataclass(frozen=True)
class PenaltySet:
    """SAT penalty parameters.

    Interface values make the raw penalty form collapse to the ``Dt`` form;
    boundary values give the discrete energy estimates. Upwind parameters
    ``alpha_h, alpha_u >= 0`` add jump dissipation.
    """

    # interface
    tau11: float = float(F(1, 2))
    tau12: float = float(F(1, 2))
    tau21: float = float(F(1, 2))
    tau22: float = float(F(1, 2))
    gamma21: float = float(F(-1, 6))
    gamma22: float = float(F(-1, 6))
    gamma23: float = float(F(1, 12))
    sigma21: float = float(F(-1, 6))
    sigma22: float = float(F(-1, 6))
    sigma23: float = float(F(1, 12))
    sigma24: float = float(F(-1, 6))
    sigma25: float = float(F(1, 12))
    sigma26: float = float(F(1, 12))
    sigma27: float = float(F(-1, 24))
    # left boundary
    tau0: float = float(F(-1, 2))
    theta0: float = -1.0
    gamma0: float = float(F(-1, 3))
    sigma0: float = float(F(-1, 3))
    eta0: float = float(F(-1, 2))
    mu0: float = float(F(-1, 6))
    rho0: float = float(F(1, 3))
    # right boundary
    thetaN: float = 1.0
    gammaN: float = float(F(1, 3))
    sigmaN: float = float(F(-1, 3))
    rhoN: float = float(F(-1, 3))
    # upwinding
    alpha_h: float = 1.0
    alpha_u: float = 1.0

    def __post_init__(self) -> None:
        if not (self.alpha_h >= 0 and self.alpha_u >= 0):
            raise ConfigurationError(
                f"upwind parameters must be nonnegative, got "
                f"alpha_h={self.alpha_h!r}, alpha_u={self.alpha_u!r}"
            )

    @classmethod
    def with_upwind(cls, alpha_h: float, alpha_u: float | None = None) -> PenaltySet:
        return cls(alpha_h=alpha_h, alpha_u=alpha_h if alpha_u is None else alpha_u)



INTERFACE_PENALTIES = (
    "tau11", "tau12", "tau21", "tau22",
    "gamma21", "gamma22", "gamma23",
    "sigma21", "sigma22", "sigma23", "sigma24", "sigma25", "sigma26", "sigma27",
)

#: time (scalar or 1-D array) -> boundary data rows ordered as DATA_KEYS
BoundaryData = Callable[[float | np.ndarray], np.ndarray]


def wave_boundary_data(ops: GlobalOperators, exact: Callable[[np.ndarray, float], WaveTrace],
                       height_offset: float = 0.0) -> BoundaryData:
    """Boundary data taken from an exact solution sampled at the domain ends.

    ``height_offset`` is subtracted from the exact height (the solver carries
    height perturbations).
    """
    xb = np.array([ops.mesh.x_left, ops.mesh.x_right])

    def data(t):
        """``t`` may be a scalar or a 1-D array; rows follow ``DATA_KEYS``."""
        ts = np.asarray(t, dtype=np.float64)
        tr = exact(xb[:, None], ts.reshape(1, -1))
        cols = np.stack(
            [tr.h[0] - height_offset, tr.u[0], tr.u_x[0], tr.u_t[0], tr.u[1], tr.u_t[1]],
            axis=-1,
        )
        return cols[0] if ts.ndim == 0 else cols

    return data


@dataclass
class SemiDiscreteSystem:
    """Affine map ``(h, u) -> (h_t, u_t)``.

    States are arrays of shape ``(2, ndof)`` holding ``h`` and ``u``.
    """

    ops: GlobalOperators
    params: PhysicalParams
    penalties: PenaltySet
    boundary: bool
    Ahh: np.ndarray
    Ahu: np.ndarray
    Ruh: np.ndarray
    Ruu: np.ndarray
    #: velocity coupling applied outside the implicit solve
    Cuu: np.ndarray
    #: boundary-data couplings, shape (ndof, len(DATA_KEYS))
    Fh: np.ndarray
    Fr: np.ndarray
    G: np.ndarray
    lu: tuple[np.ndarray, np.ndarray]
    pivot_range: tuple[float, float]
    #: derivative used in the discrete energy
    Denergy: np.ndarray
    boundary_data: BoundaryData | None = None
    _linear: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def ndof(self) -> int:
        return self.ops.ndof

    @property
    def mode(self) -> Mode:
        return self.ops.mode

    def zeros(self) -> np.ndarray:
        return np.zeros((2, self.ndof))

    def data(self, t: float) -> np.ndarray | None:
        if self.boundary and self.boundary_data is not None:
            return np.asarray(self.boundary_data(t), dtype=np.float64)
        return None

    def data_batch(self, times: np.ndarray) -> np.ndarray:
        """Boundary data at many times, shape ``(len(times), len(DATA_KEYS))``."""
        times = np.asarray(times, dtype=np.float64)
        try:
            out = np.asarray(self.boundary_data(times), dtype=np.float64)
            if out.shape == (len(times), len(DATA_KEYS)):
                return out
        except (TypeError, ValueError):
            pass
        return np.array([self.boundary_data(float(t)) for t in times])

    def solve_velocity(self, r: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.lu, r, check_finite=False)

    def rhs(self, state: np.ndarray, t: float = 0.0) -> np.ndarray:
        state = np.asarray(state)
        if state.shape != (2, self.ndof):
            raise ContractError(f"expected state of shape (2, {self.ndof}), got {state.shape}")
        h, u = state
        dh = self.Ahh @ h + self.Ahu @ u
        r = self.Ruh @ h + self.Ruu @ u
        d = self.data(t)
        if d is not None:
            dh += self.Fh @ d
            r += self.Fr @ d
        return np.stack([dh, self.solve_velocity(r) + self.Cuu @ u])

    def linear_operator(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(L, F)`` with ``d/dt vec(state) = L vec(state) + F data(t)``."""
        if self._linear is None:
            n = self.ndof
            L = np.empty((2 * n, 2 * n))
            L[:n, :n], L[:n, n:] = self.Ahh, self.Ahu
            L[n:, :n] = self.solve_velocity(self.Ruh)
            L[n:, n:] = self.solve_velocity(self.Ruu) + self.Cuu
            Fm = np.vstack([self.Fh, self.solve_velocity(self.Fr)])
            self._linear = (L, Fm)
        return self._linear


def _upwind_matrix(ops: GlobalOperators) -> np.ndarray:
    """``M^{-1} Bt^T Bt / 2``: removes exactly ``alpha * jump**2`` of energy
    per interface (``Bt`` stores each jump twice, once per slot)."""
    return 0.5 * ops.minv[:, None] * (ops.Bt.T @ ops.Bt)


def assemble_system(
    ops: GlobalOperators,
    params: PhysicalParams,
    penalties: PenaltySet | None = None,
    *,
    boundary: bool | None = None,
    boundary_data: BoundaryData | None = None,
) -> SemiDiscreteSystem:
    """Assemble the semi-discrete system.

    ``boundary`` defaults to ``True`` in bounded mode; passing ``False`` keeps
    only the interface coupling (the outer ends are left untreated), which
    is the setting of the raw-penalty equivalence audit.
    """
    pen = PenaltySet() if penalties is None else penalties
    g, H, U = params.g, params.H, params.U
    if boundary is None:
        boundary = ops.mode is Mode.BOUNDED
    if boundary and ops.mode is Mode.PERIODIC:
        raise ConfigurationError("boundary SATs are not used in periodic mode")
    if boundary and U < 0:
        raise ConfigurationError("bounded mode supports U >= 0 only")

    n = ops.ndof
    Dt, minv = ops.Dt, ops.minv
    Dt2 = Dt @ Dt
    Up = _upwind_matrix(ops)

    Ahh = -U * Dt - pen.alpha_h * Up
    Ahu = -H * Dt
    Ruh = -g * Dt
    Ruu = -pen.alpha_u * Up
    G0 = np.eye(n) - (H * H / 3.0) * Dt2
    G = G0.copy()
    Fh = np.zeros((n, len(DATA_KEYS)))
    Fr = np.zeros((n, len(DATA_KEYS)))

    if boundary:
        H2, H2U = H * H, H * H * U
        m0, mN = ops.m[0], ops.m[-1]
        i_hl, i_ul, i_uxl, i_utl = (_IDX[k] for k in DATA_KEYS[:4])
        i_ur, i_utr = _IDX["u_right"], _IDX["ut_right"]

        # left: h = u = u_x = 0 (only u = 0 survives when U = 0)
        a = pen.tau0 * U / m0
        Ahh[0, 0] += a
        Fh[0, i_hl] -= a
        a = pen.theta0 * H / m0
        Ahu[0, 0] += a
        Fh[0, i_ul] -= a

        lift = minv * Dt[0, :]  # M^{-1} Dt^T e_L
        G[:, 0] -= pen.gamma0 * H2 * lift
        Fr[:, i_utl] -= pen.gamma0 * H2 * lift
        a = pen.sigma0 * H2 / (m0 * m0)
        G[0, 0] -= a
        Fr[0, i_utl] -= a
        a = pen.eta0 * U / m0
        Ruu[0, 0] += a
        Fr[0, i_ul] -= a
        Ruu += pen.mu0 * H2U * np.outer(lift, Dt[0, :])
        Fr[:, i_uxl] -= pen.mu0 * H2U * lift
        lift2 = minv * Dt2[0, :]  # M^{-1} (Dt^T)^2 e_L
        Ruu[:, 0] += pen.rho0 * H2U * lift2
        Fr[:, i_ul] -= pen.rho0 * H2U * lift2

        # right: u = 0
        a = pen.thetaN * H / mN
        Ahu[-1, -1] += a
        Fh[-1, i_ur] -= a
        lift = minv * Dt[-1, :]
        G[:, -1] -= pen.gammaN * H2 * lift
        Fr[:, i_utr] -= pen.gammaN * H2 * lift
        a = pen.sigmaN * H2 / (mN * mN)
        G[-1, -1] -= a
        Fr[-1, i_utr] -= a
        lift2 = minv * Dt2[-1, :]
        Ruu[:, -1] += pen.rhoN * H2U * lift2
        Fr[:, i_ur] -= pen.rhoN * H2U * lift2

        Denergy = Dt.copy()
        Denergy[0, 0] += minv[0]
        Denergy[-1, -1] -= minv[-1]
    else:
        Denergy = Dt

    # U G0 Dt = U G Dt - U (G - G0) Dt; the first part cancels against the solve
    if boundary and U != 0.0:
        ends = [0, n - 1]
        Ruu += U * ((G - G0)[:, ends] @ Dt[ends, :])

    lu = sla.lu_factor(G, check_finite=False)
    piv = np.abs(np.diag(lu[0]))
    if not np.all(np.isfinite(piv)) or piv.min() <= _PIVOT_TOL:
        raise AssemblyError(
            f"implicit velocity matrix is singular (smallest pivot {piv.min():.3e})"
        )

    return SemiDiscreteSystem(
        ops=ops,
        params=params,
        penalties=pen,
        boundary=bool(boundary),
        Ahh=Ahh,
        Ahu=Ahu,
        Ruh=Ruh,
        Ruu=Ruu,
        Cuu=-U * Dt,
        Fh=Fh,
        Fr=Fr,
        G=G,
        lu=lu,
        pivot_range=(float(piv.min()), float(piv.max())),
        Denergy=Denergy,
        boundary_data=boundary_data if boundary else None,
    )


# {{{ raw interface penalties


def raw_interface_rhs(
    ops: GlobalOperators, params: PhysicalParams, pen: PenaltySet, state: np.ndarray
) -> np.ndarray:
    """Right-hand side with every interface penalty written out term by term,
    using the unpenalized block derivative. No boundary treatment."""
    g, H, U = params.g, params.H, params.U
    n = ops.ndof
    D = ops.D
    K = ops.minv[:, None] * ops.Bt
    Up = _upwind_matrix(ops)
    D2, K2 = D @ D, K @ K
    h, u = state

    dh = (
        -D @ (H * u + U * h)
        + pen.tau11 * H * (K @ u)
        + pen.tau12 * U * (K @ h)
        - pen.alpha_h * (Up @ h)
    )

    G = (
        np.eye(n)
        - (H * H / 3.0) * D2
        - H * H * (pen.gamma21 * D @ K + pen.gamma22 * K @ D + pen.gamma23 * K2)
    )
    S = (
        pen.sigma21 * D2 @ K
        + pen.sigma22 * D @ K @ D
        + pen.sigma23 * D @ K2
        + pen.sigma24 * K @ D2
        + pen.sigma25 * K @ D @ K
        + pen.sigma26 * K2 @ D
        + pen.sigma27 * K2 @ K
    )
    r = (
        -D @ (g * h + U * u - (H * H * U / 3.0) * (D2 @ u))
        + pen.tau21 * g * (K @ h)
        + pen.tau22 * U * (K @ u)
        + H * H * U * (S @ u)
        - pen.alpha_u * (Up @ u)
    )
    return np.stack([dh, np.linalg.solve(G, r)])


def equivalence_audit(
    ops: GlobalOperators,
    params: PhysicalParams,
    n_trials: int = 100,
    raw_penalties: PenaltySet | None = None,
    rng: np.random.Generator | None = None,
    continuous: bool = False,
) -> float:
    """Max difference between the raw penalty form and the ``Dt`` form.

    The ``Dt`` form always uses the standard penalties; ``raw_penalties``
    lets a caller probe the sensitivity of the raw form. With
    ``continuous=True`` the random states are made continuous across
    interfaces.
    """
    rng = np.random.default_rng() if rng is None else rng
    std = PenaltySet()
    raw = std if raw_penalties is None else replace(
        raw_penalties, alpha_h=std.alpha_h, alpha_u=std.alpha_u
    )
    system = assemble_system(ops, params, std, boundary=False)

    worst = 0.0
    for _ in range(n_trials):
        state = rng.standard_normal((2, ops.ndof))
        if continuous:
            for a, b in ops.interfaces:
                state[:, b] = state[:, a]
        diff = raw_interface_rhs(ops, params, raw, state) - system.rhs(state)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


# }}}
