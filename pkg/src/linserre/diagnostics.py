"""Discrete conserved quantities, energies, errors and convergence rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from linserre.mesh import GlobalOperators
from linserre.scheme import SemiDiscreteSystem


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: float
    energy: float


def discrete_energy(system: SemiDiscreteSystem, state: np.ndarray) -> float:
    """``g/2 |h|^2 + H/2 |u|^2 + H^3/6 |D u|^2`` in the mass-matrix norm.

    ``D`` is the penalized derivative, with the boundary lifts added in
    bounded mode.
    """
    p, ops = system.params, system.ops
    h, u = state
    du = system.Denergy @ u
    return 0.5 * p.g * ops.inner(h, h) + 0.5 * p.H * ops.inner(u, u) + p.H**3 / 6.0 * ops.inner(du, du)


def energy_rate(system: SemiDiscreteSystem, state: np.ndarray, t: float = 0.0) -> float:
    """Exact time derivative of :func:`discrete_energy` along the semi-discrete flow."""
    p, ops = system.params, system.ops
    h, u = state
    dh, du = system.rhs(state, t)
    De = system.Denergy
    return (
        p.g * ops.inner(h, dh)
        + p.H * ops.inner(u, du)
        + p.H**3 / 3.0 * ops.inner(De @ u, De @ du)
    )


def record(system: SemiDiscreteSystem, state: np.ndarray, t: float) -> DiagnosticsRecord:
    p, ops = system.params, system.ops
    h, u = state
    return DiagnosticsRecord(
        t=float(t),
        mass=p.g * float(np.sum(ops.m * h)),
        momentum=p.H * float(np.sum(ops.m * u)),
        energy=discrete_energy(system, state),
    )


@dataclass
class TimeSeries:
    """Diagnostics at every step plus step-to-step differences."""

    records: list[DiagnosticsRecord] = field(default_factory=list)

    def append(self, rec: DiagnosticsRecord) -> None:
        self.records.append(rec)

    def deltas(self, name: str) -> np.ndarray:
        return np.diff([getattr(r, name) for r in self.records])

    def rows(self):
        prev = None
        for r in self.records:
            if prev is None:
                d = (0.0, 0.0, 0.0)
            else:
                d = (r.mass - prev.mass, r.momentum - prev.momentum, r.energy - prev.energy)
            yield (r.t, r.mass, r.momentum, r.energy, *d)
            prev = r


def l2_error(
    ops: GlobalOperators,
    state: np.ndarray,
    exact: Callable[[np.ndarray, float], tuple[np.ndarray, np.ndarray]],
    t: float,
    height_offset: float = 0.0,
) -> tuple[float, float]:
    """Mass-matrix norms of the nodal errors in ``h`` and ``u``.

    ``height_offset`` is added to the numerical ``h`` before comparing
    (the solver carries perturbations, the exact wave the total height).
    """
    he, ue = exact(ops.mesh.x, t)
    eh = state[0] + height_offset - he
    eu = state[1] - ue
    return math.sqrt(ops.inner(eh, eh)), math.sqrt(ops.inner(eu, eu))


def pairwise_rates(dx: Sequence[float], err: Sequence[float]) -> list[float]:
    """``log(e_i / e_{i+1}) / log(dx_i / dx_{i+1})``; ``inf`` where an error is 0."""
    out = []
    for (d0, e0), (d1, e1) in zip(zip(dx, err), zip(dx[1:], err[1:])):
        if e1 == 0.0 or e0 == 0.0:
            out.append(math.inf)
        else:
            out.append(math.log(e0 / e1) / math.log(d0 / d1))
    return out


def fitted_rate(dx: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of ``log e`` against ``log dx``."""
    dx, err = np.asarray(dx, float), np.asarray(err, float)
    if np.any(err <= 0):
        return math.inf
    return float(np.polyfit(np.log(dx), np.log(err), 1)[0])


@dataclass
class ConvergenceReport:
    """Errors for one polynomial degree across mesh refinements."""

    P: int
    N: list[int] = field(default_factory=list)
    dx: list[float] = field(default_factory=list)
    err_h: list[float] = field(default_factory=list)
    err_u: list[float] = field(default_factory=list)

    def add(self, N: int, dx: float, eh: float, eu: float) -> None:
        self.N.append(N)
        self.dx.append(dx)
        self.err_h.append(eh)
        self.err_u.append(eu)

    def rates(self) -> dict[str, list[float]]:
        return {"h": pairwise_rates(self.dx, self.err_h), "u": pairwise_rates(self.dx, self.err_u)}

    def finest_rate(self, var: str) -> float:
        return rates(self)[var][-1]

    def fitted(self, var: str) -> float:
        return fitted_rate(self.dx, self.err_h if var == "h" else self.err_u)


def rates(report: ConvergenceReport) -> dict[str, list[float]]:
    if len(report.dx) < 2:
        raise ValueError("need at least two resolutions for a rate")
    return report.rates()


def total_variation(values: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(values))))
