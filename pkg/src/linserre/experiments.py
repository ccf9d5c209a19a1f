"""Numerical experiments: conservation audit, convergence sweeps, Gaussian pulse."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from linserre.diagnostics import ConvergenceReport, TimeSeries, l2_error, record, total_variation
from linserre.mesh import Mode, assemble_global, build_mesh
from linserre.model import PhysicalParams, gaussian_ic, traveling_wave, traveling_wave_trace
from linserre.operators import build_reference_operators
from linserre.scheme import PenaltySet, SemiDiscreteSystem, assemble_system, wave_boundary_data
from linserre.timeloop import LinearRk4, TimeConfig, integrate

#: domain of the bounded traveling-wave problem
IBVP_DOMAIN = (0.0, 1.0)
GAUSSIAN_DOMAIN = (-5.0, 5.0)
GAUSSIAN_TIMES = (0.0, 1.0, 6.0)


def periodic_length(params: PhysicalParams) -> float:
    """One wavelength ``2 pi / omega`` of the traveling wave."""
    return 2.0 * math.pi / params.omega


def wave_system(
    params: PhysicalParams,
    P: int,
    N: int,
    penalties: PenaltySet,
    mode: Mode,
    domain: tuple[float, float] | None = None,
) -> tuple[SemiDiscreteSystem, np.ndarray]:
    """System and initial state for the traveling-wave problem.

    Periodic runs default to one wavelength; bounded runs to ``[0, 1]`` with
    boundary data sampled from the exact wave.
    """
    if domain is None:
        domain = (0.0, periodic_length(params)) if mode is Mode.PERIODIC else IBVP_DOMAIN
    ref = build_reference_operators(P)
    ops = assemble_global(build_mesh(domain[0], domain[1], N, ref), ref, mode)
    data = None
    if mode is Mode.BOUNDED:
        data = wave_boundary_data(ops, lambda x, t: traveling_wave_trace(params, x, t), params.H)
    system = assemble_system(ops, params, penalties, boundary_data=data)
    h, u = traveling_wave(params, ops.mesh.x, 0.0)
    return system, np.array([h - params.H, u])


def conservation_run(
    params: PhysicalParams,
    P: int = 4,
    N: int = 20,
    alpha: float = 0.0,
    dt: float = 1.0e-3,
    T: float = 1.0,
) -> TimeSeries:
    """Periodic traveling wave with diagnostics recorded after every step."""
    system, q = wave_system(params, P, N, PenaltySet.with_upwind(alpha), Mode.PERIODIC)
    series = TimeSeries()
    series.append(record(system, q, 0.0))
    integrate(system, q, TimeConfig(T=T, dt=dt), callback=lambda i, t, s: series.append(record(system, s, t)))
    return series


def wave_error(
    params: PhysicalParams,
    P: int,
    N: int,
    alpha: float,
    mode: Mode,
    T: float = 0.1,
    cfl: float = 0.1,
    domain: tuple[float, float] | None = None,
) -> tuple[float, float, float]:
    """``(dx, err_h, err_u)`` at time ``T`` for one mesh."""
    system, q = wave_system(params, P, N, PenaltySet.with_upwind(alpha), mode, domain)
    dx = system.ops.mesh.dx
    time = TimeConfig.from_cfl(T, dx, P, cfl)
    q = LinearRk4(system, time.dt).run(q, time)
    eh, eu = l2_error(system.ops, q, lambda x, t: traveling_wave(params, x, t), T, params.H)
    return dx, eh, eu


def convergence_sweep(
    params: PhysicalParams,
    degrees: Sequence[int] = (1, 2, 3, 4),
    elements: Sequence[int] = (10, 20, 40, 80),
    alpha: float = 0.0,
    mode: Mode = Mode.PERIODIC,
    T: float = 0.1,
    cfl: float = 0.1,
    domain: tuple[float, float] | None = None,
) -> list[ConvergenceReport]:
    reports = []
    for P in degrees:
        rep = ConvergenceReport(P=P)
        for N in elements:
            dx, eh, eu = wave_error(params, P, N, alpha, mode, T, cfl, domain)
            rep.add(N, dx, eh, eu)
        reports.append(rep)
    return reports


@dataclass
class GaussianResult:
    P: int
    N: int
    x: np.ndarray
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)

    def total_variation(self, t: float) -> float:
        return total_variation(self.snapshots[t][0])


def gaussian_run(
    P: int,
    N: int,
    params: PhysicalParams | None = None,
    alpha: float = 1.0,
    times: Sequence[float] = GAUSSIAN_TIMES,
    cfl: float = 0.1,
    domain: tuple[float, float] = GAUSSIAN_DOMAIN,
) -> GaussianResult:
    """Periodic Gaussian height pulse; returns ``(h, u)`` at each requested time."""
    params = PhysicalParams(U=0.2) if params is None else params
    ref = build_reference_operators(P)
    ops = assemble_global(build_mesh(domain[0], domain[1], N, ref), ref, Mode.PERIODIC)
    system = assemble_system(ops, params, PenaltySet.with_upwind(alpha))
    h, u = gaussian_ic(ops.mesh.x)
    q = np.array([h, u])
    dt = TimeConfig.from_cfl(1.0, ops.mesh.dx, P, cfl).dt
    stepper = LinearRk4(system, dt)
    result = GaussianResult(P=P, N=N, x=ops.mesh.x.copy())
    t = 0.0
    for target in sorted(times):
        if target > t:
            q = stepper.run(q, TimeConfig(T=target - t, dt=dt), t0=t)
            t = target
        result.snapshots[target] = q.copy()
    return result
