"""Classical fourth-order Runge-Kutta time stepping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from linserre.errors import ConfigurationError, DivergenceError
from linserre.scheme import SemiDiscreteSystem

BLOWUP = 1.0e8
#: steps whose forcing is precomputed at once
_CHUNK = 2048


def cfl_step(dx: float, P: int, cfl: float = 0.1) -> float:
    """Step size ``cfl * (dx / (P + 1))**2``; quadratic in ``dx`` because of
    the third-order spatial derivatives."""
    if not dx > 0:
        raise ConfigurationError(f"dx must be positive, got {dx!r}")
    if P < 1:
        raise ConfigurationError(f"P must be >= 1, got {P!r}")
    return cfl * (dx / (P + 1)) ** 2


@dataclass(frozen=True)
class TimeConfig:
    T: float
    dt: float

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"time step must be positive, got {self.dt!r}")
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise ConfigurationError(f"final time must be nonnegative, got {self.T!r}")

    @classmethod
    def from_cfl(cls, T: float, dx: float, P: int, cfl: float = 0.1) -> TimeConfig:
        return cls(T=T, dt=cfl_step(dx, P, cfl))

    def steps(self) -> list[float]:
        """Step sizes; the last one is shortened to land exactly on ``T``."""
        n = math.ceil(self.T / self.dt - 1.0e-12)
        if n == 0:
            return []
        last = self.T - (n - 1) * self.dt
        return [self.dt] * (n - 1) + [last]

    @property
    def nsteps(self) -> int:
        return math.ceil(self.T / self.dt - 1.0e-12)


def _check(state: np.ndarray, step: int) -> None:
    peak = np.max(np.abs(state))
    if not np.isfinite(peak) or peak > BLOWUP:
        raise DivergenceError(f"solution diverged at step {step} (max |q| = {peak:.3e})", step)


def rk4_advance(
    system: SemiDiscreteSystem, state: np.ndarray, t: float, dt: float
) -> np.ndarray:
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt!r}")
    k1 = system.rhs(state, t)
    k2 = system.rhs(state + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = system.rhs(state + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = system.rhs(state + dt * k3, t + dt)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    system: SemiDiscreteSystem,
    state: np.ndarray,
    time: TimeConfig,
    t0: float = 0.0,
    callback: Callable[[int, float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Step from ``t0`` to ``t0 + time.T``; ``callback(step, t, state)`` runs
    after every step."""
    t = t0
    for i, dt in enumerate(time.steps(), start=1):
        state = rk4_advance(system, state, t, dt)
        t = t0 + (time.T if i == time.nsteps else i * time.dt)
        _check(state, i)
        if callback is not None:
            callback(i, t, state)
    return state


class LinearRk4:
    """RK4 for the affine system, precomputed as matrices.

    For ``q' = L q + F d(t)`` one RK4 step is exactly

        q+ = S q + W0 d(t) + W1 d(t + dt/2) + W2 d(t + dt)

    with ``S`` the degree-4 Taylor polynomial of ``dt L``. This is the same
    update as :func:`rk4_advance` (up to round-off) at the cost of one dense
    mat-vec per step; autonomous runs use repeated squaring of ``S``.

    Only the increment ``E = S - I`` is stored. Forming ``I + E`` explicitly
    would round away most digits of ``E`` and the loss compounds over the
    millions of steps of a fine-mesh run.
    """

    def __init__(self, system: SemiDiscreteSystem, dt: float) -> None:
        self.system = system
        self.dt = dt
        L, Fm = system.linear_operator()
        self.E, self.W = self._matrices(L, Fm, dt)

    @staticmethod
    def _matrices(L, Fm, dt):
        A = dt * L
        A2 = A @ A
        E = A + A2 / 2.0 + A2 @ A / 6.0 + A2 @ A2 / 24.0
        # forcing weights: expand the four stages symbolically
        dF = dt * Fm
        AdF = A @ dF
        A2dF = A @ AdF
        A3dF = A @ A2dF
        W0 = dF / 6.0 + AdF / 6.0 + A2dF / 12.0 + A3dF / 24.0
        W1 = 2.0 * dF / 3.0 + AdF / 3.0 + A2dF / 12.0
        W2 = dF / 6.0
        return E, (W0, W1, W2)

    @staticmethod
    def _power_increment(E: np.ndarray, n: int) -> np.ndarray:
        """``(I + E)**n - I`` by binary powering on increments."""
        result = np.zeros_like(E)
        base = E
        while n:
            if n & 1:
                result = result + base + result @ base
            n >>= 1
            if n:
                base = 2.0 * base + base @ base
        return result

    def _pack(self, state):
        return np.asarray(state, dtype=np.float64).reshape(-1)

    def run(
        self,
        state: np.ndarray,
        time: TimeConfig,
        t0: float = 0.0,
        step0: int = 0,
    ) -> np.ndarray:
        """Advance ``state`` by ``time.T`` (same step sequence as :func:`integrate`).

        ``step0`` offsets the step index reported on divergence.
        """
        if abs(time.dt - self.dt) > 1.0e-15 * self.dt:
            raise ConfigurationError("TimeConfig step differs from the propagator step")
        q = self._pack(state)
        steps = time.steps()
        if not steps:
            return q.reshape(2, -1)
        nfull = len(steps) - 1
        last = steps[-1]
        if abs(last - self.dt) <= 1.0e-14 * self.dt:
            nfull, last = nfull + 1, 0.0

        L, Fm = self.system.linear_operator()
        forced = self.system.boundary and self.system.boundary_data is not None
        t = t0
        if not forced:
            q = q + self._power_increment(self.E, nfull) @ q
            t = t0 + nfull * self.dt
        else:
            W0, W1, W2 = self.W
            E = self.E
            for start in range(0, nfull, _CHUNK):
                k = min(_CHUNK, nfull - start)
                ts = t0 + (start + np.arange(k + 1)) * self.dt
                d = self.system.data_batch(ts)
                dmid = self.system.data_batch(ts[:-1] + 0.5 * self.dt)
                forcing = d[:-1] @ W0.T + dmid @ W1.T + d[1:] @ W2.T
                for f in forcing:
                    q = q + (E @ q + f)
                _check(q, step0 + start + k)
            t = t0 + nfull * self.dt
        _check(q, step0 + nfull)

        if last > 0.0:
            E, (W0, W1, W2) = self._matrices(L, Fm, last)
            dq = E @ q
            if forced:
                d = self.system.data
                dq += W0 @ d(t) + W1 @ d(t + 0.5 * last) + W2 @ d(t + last)
            q = q + dq
            _check(q, step0 + nfull + 1)
        return q.reshape(2, -1)
