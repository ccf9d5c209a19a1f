"""Command-line driver: ``linserre --experiment converge --set P=1,2 --out results``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from linserre.diagnostics import ConvergenceReport, l2_error, record
from linserre.errors import AssemblyError, ConfigurationError, DivergenceError, SerreError
from linserre.experiments import GAUSSIAN_DOMAIN, GAUSSIAN_TIMES, GaussianResult, gaussian_run, wave_system
from linserre.mesh import Mode
from linserre.model import (
    InflowOutflowCoefficients,
    PhysicalParams,
    boundary_term,
    check_case1,
    check_case2,
    eigenvalues,
    traveling_wave,
    w_transform,
)
from linserre.operators import build_reference_operators, sbp_identity_check, sbp_residual, to_physical
from linserre.quadrature import MAX_DEGREE
from linserre.scheme import PenaltySet
from linserre.timeloop import LinearRk4, TimeConfig

EXPERIMENTS = ("run", "converge", "conserve", "gaussian", "sbp-check", "validate-bc")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_ASSEMBLY = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    g: float = 9.8
    H: float = 1.0
    U: float = 0.0
    c: float = 0.5
    x_left: float | None = None
    x_right: float | None = None
    N: tuple[int, ...] = (20,)
    P: tuple[int, ...] = (4,)
    mode: str = "periodic"
    alpha_h: float = 1.0
    alpha_u: float = 1.0
    T: float = 0.1
    dt: float | None = None
    CFL: float = 0.1
    record_every: int = 0
    time_check: bool = False
    seed: int = 0

    def params(self) -> PhysicalParams:
        return PhysicalParams(g=self.g, H=self.H, U=self.U, c=self.c)

    def domain(self) -> tuple[float, float] | None:
        if self.x_left is None and self.x_right is None:
            return None
        if self.x_left is None or self.x_right is None:
            raise ConfigurationError("x_left and x_right must be given together")
        return (self.x_left, self.x_right)

    def manifest(self) -> str:
        parts = []
        for k, v in asdict(self).items():
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            parts.append(f"{k}={v}")
        return "manifest " + " ".join(parts)


# experiment-specific defaults, applied before user values
_PRESETS: dict[str, dict[str, object]] = {
    "run": {},
    "converge": {"N": (10, 20, 40, 80), "P": (1, 2, 3, 4)},
    "conserve": {"N": (20,), "P": (4,), "dt": 1.0e-3, "T": 1.0, "alpha_h": 0.0, "alpha_u": 0.0},
    "gaussian": {
        "N": (16,), "P": (8,), "U": 0.2, "T": 6.0, "alpha_h": 0.0, "alpha_u": 0.0,
        "x_left": GAUSSIAN_DOMAIN[0], "x_right": GAUSSIAN_DOMAIN[1],
    },
    "sbp-check": {"P": tuple(range(1, 9))},
    "validate-bc": {"U": 0.2},
}

_FLOATS = {"g", "H", "U", "c", "x_left", "x_right", "alpha_h", "alpha_u", "T", "dt", "CFL"}
_INT_LISTS = {"N", "P"}
_INTS = {"record_every", "seed"}
_BOOLS = {"time_check"}
_KEYS = {f.name for f in fields(RunConfig)} | {"alpha"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _FLOATS or key == "alpha":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key in _INT_LISTS:
            return tuple(int(t) for t in raw.split(",") if t.strip())
        if key in _INTS:
            return int(raw)
        if key in _BOOLS:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None
    return raw


def _validate(cfg: RunConfig) -> None:
    def bad(key, why):
        raise ConfigurationError(f"{key}: {why}")

    if cfg.experiment not in EXPERIMENTS:
        bad("experiment", f"must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
    if cfg.mode not in (m.value for m in Mode):
        bad("mode", f"must be periodic or bounded, got {cfg.mode!r}")
    if not cfg.g > 0:
        bad("g", "must be positive")
    if not cfg.H > 0:
        bad("H", "must be positive")
    if not cfg.N or any(n < 1 for n in cfg.N):
        bad("N", "element counts must be >= 1")
    if not cfg.P or any(not 1 <= p <= MAX_DEGREE for p in cfg.P):
        bad("P", f"degrees must lie in [1, {MAX_DEGREE}]")
    if cfg.alpha_h < 0:
        bad("alpha_h", "must be >= 0")
    if cfg.alpha_u < 0:
        bad("alpha_u", "must be >= 0")
    if not cfg.T >= 0:
        bad("T", "must be >= 0")
    if cfg.dt is not None and not cfg.dt > 0:
        bad("dt", "must be positive")
    if not cfg.CFL > 0:
        bad("CFL", "must be positive")
    if cfg.record_every < 0:
        bad("record_every", "must be >= 0")
    dom = cfg.domain()
    if dom is not None and not dom[1] > dom[0]:
        bad("x_right", "must exceed x_left")
    if cfg.mode == "bounded" and cfg.U < 0:
        bad("U", "bounded runs require U >= 0")
    if cfg.experiment in ("run", "converge", "conserve"):
        cfg.params().omega  # raises when the wave is not defined


def parse_config(text: str, experiment: str | None = None, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse ``key=value`` lines (``#`` starts a comment) into a validated config.

    ``experiment`` (e.g. from a command-line flag) takes precedence over the
    text; ``overrides`` are further ``key=value`` strings applied last.
    """
    values: dict[str, object] = {}
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()] + list(overrides)
    for ln in lines:
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigurationError(f"expected key=value, got {ln!r}")
        key, raw = (s.strip() for s in ln.split("=", 1))
        if key not in _KEYS:
            raise ConfigurationError(f"{key}: unknown key")
        if key == "alpha":
            a = _parse_value(key, raw)
            values["alpha_h"] = values["alpha_u"] = a
        else:
            values[key] = _parse_value(key, raw)
    if experiment is not None:
        values["experiment"] = experiment
    exp = values.get("experiment")
    if exp is None:
        raise ConfigurationError("experiment: no experiment selected")
    if exp not in _PRESETS:
        raise ConfigurationError(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    cfg = RunConfig(**{**_PRESETS[exp], **values})
    _validate(cfg)
    return cfg


# {{{ output helpers


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class _CsvSink:
    """CSV writer that flushes every row so partial output survives failures."""

    def __init__(self, path: Path, header: Sequence[str]):
        self.path = path
        self.fh = open(path, "w", newline="")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(header)

    def row(self, values) -> None:
        self.writer.writerow([_fmt(v) for v in values])
        self.fh.flush()

    def fail(self, message: str) -> None:
        self.fh.write(f"# FAILED: {message}\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()


@contextlib.contextmanager
def _sinks(*sinks: _CsvSink) -> Iterator[None]:
    try:
        yield
    except DivergenceError as exc:
        for s in sinks:
            s.fail(str(exc))
        raise
    finally:
        for s in sinks:
            s.close()


def _snapshot(out: Path, t: float, x: np.ndarray, q: np.ndarray) -> Path:
    path = out / f"snapshot_{_fmt(t)}.csv"
    sink = _CsvSink(path, ("x", "h", "u"))
    for row in zip(x, q[0], q[1]):
        sink.row(row)
    sink.close()
    return path


# }}}

# {{{ experiments


def _penalties(cfg: RunConfig) -> PenaltySet:
    return PenaltySet(alpha_h=cfg.alpha_h, alpha_u=cfg.alpha_u)


def _wave(cfg: RunConfig, P: int, N: int):
    return wave_system(cfg.params(), P, N, _penalties(cfg), Mode(cfg.mode), cfg.domain())


def _time(cfg: RunConfig, dx: float, P: int, T: float | None = None) -> TimeConfig:
    T = cfg.T if T is None else T
    if cfg.dt is not None:
        return TimeConfig(T=T, dt=cfg.dt)
    return TimeConfig.from_cfl(T, dx, P, cfg.CFL)


_SERIES_HEADER = ("t", "mass", "momentum", "energy", "d_mass", "d_momentum", "d_energy")


def _evolve_recording(system, q, time: TimeConfig, every: int, sink: _CsvSink) -> np.ndarray:
    """Advance with the matrix propagator, writing diagnostics every ``every`` steps."""
    prev = record(system, q, 0.0)
    sink.row((0.0, prev.mass, prev.momentum, prev.energy, 0.0, 0.0, 0.0))
    stepper = LinearRk4(system, time.dt)
    n, t = time.nsteps, 0.0
    done = 0
    while done < n:
        k = min(every, n - done)
        span = time.T - t if done + k == n else k * time.dt
        q = stepper.run(q, TimeConfig(T=span, dt=time.dt), t0=t, step0=done)
        done += k
        t = time.T if done == n else done * time.dt
        rec = record(system, q, t)
        sink.row((t, rec.mass, rec.momentum, rec.energy,
                  rec.mass - prev.mass, rec.momentum - prev.momentum, rec.energy - prev.energy))
        prev = rec
    return q


def _run(cfg: RunConfig, out: Path) -> None:
    params = cfg.params()
    P, N = cfg.P[0], cfg.N[0]
    system, q = _wave(cfg, P, N)
    time = _time(cfg, system.ops.mesh.dx, P)
    every = cfg.record_every or max(1, math.ceil(time.nsteps / 1000))
    series = _CsvSink(out / "timeseries.csv", _SERIES_HEADER)
    with _sinks(series):
        q = _evolve_recording(system, q, time, every, series)
    eh, eu = l2_error(system.ops, q, lambda x, t: traveling_wave(params, x, t), cfg.T, params.H)
    errs = _CsvSink(out / "errors.csv", ("P", "N", "dx", "err_h", "err_u"))
    errs.row((P, N, system.ops.mesh.dx, eh, eu))
    errs.close()
    _snapshot(out, cfg.T, system.ops.mesh.x, q)


def _conserve(cfg: RunConfig, out: Path) -> None:
    P, N = cfg.P[0], cfg.N[0]
    system, q = _wave(cfg, P, N)
    time = _time(cfg, system.ops.mesh.dx, P)
    series = _CsvSink(out / "timeseries.csv", _SERIES_HEADER)
    with _sinks(series):
        _evolve_recording(system, q, time, cfg.record_every or 1, series)


def _converge(cfg: RunConfig, out: Path) -> list[ConvergenceReport]:
    params = cfg.params()
    exact = lambda x, t: traveling_wave(params, x, t)  # noqa: E731
    errs = _CsvSink(out / "errors.csv", ("P", "N", "dx", "err_h", "err_u"))
    rates = _CsvSink(out / "rates.csv", ("P", "rate_h", "rate_u"))
    tcheck = _CsvSink(out / "time_refinement.csv", ("P", "N", "dt", "err_u", "err_u_half_dt")) if cfg.time_check else None
    sinks = [s for s in (errs, rates, tcheck) if s is not None]
    reports = []
    with _sinks(*sinks):
        for P in cfg.P:
            rep = ConvergenceReport(P=P)
            for N in cfg.N:
                system, q0 = _wave(cfg, P, N)
                dx = system.ops.mesh.dx
                time = _time(cfg, dx, P)
                q = LinearRk4(system, time.dt).run(q0, time)
                eh, eu = l2_error(system.ops, q, exact, cfg.T, params.H)
                rep.add(N, dx, eh, eu)
                errs.row((P, N, dx, eh, eu))
                if tcheck is not None and N == cfg.N[-1]:
                    half = TimeConfig(T=cfg.T, dt=0.5 * time.dt)
                    qh = LinearRk4(system, half.dt).run(q0, half)
                    tcheck.row((P, N, time.dt, eu, l2_error(system.ops, qh, exact, cfg.T, params.H)[1]))
            if len(rep.N) >= 2:
                r = rep.rates()
                rates.row((P, r["h"][-1], r["u"][-1]))
            reports.append(rep)
    return reports


def _gaussian(cfg: RunConfig, out: Path) -> GaussianResult:
    if cfg.alpha_h != cfg.alpha_u:
        raise ConfigurationError("alpha_u: the Gaussian experiment uses a single upwind value")
    times = sorted({t for t in GAUSSIAN_TIMES if t < cfg.T} | {cfg.T})
    res = gaussian_run(
        cfg.P[0], cfg.N[0], cfg.params(), alpha=cfg.alpha_h, times=times,
        cfl=cfg.CFL, domain=cfg.domain() or GAUSSIAN_DOMAIN,
    )
    for t, q in res.snapshots.items():
        _snapshot(out, t, res.x, q)
    return res


def _sbp_check(cfg: RunConfig, out: Path) -> bool:
    rng = np.random.default_rng(cfg.seed)
    sink = _CsvSink(out / "sbp.csv", ("P", "sbp_residual", "identity1", "identity2", "identity3"))
    ok = True
    for P in cfg.P:
        ref = to_physical(build_reference_operators(P), 2.0)  # unit scaling
        worst = [0.0, 0.0, 0.0]
        for _ in range(100):
            u, v = rng.standard_normal((2, P + 1))
            for k in (1, 2, 3):
                worst[k - 1] = max(worst[k - 1], sbp_identity_check(ref, u, v, k))
        res = sbp_residual(ref)
        ok &= res <= 1.0e-13 and max(worst) <= 1.0e-10
        sink.row((P, res, *worst))
    sink.close()
    return ok


def _validate_bc(cfg: RunConfig, out: Path) -> bool:
    params = cfg.params()
    rng = np.random.default_rng(cfg.seed)
    v = rng.standard_normal((1000, 5))
    w = w_transform(v.T, params)
    lam = eigenvalues(params)
    bt = np.array([boundary_term(x, params) for x in v])
    resid = float(np.max(np.abs(bt - lam @ w**2) / np.sum(v * v, axis=1)))
    if params.U > 0:
        accepted = check_case2(InflowOutflowCoefficients.dirichlet(params), params)
    else:
        accepted = check_case1(1.0, 1.0)
    sink = _CsvSink(out / "bc.csv", ("g", "H", "U", "lambda", "eigen_residual", "dirichlet_accepted"))
    sink.row((params.g, params.H, params.U, " ".join(_fmt(x) for x in lam), resid, int(accepted)))
    sink.close()
    return resid <= 1.0e-9 and accepted


def run_experiment(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    line = cfg.manifest()
    (out / "manifest.txt").write_text(line + "\n")
    print(line)
    handler = {
        "run": _run,
        "converge": _converge,
        "conserve": _conserve,
        "gaussian": _gaussian,
        "sbp-check": _sbp_check,
        "validate-bc": _validate_bc,
    }[cfg.experiment]
    result = handler(cfg, out)
    if result is False:
        print(f"{cfg.experiment}: check failed", file=sys.stderr)
        return 1
    return EXIT_OK


# }}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linserre", description=__doc__)
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="file of key=value lines")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration value (repeatable)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config is not None else ""
        cfg = parse_config(text, args.experiment, args.overrides)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_experiment(cfg, args.out)
    except DivergenceError as exc:
        print(f"FAILED: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except AssemblyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSEMBLY
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SerreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
