"""Batch driver: ``apcgl simulate|converge|validate|blowup --config run.json``.

Exit codes: 0 success, 1 failed validation check, 2 invalid configuration,
3 blow-up detected in a splitting run, 4 reference solve failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from .apseries import ApSeries, evaluate, l1_norm
from .linprop import CglParams, gaussian_integral, kernel_convolve_mode, linear_multiplier, linear_step
from .linprop import _panel_rule
from .nonlinear import coefficient_flow, pointwise_flow
from .oracle import (
    BlowupError,
    grid_to_series,
    picard_iterate,
    pseudospectral_solve,
    pseudospectral_trajectory,
    sample,
    spectral_leakage,
)
from .splitting import SplitSchedule, evolve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_REFERENCE_FAILED = 4


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 1):
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class OracleSettings:
    N: int
    dt: float
    iters: int = 8
    quad_nodes: int = 32
    scheme: str = "etdrk4"


@dataclass(frozen=True)
class RunConfig:
    params: CglParams
    lam: float
    initial: tuple[tuple[int, float, float], ...]
    schedule: SplitSchedule
    oracle: OracleSettings
    output: Path = Path(".")
    seed: int = 0
    source: str = field(default="", compare=False, repr=False)

    @property
    def total_time(self) -> float:
        return self.schedule.total_time

    def initial_series(self) -> ApSeries:
        modes = {j: complex(re, im) for j, re, im in self.initial}
        return ApSeries.from_modes(self.lam, self.schedule.truncation, modes)


def _line_of(text: str, key: str) -> int:
    idx = text.find(f'"{key}"')
    return 1 if idx < 0 else text.count("\n", 0, idx) + 1


def _require(obj: dict, key: str, text: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"missing required key '{where}{key}'", _line_of(text, where.rstrip(".") or key))
    return obj[key]


def _number(value, key: str, text: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}", _line_of(text, key))
    return float(value)


def _integer(value, key: str, text: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}", _line_of(text, key))
    return value


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def parse_config(text: str) -> RunConfig:
    """Build a :class:`RunConfig` from JSON text.

    Physical constants, ``lambda`` and ``kappa`` have no defaults.  Oracle
    settings default to a dealiasing-safe ``N`` and ``dt = T / 4096``.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")

    praw = _require(raw, "params", text, "")
    vals = {k: _number(_require(praw, k, text, "params."), k, text)
            for k in ("alpha", "beta", "gamma", "a", "b")}
    degree = _integer(_require(praw, "degree", text, "params."), "degree", text)
    kraw = _require(praw, "kappa", text, "params.")
    if not (isinstance(kraw, list) and len(kraw) == 2):
        raise ConfigError("'kappa' must be [re, im]", _line_of(text, "kappa"))
    kappa = complex(_number(kraw[0], "kappa", text), _number(kraw[1], "kappa", text))
    try:
        params = CglParams(degree=degree, kappa=kappa, **vals)
    except ValueError as exc:
        raise ConfigError(str(exc), _line_of(text, "params")) from None

    lam = _number(_require(raw, "lambda", text, ""), "lambda", text)
    if not lam > 0:
        raise ConfigError("'lambda' must be positive", _line_of(text, "lambda"))

    sraw = _require(raw, "schedule", text, "")
    try:
        schedule = SplitSchedule(
            h=_number(_require(sraw, "h", text, "schedule."), "h", text),
            steps=_integer(_require(sraw, "steps", text, "schedule."), "steps", text),
            record_every=_integer(sraw.get("record_every", 1), "record_every", text),
            truncation=_integer(_require(sraw, "truncation", text, "schedule."), "truncation", text),
            substeps=None if sraw.get("substeps") is None
            else _integer(sraw["substeps"], "substeps", text),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), _line_of(text, "schedule")) from None

    iraw = _require(raw, "initial", text, "")
    if not isinstance(iraw, list) or not iraw:
        raise ConfigError("'initial' must be a non-empty list of [j, re, im]", _line_of(text, "initial"))
    initial = []
    for entry in iraw:
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ConfigError(f"initial entry {entry!r} is not [j, re, im]", _line_of(text, "initial"))
        j = _integer(entry[0], "initial", text)
        if not 1 <= j <= schedule.truncation:
            raise ConfigError(f"initial index {j} outside 1..{schedule.truncation}",
                              _line_of(text, "initial"))
        initial.append((j, _number(entry[1], "initial", text), _number(entry[2], "initial", text)))
    if len({j for j, _, _ in initial}) != len(initial):
        raise ConfigError("initial indices must be distinct", _line_of(text, "initial"))

    oraw = raw.get("oracle", {})
    T = schedule.total_time if schedule.steps else schedule.h
    floor = _next_pow2(2 * (degree + 1) * schedule.truncation)
    try:
        oracle = OracleSettings(
            N=_integer(oraw.get("N", floor), "N", text),
            dt=_number(oraw.get("dt", T / 4096), "dt", text),
            iters=_integer(oraw.get("iters", 8), "iters", text),
            quad_nodes=_integer(oraw.get("quad_nodes", 32), "quad_nodes", text),
            scheme=str(oraw.get("scheme", "etdrk4")),
        )
    except AttributeError:
        raise ConfigError("'oracle' must be an object", _line_of(text, "oracle")) from None
    if oracle.scheme not in ("etdrk4", "expeuler"):
        raise ConfigError(f"unknown oracle scheme {oracle.scheme!r}", _line_of(text, "scheme"))
    if oracle.N < 4 or not oracle.dt > 0 or oracle.iters < 0 or oracle.quad_nodes < 1:
        raise ConfigError("oracle settings out of range", _line_of(text, "oracle"))

    return RunConfig(
        params=params, lam=lam, initial=tuple(initial), schedule=schedule, oracle=oracle,
        output=Path(str(raw.get("output", "."))),
        seed=_integer(raw.get("seed", 0), "seed", text),
        source=text,
    )


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("APCGL_THREADS", "1")))
    except ValueError:
        return 1


def _sweep(fn, items: list) -> list:
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_list(text: str | None, name: str) -> list[float] | None:
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{name} must be comma-separated numbers") from None
    if not values or any(not v > 0 for v in values):
        raise ConfigError(f"--{name} needs positive values")
    return values


# -- simulate ---------------------------------------------------------------

def cmd_simulate(config: RunConfig) -> int:
    out = config.output
    out.mkdir(parents=True, exist_ok=True)
    record = evolve(config.initial_series(), config.params, config.schedule)
    record.write_csv(out / "trajectory.csv", out / "summary.csv")
    if record.blowup_time is not None:
        print(f"blowup detected near t = {record.blowup_time:.6g}")
        return EXIT_BLOWUP
    print(f"completed t = {record.times[-1]:.6g}, l1 = {record.norms[-1]:.6g}")
    return EXIT_OK


# -- converge ---------------------------------------------------------------

def _converge_member(h: float, u0: ApSeries, params: CglParams, T: float, substeps):
    steps = int(round(T / h))
    record = evolve(u0, params, SplitSchedule(h, steps, steps, u0.M, substeps))
    return record


def fit_slope(hs, errs) -> float | None:
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    if len(hs) < 2:
        return None
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def cmd_converge(config: RunConfig, h_list: list[float] | None = None) -> int:
    T = config.total_time
    if h_list is None:
        h_list = [T / d for d in (8, 16, 32, 64, 128)]
    for h in h_list:
        ratio = T / h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            print(f"h = {h!r} does not divide T = {T!r}", file=sys.stderr)
            return EXIT_BAD_CONFIG
    if any(a <= b for a, b in zip(h_list, h_list[1:])):
        print("--h-list must be strictly descending", file=sys.stderr)
        return EXIT_BAD_CONFIG

    u0 = config.initial_series()
    o = config.oracle
    try:
        ref = pseudospectral_solve(u0, config.params, T, o.N, o.dt, scheme=o.scheme)
    except (BlowupError, ValueError) as exc:
        print(f"reference solve failed: {exc}", file=sys.stderr)
        return EXIT_REFERENCE_FAILED
    ref_modes = grid_to_series(ref, u0.M)

    member = partial(_converge_member, u0=u0, params=config.params, T=T,
                     substeps=config.schedule.substeps)
    records = _sweep(member, list(h_list))

    out = config.output
    out.mkdir(parents=True, exist_ok=True)
    rows, errs, blown = [], [], False
    for h, record in zip(h_list, records):
        if record.blowup_time is not None:
            blown = True
            rows.append((h, math.inf, math.inf))
            continue
        W = record.final
        err_l1 = l1_norm(W - ref_modes)
        err_sup = float(np.max(np.abs(sample(W, o.N).values - ref.values)))
        rows.append((h, err_l1, err_sup))
        errs.append(err_l1)
    with open(out / "convergence.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "err_l1", "err_sup"])
        for row in rows:
            w.writerow([_fmt(v) for v in row])

    if blown:
        print("slope: undefined (blowup in at least one run)")
        return EXIT_BLOWUP
    if len(rows) < 2:
        print("slope: none (single step size)")
    elif max(errs) <= 1e-12:
        print("slope: exact (errors at rounding level)")
    else:
        print(f"slope: {fit_slope([r[0] for r in rows], errs):.4f}")
    return EXIT_OK


# -- validate ---------------------------------------------------------------

@dataclass
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _random_series(rng, lam: float, M: int, decay: float = 0.5) -> ApSeries:
    raw = rng.normal(size=M) + 1j * rng.normal(size=M)
    return ApSeries(lam, raw * decay ** np.arange(1, M + 1))


def _check_semigroup(config: RunConfig, rng) -> float:
    worst = 0.0
    for _ in range(20):
        u = _random_series(rng, config.lam, 8)
        t1, t2 = rng.uniform(0, 0.5, size=2)
        a = linear_step(linear_step(u, config.params, t2), config.params, t1).coeffs
        b = linear_step(u, config.params, t1 + t2).coeffs
        nz = b != 0
        worst = max(worst, float(np.max(np.abs(a[nz] - b[nz]) / np.abs(b[nz]), initial=0.0)))
    return worst


def _check_gaussian(rng) -> float:
    y, w = _panel_rule(-40.0, 40.0, 2048, 16)
    worst = 0.0
    cases = [(1 - 1j, 1j, 0.0)]
    for _ in range(3):
        cases.append((complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)),
                      complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), 0.0))
    for a, b, c in cases:
        numeric = complex(np.sum(w * np.exp(-a * y * y - b * y + c)))
        worst = max(worst, abs(numeric - gaussian_integral(a, b, c)))
    return worst


def _check_kernel(config: RunConfig) -> float:
    worst = 0.0
    for j in (1, 2, 4):
        for t in (0.1, 1.0):
            q = kernel_convolve_mode(config.params, t, j, config.lam)
            worst = max(worst, abs(q - complex(linear_multiplier(config.params, config.lam, j, t))))
    return worst


def _check_pointwise(config: RunConfig, rng) -> float:
    p = config.params
    u = _random_series(rng, config.lam, 16)
    u = u.scaled(0.6 / l1_norm(u))
    flowed = coefficient_flow(u.truncate(64), p.kappa, p.degree, 0.05, substeps=64)
    x = 2 * np.pi * np.arange(64) / (64 * config.lam)
    exact = np.array([pointwise_flow(z, p.kappa, p.degree, 0.05).state for z in evaluate(u, x)])
    return float(np.max(np.abs(evaluate(flowed.state, x) - exact)))


def _check_leakage(config: RunConfig) -> float:
    o = config.oracle
    traj = pseudospectral_trajectory(config.initial_series(), config.params, config.total_time,
                                     o.N, o.dt, record_every=64, scheme=o.scheme)
    return max(spectral_leakage(f, config.lam, o.N // 2 - 1) for _, f in traj)


def _check_picard(config: RunConfig) -> float:
    o = config.oracle
    T = min(0.05, config.total_time)
    u0 = config.initial_series()
    pic = picard_iterate(u0, config.params, T, o.iters, o.quad_nodes)
    ps = pseudospectral_solve(u0, config.params, T, o.N, T / 4096, scheme=o.scheme)
    return l1_norm(pic - grid_to_series(ps, u0.M))


def _check_dealiasing(config: RunConfig) -> float:
    o = config.oracle
    u0 = config.initial_series()
    T = config.total_time
    a = pseudospectral_solve(u0, config.params, T, o.N, o.dt, scheme=o.scheme)
    b = pseudospectral_solve(u0, config.params, T, 2 * o.N, o.dt, scheme=o.scheme)
    return l1_norm(grid_to_series(a, u0.M) - grid_to_series(b, u0.M))


def run_checks(config: RunConfig) -> list[Check]:
    rng = np.random.default_rng(config.seed)
    suite = [
        ("semigroup law", lambda: _check_semigroup(config, rng), 1e-13),
        ("gaussian integral", lambda: _check_gaussian(rng), 1e-8),
        ("kernel quadrature", lambda: _check_kernel(config), 1e-6),
        ("pointwise vs coefficient flow", lambda: _check_pointwise(config, rng), 1e-8),
        ("spectral leakage", lambda: _check_leakage(config), 1e-8),
        ("picard vs pseudospectral", lambda: _check_picard(config), 1e-6),
        ("dealiasing (N vs 2N)", lambda: _check_dealiasing(config), 1e-9),
    ]
    checks = []
    for name, fn, tol in suite:
        try:
            residual = fn()
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            print(f"  {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
            residual = math.inf
        if not math.isfinite(residual):
            residual = math.inf
        checks.append(Check(name, residual, tol))
    return checks


def cmd_validate(config: RunConfig) -> int:
    checks = run_checks(config)
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  {'residual':>12}  {'tolerance':>10}  result")
    for c in checks:
        print(f"{c.name:<{width}}  {c.residual:12.3e}  {c.tolerance:10.1e}  "
              f"{'PASS' if c.passed else 'FAIL'}")
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"failed: {c.name} (residual {c.residual:.3e} > {c.tolerance:.1e})")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# -- blowup -----------------------------------------------------------------

DEFAULT_SCALES = (1.0, 4.0, 16.0, 32.0, 64.0)


def _blowup_member(scale: float, u0: ApSeries, params: CglParams, schedule: SplitSchedule):
    record = evolve(u0.scaled(scale), params, replace(schedule, record_every=schedule.steps or 1))
    return record.blowup_time


def blowup_scan(config: RunConfig, scales) -> list[tuple[float, float | None]]:
    """Blow-up time estimate (or ``None``) for each initial scale."""
    member = partial(_blowup_member, u0=config.initial_series(), params=config.params,
                     schedule=config.schedule)
    return list(zip(scales, _sweep(member, list(scales))))


def cmd_blowup(config: RunConfig, scales: list[float] | None = None) -> int:
    scales = list(DEFAULT_SCALES if scales is None else scales)
    results = blowup_scan(config, scales)
    out = config.output
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "blowup.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scale", "t_star_estimate"])
        for s, t_star in results:
            w.writerow([_fmt(s), "none" if t_star is None else _fmt(t_star)])
    T = config.total_time
    for s, t_star in results:
        shown = f"none within T = {T:.6g}" if t_star is None else f"{t_star:.6g}"
        print(f"scale {s:g}: t* {shown}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apcgl", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=("simulate", "converge", "validate", "blowup"))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides config 'output')")
    parser.add_argument("--h-list", help="comma-separated descending step sizes (converge)")
    parser.add_argument("--scales", help="comma-separated initial-data scales (blowup)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        h_list = _parse_list(args.h_list, "h-list")
        scales = _parse_list(args.scales, "scales")
    except ConfigError as exc:
        print(f"{args.config}:{exc.line}: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.out:
        config = replace(config, output=Path(args.out))

    if args.command == "simulate":
        return cmd_simulate(config)
    if args.command == "converge":
        return cmd_converge(config, h_list)
    if args.command == "validate":
        return cmd_validate(config)
    return cmd_blowup(config, scales)


if __name__ == "__main__":
    sys.exit(main())
