"""Batch front end: config-driven runs emitting plot-ready CSV files.

A run is described by a plain key=value config with four sections:

    [mode]
    mode = quench            # bifurcate | bounds | simulate | quench | eigen | sweep

    [params]
    lam = 3.0
    alpha = 1.0
    beta = 1.0
    geometry = interval      # or: ball (with dim >= 2, radius)
    M = 141

    [scheme]
    dtau = 1e-3              # any SchemeConfig field

    [sweep]
    param = lam              # sweep mode only
    values = 2.5, 3, 3.5, 4

Unknown sections or keys are hard errors: a misspelled knob must never fall
back to a silent default.  All emitted numbers carry 17 significant digits
and a fixed row order, so rerunning a config reproduces every data file
byte for byte; the manifest additionally records the wall clock, which is
the only non-reproducible output.  Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, steady
from .core import Geometry, ParameterError, ProblemParams, validate
from .evolve import SchemeConfig, Trajectory, integrate
from .quadrature import QuenchedStateError
from .quench import QuenchReport, quench_report
from .steady import BranchError

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "emit_plotdata",
    "run",
    "main",
]

MODES = ("bifurcate", "bounds", "simulate", "quench", "eigen", "sweep")
_PARAM_KEYS = ("lam", "alpha", "beta", "dim", "geometry", "radius", "M")
_SWEEP_KEYS = ("param", "values")
_SWEEPABLE = ("lam", "alpha", "beta")


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed run description; ``text`` keeps the verbatim config echo."""

    mode: str
    params: ProblemParams
    scheme: SchemeConfig
    M: int = 141
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] | None = None
    text: str = field(default="", compare=False)


def _parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {
        "mode": {},
        "params": {},
        "scheme": {},
        "sweep": {},
    }
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return sections


def _convert(key: str, value: str, kind: type):
    try:
        if kind is bool:
            low = value.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(value)
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {value!r} as {kind.__name__}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raises ConfigError on any unknown key."""
    sections = _parse_sections(text)

    unknown = set(sections["mode"]) - {"mode"}
    if unknown:
        raise ConfigError(f"unknown keys in [mode]: {sorted(unknown)}")
    mode = sections["mode"].get("mode")
    if mode is None:
        raise ConfigError("missing required key: [mode] mode")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")

    pmap = sections["params"]
    unknown = set(pmap) - set(_PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys in [params]: {sorted(unknown)}")
    lam = _convert("lam", pmap.get("lam", "0"), float)
    alpha = _convert("alpha", pmap.get("alpha", "0"), float)
    beta = _convert("beta", pmap.get("beta", "1"), float)
    geometry_kind = pmap.get("geometry", "interval")
    if geometry_kind not in ("interval", "ball"):
        raise ConfigError(f"geometry must be interval or ball, got {geometry_kind!r}")
    radius = _convert("radius", pmap.get("radius", "1"), float)
    if geometry_kind == "interval":
        dim = _convert("dim", pmap.get("dim", "1"), int)
        geometry = Geometry.interval()
    else:
        dim = _convert("dim", pmap.get("dim", "2"), int)
        geometry = Geometry.ball(radius)
    M = _convert("M", pmap.get("M", "141"), int)
    try:
        params = validate(
            ProblemParams(lam=lam, alpha=alpha, beta=beta, dim=dim, geometry=geometry)
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    smap = sections["scheme"]
    scheme_fields = {f.name: f.type for f in fields(SchemeConfig)}
    scheme_types = {
        f.name: type(getattr(SchemeConfig(), f.name)) for f in fields(SchemeConfig)
    }
    unknown = set(smap) - set(scheme_fields)
    if unknown:
        raise ConfigError(f"unknown keys in [scheme]: {sorted(unknown)}")
    overrides = {k: _convert(k, v, scheme_types[k]) for k, v in smap.items()}
    try:
        scheme = replace(SchemeConfig(), **overrides).validated()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    wmap = sections["sweep"]
    unknown = set(wmap) - set(_SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys in [sweep]: {sorted(unknown)}")
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] | None = None
    if mode == "sweep":
        if "param" not in wmap or "values" not in wmap:
            raise ConfigError("sweep mode requires [sweep] param and values")
        sweep_param = wmap["param"]
        if sweep_param not in _SWEEPABLE:
            raise ConfigError(f"sweep param must be one of {_SWEEPABLE}")
        try:
            sweep_values = tuple(float(v) for v in wmap["values"].split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"cannot parse sweep values {wmap['values']!r}") from exc
        if len(sweep_values) < 2:
            raise ConfigError("sweep needs at least two values")
        if len(set(sweep_values)) != len(sweep_values):
            raise ConfigError("sweep values must be distinct")
    elif wmap:
        raise ConfigError("[sweep] keys are only allowed in sweep mode")

    return RunConfig(
        mode=mode,
        params=params,
        scheme=scheme,
        M=M,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        text=text,
    )


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return format(float(value), ".17g")


def emit_plotdata(
    columns: Sequence[str], rows: Iterable[Sequence], path: Path
) -> Path:
    """Write a comma-separated table with a one-line header, 17 digits."""
    lines = [",".join(columns)]
    count = 0
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
        count += 1
    if count == 0:
        raise ParameterError("refusing to emit an empty table")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_manifest(
    outdir: Path,
    config: RunConfig,
    status: str,
    wall: float,
    headline: dict[str, object],
) -> None:
    lines = [
        f"version={__version__}",
        f"mode={config.mode}",
        f"status={status}",
        f"wall_clock_seconds={wall:.3f}",
    ]
    lines += [f"{key}={_fmt(value)}" for key, value in headline.items()]
    lines.append("[config]")
    lines.append(config.text.rstrip("\n"))
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n")


def _emit_trajectory(traj: Trajectory, outdir: Path) -> None:
    emit_plotdata(
        ("t", "umax", "E", "K", "g", "dtau"),
        zip(traj.t, traj.umax, traj.energy, traj.gain, traj.dilation, traj.dtau),
        outdir / "ledger.csv",
    )
    for k, snap in enumerate(traj.snapshots):
        emit_plotdata(
            ("x", "u"),
            zip(snap.X, snap.u),
            outdir / "snapshots" / f"{k:04d}.csv",
        )


def _run_bifurcate(config: RunConfig, outdir: Path) -> tuple[str, dict[str, object]]:
    branch = steady.trace_branch(
        config.params.alpha, config.params.beta, steady.CANONICAL_M_GRID
    )
    emit_plotdata(
        ("M", "m", "lambda", "mu"),
        ((p.M, p.m, p.lam, p.mu) for p in branch.points),
        outdir / "branch.csv",
    )
    headline = {
        "fold_M": branch.fold.M,
        "fold_m": branch.fold.m,
        "fold_mu": branch.fold.mu,
        "fold_lambda": branch.fold.lam,
        "fold_M_refined": branch.fold_refined.M,
        "fold_lambda_refined": branch.fold_refined.lam,
        "points": len(branch.points),
        "skipped": len(branch.skipped),
    }
    return "ok", headline


def _run_bounds(config: RunConfig, outdir: Path) -> tuple[str, dict[str, object]]:
    report = steady.bounds_report(config.params, M=config.M)
    columns = (
        "pohozaev_lower",
        "mu_star_lower",
        "lambda_tilde",
        "upper",
        "lambda1",
        "m1",
    )
    emit_plotdata(
        columns,
        [
            (
                report.pohozaev_lower,
                report.mu_star_lower,
                report.lambda_tilde,
                report.upper,
                report.lambda1,
                report.m1,
            )
        ],
        outdir / "bounds.csv",
    )
    return "ok", {key: getattr(report, key) for key in columns}


def _run_simulate(config: RunConfig, outdir: Path) -> tuple[str, dict[str, object]]:
    traj = integrate(config.params, config.scheme, M=config.M)
    _emit_trajectory(traj, outdir)
    headline = {
        "terminal_status": traj.status,
        "steps": traj.t.size - 1,
        "t_end": traj.t[-1],
        "umax_end": traj.umax[-1],
        "failures": traj.failures,
    }
    status = "ok" if traj.status != "failed" else "failed"
    return status, headline


def _quench_pipeline(config: RunConfig, outdir: Path) -> tuple[Trajectory, QuenchReport | None]:
    traj = integrate(config.params, config.scheme, M=config.M)
    _emit_trajectory(traj, outdir)
    if traj.status != "quenched":
        return traj, None
    report = quench_report(traj)
    emit_plotdata(
        (
            "Tq",
            "x_star",
            "gamma",
            "rate_constant",
            "profile_constant",
            "profile_residual",
            "r_squared",
            "poor_fit",
        ),
        [
            (
                report.Tq,
                report.x_star,
                report.rate_exponent,
                report.rate_constant,
                report.profile_constant,
                report.profile_residual,
                report.r_squared,
                report.poor_fit,
            )
        ],
        outdir / "quench.csv",
    )
    return traj, report


def _run_quench(config: RunConfig, outdir: Path) -> tuple[str, dict[str, object]]:
    traj, report = _quench_pipeline(config, outdir)
    if report is None:
        return "failed", {
            "terminal_status": traj.status,
            "error": "run did not quench; no touchdown report",
        }
    headline = {
        "terminal_status": traj.status,
        "Tq": report.Tq,
        "x_star": report.x_star,
        "gamma": report.rate_exponent,
        "rate_constant": report.rate_constant,
        "profile_constant": report.profile_constant,
        "r_squared": report.r_squared,
        "poor_fit": report.poor_fit,
    }
    return "ok", headline


def _run_eigen(config: RunConfig, outdir: Path) -> tuple[str, dict[str, object]]:
    pair = steady.principal_eigenpair(
        config.params.geometry, config.params.beta, config.params.dim
    )
    emit_plotdata(("x", "phi"), zip(pair.x, pair.phi), outdir / "eigen.csv")
    return "ok", {"lambda1": pair.lambda1, "m1": pair.m1}


def _sweep_child(config: RunConfig, value: float) -> RunConfig:
    params = replace(config.params, **{config.sweep_param: value})
    return replace(config, mode="quench", params=validate(params), sweep_param=None,
                   sweep_values=None)


def _run_sweep(
    config: RunConfig, outdir: Path, workers: int
) -> tuple[str, dict[str, object]]:
    assert config.sweep_param and config.sweep_values
    values = sorted(config.sweep_values)

    def one(value: float) -> tuple[Trajectory, QuenchReport | None]:
        child = _sweep_child(config, value)
        sub = outdir / f"{config.sweep_param}={value:.12g}"
        return _quench_pipeline(child, sub)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(one, values))

    rows = []
    ok = True
    for value, (traj, report) in zip(values, results):
        if report is None:
            ok = False
            rows.append((value, float("nan"), float("nan"), traj.status))
        else:
            rows.append((value, report.Tq, report.rate_exponent, traj.status))
    emit_plotdata(
        (config.sweep_param, "Tq", "gamma", "status"), rows, outdir / "quench.csv"
    )
    headline: dict[str, object] = {"sweep_param": config.sweep_param,
                                   "sweep_count": len(values)}
    for value, (traj, report) in zip(values, results):
        key = f"Tq[{config.sweep_param}={value:.12g}]"
        headline[key] = None if report is None else report.Tq
    return ("ok" if ok else "failed"), headline


def run(config: RunConfig, outdir: Path, workers: int | None = None) -> int:
    """Execute one parsed config into outdir; returns the process exit code."""
    outdir = Path(outdir)
    start = time.perf_counter()
    try:
        if config.mode == "bifurcate":
            status, headline = _run_bifurcate(config, outdir)
        elif config.mode == "bounds":
            status, headline = _run_bounds(config, outdir)
        elif config.mode == "simulate":
            status, headline = _run_simulate(config, outdir)
        elif config.mode == "quench":
            status, headline = _run_quench(config, outdir)
        elif config.mode == "eigen":
            status, headline = _run_eigen(config, outdir)
        else:
            status, headline = _run_sweep(
                config, outdir, workers or os.cpu_count() or 1
            )
    except (BranchError, ParameterError, QuenchedStateError, RuntimeError) as exc:
        wall = time.perf_counter() - start
        _write_manifest(outdir, config, "failed", wall, {"error": str(exc)})
        print(f"memsq: numerical failure: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - start
    _write_manifest(outdir, config, status, wall, headline)
    if status != "ok":
        print(f"memsq: run finished with status {status}", file=sys.stderr)
        return 3
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="memsq",
        description="Touchdown laboratory: branches, bounds, moving-mesh runs.",
    )
    parser.add_argument("config", help="path to a key=value run config")
    parser.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
    parser.add_argument("--workers", type=int, default=None, help="sweep worker cap")
    args = parser.parse_args(argv)

    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"memsq: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(f"memsq: config error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(args.out) if args.out else path.parent / f"{path.stem}_out"
    return run(config, outdir, args.workers)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
