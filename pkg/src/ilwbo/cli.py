"""Command-line entry point: evolve, solitary-wave generation, verification.

Usage:
    ilwbo evolve   --config cfg.json [--out DIR] [--threads N] [--quiet]
    ilwbo solitary --config cfg.json [--out DIR] [--threads N] [--quiet]
    ilwbo verify   --config cfg.json [--out DIR] [--threads N] [--quiet]

Configs are JSON (exact schemas in the README).  Every run writes a
manifest.json with the command name, the fully resolved configuration (which
can be fed back as a config file to reproduce the run), the list of emitted
files, the exit status and the wall time.

Exit codes:
    0  success (verify: all experiments passed)
    2  configuration error (message names the offending key)
    3  numerical failure during evolve (failing time in the manifest)
    4  solitary iteration did not converge (trace still written)
    5  singular per-mode matrix (offending wavenumber reported)
    6  verify: at least one experiment failed its threshold
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .accel import cycled_solve
from .errors import (
    IlwboError,
    NonConvergenceError,
    SingularModeError,
    StepFailureError,
)
from .evolution import EvolutionConfig, evolve
from .harness import (
    ALGEBRAIC,
    EXPONENTIAL,
    acceleration_benchmark,
    convergence_study,
    decay_fit,
    gaussian_state,
    sech2_state,
    traveling_wave_roundtrip,
)
from .io_utils import (
    read_profile_csv,
    write_acceleration_table,
    write_convergence_report,
    write_decay_fit,
    write_json,
    write_snapshots,
    write_trace_csv,
    write_wave_csv,
)
from .solitary import SolitaryConfig
from .spectral import (
    ModelParams,
    SpectralGrid,
    set_fft_workers,
    state_from_nodal,
    state_to_nodal,
    symmetrize_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4
EXIT_SINGULAR = 5
EXIT_VERIFY_FAILED = 6

_EXIT_CODE_HELP = """exit codes:
  0  success (verify: all experiments passed)
  2  configuration error (message names the offending key)
  3  numerical failure during evolve (failing time in the manifest)
  4  solitary iteration did not converge (trace still written)
  5  singular per-mode matrix (offending wavenumber reported)
  6  verify: at least one experiment failed its threshold
"""


class ConfigError(Exception):
    """Invalid or missing configuration; the message names the key."""


def _get(cfg: dict, key: str, kind, default=None, required: bool = False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required config key '{key}'")
        return default
    value = cfg[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return int(value)
    if kind is str and isinstance(value, str):
        return value
    if kind is list and isinstance(value, list):
        return value
    if kind is dict and isinstance(value, dict):
        return value
    raise ConfigError(f"config key '{key}' must be of type {kind.__name__}")


def _build_params(cfg: dict) -> ModelParams:
    gamma = _get(cfg, "gamma", float, required=True)
    alpha = _get(cfg, "alpha", float, required=True)
    regime = _get(cfg, "regime", str, required=True)
    try:
        return ModelParams(gamma=gamma, alpha=alpha, regime=regime.lower())
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _build_grid(cfg: dict) -> SpectralGrid:
    half_length = _get(cfg, "l", float, required=True)
    n = _get(cfg, "N", int, required=True)
    try:
        return SpectralGrid(half_length=half_length, n_modes=n)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _initial_state(cfg: dict, grid: SpectralGrid):
    spec = _get(cfg, "initial", dict, required=True)
    kind = _get(spec, "kind", str, required=True)
    if kind == "gaussian":
        amp = _get(spec, "amplitude", float, required=True)
        width = _get(spec, "width", float, required=True)
        return gaussian_state(amp, width)(grid)
    if kind == "sech2":
        amp = _get(spec, "amplitude", float, required=True)
        width = _get(spec, "width", float, required=True)
        return sech2_state(amp, width)(grid)
    if kind == "from-file":
        path = _get(spec, "path", str, required=True)
        try:
            x, zeta, u = read_profile_csv(path)
        except (OSError, ValueError) as err:
            raise ConfigError(f"config key 'initial.path': {err}") from err
        if len(x) != grid.n_modes:
            raise ConfigError(
                f"config key 'initial.path': file has {len(x)} rows, grid expects "
                f"{grid.n_modes}"
            )
        if not np.allclose(x, grid.nodes, atol=1e-9 * grid.half_length):
            raise ConfigError("config key 'initial.path': x column does not match the grid nodes")
        return symmetrize_state(state_from_nodal(grid, zeta, u))
    raise ConfigError(
        f"config key 'initial.kind' must be 'gaussian', 'sech2' or 'from-file', got {kind!r}"
    )


# ----------------------------------------------------------------------------
# evolve
# ----------------------------------------------------------------------------

def _resolve_evolve_config(cfg: dict) -> dict:
    params = _build_params(cfg)
    grid = _build_grid(cfg)
    t_end = _get(cfg, "t_end", float, required=True)
    dt = _get(cfg, "dt", float, required=True)
    n_steps = max(1, int(round(t_end / dt))) if t_end > 0 else 1
    resolved = {
        "regime": params.regime,
        "gamma": params.gamma,
        "alpha": params.alpha,
        "l": grid.half_length,
        "N": grid.n_modes,
        "t_end": t_end,
        "dt": dt,
        "record_every": _get(cfg, "record_every", int, default=max(1, n_steps // 10)),
        "cfl_guard": _get(cfg, "cfl_guard", float, default=0.5),
        "initial": _get(cfg, "initial", dict, required=True),
    }
    return resolved


def cmd_evolve(cfg: dict, out_dir: str, quiet: bool) -> tuple[int, list[str], dict]:
    resolved = _resolve_evolve_config(cfg)
    params = _build_params(resolved)
    grid = _build_grid(resolved)
    initial = _initial_state(resolved, grid)
    try:
        config = EvolutionConfig(
            t_end=resolved["t_end"],
            dt=resolved["dt"],
            record_every=resolved["record_every"],
            cfl_guard=resolved["cfl_guard"],
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err

    try:
        record = evolve(params, grid, initial, config)
    except ValueError as err:
        # step-size guard violation: a configuration problem, not a blow-up
        raise ConfigError(str(err)) from err
    except StepFailureError as err:
        return EXIT_NUMERICAL, [], {"failing_time": err.time, "error": str(err)}

    files = write_snapshots(out_dir, grid, params, record)
    if not quiet:
        print(f"evolve: wrote {len(files)} files to {out_dir}")
    return EXIT_OK, files, {"snapshots": len(record.times)}


# ----------------------------------------------------------------------------
# solitary
# ----------------------------------------------------------------------------

def _resolve_solitary_config(cfg: dict) -> dict:
    params = _build_params(cfg)
    grid = _build_grid(cfg)
    return {
        "regime": params.regime,
        "gamma": params.gamma,
        "alpha": params.alpha,
        "l": grid.half_length,
        "N": grid.n_modes,
        "c": _get(cfg, "c", float, required=True),
        "tol": _get(cfg, "tol", float, default=1e-10),
        "max_iter": _get(cfg, "max_iter", int, default=500),
        "mw": _get(cfg, "mw", int, default=1),
        "seed_amplitude": _get(cfg, "seed_amplitude", float, default=-0.4),
        "seed_width": _get(cfg, "seed_width", float, default=0.5),
    }


def _solitary_config(resolved: dict) -> SolitaryConfig:
    try:
        return SolitaryConfig(
            speed=resolved["c"],
            tol=resolved["tol"],
            max_iter=resolved["max_iter"],
            mw=resolved["mw"],
            seed_amplitude=resolved["seed_amplitude"],
            seed_width=resolved["seed_width"],
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def cmd_solitary(cfg: dict, out_dir: str, quiet: bool) -> tuple[int, list[str], dict]:
    resolved = _resolve_solitary_config(cfg)
    params = _build_params(resolved)
    grid = _build_grid(resolved)
    config = _solitary_config(resolved)

    files: list[str] = []
    try:
        wave, trace = cycled_solve(params, grid, config)
    except SingularModeError as err:
        if not quiet:
            print(f"solitary: {err}", file=sys.stderr)
        return EXIT_SINGULAR, [], {
            "termination": "singular-mode",
            "ktilde": err.ktilde,
            "det": err.det,
        }
    except NonConvergenceError as err:
        write_trace_csv(os.path.join(out_dir, "trace.csv"), err.trace)
        files.append("trace.csv")
        if not quiet:
            print(f"solitary: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED, files, {
            "termination": "not-converged",
            "iterations": err.trace.iterations_used,
            "last_residual": err.trace.residuals[-1],
        }

    write_wave_csv(os.path.join(out_dir, "wave.csv"), grid, wave)
    write_trace_csv(os.path.join(out_dir, "trace.csv"), trace)
    files += ["wave.csv", "trace.csv"]
    if not quiet:
        print(
            f"solitary: converged in {trace.iterations_used} iterations "
            f"(residual {trace.residuals[-1]:.3e})"
        )
    return EXIT_OK, files, {
        "termination": "converged",
        "iterations": trace.iterations_used,
        "last_residual": trace.residuals[-1],
    }


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------

def _solve_wave(block: dict):
    resolved = _resolve_solitary_config(block)
    params = _build_params(resolved)
    grid = _build_grid(resolved)
    config = _solitary_config(resolved)
    wave, trace = cycled_solve(params, grid, config)
    return resolved, params, grid, config, wave, trace


def _verify_convergence(block: dict, out_dir: str, tag: str) -> tuple[bool, dict, list[str]]:
    params = _build_params(block)
    resolutions = _get(block, "resolutions", list, default=[32, 64, 128])
    report = convergence_study(
        params,
        gaussian_state(
            _get(block, "amplitude", float, default=0.1),
            _get(block, "width", float, default=1.2),
        ),
        resolutions,
        t_end=_get(block, "t_end", float, default=1.0),
        dt=_get(block, "dt", float, default=0.002),
        half_length=_get(block, "l", float, default=16.0),
    )
    min_ratio = _get(block, "min_ratio", float, default=16.0)
    ok = report.is_spectral(min_ratio)
    name = f"convergence_report{tag}.csv"
    write_convergence_report(os.path.join(out_dir, name), report)
    detail = {
        "resolutions": report.resolutions,
        "errors": report.errors,
        "rates": report.observed_rates,
        "probe_delta": report.probe_delta,
        "min_ratio": min_ratio,
        "spectral": ok,
    }
    return ok, detail, [name]


def _verify_roundtrip(block: dict, out_dir: str, tag: str) -> tuple[bool, dict, list[str]]:
    resolved, params, grid, config, wave, _ = _solve_wave(block)
    t_end = _get(block, "t_end", float, default=1.0)
    dt = _get(block, "dt", float, default=1e-3)
    threshold = _get(block, "threshold", float, default=1e-6)
    deviation = traveling_wave_roundtrip(params, grid, wave, config.speed, t_end, dt)
    ok = deviation <= threshold
    name = f"roundtrip{tag}.json"
    detail = {
        "deviation": deviation,
        "threshold": threshold,
        "t_end": t_end,
        "dt": dt,
        "wave": resolved,
    }
    write_json(os.path.join(out_dir, name), detail | {"pass": ok})
    return ok, detail, [name]


def _verify_decay(block: dict, out_dir: str, tag: str) -> tuple[bool, dict, list[str]]:
    resolved, params, grid, config, wave, _ = _solve_wave(block)
    zeta, _ = state_to_nodal(grid, wave)
    crest_scale = None  # measured from the converged profile
    model = _get(block, "model", str, default="compare")
    name = f"decay_fit{tag}.json"
    if model == "compare":
        fit_exp = decay_fit(grid, zeta, EXPONENTIAL, crest_scale)
        fit_alg = decay_fit(grid, zeta, ALGEBRAIC, crest_scale)
        min_quality = _get(block, "min_quality", float, default=0.99)
        ok = fit_exp.fit_quality >= min_quality and fit_exp.fit_quality > fit_alg.fit_quality
        detail = {
            "model": "compare",
            "exponential": {"rate": fit_exp.fitted_rate, "quality": fit_exp.fit_quality},
            "algebraic": {"rate": fit_alg.fitted_rate, "quality": fit_alg.fit_quality},
            "min_quality": min_quality,
        }
        write_decay_fit(
            os.path.join(out_dir, name), fit_exp, extra={"algebraic_quality": fit_alg.fit_quality, "pass": ok}
        )
        return ok, detail, [name]
    if model not in (EXPONENTIAL, ALGEBRAIC):
        raise ConfigError(
            f"config key 'model' must be 'exponential', 'algebraic' or 'compare', got {model!r}"
        )
    fit = decay_fit(grid, zeta, model, crest_scale)
    if model == ALGEBRAIC:
        target = _get(block, "rate_target", float, default=2.0)
        rate_tol = _get(block, "rate_tol", float, default=0.3)
        ok = abs(fit.fitted_rate - target) <= rate_tol
        detail = {"model": model, "rate": fit.fitted_rate, "quality": fit.fit_quality,
                  "rate_target": target, "rate_tol": rate_tol}
    else:
        min_quality = _get(block, "min_quality", float, default=0.99)
        ok = fit.fit_quality >= min_quality
        detail = {"model": model, "rate": fit.fitted_rate, "quality": fit.fit_quality,
                  "min_quality": min_quality}
    write_decay_fit(os.path.join(out_dir, name), fit, extra={"pass": ok})
    return ok, detail, [name]


def _accel_ordering_ok(counts: dict[int, int]) -> bool:
    """Iteration counts non-increasing in mw, strictly at 1 -> 2, and with the
    largest absolute drop at 1 -> 2 when both widths are present."""
    widths = sorted(counts)
    pairs = list(zip(widths[:-1], widths[1:]))
    for a, b in pairs:
        if counts[b] > counts[a]:
            return False
        if a == 1 and not counts[b] < counts[a]:
            return False  # ties are only allowed among mw >= 2
    if 1 in counts and 2 in counts:
        first_drop = counts[1] - counts[2]
        for a, b in pairs:
            if (a, b) != (1, 2) and counts[a] - counts[b] > first_drop:
                return False
    return True


def _verify_accel(block: dict, out_dir: str, tag: str) -> tuple[bool, dict, list[str]]:
    resolved = _resolve_solitary_config(block)
    params = _build_params(resolved)
    grid = _build_grid(resolved)
    config = _solitary_config(resolved)
    mw_list = [int(m) for m in _get(block, "mw_list", list, default=[1, 2, 3, 4])]
    rows = acceleration_benchmark(params, grid, config, mw_list)
    name = f"acceleration_table{tag}.csv"
    files = [name]
    write_acceleration_table(os.path.join(out_dir, name), rows)
    for row in rows:
        if row.trace is not None:
            trace_name = f"trace_mw{row.mw}{tag}.csv"
            write_trace_csv(os.path.join(out_dir, trace_name), row.trace)
            files.append(trace_name)
    converged = {r.mw: r.iterations for r in rows if r.status == "converged"}
    ok = len(converged) == len(rows) and _accel_ordering_ok(converged)
    detail = {
        "iterations": {str(r.mw): r.iterations for r in rows},
        "status": {str(r.mw): r.status for r in rows},
    }
    return ok, detail, files


_EXPERIMENTS = {
    "convergence": _verify_convergence,
    "roundtrip": _verify_roundtrip,
    "decay": _verify_decay,
    "accel": _verify_accel,
}


def cmd_verify(cfg: dict, out_dir: str, quiet: bool) -> tuple[int, list[str], dict]:
    blocks = _get(cfg, "experiments", list, required=True)
    if not blocks:
        raise ConfigError("config key 'experiments' must be a non-empty list")
    results = []
    files: list[str] = []
    seen: dict[str, int] = {}
    for block in blocks:
        if not isinstance(block, dict):
            raise ConfigError("config key 'experiments' entries must be objects")
        kind = _get(block, "kind", str, required=True)
        if kind not in _EXPERIMENTS:
            raise ConfigError(
                f"config key 'kind' must be one of {sorted(_EXPERIMENTS)}, got {kind!r}"
            )
        seen[kind] = seen.get(kind, 0) + 1
        tag = "" if seen[kind] == 1 else f"_{seen[kind]}"
        try:
            ok, detail, emitted = _EXPERIMENTS[kind](block, out_dir, tag)
        except IlwboError as err:
            # solver-level failures fail the experiment, not the command
            ok, detail, emitted = False, {"error": str(err)}, []
        results.append({"kind": kind, "pass": ok, "detail": detail})
        files.extend(emitted)
        if not quiet:
            print(f"verify[{kind}]: {'PASS' if ok else 'FAIL'}")
    all_pass = all(r["pass"] for r in results)
    write_json(os.path.join(out_dir, "summary.json"), {"experiments": results, "all_pass": all_pass})
    files.append("summary.json")
    return (EXIT_OK if all_pass else EXIT_VERIFY_FAILED), files, {"all_pass": all_pass}


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------

_RESOLVERS = {
    "evolve": _resolve_evolve_config,
    "solitary": _resolve_solitary_config,
    "verify": lambda cfg: cfg,
}

_COMMANDS = {
    "evolve": cmd_evolve,
    "solitary": cmd_solitary,
    "verify": cmd_verify,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ilwbo",
        description="Spectral solver suite for the two-layer ILW / B-O internal-wave systems.",
        epilog=_EXIT_CODE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("evolve", "time-step the periodic initial-value problem"),
        ("solitary", "generate a solitary wave by accelerated fixed-point iteration"),
        ("verify", "run verification experiments against their thresholds"),
    ):
        p = sub.add_parser(
            name,
            help=help_text,
            epilog=_EXIT_CODE_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", required=True, help="path to the JSON config file")
        p.add_argument("--out", default="./out", help="output directory (default ./out)")
        p.add_argument("--threads", type=int, default=-1,
                       help="FFT worker threads (default: all)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    set_fft_workers(args.threads)
    started = time.perf_counter()

    try:
        with open(args.config) as handle:
            cfg = json.load(handle)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        resolved = _RESOLVERS[args.command](cfg)
        code, files, extra = _COMMANDS[args.command](cfg, args.out, args.quiet)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as err:
        print(f"config error: cannot read '{args.config}': {err}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = {
        "command": args.command,
        "version": __version__,
        "config": resolved,
        "outputs": files,
        "exit_status": code,
        "wall_time_seconds": time.perf_counter() - started,
    }
    manifest.update(extra)
    write_json(os.path.join(args.out, "manifest.json"), manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
