"""File emission helpers: atomic writes, CSV/JSON formats.

All floating-point values are written with the shortest round-trip decimal
representation (Python repr), so reloading a CSV reproduces the exact binary
values and identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from .harness import AccelRow, ConvergenceReport, DecayFit
from .solitary import IterationTrace
from .spectral import SpectralGrid, StatePair, state_to_nodal


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------------
# Solver outputs
# ----------------------------------------------------------------------------

def write_wave_csv(path: str, grid: SpectralGrid, state: StatePair) -> None:
    zeta, u = state_to_nodal(grid, state)
    write_csv(path, ["x", "zeta", "u"], zip(grid.nodes, zeta, u))


def read_profile_csv(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read an x, zeta, u CSV produced by `write_wave_csv` (or compatible)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("x", "zeta", "u"):
        if col not in (data.dtype.names or ()):
            raise ValueError(f"profile CSV missing column {col!r}")
    return (
        np.atleast_1d(data["x"]),
        np.atleast_1d(data["zeta"]),
        np.atleast_1d(data["u"]),
    )


def write_trace_csv(path: str, trace: IterationTrace) -> None:
    write_csv(
        path,
        ["iter", "residual", "m_factor", "phase"],
        zip(trace.inner_steps, trace.residuals, trace.m_factors, trace.phases),
    )


def write_snapshots(
    out_dir: str,
    grid: SpectralGrid,
    params,
    record,
    prefix: str = "snapshot",
) -> list[str]:
    """One t,x,zeta,u CSV per snapshot plus a manifest naming them all."""
    files = []
    for i, (t, state) in enumerate(zip(record.times, record.states)):
        zeta, u = state_to_nodal(grid, state)
        name = f"{prefix}_{i:04d}.csv"
        write_csv(
            os.path.join(out_dir, name),
            ["t", "x", "zeta", "u"],
            zip([t] * grid.n_modes, grid.nodes, zeta, u),
        )
        files.append(name)
    write_json(
        os.path.join(out_dir, f"{prefix}s_manifest.json"),
        {
            "files": files,
            "times": [float(t) for t in record.times],
            "grid": {"half_length": grid.half_length, "n_modes": grid.n_modes},
            "params": {
                "gamma": params.gamma,
                "alpha": params.alpha,
                "regime": params.regime,
            },
        },
    )
    files.append(f"{prefix}s_manifest.json")
    return files


# ----------------------------------------------------------------------------
# Harness reports
# ----------------------------------------------------------------------------

def write_convergence_report(path: str, report: ConvergenceReport) -> None:
    rows = []
    for i, (n, e) in enumerate(zip(report.resolutions, report.errors)):
        rate = report.observed_rates[i - 1] if i > 0 else float("nan")
        rows.append((n, e, rate))
    write_csv(path, ["N", "error", "rate"], rows)


def write_acceleration_table(path: str, rows: Sequence[AccelRow]) -> None:
    write_csv(
        path,
        ["mw", "iterations", "seconds", "status"],
        ((r.mw, r.iterations, r.seconds, r.status) for r in rows),
    )


def write_decay_fit(path: str, fit: DecayFit, extra: dict | None = None) -> None:
    payload = {
        "model": fit.model,
        "rate": fit.fitted_rate,
        "quality": fit.fit_quality,
        "window": [fit.window[0], fit.window[1]],
        "n_points": fit.n_points,
    }
    if extra:
        payload.update(extra)
    write_json(path, payload)
