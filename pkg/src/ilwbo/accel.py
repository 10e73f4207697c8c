"""Minimal polynomial extrapolation (MPE) over Petviashvili iterates.

Given a window of consecutive iterates Z_0, ..., Z_{q+1} with differences
W_j = Z_{j+1} - Z_j, the order-q extrapolation solves, in the least-squares
sense,

    c_0 W_0 + ... + c_{q-1} W_{q-1} = -W_q,     c_q = 1,

normalizes gamma_j = c_j / sum(c) (so the gammas sum to one exactly) and
returns the affine recombination X = sum_j gamma_j Z_j over the first q+1
iterates.  For an affine iteration Z -> M Z + b this recovers the fixed point
exactly whenever the minimal polynomial of M with respect to the initial
error has degree <= q and 1 is not an eigenvalue of M.

`cycled_solve` wraps the Petviashvili iteration in cycling mode: with width
mw >= 2 it runs mw fixed-point solves, extrapolates over the resulting window
of mw+1 iterates (order mw-1), restarts from the extrapolated point, and
repeats; mw = 1 is the plain iteration.  An extrapolated point is accepted
only if it does not increase the residual; otherwise the cycle continues from
the last plain iterate, so cycling can never do worse than the plain
iteration (a looser 10x acceptance window lets occasional bad extrapolations
through during the nonlinear transient and measurably slows convergence).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DegenerateSumError, NonConvergenceError
from .solitary import (
    IterationTrace,
    SolitaryConfig,
    evaluate_iterate,
    petviashvili_iterate,
    petviashvili_step,
    seed_profile,
)
from .spectral import ModelParams, SpectralGrid, StatePair, nodal_norm, symmetrize_state

# Accept an extrapolated point only if it does not worsen the residual.
RESIDUAL_GUARD = 1.0

# |sum(c)| below this (relative to max |c|) makes the gammas meaningless.
SUM_FLOOR = 1e-12


def _as_real_vector(z: StatePair) -> np.ndarray:
    return np.concatenate(
        [z.zeta_hat.real, z.zeta_hat.imag, z.u_hat.real, z.u_hat.imag]
    )


def mpe_coefficients(window: Sequence[StatePair]) -> np.ndarray:
    """Affine weights gamma_0..gamma_q for a window of q+2 iterates.

    A stationary window (all differences exactly zero) short-circuits to
    gamma = (0, ..., 0, 1): the sequence has already converged and the last
    combined iterate is returned unchanged.  Rank-deficient difference
    matrices are handled by the minimum-norm least-squares solution; a
    vanishing coefficient sum raises DegenerateSumError so the caller can
    skip the extrapolation for this cycle.
    """
    if len(window) < 2:
        raise ValueError("window must hold at least two iterates")
    diffs = [_as_real_vector(b - a) for a, b in zip(window[:-1], window[1:])]
    q = len(diffs) - 1  # extrapolation order
    if all(not d.any() for d in diffs):
        gam = np.zeros(q + 1)
        gam[-1] = 1.0
        return gam
    if q == 0:
        return np.ones(1)
    a_mat = np.stack(diffs[:-1], axis=1)
    rhs = -diffs[-1]
    c_free, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    c = np.append(c_free, 1.0)
    total = c.sum()
    if abs(total) < SUM_FLOOR * np.max(np.abs(c)):
        raise DegenerateSumError(
            f"coefficient sum {total:.3e} is negligible against max |c| "
            f"{np.max(np.abs(c)):.3e}"
        )
    return c / total


def mpe_extrapolate(window: Sequence[StatePair], gammas: np.ndarray) -> StatePair:
    """Affine recombination sum_j gamma_j Z_j over the first len(gammas) iterates."""
    gammas = np.asarray(gammas, dtype=float)
    if len(gammas) > len(window):
        raise ValueError("more coefficients than window iterates")
    if abs(gammas.sum() - 1.0) > 1e-12:
        raise ValueError(f"coefficients must sum to 1, got {gammas.sum()!r}")
    out = gammas[0] * window[0]
    for g, z in zip(gammas[1:], window[1:]):
        out = out + g * z
    return symmetrize_state(out)


def cycled_solve(
    params: ModelParams,
    grid: SpectralGrid,
    config: SolitaryConfig,
    seed: StatePair | None = None,
) -> tuple[StatePair, IterationTrace]:
    """Petviashvili iteration in MPE cycling mode with width config.mw.

    The residual is recorded and checked against the tolerance after every
    fixed-point solve and after every extrapolation; the iteration cap counts
    fixed-point solves only (extrapolations are a few small least-squares
    problems and essentially free).
    """
    if config.mw == 1:
        return petviashvili_iterate(params, grid, config, seed)

    c = config.speed
    z = seed.copy() if seed is not None else seed_profile(params, grid, config)
    if nodal_norm(grid, z) == 0.0:
        raise ValueError("seed iterate must be nonzero")

    trace = IterationTrace()
    solves = 0
    fz, m, res = evaluate_iterate(params, grid, c, z)
    trace.append(res, m, "plain", solves)
    if res <= config.tol:
        trace.converged = True
        trace.iterations_used = 0
        return z, trace

    while True:
        window = [z]
        for _ in range(config.mw):
            if solves >= config.max_iter:
                trace.iterations_used = solves
                raise NonConvergenceError(trace, state=z)
            z = petviashvili_step(params, grid, c, fz, m)
            solves += 1
            fz, m, res = evaluate_iterate(params, grid, c, z)
            trace.append(res, m, "plain", solves)
            if res <= config.tol:
                trace.converged = True
                trace.iterations_used = solves
                return z, trace
            window.append(z)

        try:
            gammas = mpe_coefficients(window)
            x = mpe_extrapolate(window, gammas)
        except DegenerateSumError:
            continue  # keep iterating from the last plain iterate
        fx, mx, res_x = evaluate_iterate(params, grid, c, x)
        trace.append(res_x, mx, "extrapolated", solves)
        if res_x <= config.tol:
            trace.converged = True
            trace.iterations_used = solves
            return x, trace
        if res_x <= RESIDUAL_GUARD * res:
            z, fz, m, res = x, fx, mx, res_x
        # else: rejected; restart the cycle from the last plain iterate
