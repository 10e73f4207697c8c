"""Solitary-wave generation by the Petviashvili fixed-point iteration.

A traveling solution (zeta, u)(x - ct) of the periodic system satisfies, mode
by mode, the 2x2 fixed-point system

    S(ktilde) (zeta_hat, u_hat) = F_hat(ktilde),
    S(ktilde) = [[-c (1 + g),  (1/gamma)(1 + ((alpha-1)/alpha) g)],
                 [ 1 - gamma,  -c                                ]],
    F(zeta, u) = (1/gamma) (zeta*u, u^2/2)   (pointwise products),

where g = g(ktilde).  The Petviashvili update solves

    S Z[n+1] = m_n^2 F(Z[n]),
    m_n = <S Z[n], Z[n]> / <F(Z[n]), Z[n]>,

with the Euclidean inner product over all 2N nodal values; the squared
stabilizing factor matches the quadratic nonlinearity and collapses to 1 at a
solution.  The iteration is monitored by the residual RES = ||S Z - F(Z)||
in the same nodal norm and stops once RES <= tol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DenominatorCollapseError, NonConvergenceError, SingularModeError
from .spectral import (
    ModelParams,
    SpectralGrid,
    StatePair,
    nodal_inner,
    nodal_norm,
    projected_product,
    state_from_nodal,
    symbol_g,
    symmetrize_state,
)

# Relative floor below which a per-mode determinant counts as singular.
DET_FLOOR = 1e-12

# Relative floor for the stabilizing-factor denominator <F(Z), Z>.
DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True)
class SolitaryConfig:
    """Parameters of one solitary-wave solve."""

    speed: float
    tol: float = 1e-10
    max_iter: int = 500
    mw: int = 1
    seed_amplitude: float = -0.4
    seed_width: float = 1.2

    def __post_init__(self):
        if self.speed == 0.0:
            raise ValueError("speed must be nonzero")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.mw < 1:
            raise ValueError(f"mw must be >= 1, got {self.mw}")
        if self.seed_amplitude == 0.0:
            raise ValueError("seed_amplitude must be nonzero")
        if self.seed_width <= 0:
            raise ValueError(f"seed_width must be positive, got {self.seed_width}")


@dataclass
class IterationTrace:
    """Per-iteration log of the residual and stabilizing factor.

    One row per residual evaluation.  `phases` distinguishes plain
    Petviashvili steps from extrapolated points; `inner_steps[i]` is the
    number of fixed-point solves performed before row i was recorded, so the
    residual history can be plotted against either solves or cycles.
    """

    residuals: list[float] = field(default_factory=list)
    m_factors: list[float] = field(default_factory=list)
    phases: list[str] = field(default_factory=list)
    inner_steps: list[int] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0

    def append(self, residual: float, m: float, phase: str, inner: int) -> None:
        self.residuals.append(float(residual))
        self.m_factors.append(float(m))
        self.phases.append(phase)
        self.inner_steps.append(int(inner))


def assemble_S_mode(params: ModelParams, c: float, ktilde: float) -> np.ndarray:
    """The 2x2 per-mode matrix S(ktilde)."""
    g = float(symbol_g(params, np.asarray(ktilde)))
    a = params.alpha
    return np.array(
        [
            [-c * (1.0 + g), (1.0 + (a - 1.0) / a * g) / params.gamma],
            [1.0 - params.gamma, -c],
        ]
    )


@lru_cache(maxsize=None)
def _S_tables(params: ModelParams, grid: SpectralGrid, c: float):
    """Per-mode entries of S and its determinant, with the singularity check."""
    g = symbol_g(params, grid.wavenumbers)
    a = params.alpha
    s11 = -c * (1.0 + g)
    s12 = (1.0 + (a - 1.0) / a * g) / params.gamma
    s21 = np.full_like(g, 1.0 - params.gamma)
    s22 = np.full_like(g, -c)
    det = s11 * s22 - s12 * s21
    floor = DET_FLOOR * np.maximum.reduce([np.abs(s11), np.abs(s12), np.abs(s21), np.abs(s22)])
    bad = np.abs(det) <= floor
    if np.any(bad):
        i = int(np.argmin(np.abs(det) - floor))
        raise SingularModeError(grid.wavenumbers[i], det[i])
    return s11, s12, s21, s22, det


def apply_S(params: ModelParams, grid: SpectralGrid, c: float, z: StatePair) -> StatePair:
    s11, s12, s21, s22, _ = _S_tables(params, grid, c)
    return StatePair(s11 * z.zeta_hat + s12 * z.u_hat, s21 * z.zeta_hat + s22 * z.u_hat)


def solve_S(params: ModelParams, grid: SpectralGrid, c: float, rhs: StatePair) -> StatePair:
    """Apply S(ktilde)^{-1} mode by mode (closed-form 2x2 inversion)."""
    s11, s12, s21, s22, det = _S_tables(params, grid, c)
    zeta = (s22 * rhs.zeta_hat - s12 * rhs.u_hat) / det
    u = (-s21 * rhs.zeta_hat + s11 * rhs.u_hat) / det
    return StatePair(zeta, u)


def nonlinearity_F(params: ModelParams, grid: SpectralGrid, z: StatePair) -> StatePair:
    """(1/gamma) (zeta*u, u^2/2) with alias-free pointwise products."""
    zu = projected_product(grid, z.zeta_hat, z.u_hat)
    uu = projected_product(grid, z.u_hat, z.u_hat)
    return StatePair(zu / params.gamma, uu / (2.0 * params.gamma))


def seed_profile(params: ModelParams, grid: SpectralGrid, config: SolitaryConfig) -> StatePair:
    """Initial iterate: zeta = A sech^2(lambda x), u = (1-gamma) zeta / c.

    The u component comes from the second (algebraic) equation of the
    traveling-wave system with its quadratic term dropped.
    """
    x = grid.nodes
    zeta = config.seed_amplitude / np.cosh(config.seed_width * x) ** 2
    u = (1.0 - params.gamma) * zeta / config.speed
    return symmetrize_state(state_from_nodal(grid, zeta, u))


def evaluate_iterate(
    params: ModelParams, grid: SpectralGrid, c: float, z: StatePair
) -> tuple[StatePair, float, float]:
    """F(Z), the stabilizing factor m, and the residual RES at iterate Z."""
    sz = apply_S(params, grid, c, z)
    fz = nonlinearity_F(params, grid, z)
    num = nodal_inner(grid, sz, z)
    den = nodal_inner(grid, fz, z)
    norm2 = nodal_inner(grid, z, z)
    if abs(den) < DENOMINATOR_FLOOR * norm2:
        raise DenominatorCollapseError(
            f"<F(Z), Z> = {den:.3e} is negligible against ||Z||^2 = {norm2:.3e}"
        )
    m = num / den
    res = nodal_norm(grid, sz - fz)
    return fz, m, res


def residual_norm(params: ModelParams, grid: SpectralGrid, c: float, z: StatePair) -> float:
    sz = apply_S(params, grid, c, z)
    fz = nonlinearity_F(params, grid, z)
    return nodal_norm(grid, sz - fz)


def petviashvili_step(
    params: ModelParams, grid: SpectralGrid, c: float, fz: StatePair, m: float
) -> StatePair:
    """Solve S Z_next = m^2 F(Z); the exponent 2 is fixed by the quadratic nonlinearity."""
    return symmetrize_state(solve_S(params, grid, c, (m * m) * fz))


def petviashvili_iterate(
    params: ModelParams,
    grid: SpectralGrid,
    config: SolitaryConfig,
    seed: StatePair | None = None,
) -> tuple[StatePair, IterationTrace]:
    """Plain (unaccelerated) Petviashvili iteration.

    Records (RES, m) at every iterate starting from the seed, performs at most
    `max_iter` fixed-point solves, and raises NonConvergenceError (trace and
    last state attached) if the tolerance was never met.
    """
    z = seed.copy() if seed is not None else seed_profile(params, grid, config)
    if nodal_norm(grid, z) == 0.0:
        raise ValueError("seed iterate must be nonzero")
    trace = IterationTrace()
    for nu in range(config.max_iter):
        fz, m, res = evaluate_iterate(params, grid, config.speed, z)
        trace.append(res, m, "plain", nu)
        if res <= config.tol:
            trace.converged = True
            trace.iterations_used = nu
            return z, trace
        z = petviashvili_step(params, grid, config.speed, fz, m)
    trace.iterations_used = config.max_iter
    raise NonConvergenceError(trace, state=z)
