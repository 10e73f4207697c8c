"""Periodic Fourier spectral infrastructure for the two-layer internal-wave systems.

Conventions used throughout the package
---------------------------------------
* Domain: ``[-l, l)`` with period ``2l``, sampled at the ``N`` equispaced nodes
  ``x_j = -l + j*h``, ``h = 2l/N``.
* Modes: integers ``k = -N/2 .. N/2-1`` stored in standard FFT order
  ``[0, 1, ..., N/2-1, -N/2, ..., -1]``; the physical wavenumber of mode ``k``
  is ``ktilde = pi*k/l``.
* Coefficients: ``c[k]`` multiplies the basis function ``exp(i*ktilde*x)``, so
  they approximate the continuous Fourier coefficients on ``[-l, l]``.  The
  forward transform divides by ``N``; e.g. ``cos(pi*x/l)`` has coefficients
  ``1/2`` at ``k = +-1`` and zeros elsewhere.  Because the first node sits at
  ``x = -l`` rather than ``0``, the raw FFT output carries an extra ``(-1)^k``
  phase which the transform helpers fold in.
* Real fields are represented by Hermitian-symmetric coefficient arrays:
  ``c[-k] == conj(c[k])`` with a real entry at ``k = 0`` and ``k = -N/2``.

The two model regimes differ only in the nonlocal symbol ``g``:
``g(k) = (alpha/gamma) * |k| * coth|k|`` for the finite-lower-depth (ILW)
system and ``g(k) = (alpha/gamma) * |k|`` for the infinite-depth (B-O) limit.
The derived multipliers are ``T = 1/(1+g)`` and
``J = (1 + ((alpha-1)/alpha) g) / (1 + g)``, with the equivalent one-operator
form ``J = (alpha-1)/alpha + T/alpha`` used for evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

ILW = "ilw"
BO = "bo"

# coth branch switches: series below, asymptote above (coth(20) - 1 < 1e-17)
_COTH_SERIES_CUT = 1e-8
_COTH_ASYMPTOTE_CUT = 20.0

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Set the worker count passed to the FFT backend (-1 means all cores)."""
    global _fft_workers
    _fft_workers = int(n)


@dataclass(frozen=True)
class ModelParams:
    """Physical/model constants of the two-layer system.

    gamma is the density ratio (upper over lower, < 1), alpha the modelling
    parameter (> 1), regime selects the nonlocal symbol (ILW or BO).
    """

    gamma: float
    alpha: float
    regime: str = ILW

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.regime not in (ILW, BO):
            raise ValueError(f"regime must be '{ILW}' or '{BO}', got {self.regime!r}")


@dataclass(frozen=True)
class SpectralGrid:
    """Periodic grid on [-l, l) with N nodes and N Fourier modes."""

    half_length: float
    n_modes: int

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        n = self.n_modes
        if n < 8 or n % 2 != 0:
            raise ValueError(f"n_modes must be even and >= 8, got {n}")

    @property
    def node_spacing(self) -> float:
        return 2.0 * self.half_length / self.n_modes

    @cached_property
    def nodes(self) -> np.ndarray:
        """x_j = -l + j*h for j = 0..N-1."""
        return -self.half_length + self.node_spacing * np.arange(self.n_modes)

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        """Integer modes in FFT order: [0, 1, ..., N/2-1, -N/2, ..., -1]."""
        return np.fft.fftfreq(self.n_modes, d=1.0 / self.n_modes)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """ktilde = pi*k/l in the same FFT order as `mode_numbers`."""
        return (np.pi / self.half_length) * self.mode_numbers

    @cached_property
    def _phase(self) -> np.ndarray:
        # (-1)^k factor mapping raw FFT output (first node at -l) to
        # coefficients of exp(i*ktilde*x); its own inverse.
        return np.where(self.mode_numbers.astype(int) % 2 == 0, 1.0, -1.0)


@dataclass
class StatePair:
    """Coefficient representation of the pair (zeta, u)."""

    zeta_hat: np.ndarray
    u_hat: np.ndarray

    def copy(self) -> "StatePair":
        return StatePair(self.zeta_hat.copy(), self.u_hat.copy())

    def __add__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.zeta_hat + other.zeta_hat, self.u_hat + other.u_hat)

    def __sub__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.zeta_hat - other.zeta_hat, self.u_hat - other.u_hat)

    def __mul__(self, s: float) -> "StatePair":
        return StatePair(s * self.zeta_hat, s * self.u_hat)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.zeta_hat)) and np.all(np.isfinite(self.u_hat)))


def zero_state(grid: SpectralGrid) -> StatePair:
    n = grid.n_modes
    return StatePair(np.zeros(n, dtype=complex), np.zeros(n, dtype=complex))


# ----------------------------------------------------------------------------
# Fourier symbols
# ----------------------------------------------------------------------------

def symbol_g(params: ModelParams, k) -> np.ndarray:
    """Nonlocal symbol g(k) of the chosen regime (even, >= 0, nondecreasing in |k|)."""
    ak = np.abs(np.asarray(k, dtype=float))
    scale = params.alpha / params.gamma
    if params.regime == BO:
        return scale * ak
    # ILW: |k| coth|k| with the removable singularity at 0 and the large-|k|
    # asymptote handled explicitly to avoid 0/0 and overflow.
    out = np.empty_like(ak)
    small = ak < _COTH_SERIES_CUT
    large = ak > _COTH_ASYMPTOTE_CUT
    mid = ~(small | large)
    out[small] = 1.0 + ak[small] ** 2 / 3.0
    out[large] = ak[large]
    out[mid] = ak[mid] / np.tanh(ak[mid])
    return scale * out


def symbol_T(params: ModelParams, k) -> np.ndarray:
    """Symbol of (1 + g(D))^{-1}; values in (0, 1]."""
    return 1.0 / (1.0 + symbol_g(params, k))


def symbol_J(params: ModelParams, k) -> np.ndarray:
    """Symbol of (1 + g(D))^{-1} (1 + ((alpha-1)/alpha) g(D)).

    Evaluated through the partial-fraction identity
    J = (alpha-1)/alpha + T/alpha, so only one nonlocal symbol is computed.
    Values lie in ((alpha-1)/alpha, 1].
    """
    a = params.alpha
    return (a - 1.0) / a + symbol_T(params, k) / a


# ----------------------------------------------------------------------------
# Transforms
# ----------------------------------------------------------------------------

def to_coefficients(grid: SpectralGrid, values: np.ndarray) -> np.ndarray:
    """Nodal values -> Fourier coefficients (forward transform divides by N)."""
    values = np.asarray(values)
    if values.shape != (grid.n_modes,):
        raise ValueError(
            f"expected {grid.n_modes} nodal values, got shape {values.shape}"
        )
    return grid._phase * scipy.fft.fft(values, norm="forward", workers=_fft_workers)


def to_nodal(grid: SpectralGrid, coeffs: np.ndarray) -> np.ndarray:
    """Fourier coefficients -> complex nodal values (use .real for real fields)."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (grid.n_modes,):
        raise ValueError(
            f"expected {grid.n_modes} coefficients, got shape {coeffs.shape}"
        )
    return scipy.fft.ifft(grid._phase * coeffs, norm="forward", workers=_fft_workers)


def state_from_nodal(grid: SpectralGrid, zeta: np.ndarray, u: np.ndarray) -> StatePair:
    return StatePair(to_coefficients(grid, zeta), to_coefficients(grid, u))


def state_to_nodal(grid: SpectralGrid, state: StatePair) -> tuple[np.ndarray, np.ndarray]:
    return to_nodal(grid, state.zeta_hat).real, to_nodal(grid, state.u_hat).real


def hermitian_symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto Hermitian-symmetric arrays: c[-k] = conj(c[k]).

    The unpaired mode at index N/2 and the mean are forced real.  This is the
    nearest coefficient array representing a real nodal field.
    """
    c = np.asarray(coeffs)
    n = c.shape[0]
    out = np.empty_like(c, dtype=complex)
    rev = np.conj(np.roll(c[::-1], 1))  # entry k holds conj(c[-k])
    out[:] = 0.5 * (c + rev)
    out[0] = c[0].real
    out[n // 2] = c[n // 2].real
    return out


def symmetrize_state(state: StatePair) -> StatePair:
    return StatePair(
        hermitian_symmetrize(state.zeta_hat), hermitian_symmetrize(state.u_hat)
    )


# ----------------------------------------------------------------------------
# Multipliers
# ----------------------------------------------------------------------------

def apply_multiplier(grid: SpectralGrid, coeffs: np.ndarray, symbol) -> np.ndarray:
    """Multiply coefficient k by symbol(ktilde_k).

    `symbol` is either a callable evaluated on `grid.wavenumbers` or a
    precomputed per-mode array.
    """
    values = symbol(grid.wavenumbers) if callable(symbol) else np.asarray(symbol)
    if values.shape != (grid.n_modes,):
        raise ValueError("symbol array does not match the grid mode count")
    return coeffs * values


def derivative_symbol(grid: SpectralGrid) -> np.ndarray:
    """Per-mode symbol of d/dx, i*ktilde, with the unpaired Nyquist mode zeroed.

    Zeroing mode -N/2 is what keeps an odd imaginary multiplier from breaking
    Hermitian symmetry (the +N/2 partner is not stored).
    """
    ik = 1j * grid.wavenumbers
    ik[grid.n_modes // 2] = 0.0
    return ik


def derivative(grid: SpectralGrid, coeffs: np.ndarray) -> np.ndarray:
    return coeffs * derivative_symbol(grid)


def translate(grid: SpectralGrid, coeffs: np.ndarray, shift: float) -> np.ndarray:
    """Coefficients of x -> f(x - shift); exact for trigonometric polynomials."""
    out = coeffs * np.exp(-1j * grid.wavenumbers * shift)
    return hermitian_symmetrize(out)


def translate_state(grid: SpectralGrid, state: StatePair, shift: float) -> StatePair:
    return StatePair(
        translate(grid, state.zeta_hat, shift), translate(grid, state.u_hat, shift)
    )


# ----------------------------------------------------------------------------
# Mode-band transfer and the dealiased product
# ----------------------------------------------------------------------------

def pad_modes(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Embed an FFT-ordered coefficient array into a larger band (zero fill)."""
    n = coeffs.shape[0]
    if m < n:
        raise ValueError(f"target band {m} smaller than source {n}")
    out = np.zeros(m, dtype=complex)
    out[: n // 2] = coeffs[: n // 2]
    out[m - n // 2:] = coeffs[n // 2:]
    return out


def truncate_modes(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Keep modes -n/2..n/2-1 of a larger FFT-ordered array."""
    m = coeffs.shape[0]
    if n > m:
        raise ValueError(f"target band {n} larger than source {m}")
    out = np.empty(n, dtype=complex)
    out[: n // 2] = coeffs[: n // 2]
    out[n // 2:] = coeffs[m - n // 2:]
    return out


def _padded_size(n: int) -> int:
    # >= 3n/2 and even: removes every alias from quadratic products of
    # modes in -n/2..n/2-1 that could land back in the retained band.
    m = (3 * n + 1) // 2
    return m + (m % 2)


def projected_product(grid: SpectralGrid, f_hat: np.ndarray, g_hat: np.ndarray) -> np.ndarray:
    """Truncation P_N of the pointwise product of two trigonometric polynomials.

    Computed alias-free: zero-pad both factors to >= 3N/2 modes, multiply in
    nodal space on the fine grid, transform back and truncate.  Exact (to
    rounding) for any pair of band-limited inputs.
    """
    n = grid.n_modes
    if f_hat.shape != (n,) or g_hat.shape != (n,):
        raise ValueError("coefficient arrays do not match the grid")
    m = _padded_size(n)
    phase = np.where(np.fft.fftfreq(m, 1.0 / m).astype(int) % 2 == 0, 1.0, -1.0)
    f_fine = scipy.fft.ifft(phase * pad_modes(f_hat, m), norm="forward", workers=_fft_workers)
    g_fine = scipy.fft.ifft(phase * pad_modes(g_hat, m), norm="forward", workers=_fft_workers)
    prod_hat = phase * scipy.fft.fft(f_fine * g_fine, norm="forward", workers=_fft_workers)
    out = truncate_modes(prod_hat, n)
    # the -N/2 slot has no +N/2 partner; keeping it would let products of
    # Hermitian inputs acquire an anti-Hermitian component, so the retained
    # band is |k| <= N/2 - 1 and the unpaired slot stays zero
    out[n // 2] = 0.0
    return out


# ----------------------------------------------------------------------------
# Inner products and norms
# ----------------------------------------------------------------------------

def nodal_inner(grid: SpectralGrid, a: StatePair, b: StatePair) -> float:
    """Euclidean inner product of the stacked 2N nodal values.

    Evaluated in coefficient space via Parseval with the forward-divides-by-N
    normalization: sum_j a_j b_j = N * sum_k a_hat conj(b_hat).
    """
    s = np.vdot(b.zeta_hat, a.zeta_hat) + np.vdot(b.u_hat, a.u_hat)
    return grid.n_modes * s.real


def nodal_norm(grid: SpectralGrid, a: StatePair) -> float:
    return float(np.sqrt(max(nodal_inner(grid, a, a), 0.0)))


def l2_norm(grid: SpectralGrid, coeffs: np.ndarray) -> float:
    """Continuous L2 norm on [-l, l]: ||f||^2 = 2l * sum |f_hat|^2."""
    return float(np.sqrt(2.0 * grid.half_length * np.sum(np.abs(coeffs) ** 2)))


def state_l2_norm(grid: SpectralGrid, state: StatePair) -> float:
    """Sum of the component L2 norms, ||zeta|| + ||u||."""
    return l2_norm(grid, state.zeta_hat) + l2_norm(grid, state.u_hat)
