import numpy as np
import pytest

from ilwbo import (
    BO,
    ILW,
    ModelParams,
    SolitaryConfig,
    SpectralGrid,
    petviashvili_iterate,
)

# Reference parameter sets used throughout: gamma=0.8, alpha=1.2 with the
# demonstration speeds c=0.52 (ILW) and c=0.57 (B-O) on the 1024-mode grid.


@pytest.fixture(scope="session")
def ilw_params():
    return ModelParams(gamma=0.8, alpha=1.2, regime=ILW)


@pytest.fixture(scope="session")
def bo_params():
    return ModelParams(gamma=0.8, alpha=1.2, regime=BO)


@pytest.fixture(scope="session")
def wave_grid():
    return SpectralGrid(half_length=64.0, n_modes=1024)


@pytest.fixture(scope="session")
def ilw_wave(ilw_params, wave_grid):
    """Converged ILW demonstration wave (c=0.52) plus its trace."""
    config = SolitaryConfig(speed=0.52, tol=1e-10, max_iter=500, mw=1)
    wave, trace = petviashvili_iterate(ilw_params, wave_grid, config)
    return config, wave, trace


@pytest.fixture(scope="session")
def bo_wave(bo_params, wave_grid):
    """Converged B-O demonstration wave (c=0.57) plus its trace."""
    config = SolitaryConfig(speed=0.57, tol=1e-10, max_iter=500, mw=1)
    wave, trace = petviashvili_iterate(bo_params, wave_grid, config)
    return config, wave, trace


@pytest.fixture(scope="session")
def ilw_smooth_wave(ilw_params):
    """A speed inside the smooth ILW family (c=0.40), on a fast grid."""
    grid = SpectralGrid(half_length=32.0, n_modes=512)
    config = SolitaryConfig(speed=0.40, tol=1e-10, max_iter=500, mw=1)
    wave, trace = petviashvili_iterate(ilw_params, grid, config)
    return grid, config, wave, trace


def brute_force_product(grid, f_hat, g_hat):
    """O(N^2) linear-convolution-plus-truncation oracle for the dealiased
    product; the unpaired -N/2 output slot is excluded from the band."""
    n = grid.n_modes
    modes = grid.mode_numbers.astype(int)
    index_of = {k: i for i, k in enumerate(modes)}
    out = np.zeros(n, dtype=complex)
    for i, k in enumerate(modes):
        if k == -n // 2:
            continue
        acc = 0.0 + 0.0j
        for j, k1 in enumerate(modes):
            k2 = k - k1
            if k2 in index_of:
                acc += f_hat[j] * g_hat[index_of[k2]]
        out[i] = acc
    return out


def random_hermitian(grid, rng, scale=1.0):
    from ilwbo.spectral import hermitian_symmetrize

    n = grid.n_modes
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    c = scale * hermitian_symmetrize(c)
    c[n // 2] = 0.0
    return c
