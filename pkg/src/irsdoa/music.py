"""Subspace (MUSIC) baseline using only the M sensing-element outputs.

MUSIC sees the echo through the SE array response alone, so its resolution
is set by M; it needs K < M for a non-empty noise subspace.
"""

import math
from dataclasses import dataclass

import numpy as np

from .anm import DEFAULT_GRID_STEP, Spectrum, angle_grid, pick_peaks
from .numerics import hermitian_eig

#: Floor applied to the projected-steering norm before inversion.
PSEUDO_SPECTRUM_FLOOR = 1e-24


class DegenerateSubspaceError(ValueError):
    """K >= M leaves no noise subspace for MUSIC."""


@dataclass(frozen=True)
class MusicConfig:
    grid_step: float = DEFAULT_GRID_STEP
    refine: bool = True

    def __post_init__(self):
        if not (0 < self.grid_step <= 0.1):
            raise ValueError("grid_step must lie in (0, 0.1] radians")


def sample_covariance(echo):
    """R = Y Y^H / L, Hermitian PSD by construction."""
    y = echo.samples
    return (y @ y.conj().T) / y.shape[1]


def noise_subspace(echo, k):
    """Eigenvectors of the M - k smallest sample-covariance eigenvalues.

    With repeated eigenvalues at the signal/noise boundary any orthonormal
    completion may be returned; the pseudo-spectrum depends only on the
    projector E_n E_n^H and is invariant to that choice.
    """
    m = echo.n_ses
    if k >= m:
        raise DegenerateSubspaceError(
            f"MUSIC needs k < M, got k={k} with M={m} sensing elements"
        )
    eig = hermitian_eig(sample_covariance(echo))
    return eig.eigenvectors[:, : m - k]


def pseudo_spectrum(echo, k, grid_step=DEFAULT_GRID_STEP, grid=None):
    """P(theta) = 1 / ||E_n^H b(theta)||^2 over the shared angle grid."""
    e_n = noise_subspace(echo, k)
    if grid is None:
        grid = angle_grid(grid_step)
    b_all = np.exp(-1j * math.pi * np.outer(np.arange(echo.n_ses), np.sin(grid)))
    denom = np.sum(np.abs(e_n.conj().T @ b_all) ** 2, axis=0)
    values = 1.0 / np.maximum(denom, PSEUDO_SPECTRUM_FLOOR)
    return Spectrum(grid=grid, values=values)


def estimate_music(echo, k, cfg=None):
    """MUSIC DoA estimate with the same grid and peak refinement as ANM."""
    cfg = cfg or MusicConfig()
    spectrum = pseudo_spectrum(echo, k, grid_step=cfg.grid_step)
    return pick_peaks(spectrum, k, refine=cfg.refine, method="MUSIC")
