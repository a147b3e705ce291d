"""Initial data builders: gaussian wave packets, compactly supported bumps,
and momentum-modulated variants."""

from __future__ import annotations

import numpy as np

from .grids import GridSpec, SpectralField


def _momentum_phase(grid, momentum):
    if momentum is None:
        return 1.0
    momentum = np.atleast_1d(np.asarray(momentum, dtype=float))
    xs = grid.coordinate_arrays()
    phase = sum(momentum[j] * xs[j] for j in range(grid.d))
    return np.exp(1j * phase)


def gaussian_state(grid: GridSpec, width=1.0, center=None, momentum=None,
                   amplitude=1.0, normalize=False) -> SpectralField:
    """exp(-|x-c|^2 / (2 width^2)) times an optional plane-wave factor."""
    if center is None:
        center = (0.0,) * grid.d
    center = np.atleast_1d(np.asarray(center, dtype=float))
    xs = grid.coordinate_arrays()
    r2 = sum((xs[j] - center[j]) ** 2 for j in range(grid.d))
    values = amplitude * np.exp(-r2 / (2.0 * width ** 2)) \
        * _momentum_phase(grid, momentum)
    f = SpectralField(grid, np.broadcast_to(values, grid.shape))
    if normalize:
        f = f * (1.0 / f.norm_l2())
    return f


def bump_state(grid: GridSpec, radius=1.0, center=None, momentum=None,
               amplitude=1.0, normalize=False) -> SpectralField:
    """Smooth compactly supported bump: exp(1 - 1/(1-(r/R)^2)) inside r < R,
    identically zero outside. Exactly supported in the closed ball."""
    if radius <= 0:
        raise ValueError("bump radius must be positive")
    if center is None:
        center = (0.0,) * grid.d
    center = np.atleast_1d(np.asarray(center, dtype=float))
    xs = grid.coordinate_arrays()
    r2 = np.broadcast_to(
        sum((xs[j] - center[j]) ** 2 for j in range(grid.d)), grid.shape)
    u = r2 / radius ** 2
    values = np.zeros(grid.shape, dtype=np.complex128)
    inside = u < 1.0
    values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - u[inside]))
    values *= _momentum_phase(grid, momentum)
    f = SpectralField(grid, values)
    if normalize:
        f = f * (1.0 / f.norm_l2())
    return f


def plane_wave(grid: GridSpec, mode, amplitude=1.0) -> SpectralField:
    """exp(i xi_k . x) for integer lattice mode numbers ``mode``."""
    mode = np.atleast_1d(np.asarray(mode, dtype=int))
    xs = grid.coordinate_arrays()
    phase = sum(2 * np.pi * mode[j] / grid.L[j] * xs[j] for j in range(grid.d))
    return SpectralField(grid, amplitude * np.exp(1j * np.broadcast_to(phase, grid.shape)))


def random_state(grid: GridSpec, seed=0, smooth=2.0) -> SpectralField:
    """Random smooth field: white noise filtered by exp(-smooth |xi|^2),
    unit L2 norm. Deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    envelope = np.exp(-smooth * grid.frequency_radius_squared())
    f = SpectralField(grid, noise * envelope, "frequency")
    return f * (1.0 / f.norm_l2())
