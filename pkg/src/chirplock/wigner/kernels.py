"""Spectral building blocks on a periodic phase-space grid.

A "kick" along the momentum axis solves df/dt = a(x) df/du + b(x) d^3f/du^3
exactly over a step: in Fourier space along u each mode picks up the phase
exp(i k a - i k^3 b).  A "drift" is the same along the coordinate axis.
Every multiplier leaves the k = 0 mode alone, so the grid sum of f is
conserved to rounding.
"""
from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .field import PhaseGrid

__all__ = [
    "wavenumbers",
    "apply_multiplier",
    "kick",
    "drift",
    "kick_multiplier",
    "drift_multiplier",
    "rotate",
    "rotation_multipliers",
    "spectral_derivative",
    "angular_laplacian",
]


def wavenumbers(n: int, d: float, real: bool = True) -> np.ndarray:
    k = 2.0 * np.pi * (sfft.rfftfreq(n, d) if real else sfft.fftfreq(n, d))
    if n % 2 == 0:
        # the Nyquist mode has no sign; drop it so odd derivatives stay real
        k[n // 2 if not real else -1] = 0.0
    return k


def apply_multiplier(f: np.ndarray, axis: int, mult: np.ndarray) -> np.ndarray:
    F = sfft.rfft(f, axis=axis)
    F *= mult
    return sfft.irfft(F, f.shape[axis], axis=axis)


def kick_multiplier(grid: PhaseGrid, a, b=None) -> np.ndarray:
    k = wavenumbers(grid.nu, grid.du)[None, :]
    ph = np.asarray(a, dtype=float).reshape(-1, 1) * k
    if b is not None:
        ph = ph - np.asarray(b, dtype=float).reshape(-1, 1) * k**3
    return np.exp(1j * ph)


def drift_multiplier(grid: PhaseGrid, a, b=None) -> np.ndarray:
    k = wavenumbers(grid.nx, grid.dx)[:, None]
    ph = k * np.asarray(a, dtype=float).reshape(1, -1)
    if b is not None:
        ph = ph - k**3 * np.asarray(b, dtype=float).reshape(1, -1)
    return np.exp(1j * ph)


def kick(f: np.ndarray, grid: PhaseGrid, a, b=None) -> np.ndarray:
    """f(x, u) -> f(x, u + a(x)) with an optional exact third-order term.

    ``a`` and ``b`` are arrays over x (or scalars) already multiplied by the
    step.  ``b`` is the coefficient of d^3/du^3.
    """
    return apply_multiplier(f, 1, kick_multiplier(grid, a, b))


def drift(f: np.ndarray, grid: PhaseGrid, a, b=None) -> np.ndarray:
    """f(x, u) -> f(x + a(u), u), optionally with a d^3/dx^3 term ``b(u)``."""
    return apply_multiplier(f, 0, drift_multiplier(grid, a, b))


def rotation_multipliers(grid: PhaseGrid, theta: float):
    t = np.tan(0.5 * theta)
    return kick_multiplier(grid, t * grid.x), drift_multiplier(grid, -np.sin(theta) * grid.u)


def rotate(f: np.ndarray, grid: PhaseGrid, theta: float, multipliers=None) -> np.ndarray:
    """Harmonic flow over phase ``theta``: g(z) = f(M(-theta) z).

    M(t) maps (x, u) to (x cos t + u sin t, -x sin t + u cos t), the
    clockwise motion of an oscillator of unit frequency, so a blob at
    (x0, u0) moves to M(theta)(x0, u0).  Built from three exact shears;
    content must stay clear of the grid edges during the shears.
    ``multipliers`` may hold the cached result of :func:`rotation_multipliers`.
    """
    mk, md = multipliers or rotation_multipliers(grid, theta)
    f = apply_multiplier(f, 1, mk)
    f = apply_multiplier(f, 0, md)
    return apply_multiplier(f, 1, mk)


def spectral_derivative(f: np.ndarray, grid: PhaseGrid, axis: int, order: int = 1) -> np.ndarray:
    if axis == 0:
        k = wavenumbers(grid.nx, grid.dx)[:, None]
    else:
        k = wavenumbers(grid.nu, grid.du)[None, :]
    return apply_multiplier(f, axis, (1j * k) ** order)


def angular_laplacian(f: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """(x d/du - u d/dx)(d^2/dx^2 + d^2/du^2) f, spectrally."""
    lap = spectral_derivative(f, grid, 0, 2) + spectral_derivative(f, grid, 1, 2)
    X, U = grid.mesh()
    return X * spectral_derivative(lap, grid, 1) - U * spectral_derivative(lap, grid, 0)
