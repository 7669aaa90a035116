"""Quartic-well eigenstates and level populations of a fixed-frame Wigner field."""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh

from .field import PhaseGrid, PhaseSpaceField

__all__ = ["quartic_eigenstates", "state_wigner", "level_populations"]


def quartic_eigenstates(grid: PhaseGrid, gamma: float, beta_bar: float, n_states: int):
    """Lowest eigenpairs of -(gamma^2/2) d^2/dx^2 + x^2/2 - beta x^4/4 on the x axis of ``grid``.

    The kinetic operator is the exact periodic Fourier second derivative, so
    the states live on the same periodic grid as the Wigner solver.  Returns
    (energies, states) with states[:, n] normalized to sum |psi|^2 dx = 1.
    """
    n, dx = grid.nx, grid.dx
    if not 1 <= n_states <= n:
        raise ValueError("n_states out of range")
    k = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    T = np.fft.ifft(np.fft.fft(np.eye(n), axis=0) * (0.5 * gamma**2 * k**2)[:, None], axis=0).real
    T = 0.5 * (T + T.T)
    x = grid.x
    H = T + np.diag(0.5 * x**2 - 0.25 * beta_bar * x**4)
    w, v = eigh(H, subset_by_index=[0, n_states - 1])
    v = v / math.sqrt(dx)
    # fix the sign so the largest lobe is positive
    idx = np.argmax(np.abs(v), axis=0)
    v *= np.sign(v[idx, np.arange(v.shape[1])])
    return w, v


def state_wigner(psi: np.ndarray, grid: PhaseGrid, hbar: float) -> np.ndarray:
    """Wigner function of a real wavefunction sampled on the grid's x axis.

    W(x, u) = 1/(2 pi hbar) sum_y psi(x + y/2) psi(x - y/2) cos(u y / hbar) dy
    with y = 2 m dx, so only grid samples are needed.
    """
    n, dx = grid.nx, grid.dx
    if psi.shape != (n,):
        raise ValueError("psi must be sampled on the grid x axis")
    u = grid.u
    W = np.empty((n, grid.nu))
    for i in range(n):
        mmax = min(i, n - 1 - i)
        m = np.arange(-mmax, mmax + 1)
        c = psi[i + m] * psi[i - m]
        W[i] = np.cos(np.outer(u, 2.0 * m * dx) / hbar) @ c
    return W * (2.0 * dx / (2.0 * math.pi * hbar))


def level_populations(f: PhaseSpaceField, states: np.ndarray, hbar: float,
                      wigners: list | None = None) -> np.ndarray:
    """p_n = 2 pi hbar * integral of f W_n over phase space.

    ``wigners`` may carry precomputed state Wigner functions for reuse
    across snapshots.
    """
    Ws = wigners if wigners is not None else [state_wigner(s, f.grid, hbar) for s in states.T]
    return np.array([2.0 * math.pi * hbar * f.integral(W) for W in Ws])
