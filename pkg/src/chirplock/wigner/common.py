"""Initial state, absorbing layer and time-stepping drivers shared by both frames."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .config import WignerRunConfig
from .field import PhaseGrid, PhaseSpaceField, gaussian_field

__all__ = ["initial_thermal", "Sponge", "run_split", "run_rk4", "NORM_TOL"]

NORM_TOL = 1e-4


def initial_thermal(config: WignerRunConfig) -> PhaseSpaceField:
    """Thermal Gaussian at t0: unit variance in the fixed frame, sigma2 in the rotating one."""
    f = gaussian_field(config.frame, config.grid, config.initial_variance, config.t0)
    f.meta["tau"] = config.slow_time(config.t0)
    return f


class Sponge:
    """Damping layer of relative width ``width`` on every side of the grid.

    Inside the layer f is multiplied by exp(-rate h p) each step, with p
    rising as sin^2 from 0 at the inner edge to 1 at the boundary.  The mass
    removed is accumulated in ``absorbed``.
    """

    def __init__(self, grid: PhaseGrid, width: float, rate: float):
        self.absorbed = 0.0
        self.area = grid.cell_area
        px = self._ramp(grid.x, grid.xmin, grid.xmax, width)
        pu = self._ramp(grid.u, grid.umin, grid.umax, width)
        self.profile = np.maximum(px[:, None], pu[None, :])
        self.rate = rate
        self.active = width > 0 and rate > 0 and bool(np.any(self.profile > 0))
        self._masks: dict[float, np.ndarray] = {}

    @staticmethod
    def _ramp(c, lo, hi, width):
        w = width * (hi - lo)
        if w <= 0:
            return np.zeros_like(c)
        depth = np.maximum(lo + w - c, c - (hi - w)) / w
        return np.sin(0.5 * np.pi * np.clip(depth, 0.0, 1.0)) ** 2

    def __call__(self, f: np.ndarray, h: float) -> np.ndarray:
        if not self.active:
            return f
        m = self._masks.get(h)
        if m is None:
            m = self._masks.setdefault(h, np.exp(-self.rate * abs(h) * self.profile))
        g = f * m
        self.absorbed += float((f - g).sum()) * self.area
        return g


def _segments(t0, times, dt):
    """(start, n_steps, h, end) pieces landing exactly on every output time."""
    t = t0
    for target in times:
        span = target - t
        if span <= 0:
            yield t, 0, 0.0, target
            continue
        n = max(1, int(math.ceil(span / dt - 1e-9)))
        yield t, n, span / n, target
        t = target


def _snapshot(config, values, t, steps, sponge, mass0):
    mass = float(values.sum()) * config.grid.cell_area
    fld = PhaseSpaceField(config.frame, config.grid, values.copy(), float(t))
    fld.meta.update({
        "tau": config.slow_time(t),
        "steps": steps,
        "interior_mass": mass,
        "absorbed_mass": sponge.absorbed,
        "norm_drift": abs(mass + sponge.absorbed - mass0),
    })
    return fld


def run_split(config: WignerRunConfig, f0: PhaseSpaceField,
              outer: Callable, inner: Callable) -> list[PhaseSpaceField]:
    """Symmetric splitting outer(h/2) inner(h) outer(h/2) with merged outer kicks.

    ``outer(f, t, h, count)`` applies ``count`` half-steps of the outer part
    at time t; ``inner(f, t_mid, h)`` a full step of the inner part.
    """
    sponge = Sponge(config.grid, config.sponge_width if config.sponge else 0.0, config.sponge_rate)
    f = f0.values.copy()
    mass0 = f0.norm
    out, steps = [], 0
    for start, n, h, end in _segments(config.t0, config.times, config.dt):
        if n:
            f = outer(f, start, h, 1)
            for j in range(n):
                f = inner(f, start + (j + 0.5) * h, h)
                f = sponge(f, h)
                f = outer(f, start + (j + 1) * h, h, 2 if j < n - 1 else 1)
            steps += n
        out.append(_snapshot(config, f, end, steps, sponge, mass0))
    return out


def run_rk4(config: WignerRunConfig, f0: PhaseSpaceField, rhs: Callable) -> list[PhaseSpaceField]:
    """Classical RK4 on the method-of-lines system df/dt = rhs(t, f)."""
    config.check_step()
    sponge = Sponge(config.grid, config.sponge_width if config.sponge else 0.0, config.sponge_rate)
    f = f0.values.copy()
    mass0 = f0.norm
    out, steps = [], 0
    for start, n, h, end in _segments(config.t0, config.times, config.dt):
        for j in range(n):
            t = start + j * h
            k1 = rhs(t, f)
            k2 = rhs(t + 0.5 * h, f + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, f + 0.5 * h * k2)
            k4 = rhs(t + h, f + h * k3)
            f = sponge(f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), h)
        steps += n
        out.append(_snapshot(config, f, end, steps, sponge, mass0))
    return out
