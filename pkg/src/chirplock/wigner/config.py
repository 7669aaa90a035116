"""Run configuration for the Wigner-function solvers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..params import DimensionlessParams, fixed_frame_units
from .field import PhaseGrid
from .kernels import wavenumbers

__all__ = ["CFLViolation", "WignerRunConfig", "default_grid", "RK4_STABILITY"]

# extent of the classical RK4 stability region along the imaginary axis
RK4_STABILITY = 2.8


class CFLViolation(ValueError):
    """Explicit step exceeds the stability bound; ``admissible`` holds the largest safe step."""

    def __init__(self, msg, admissible):
        super().__init__(msg)
        self.admissible = admissible


@dataclass
class WignerRunConfig:
    """Inputs for one phase-space evolution.

    Fixed frame: time t in units of 1/w0, coordinates in L = sqrt(kT_eff/m w0^2),
    parameters ``alpha_bar``, ``beta_bar``, ``eps_bar`` and ``gamma`` (the
    effective Planck constant in these units, 2 for a ground state; 0 gives
    the classical Liouville flow).  Rotating frame: slow time tau, parameters
    ``mu``, ``lam`` and ``sigma2`` (the initial Gaussian variance).

    ``t0`` and ``times`` are in the frame's own time variable.
    """

    frame: str
    grid: PhaseGrid
    t0: float
    times: Sequence[float]
    dt: float
    alpha_bar: float = 0.0
    beta_bar: float = 0.0
    eps_bar: float = 0.0
    gamma: float = 2.0
    mu: float = 0.0
    lam: float = 0.0
    sigma2: float | None = None
    scheme: str = "split"
    sponge: bool = True
    sponge_width: float = 0.05
    sponge_rate: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frame not in ("fixed", "rotating"):
            raise ValueError(f"frame must be 'fixed' or 'rotating', got {self.frame!r}")
        if self.scheme not in ("split", "rk4"):
            raise ValueError(f"scheme must be 'split' or 'rk4', got {self.scheme!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        self.times = tuple(float(t) for t in self.times)
        if not self.times:
            raise ValueError("need at least one output time")
        if any(b < a for a, b in zip(self.times, self.times[1:])) or self.times[0] < self.t0:
            raise ValueError("output times must be sorted and not before t0")
        if not 0.0 <= self.sponge_width < 0.5:
            raise ValueError("sponge_width must be in [0, 0.5)")
        if self.frame == "fixed":
            if not 0.0 <= self.gamma <= 2.0:
                raise ValueError(f"gamma must be in [0, 2], got {self.gamma}")
            if self.alpha_bar < 0 or self.beta_bar < 0 or self.eps_bar < 0:
                raise ValueError("alpha_bar, beta_bar, eps_bar must be >= 0")
        else:
            if self.lam < 0:
                raise ValueError("lam must be >= 0")
            if self.sigma2 is None:
                self.sigma2 = self.lam / 2.0
            if self.sigma2 < self.lam / 2.0 * (1 - 1e-12) or self.sigma2 <= 0:
                raise ValueError(f"sigma2={self.sigma2} below the zero-point value lam/2={self.lam / 2}")

    @property
    def initial_variance(self) -> float:
        return 1.0 if self.frame == "fixed" else float(self.sigma2)

    @property
    def hbar_eff(self) -> float:
        return self.gamma if self.frame == "fixed" else self.lam

    def slow_time(self, t: float) -> float:
        """tau for a native time value (identity in the rotating frame)."""
        return math.sqrt(self.alpha_bar) * t if self.frame == "fixed" else t

    @classmethod
    def fixed(cls, P1: float, P2: float, alpha_bar: float, tau0: float, taus: Sequence[float],
              dt: float = 0.2, theta: float = 0.0, grid: PhaseGrid | None = None, **kw):
        """Fixed-frame run for (P1, P2) at chirp ``alpha_bar``, times given in tau."""
        d = DimensionlessParams(P1, P2, theta)
        beta_bar, eps_bar = fixed_frame_units(P1, P2, alpha_bar, d.gamma)
        sa = math.sqrt(alpha_bar)
        times = [t / sa for t in taus]
        grid = grid or default_grid("fixed", beta_bar=beta_bar, variance=1.0, hbar=d.gamma)
        meta = {"P1": P1, "P2": P2, "theta": theta, "tau0": tau0, "taus": list(taus)}
        return cls("fixed", grid, tau0 / sa, times, dt, alpha_bar=alpha_bar, beta_bar=beta_bar,
                   eps_bar=eps_bar, gamma=d.gamma, meta=meta, **kw)

    @classmethod
    def rotating(cls, P1: float, P2: float, tau0: float, taus: Sequence[float],
                 dt: float = 0.01, theta: float = 0.0, grid: PhaseGrid | None = None, **kw):
        d = DimensionlessParams(P1, P2, theta)
        grid = grid or default_grid("rotating", tau_end=max(taus), variance=d.sigma2, hbar=d.lam)
        meta = {"P1": P1, "P2": P2, "theta": theta}
        return cls("rotating", grid, tau0, list(taus), dt, mu=d.mu, lam=d.lam,
                   sigma2=d.sigma2, meta=meta, **kw)

    def max_stable_step(self) -> float:
        """Largest RK4 step for the spectral method-of-lines right-hand side."""
        g = self.grid
        kx = np.max(np.abs(wavenumbers(g.nx, g.dx)))
        ku = np.max(np.abs(wavenumbers(g.nu, g.du)))
        X = max(abs(g.xmin), abs(g.xmax))
        U = max(abs(g.umin), abs(g.umax))
        if self.frame == "fixed":
            force = X + self.beta_bar * X**3 + self.eps_bar
            rate = U * kx + force * ku + 0.25 * self.gamma**2 * self.beta_bar * X * ku**3
        else:
            tmax = max(abs(self.t0), abs(self.times[-1]))
            R = math.hypot(X, U)
            speed = tmax * R + R**3 + abs(self.mu)
            kk = math.hypot(kx, ku)
            rate = speed * kk + 0.25 * self.lam**2 * R * kk**3
        return RK4_STABILITY / rate if rate > 0 else math.inf

    def check_step(self):
        if self.scheme != "rk4":
            return
        h = self.max_stable_step()
        if self.dt > h:
            raise CFLViolation(
                f"dt={self.dt:g} exceeds the RK4 bound {h:.3g} for this grid; use dt <= {h:.3g} "
                "or the split scheme", h)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = self.grid.as_dict()
        d["times"] = list(self.times)
        return d


def _pow2(n: float) -> int:
    return max(64, 1 << int(math.ceil(math.log2(max(n, 2)))))


def default_grid(frame: str, *, beta_bar: float = 0.0, tau_end: float = 0.0,
                 variance: float = 1.0, hbar: float = 2.0, margin: float = 0.15) -> PhaseGrid:
    """Square grid holding the separatrix (fixed) or the final bucket (rotating).

    The fixed-frame box extends to the saddle points |x| = 1/sqrt(beta_bar)
    (or 8 standard deviations when beta_bar = 0); the rotating box to
    sqrt(tau_end) plus 6 standard deviations plus one unit for the bucket.
    Both get a ``margin`` fraction on top, and the spacing resolves a third of
    the smaller of the initial width and the quantum scale sqrt(hbar/2).
    """
    s = math.sqrt(variance)
    if frame == "fixed":
        R = 1.0 / math.sqrt(beta_bar) if beta_bar > 0 else 8.0 * s
        R = max(R, 8.0 * s)
    else:
        R = math.sqrt(max(tau_end, 0.0)) + 6.0 * s + 1.0
    half = (1.0 + margin) * R
    scale = min(s, math.sqrt(hbar / 2.0)) if hbar > 0 else s
    n = _pow2(2.0 * half / (scale / 3.0))
    return PhaseGrid.square(half, n)
