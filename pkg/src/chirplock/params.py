"""Physical and dimensionless parameters of the chirped Duffing oscillator.

Everything downstream works with the dimensionless pair (P1, P2) plus the
initial-state temperature ratio ``theta = k_B T / (hbar omega0)``.  Physical
units only appear at the input boundary (:class:`PhysicalParams`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysicalParams",
    "DimensionlessParams",
    "coth_half_inverse",
    "from_physical",
    "effective_temperature",
    "classical_drive_param",
    "fixed_frame_units",
    "from_fixed_frame_units",
]


def coth_half_inverse(theta: float) -> float:
    """Return ``coth(1 / (2 theta))`` for a temperature ratio ``theta >= 0``.

    Evaluated as ``1 + 2/expm1(1/theta)`` so that theta -> 0 gives exactly 1
    and large theta does not lose precision.
    """
    theta = float(theta)
    if theta < 0 or math.isnan(theta):
        raise ValueError(f"temperature ratio must be >= 0, got {theta}")
    if theta == 0.0:
        return 1.0
    x = 1.0 / theta
    if x > 700.0:  # expm1 overflows; coth is 1 to double precision
        return 1.0
    return 1.0 + 2.0 / math.expm1(x)


@dataclass(frozen=True)
class PhysicalParams:
    """Oscillator H = p^2/2m + m w0^2 (x^2/2 - beta x^4/4) + eps x cos(phi_d).

    ``kT`` is the bath temperature in energy units (k_B T).  Units are any
    consistent set; nothing is converted internally.
    """

    m: float
    omega0: float
    beta: float
    eps: float
    alpha: float
    hbar: float = 1.0
    kT: float = 0.0

    def __post_init__(self):
        for name in ("m", "omega0", "hbar", "alpha", "beta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be strictly positive, got {v}")
        if not self.eps >= 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if not self.kT >= 0:
            raise ValueError(f"kT must be >= 0, got {self.kT}")


@dataclass(frozen=True)
class DimensionlessParams:
    """The (P1, P2) pair with its derived quantities.

    P1 is the drive strength (sweep time over inverse Rabi frequency) and P2
    the nonlinearity (nonlinear time over sweep time).  ``theta`` is
    k_B T / (hbar w0) of the initial thermal state; 0 means the ground state.

    Derived, read-only:

    mu      classical autoresonance drive parameter, P1 sqrt(P2) / 2
    lam     dimensionless Planck constant of the rotating frame, P2 / 2
    gamma   hbar w0 / k_B T_eff, equal to 2 in the ground state
    sigma2  variance of the rotating-frame thermal Wigner function
    """

    P1: float
    P2: float
    theta: float = 0.0
    mu: float = field(init=False)
    lam: float = field(init=False)
    gamma: float = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        if not self.P1 >= 0 or not math.isfinite(self.P1):
            raise ValueError(f"P1 must be >= 0, got {self.P1}")
        if not self.P2 > 0 or not math.isfinite(self.P2):
            raise ValueError(f"P2 must be > 0, got {self.P2}")
        c = coth_half_inverse(self.theta)
        object.__setattr__(self, "mu", 0.5 * self.P1 * math.sqrt(self.P2))
        object.__setattr__(self, "lam", 0.5 * self.P2)
        object.__setattr__(self, "gamma", 2.0 / c)
        object.__setattr__(self, "sigma2", 0.5 * self.lam * c)

    def with_P1(self, P1: float) -> "DimensionlessParams":
        return DimensionlessParams(P1, self.P2, self.theta)

    def as_dict(self) -> dict:
        return {
            "P1": self.P1,
            "P2": self.P2,
            "theta": self.theta,
            "mu": self.mu,
            "lam": self.lam,
            "gamma": self.gamma,
            "sigma2": self.sigma2,
        }


def from_physical(p: PhysicalParams) -> DimensionlessParams:
    P1 = p.eps / math.sqrt(2.0 * p.m * p.hbar * p.omega0 * p.alpha)
    P2 = 3.0 * p.hbar * p.beta / (4.0 * p.m * math.sqrt(p.alpha))
    return DimensionlessParams(P1, P2, p.kT / (p.hbar * p.omega0))


def effective_temperature(omega0: float, kT, hbar: float = 1.0):
    """k_B T_eff = (hbar w0 / 2) coth(hbar w0 / 2 k_B T).

    Saturates at hbar w0 / 2 for T -> 0 and approaches k_B T at high T.
    Accepts scalars or arrays for ``kT``.
    """
    e0 = hbar * omega0
    kT_arr = np.asarray(kT, dtype=float)
    if np.any(kT_arr < 0):
        raise ValueError("kT must be >= 0")
    out = np.vectorize(coth_half_inverse, otypes=[float])(kT_arr / e0) * (0.5 * e0)
    return float(out) if out.ndim == 0 else out


def classical_drive_param(d: DimensionlessParams) -> float:
    return d.mu


def fixed_frame_units(P1: float, P2: float, alpha_bar: float, gamma: float = 2.0):
    """Map (P1, P2) to the fixed-frame Wigner inputs (beta_bar, eps_bar).

    Lengths are measured in L = sqrt(k_B T_eff / m w0^2), time in 1/w0, and
    alpha_bar = alpha / w0^2.  Then P2 = 3 gamma beta_bar / (4 sqrt(alpha_bar))
    and P1 = eps_bar / sqrt(2 gamma alpha_bar).
    """
    if alpha_bar <= 0 or gamma <= 0:
        raise ValueError("alpha_bar and gamma must be positive")
    sa = math.sqrt(alpha_bar)
    beta_bar = 4.0 * sa * P2 / (3.0 * gamma)
    eps_bar = P1 * math.sqrt(2.0 * gamma * alpha_bar)
    return beta_bar, eps_bar


def from_fixed_frame_units(alpha_bar: float, beta_bar: float, eps_bar: float,
                           gamma: float = 2.0) -> tuple[float, float]:
    """Inverse of :func:`fixed_frame_units`: returns (P1, P2)."""
    sa = math.sqrt(alpha_bar)
    P2 = 3.0 * gamma * beta_bar / (4.0 * sa)
    P1 = eps_bar / math.sqrt(2.0 * gamma * alpha_bar)
    return P1, P2
