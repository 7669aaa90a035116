"""Closed-form models of the phase-locking transition.

Ladder climbing (LC) is treated as a chain of independent Landau-Zener steps;
classical autoresonance (AR) uses the known zero-temperature threshold and the
thermal width formula with T replaced by T_eff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .params import PhysicalParams, effective_temperature, from_physical

__all__ = [
    "LZParams",
    "lz_step_probability",
    "lc_capture_probability",
    "lc_capture_slope",
    "lc_threshold",
    "lc_width",
    "classical_threshold",
    "classical_threshold_coefficient",
    "classical_width",
    "regime",
    "AR_MU_CRITICAL",
    "AR_EPS_COEFFICIENT",
    "AR_WIDTH_COEFFICIENT",
]

# zero-temperature AR threshold: eps_cr = 1.34 alpha^(3/4) beta^(-1/2) m w0^(1/2)
AR_EPS_COEFFICIENT = 1.34
# thermal AR width: delta eps = 1.23 sqrt(alpha m k_B T)
AR_WIDTH_COEFFICIENT = 1.23
AR_P1_COEFFICIENT = 0.82
AR_MU_CRITICAL = AR_P1_COEFFICIENT / 2

DEFAULT_PRODUCT_LENGTH = 5


@dataclass(frozen=True)
class LZParams:
    P1: float
    n_product: int = DEFAULT_PRODUCT_LENGTH

    def __post_init__(self):
        if self.P1 < 0:
            raise ValueError("P1 must be >= 0")
        if self.n_product < 1:
            raise ValueError("n_product must be >= 1")

    @property
    def r(self) -> float:
        return math.exp(-0.5 * math.pi * self.P1**2)


def _one_minus_rk(P1, k):
    # 1 - r^k without cancellation for small P1
    return -np.expm1(-0.5 * np.pi * np.asarray(P1, dtype=float) ** 2 * k)


def lz_step_probability(P1, n: int):
    """Probability of the n-1 -> n Landau-Zener step, 1 - r^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = _one_minus_rk(P1, n)
    return float(out) if np.ndim(out) == 0 else out


def lc_capture_probability(P1, N: int = DEFAULT_PRODUCT_LENGTH):
    """Product of the first N ladder-climbing step probabilities."""
    if N < 1:
        raise ValueError("N must be >= 1")
    P1 = np.asarray(P1, dtype=float)
    out = np.ones_like(P1)
    for k in range(1, N + 1):
        out = out * _one_minus_rk(P1, k)
    return float(out) if out.ndim == 0 else out


def lc_capture_slope(P1, N: int = DEFAULT_PRODUCT_LENGTH):
    """dP/dP1 of :func:`lc_capture_probability` by logarithmic differentiation.

    d ln(1 - r^k)/dP1 = pi P1 k r^k / (1 - r^k).
    """
    P1 = np.asarray(P1, dtype=float)
    total = np.zeros_like(P1)
    for k in range(1, N + 1):
        rk = np.exp(-0.5 * np.pi * P1**2 * k)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(P1 > 0, k * rk / _one_minus_rk(P1, k), 0.0)
        total = total + term
    out = lc_capture_probability(P1, N) * np.pi * P1 * total
    # P1 -> 0: the k=1 factor gives P ~ pi P1^2/2 * (others ~ 0 for N>1)
    return float(out) if np.ndim(out) == 0 else out


def lc_threshold(N: int = DEFAULT_PRODUCT_LENGTH, xtol: float = 1e-12) -> float:
    """P1 at which the N-step ladder-climbing probability equals 1/2."""
    return brentq(lambda p: lc_capture_probability(p, N) - 0.5, 0.0, 10.0, xtol=xtol)


def lc_width(N: int = DEFAULT_PRODUCT_LENGTH) -> float:
    """Inverse slope of the ladder-climbing S-curve at its threshold."""
    return 1.0 / lc_capture_slope(lc_threshold(N), N)


def classical_threshold(P2):
    """AR threshold P1cr = 0.82 / sqrt(P2)."""
    P2 = np.asarray(P2, dtype=float)
    if np.any(P2 <= 0):
        raise ValueError("P2 must be > 0")
    out = AR_P1_COEFFICIENT / np.sqrt(P2)
    return float(out) if out.ndim == 0 else out


def classical_threshold_coefficient(eps_coefficient: float = AR_EPS_COEFFICIENT,
                                    physical: PhysicalParams | None = None) -> float:
    """Express the AR threshold amplitude in (P1, P2) and return P1cr sqrt(P2).

    The amplitude eps_cr = c alpha^(3/4) beta^(-1/2) m w0^(1/2) is pushed
    through the physical -> dimensionless conversion for an arbitrary
    parameter set; the result is independent of that choice and equals
    c sqrt(3/8).
    """
    p = physical or PhysicalParams(m=1.7, omega0=2.3, beta=0.37, eps=0.0, alpha=0.011, hbar=0.9)
    eps_cr = eps_coefficient * p.alpha**0.75 * p.beta**-0.5 * p.m * math.sqrt(p.omega0)
    d = from_physical(PhysicalParams(p.m, p.omega0, p.beta, eps_cr, p.alpha, p.hbar, p.kT))
    return d.P1 * math.sqrt(d.P2)


def classical_width(omega0: float = 1.0, kT=0.0, hbar: float = 1.0):
    """AR transition width in P1: 1.23 sqrt(k_B T_eff / (2 hbar w0))."""
    kTe = effective_temperature(omega0, kT, hbar)
    out = AR_WIDTH_COEFFICIENT * np.sqrt(np.asarray(kTe) / (2.0 * hbar * omega0))
    return float(out) if np.ndim(out) == 0 else out


def regime(P1: float, P2: float) -> str:
    """'LC' above the separator P2 = P1 + 1, 'AR' below it.

    Only a label; the crossover is gradual.
    """
    return "LC" if P2 > P1 + 1.0 else "AR"
