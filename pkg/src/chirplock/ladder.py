"""Slow (rotating-wave) Schrodinger dynamics on the anharmonic energy ladder.

The level amplitudes obey

    i dB_n/dtau = Gamma_n B_n + (P1/2) (sqrt(n+1) B_{n+1} + sqrt(n) B_{n-1}),
    Gamma_n = n (tau - (n+1) P2 / 2),

on a ladder truncated to N levels.  By default the diagonal phases are
removed analytically (interaction picture), b_n = exp(i Phi_n) B_n with
Phi_n = n tau^2/2 - n(n+1) P2 tau/2, which leaves only the slowly varying
near-resonant couplings for the adaptive integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import DOP853

from .params import DimensionlessParams

__all__ = [
    "AmplitudeState",
    "LadderRun",
    "TruncationOverflow",
    "StepFailure",
    "gamma_n",
    "accumulated_phase",
    "resonant_level",
    "default_basis_size",
    "ground_state",
    "integrate",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
DEFAULT_GUARD = 5
DEFAULT_LEAK_TOL = 1e-6


class TruncationOverflow(RuntimeError):
    """Population reached the top of the truncated ladder."""


class StepFailure(RuntimeError):
    """The adaptive step size collapsed."""


@dataclass
class AmplitudeState:
    tau: float
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size < 2:
            raise ValueError("need a 1-D amplitude vector with N >= 2")

    @property
    def N(self) -> int:
        return self.amplitudes.size

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.populations))


@dataclass
class LadderRun:
    params: DimensionlessParams
    tau0: float
    tau_end: float
    N: int
    snapshots: list[AmplitudeState]
    diagnostics: dict = field(default_factory=dict)

    def snapshot(self, tau: float) -> AmplitudeState:
        for s in self.snapshots:
            if math.isclose(s.tau, tau, rel_tol=0.0, abs_tol=1e-9):
                return s
        raise KeyError(f"no snapshot at tau={tau}; have {[s.tau for s in self.snapshots]}")

    @property
    def final(self) -> AmplitudeState:
        return self.snapshots[-1]


def gamma_n(n, tau, P2):
    """Diagonal term n (tau - (n+1) P2 / 2)."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("level index must be >= 0")
    return n * (tau - (n + 1) * P2 / 2.0)


def accumulated_phase(n, tau, P2):
    """Integral of gamma_n from 0 to tau."""
    n = np.asarray(n, dtype=float)
    return n * (0.5 * tau * tau - 0.5 * (n + 1) * P2 * tau)


def resonant_level(tau: float, P2: float) -> int:
    if P2 <= 0:
        raise ValueError("P2 must be > 0")
    return max(0, int(round(tau / P2)))


def default_basis_size(P1: float, P2: float, tau_end: float) -> int:
    n_res = math.ceil(max(tau_end, 0.0) / P2)
    margin = max(20, math.ceil(4.0 * P1 * math.sqrt(max(n_res, 1))))
    return n_res + margin


def ground_state(N: int, tau: float) -> AmplitudeState:
    b = np.zeros(N, dtype=complex)
    b[0] = 1.0
    return AmplitudeState(tau, b)


def _rhs_schrodinger(P1, P2, N):
    n = np.arange(N)
    c = 0.5 * P1 * np.sqrt(n[1:])

    def rhs(tau, y):
        B = y[:N] + 1j * y[N:]
        d = gamma_n(n, tau, P2) * B
        d[:-1] += c * B[1:]
        d[1:] += c * B[:-1]
        # -i d, stacked as (re, im)
        return np.concatenate((d.imag, -d.real))

    return rhs


def _rhs_interaction(P1, P2, N):
    m = np.arange(1, N)  # coupling between m-1 and m
    c = 0.5 * P1 * np.sqrt(m)
    mP2 = m * P2
    out = np.empty(2 * N)

    def rhs(tau, y):
        x, v = y[:N], y[N:]
        # coupling phase exp(-i(Phi_m - Phi_{m-1})) = exp(i a), a = m P2 tau - tau^2/2
        a = mP2 * tau - 0.5 * tau * tau
        pr = c * np.cos(a)
        pi = c * np.sin(a)
        dr = np.zeros(N)
        di = np.zeros(N)
        dr[:-1] = pr * x[1:] - pi * v[1:]
        di[:-1] = pr * v[1:] + pi * x[1:]
        dr[1:] += pr * x[:-1] + pi * v[:-1]
        di[1:] += pr * v[:-1] - pi * x[:-1]
        # derivative is -i d
        out[:N] = di
        out[N:] = -dr
        return out.copy()

    return rhs


def integrate(
    params: DimensionlessParams,
    tau0: float,
    tau_end: float,
    N: int | None = None,
    init: AmplitudeState | None = None,
    snapshot_times: Sequence[float] | None = None,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    picture: str = "interaction",
    guard: int = DEFAULT_GUARD,
    leak_tol: float = DEFAULT_LEAK_TOL,
    first_step: float | None = None,
) -> LadderRun:
    """Integrate the ladder equations from ``tau0`` to ``tau_end``.

    Snapshots hold Schrodinger-picture amplitudes B_n and are taken from the
    integrator's dense output, so they do not depend on the step sequence.
    Backward integration (``tau_end < tau0``) is allowed.

    Raises TruncationOverflow if the top ``guard`` levels ever hold more than
    ``leak_tol`` of the population, StepFailure if the step size underflows.
    """
    if picture not in ("interaction", "schrodinger"):
        raise ValueError(f"unknown picture {picture!r}")
    if tau0 == tau_end:
        raise ValueError("tau0 and tau_end must differ")
    P1, P2 = params.P1, params.P2
    if init is not None:
        N = init.N if N is None else N
        if N != init.N:
            raise ValueError(f"init has {init.N} levels, N={N}")
        if not math.isclose(init.tau, tau0, abs_tol=1e-12):
            raise ValueError("init.tau must equal tau0")
        B0 = init.amplitudes.copy()
    else:
        if N is None:
            N = default_basis_size(P1, P2, max(tau0, tau_end))
        B0 = ground_state(N, tau0).amplitudes
    if N < 2:
        raise ValueError("N must be >= 2")
    guard = min(guard, N - 1)

    lo, hi = min(tau0, tau_end), max(tau0, tau_end)
    times = [tau_end] if snapshot_times is None else sorted(snapshot_times, reverse=tau_end < tau0)
    for t in times:
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise ValueError(f"snapshot time {t} outside [{lo}, {hi}]")

    n = np.arange(N)
    if picture == "interaction":
        rhs = _rhs_interaction(P1, P2, N)
        y0 = B0 * np.exp(1j * accumulated_phase(n, tau0, P2))
    else:
        rhs = _rhs_schrodinger(P1, P2, N)
        y0 = B0

    solver = DOP853(rhs, tau0, np.concatenate((y0.real, y0.imag)), tau_end,
                    rtol=rtol, atol=atol, first_step=first_step)
    norm0 = float(np.sum(np.abs(y0) ** 2))
    backward = tau_end < tau0
    pending = list(times)
    snaps: list[AmplitudeState] = []
    drift = leak = 0.0
    steps = 0

    def record(t, yt):
        y = yt[:N] + 1j * yt[N:]
        B = y * np.exp(-1j * accumulated_phase(n, t, P2)) if picture == "interaction" else y
        snaps.append(AmplitudeState(float(t), B))

    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(msg)
        steps += 1
        pops = solver.y[:N] ** 2 + solver.y[N:] ** 2
        drift = max(drift, abs(float(pops.sum()) - norm0))
        if guard > 0:
            leak = max(leak, float(pops[N - guard:].sum()))
            if leak > leak_tol:
                raise TruncationOverflow(
                    f"top {guard} of {N} levels reached population {leak:.3g} > {leak_tol:g} "
                    f"at tau={solver.t:.4g}; increase N")
        if pending:
            t_now = solver.t
            inside = [t for t in pending if (t >= t_now if backward else t <= t_now)]
            if inside:
                dense = solver.dense_output()
                for t in inside:
                    record(t, solver.y if t == t_now else dense(t))
                pending = pending[len(inside):]

    diagnostics = {
        "max_norm_drift": drift,
        "steps": steps,
        "rhs_evaluations": int(solver.nfev),
        "guard_population": leak,
        "picture": picture,
        "rtol": rtol,
        "atol": atol,
    }
    return LadderRun(params, float(tau0), float(tau_end), N, snaps, diagnostics)
