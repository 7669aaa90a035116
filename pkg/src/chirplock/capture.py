"""Capture probability, S-curves, thresholds and widths from ladder runs."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, isotonic_regression

from . import ladder
from .params import DimensionlessParams

__all__ = [
    "NoSeparation",
    "BracketMiss",
    "CaptureResult",
    "SCurve",
    "SimSettings",
    "default_measure_time",
    "separator_level",
    "capture_probability",
    "simulate_capture",
    "scan_s_curve",
    "threshold_and_width",
    "LC_SEPARATOR",
]

LC_SEPARATOR = 5
NO_SEPARATION_LEVEL = 1e-3


class NoSeparation(UserWarning):
    """Population never left the bottom levels; n_c comes from the fallback rule."""


class BracketMiss(ValueError):
    """The sampled S-curve does not cross P = 1/2."""


def default_measure_time(P2: float) -> float:
    # late enough that the captured group sits well above the uncaptured one
    return max(12.0 * P2, 24.0)


@dataclass
class SimSettings:
    tau0: float = -10.0
    tau_measure: float | None = None
    N: int | None = None
    n_c: int | None = None
    separator_policy: str = "valley"
    theta: float = 0.0
    rtol: float = ladder.DEFAULT_RTOL
    atol: float = ladder.DEFAULT_ATOL
    picture: str = "interaction"

    def measure_time(self, P2: float) -> float:
        return default_measure_time(P2) if self.tau_measure is None else self.tau_measure

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CaptureResult:
    P2: float
    P1: float
    n_c: int
    P: float
    tau_measure: float
    valley_depth: float = float("nan")
    separated: bool = True
    norm_drift: float = 0.0
    N: int = 0
    error: str | None = None

    def __post_init__(self):
        if self.error is None:
            if not -1e-9 <= self.P <= 1 + 1e-9:
                raise ValueError(f"capture probability out of range: {self.P}")
            if self.n_c < 1:
                raise ValueError("n_c must be >= 1")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SCurve:
    P2: float
    P1: np.ndarray
    P: np.ndarray
    P1cr: float = float("nan")
    width: float = float("nan")
    P1cr_err: float = float("nan")
    width_err: float = float("nan")
    diagnostics: dict = field(default_factory=dict)
    results: list[CaptureResult] = field(default_factory=list)


def _fallback_level(tau_measure: float, P2: float) -> int:
    return max(1, int(round(0.5 * tau_measure / P2)))


def _valley(pops: np.ndarray, n_res: int) -> tuple[int, float] | None:
    s = np.convolve(pops, np.ones(3) / 3.0, mode="same")
    h = max(1, n_res // 2)
    if h >= s.size - 1:
        return None
    a = int(np.argmax(s[:h]))
    b = h + int(np.argmax(s[h:]))
    if b - a < 2:
        return None
    v = a + 1 + int(np.argmin(s[a + 1:b]))
    depth = float(s[v] / min(s[a], s[b])) if min(s[a], s[b]) > 0 else float("nan")
    return v, depth


def separator_level(run: ladder.LadderRun, tau_measure: float | None = None,
                    policy: str = "valley") -> int:
    """Level separating the uncaptured group from the phase-locked one.

    Policies: ``"valley"`` finds the deepest point of the 3-level moving
    average between the largest peak below half the resonant level and the
    largest peak above it; ``"half"`` is round(tau / 2 P2); ``"lc"`` is the
    fixed ladder-climbing choice n_c = 5.  The valley policy falls back to
    ``"half"`` when no valley is resolvable.
    """
    n_c, _, _ = _separator(run, tau_measure, policy)
    return n_c


def _separator(run, tau_measure, policy):
    tau_measure = run.final.tau if tau_measure is None else tau_measure
    P2 = run.params.P2
    pops = run.snapshot(tau_measure).populations
    fallback = min(_fallback_level(tau_measure, P2), run.N - 1)
    if policy == "lc":
        return LC_SEPARATOR, float("nan"), True
    if policy == "half":
        return fallback, float("nan"), True
    if policy != "valley":
        raise ValueError(f"unknown separator policy {policy!r}")
    if pops[2:].sum() < NO_SEPARATION_LEVEL:
        warnings.warn(NoSeparation(
            f"population above level 1 is {pops[2:].sum():.2g}; using n_c={fallback}"),
            stacklevel=3)
        return fallback, float("nan"), False
    found = _valley(pops, ladder.resonant_level(tau_measure, P2))
    if found is None:
        return fallback, float("nan"), False
    return max(1, found[0]), found[1], True


def capture_probability(run: ladder.LadderRun, n_c: int,
                        tau_measure: float | None = None) -> CaptureResult:
    tau_measure = run.final.tau if tau_measure is None else tau_measure
    if not 1 <= n_c < run.N:
        raise ValueError(f"n_c={n_c} outside [1, {run.N})")
    pops = run.snapshot(tau_measure).populations
    P = float(np.clip(pops[n_c:].sum(), 0.0, 1.0))
    return CaptureResult(P2=run.params.P2, P1=run.params.P1, n_c=int(n_c), P=P,
                         tau_measure=float(tau_measure),
                         norm_drift=run.diagnostics.get("max_norm_drift", 0.0), N=run.N)


def simulate_capture(P1: float, P2: float, settings: SimSettings | None = None) -> CaptureResult:
    """One ladder run from the ground state followed by the capture measurement."""
    s = settings or SimSettings()
    tm = s.measure_time(P2)
    params = DimensionlessParams(P1, P2, s.theta)
    run = ladder.integrate(params, s.tau0, tm, s.N, rtol=s.rtol, atol=s.atol, picture=s.picture)
    if s.n_c is not None:
        n_c, depth, ok = s.n_c, float("nan"), True
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoSeparation)
            n_c, depth, ok = _separator(run, tm, s.separator_policy)
    res = capture_probability(run, n_c, tm)
    res.valley_depth = depth
    res.separated = ok
    return res


def _capture_job(args):
    P1, P2, settings = args
    try:
        return simulate_capture(P1, P2, settings)
    except (ladder.TruncationOverflow, ladder.StepFailure) as exc:
        return CaptureResult(P2=P2, P1=P1, n_c=1, P=float("nan"),
                             tau_measure=settings.measure_time(P2), separated=False,
                             error=f"{type(exc).__name__}: {exc}")


def scan_s_curve(P2: float, P1_grid: Sequence[float], settings: SimSettings | None = None,
                 workers: int | None = None, mapper: Callable | None = None,
                 seed: int = 0) -> SCurve:
    """Capture probability on a P1 grid at fixed P2, plus threshold and width.

    Grid points run independently (``workers`` processes, or a custom
    ``mapper``); results are reduced in sorted-P1 order so the outcome does not
    depend on scheduling.  Failed points are kept with ``error`` set and
    dropped from the fit.
    """
    from .sweep import run_jobs

    settings = settings or SimSettings()
    grid = np.array(sorted(float(p) for p in P1_grid))
    jobs = [(float(p), float(P2), settings) for p in grid]
    results = list(mapper(_capture_job, jobs)) if mapper else run_jobs(_capture_job, jobs, workers)
    results.sort(key=lambda r: r.P1)
    P = np.array([r.P for r in results])
    curve = SCurve(P2=float(P2), P1=grid, P=P, results=results)
    curve.diagnostics["failed_points"] = [r.P1 for r in results if r.error]
    try:
        threshold_and_width(curve, seed=seed)
    except BracketMiss as exc:
        # keep the samples reachable for reporting
        exc.curve = curve
        raise
    return curve


def _monotone(P1, P):
    fit = isotonic_regression(P, increasing=True).x
    return np.asarray(fit), float(np.max(np.abs(fit - P))) if P.size else 0.0


def _crossing(P1, P):
    """Threshold and inverse slope at P = 1/2 from a shape-preserving cubic."""
    f = PchipInterpolator(P1, P)
    lo = np.flatnonzero(P < 0.5)
    hi = np.flatnonzero(P >= 0.5)
    i = lo[-1]
    j = hi[hi > i][0]
    x = brentq(lambda t: float(f(t)) - 0.5, P1[i], P1[j], xtol=1e-13)
    slope = float(f.derivative()(x))
    return x, (1.0 / slope if slope > 0 else float("inf"))


def threshold_and_width(curve: SCurve, n_bootstrap: int = 200, seed: int = 0):
    """Fill in P1cr and the width 1/(dP/dP1) at P = 1/2; returns (P1cr, width).

    Samples are first made monotone (isotonic regression) and then
    interpolated with PCHIP.  The threshold error bar is half the local grid
    spacing; the width error bar is the bootstrap spread over resampled knots.
    """
    ok = np.isfinite(curve.P)
    P1 = np.asarray(curve.P1, dtype=float)[ok]
    P = np.asarray(curve.P, dtype=float)[ok]
    if P.size < 2 or P[0] > 0.5 or P[-1] < 0.5 or P.max() < 0.5 or P.min() > 0.5:
        raise BracketMiss(
            f"S-curve at P2={curve.P2} does not bracket P=1/2 "
            f"(P range {P.min() if P.size else float('nan'):.3g}.."
            f"{P.max() if P.size else float('nan'):.3g} over {P.size} points)")
    Pm, adjust = _monotone(P1, P)
    x, w = _crossing(P1, Pm)
    i = int(np.searchsorted(P1, x))
    i = min(max(i, 1), P1.size - 1)
    curve.P1cr = x
    curve.width = w
    curve.P1cr_err = 0.5 * float(P1[i] - P1[i - 1])

    rng = np.random.default_rng(seed)
    widths = []
    for _ in range(n_bootstrap):
        idx = np.unique(rng.integers(0, P1.size, P1.size))
        if idx.size < 4 or Pm[idx[0]] >= 0.5 or Pm[idx[-1]] < 0.5:
            continue
        try:
            widths.append(_crossing(P1[idx], Pm[idx])[1])
        except (ValueError, IndexError):
            continue
    widths = np.asarray([v for v in widths if math.isfinite(v)])
    curve.width_err = float(np.std(widths)) if widths.size > 1 else float("nan")
    curve.diagnostics.update({
        "monotone_adjustment": adjust,
        "bootstrap_samples": int(widths.size),
        "bootstrap_seed": seed,
    })
    return x, w
