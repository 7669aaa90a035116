"""Phase-space grids and Wigner-function snapshots."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.special import ndtr

__all__ = [
    "GridTooSmall",
    "PhaseGrid",
    "PhaseSpaceField",
    "gaussian_field",
    "tail_mass",
    "coarse_grain",
    "negativity",
    "separatrix",
    "separatrix_mass",
    "write_field",
    "read_field",
]

FRAMES = ("fixed", "rotating")


class GridTooSmall(ValueError):
    """Initial distribution has too much mass outside the grid."""


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform cell-centred grid on [xmin, xmax) x [umin, umax).

    The first axis is the coordinate (x-bar or Q), the second the momentum
    (u-bar or P).  Both axes are treated as periodic by the spectral kernels.
    """

    xmin: float
    xmax: float
    nx: int
    umin: float
    umax: float
    nu: int

    def __post_init__(self):
        if self.nx < 4 or self.nu < 4:
            raise ValueError("need at least 4 points per axis")
        if self.nx % 2 or self.nu % 2:
            raise ValueError("point counts must be even")
        if not (self.xmax > self.xmin and self.umax > self.umin):
            raise ValueError("empty grid range")

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseGrid":
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.nx

    @property
    def du(self) -> float:
        return (self.umax - self.umin) / self.nu

    @property
    def cell_area(self) -> float:
        return self.dx * self.du

    @property
    def x(self) -> np.ndarray:
        return self.xmin + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def u(self) -> np.ndarray:
        return self.umin + (np.arange(self.nu) + 0.5) * self.du

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.nu)

    def mesh(self):
        return np.meshgrid(self.x, self.u, indexing="ij")

    def as_dict(self) -> dict:
        return {"xmin": self.xmin, "xmax": self.xmax, "nx": self.nx,
                "umin": self.umin, "umax": self.umax, "nu": self.nu}


@dataclass
class PhaseSpaceField:
    frame: str
    grid: PhaseGrid
    values: np.ndarray
    time: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid {self.grid.shape}")

    def integral(self, weight=None) -> float:
        v = self.values if weight is None else self.values * weight
        return float(v.sum() * self.grid.cell_area)

    @property
    def norm(self) -> float:
        return self.integral()

    def moments(self) -> dict:
        X, U = self.grid.mesh()
        n = self.norm
        mx, mu = self.integral(X) / n, self.integral(U) / n
        return {
            "mean_x": mx,
            "mean_u": mu,
            "var_x": self.integral((X - mx) ** 2) / n,
            "var_u": self.integral((U - mu) ** 2) / n,
        }

    def marginal_x(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.du

    def marginal_u(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.grid.dx

    def with_values(self, values, **kw) -> "PhaseSpaceField":
        return replace(self, values=values, meta=dict(self.meta), **kw)


def tail_mass(grid: PhaseGrid, var_x: float, var_u: float) -> float:
    """Mass of a centred Gaussian lying outside the grid box."""
    sx, su = math.sqrt(var_x), math.sqrt(var_u)
    inside_x = ndtr(grid.xmax / sx) - ndtr(grid.xmin / sx)
    inside_u = ndtr(grid.umax / su) - ndtr(grid.umin / su)
    # 1 - a*b without cancellation for a, b near 1
    ax, au = 1.0 - inside_x, 1.0 - inside_u
    return float(ax + au - ax * au)


def gaussian_field(frame: str, grid: PhaseGrid, var: float, time: float,
                   center=(0.0, 0.0), tail_tol: float = 1e-8) -> PhaseSpaceField:
    """Isotropic Gaussian exp(-r^2 / 2 var) / (2 pi var), discretely normalized to 1."""
    if var <= 0:
        raise ValueError("variance must be positive")
    shifted = PhaseGrid(grid.xmin - center[0], grid.xmax - center[0], grid.nx,
                        grid.umin - center[1], grid.umax - center[1], grid.nu)
    tail = tail_mass(shifted, var, var)
    if tail > tail_tol:
        raise GridTooSmall(
            f"Gaussian with variance {var:g} loses {tail:.2g} outside the grid "
            f"(limit {tail_tol:g}); widen the grid")
    X, U = grid.mesh()
    f = np.exp(-((X - center[0]) ** 2 + (U - center[1]) ** 2) / (2.0 * var))
    f /= f.sum() * grid.cell_area
    return PhaseSpaceField(frame, grid, f, float(time), {"variance": var, "tail_mass": tail})


def negativity(f: PhaseSpaceField) -> float:
    """Integral of max(-f, 0)."""
    return float(np.clip(-f.values, 0.0, None).sum() * f.grid.cell_area)


def coarse_grain(f: PhaseSpaceField, cell: float) -> PhaseSpaceField:
    """Periodic box average over ``cell`` x ``cell`` patches.

    The box covers the odd number of grid points closest to ``cell`` along
    each axis, so the total integral is unchanged and ``cell`` equal to the
    grid spacing is the identity.  The result carries the negativity before
    and after in ``meta``.
    """
    g = f.grid
    if cell < min(g.dx, g.du) * (1 - 1e-12):
        raise ValueError("cell must be at least the grid spacing")

    def odd(n):
        return 2 * int(math.floor(n / 2.0 + 1e-9)) + 1

    size = (odd(cell / g.dx), odd(cell / g.du))
    vals = f.values if size == (1, 1) else uniform_filter(f.values, size=size, mode="wrap")
    out = f.with_values(vals)
    out.meta["coarse_cell"] = cell
    out.meta["coarse_size"] = size
    out.meta["negativity_before"] = negativity(f)
    out.meta["negativity_after"] = negativity(out)
    return out


def separatrix(n_points: int = 401) -> np.ndarray:
    """Closed separatrix of x^2/2 - beta x^4/4 in rescaled (xi, upsilon).

    With xi = sqrt(beta) x and upsilon = sqrt(beta) u the curve is
    upsilon^2/2 + xi^2/2 - xi^4/4 = 1/4 for |xi| <= 1, independent of beta.
    Returns an (M, 2) polyline running over the upper branch from xi=-1 to
    xi=1 and back along the lower branch, closed.
    """
    if n_points < 3:
        raise ValueError("need at least 3 points per branch")
    # cosine spacing clusters points near the saddles
    xi = -np.cos(np.linspace(0.0, np.pi, n_points))
    ups = np.sqrt(np.clip(0.5 - xi**2 + 0.5 * xi**4, 0.0, None))
    upper = np.column_stack((xi, ups))
    lower = np.column_stack((xi[::-1], -ups[::-1]))[1:]
    return np.vstack((upper, lower))


def separatrix_mass(f: PhaseSpaceField, beta_bar: float) -> float:
    """Fixed-frame mass inside the separatrix, i.e. trapped in the quartic well."""
    if f.frame != "fixed":
        raise ValueError("separatrix_mass needs a fixed-frame field")
    if beta_bar <= 0:
        return f.norm
    X, U = f.grid.mesh()
    s = math.sqrt(beta_bar)
    xi, ups = s * X, s * U
    inside = (np.abs(xi) < 1.0) & (0.5 * ups**2 + 0.5 * xi**2 - 0.25 * xi**4 < 0.25)
    return f.integral(inside)


def write_field(path, f: PhaseSpaceField) -> tuple[Path, Path]:
    """Raw little-endian float64 values (C order) plus a JSON header."""
    path = Path(path)
    data = path.with_suffix(".bin")
    head = path.with_suffix(".json")
    f.values.astype("<f8").tofile(data)
    header = {"frame": f.frame, "grid": f.grid.as_dict(), "time": f.time,
              "dtype": "<f8", "order": "C", "shape": list(f.values.shape), "meta": _jsonable(f.meta)}
    head.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return data, head


def read_field(path) -> PhaseSpaceField:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = PhaseGrid(**header["grid"])
    vals = np.fromfile(path.with_suffix(".bin"), dtype=header["dtype"]).reshape(header["shape"])
    return PhaseSpaceField(header["frame"], grid, vals, header["time"], header.get("meta", {}))


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        elif isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out
