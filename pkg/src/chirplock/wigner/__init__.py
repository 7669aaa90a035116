"""Phase-space (Wigner function) solvers in the fixed and rotating frames."""
from .common import NORM_TOL, Sponge, initial_thermal
from .config import CFLViolation, WignerRunConfig, default_grid
from .eigen import level_populations, quartic_eigenstates, state_wigner
from .field import (GridTooSmall, PhaseGrid, PhaseSpaceField, coarse_grain, gaussian_field,
                    negativity, read_field, separatrix, separatrix_mass, write_field)
from .fixed import evolve_fixed
from .rotating import classical_characteristics, evolve_rotating, locked_fraction

__all__ = [
    "NORM_TOL",
    "Sponge",
    "initial_thermal",
    "CFLViolation",
    "WignerRunConfig",
    "default_grid",
    "level_populations",
    "quartic_eigenstates",
    "state_wigner",
    "GridTooSmall",
    "PhaseGrid",
    "PhaseSpaceField",
    "coarse_grain",
    "gaussian_field",
    "negativity",
    "read_field",
    "separatrix",
    "separatrix_mass",
    "write_field",
    "evolve_fixed",
    "classical_characteristics",
    "evolve_rotating",
    "locked_fraction",
]
