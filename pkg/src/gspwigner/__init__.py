"""Discrete Wigner/Weyl calculus for Gaussian symmetric processes.

Half-grid lattice convention ``halfgrid-v1``; see ``gspwigner.numgrid``.
"""
from .numgrid import (CONVENTION, ContractError, CovTensor4, Grid1D, GridError, Kernel,
                      ModelError, ParameterError, PhaseField, PhaseGrid, Signal, Symbol4,
                      make_grid, make_phase_grid)

__version__ = "0.1.0"

__all__ = [
    "CONVENTION", "ContractError", "CovTensor4", "Grid1D", "GridError", "Kernel",
    "ModelError", "ParameterError", "PhaseField", "PhaseGrid", "Signal", "Symbol4",
    "make_grid", "make_phase_grid", "__version__",
]
