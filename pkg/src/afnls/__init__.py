"""Pseudospectral toolkit for the anisotropic fractional NLS

    i u_t + u_xx - D_y^{2s} u + |u|^{p-2} u = 0  on a periodic box.
"""
from .spectral import GridSpec, Symbol, build_grid, apply_symbol, dealias
from .functionals import ModelParams, Diagnostics

__version__ = "0.1.0"
