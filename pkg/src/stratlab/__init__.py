"""Finite-difference laboratory for porous medium and pseudo-parabolic
equations on stratified Lie groups, with blow-up / global-existence
certificates."""
from .group import StratifiedGroup, dilate, homogeneous_dimension, make_euclidean, make_heisenberg
from .grid import Grid, HVectorField, horizontal_divergence, horizontal_gradient, p_sub_laplacian
from .kernels import BACKEND
from .nonlinearity import Power, RationalSaturating, Tabulated, Zero, check_condition, search_parameters
from .pme import PMEConfig
from .pseudo import PPConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Grid", "HVectorField", "PMEConfig", "PPConfig", "Power", "RationalSaturating",
    "StratifiedGroup", "Tabulated", "Zero", "check_condition", "dilate", "homogeneous_dimension",
    "horizontal_divergence", "horizontal_gradient", "make_euclidean", "make_heisenberg",
    "p_sub_laplacian", "search_parameters",
]
