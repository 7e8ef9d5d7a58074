"""SD-RT(1) spectral difference scheme on periodic right-triangular meshes."""
from .mesh import MeshFunction, MeshGeometry, Velocity, block_l2_norm, project_lagrange, project_modified
from .scheme import StencilOperator, apply_residual, hardcoded_operator, symbol

__all__ = [
    "MeshFunction",
    "MeshGeometry",
    "StencilOperator",
    "Velocity",
    "apply_residual",
    "block_l2_norm",
    "hardcoded_operator",
    "project_lagrange",
    "project_modified",
    "symbol",
]
