"""The SD-RT(1) block operator on the right-triangular mesh.

The semi-discrete scheme reads

    du_eta/dt + (1/h) * sum_{zeta in S} L_zeta u_{eta+zeta} = 0,

with ``S = {(0,0), (-1,0), (0,-1)}`` and ``L_zeta = w_x Lx_zeta + w_y Ly_zeta``.
The matrices below are the first-quadrant branch (``w_x, w_y >= 0``).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mesh import MeshFunction, Velocity, as_velocity

STENCIL = ((0, 0), (-1, 0), (0, -1))

LX_00 = np.array(
    [
        [3, 1, 1, 0, 0, 0],
        [-3, 1, -2, 0, 0, 0],
        [0, 1, 4, 0, 0, 0],
        [0, -1, -4, 3, 1, 1],
        [0, 2, 2, -3, 1, -2],
        [0, -4, -1, 0, 1, 4],
    ]
)
LX_M0 = np.array(
    [
        [0, 0, 0, 0, -1, -4],
        [0, 0, 0, 0, 2, 2],
        [0, 0, 0, 0, -4, -1],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
    ]
)
LY_00 = np.array(
    [
        [3, 1, 1, 0, 0, 0],
        [0, 4, 1, 0, 0, 0],
        [-3, -2, 1, 0, 0, 0],
        [0, -1, -4, 4, 1, 0],
        [0, 2, 2, -2, 1, -3],
        [0, -4, -1, 1, 1, 3],
    ]
)
LY_0M = np.array(
    [
        [0, 0, 0, -4, -1, 0],
        [0, 0, 0, -1, -4, 0],
        [0, 0, 0, 2, 2, 0],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0],
    ]
)
ZERO = np.zeros((6, 6), dtype=int)

HARDCODED_X = {(0, 0): LX_00, (-1, 0): LX_M0, (0, -1): ZERO}
HARDCODED_Y = {(0, 0): LY_00, (-1, 0): ZERO, (0, -1): LY_0M}

# Mirror x <-> y: swaps nodes 2 <-> 3 and 4 <-> 6.
XY_SWAP = np.array([0, 2, 1, 5, 4, 3])


def swap_xy(m: np.ndarray) -> np.ndarray:
    return m[np.ix_(XY_SWAP, XY_SWAP)]


@dataclass(frozen=True)
class StencilOperator:
    """Split stencil matrices ``Lx``, ``Ly`` and the velocity they are combined with.

    Matrices may be float arrays or object arrays of Fractions (exact mode).
    """

    lx: dict
    ly: dict
    omega: Velocity
    stencil: tuple = STENCIL

    @property
    def block_size(self) -> int:
        return self.lx[(0, 0)].shape[0]

    @property
    def matrices(self) -> dict:
        wx, wy = self.omega.omega_x, self.omega.omega_y
        return {z: wx * self.lx[z] + wy * self.ly[z] for z in self.stencil}

    def with_omega(self, omega) -> "StencilOperator":
        return StencilOperator(self.lx, self.ly, as_velocity(omega), self.stencil)


@dataclass(frozen=True)
class Symbol:
    phi: tuple[float, float]
    matrix: np.ndarray


def _exact(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for idx, v in np.ndenumerate(m):
        out[idx] = Fraction(int(v))
    return out


def hardcoded_operator(omega, exact: bool | None = None) -> StencilOperator:
    """The literal first-quadrant matrices combined with ``omega``.

    ``exact`` defaults to True when both velocity components are int/Fraction.
    """
    omega = as_velocity(omega)
    if exact is None:
        exact = omega.is_exact
    conv = _exact if exact else (lambda m: m.astype(float))
    lx = {z: conv(m) for z, m in HARDCODED_X.items()}
    ly = {z: conv(m) for z, m in HARDCODED_Y.items()}
    return StencilOperator(lx, ly, omega)


def apply_residual(op: StencilOperator, u: MeshFunction) -> MeshFunction:
    """Time derivative ``-(1/h) sum_zeta L_zeta u_{eta+zeta}`` on a periodic mesh."""
    exact = u.values.dtype == object
    h = u.geometry.exact_h if exact else u.geometry.h
    acc = None
    for zeta, lz in op.matrices.items():
        # u_{eta+zeta} for every eta: roll by -zeta
        shifted = np.roll(u.values, shift=(-zeta[0], -zeta[1]), axis=(0, 1))
        term = shifted @ lz.T
        acc = term if acc is None else acc + term
    return MeshFunction(u.geometry, -acc / h)


def symbol(op: StencilOperator, phi) -> Symbol:
    """``L(phi) = sum_zeta exp(i phi . zeta) L_zeta``."""
    px, py = float(phi[0]), float(phi[1])
    mats = op.matrices
    m = np.zeros((op.block_size, op.block_size), dtype=complex)
    for zeta, lz in mats.items():
        m += np.exp(1j * (px * zeta[0] + py * zeta[1])) * np.asarray(lz, dtype=float)
    if px == 0.0 and py == 0.0:
        m = m.real.astype(complex)
    return Symbol((px, py), m)
