"""Periodic right-triangular meshes and block-indexed mesh functions.

The unit square is split into ``N x N`` blocks of size ``h = 1/N``. Each block
holds two right triangles: the lower-left one with vertices ``(0,0), (1,0),
(0,1)`` and the upper-right one with vertices ``(0,1), (1,1), (1,0)`` (in units
of ``h`` relative to the block corner). A degree-1 mesh function stores the six
vertex values, numbered 1..6 in that order; a degree-0 function stores one
value per triangle, at its centroid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

# Solution-point offsets a_xi inside a block, in units of h.
SOLUTION_OFFSETS = {
    1: ((0, 0), (1, 0), (0, 1), (0, 1), (1, 1), (1, 0)),
    0: ((Fraction(1, 3), Fraction(1, 3)), (Fraction(2, 3), Fraction(2, 3))),
}

# Indicators of the modified projection: first-derivative shift on xi = 3, 4, 5,
# second-derivative shift on xi = 1, 4.
FIRST_DERIVATIVE_NODES = np.array([0, 0, 1, 1, 1, 0])
SECOND_DERIVATIVE_NODES = np.array([1, 0, 0, 1, 0, 0])

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MeshGeometry:
    n_blocks: int
    degree: int = 1

    def __post_init__(self):
        if int(self.n_blocks) != self.n_blocks or self.n_blocks < 2:
            raise ValueError(f"n_blocks must be an integer >= 2, got {self.n_blocks!r}")
        if self.degree not in SOLUTION_OFFSETS:
            raise ValueError(f"unsupported degree {self.degree}")

    @classmethod
    def from_step(cls, h: float, degree: int = 1) -> "MeshGeometry":
        n = round(1.0 / h)
        if n < 2 or abs(n * h - 1.0) > 1e-9:
            raise ValueError(f"mesh step must be 1/N with integer N >= 2, got {h!r}")
        return cls(n, degree)

    @property
    def h(self) -> float:
        return 1.0 / self.n_blocks

    @property
    def exact_h(self) -> Fraction:
        return Fraction(1, self.n_blocks)

    @property
    def block_size(self) -> int:
        return len(SOLUTION_OFFSETS[self.degree])

    @property
    def offsets(self) -> np.ndarray:
        return np.array(SOLUTION_OFFSETS[self.degree], dtype=float)

    def node_coordinates(self, exact: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (x, y) of every solution point, arrays of shape (N, N, B).

        Computed as ``(eta + a) / N`` so that periodic images coincide exactly.
        """
        n = self.n_blocks
        eta = np.arange(n)
        if exact:
            offs = SOLUTION_OFFSETS[self.degree]
            x = np.empty((n, n, self.block_size), dtype=object)
            y = np.empty_like(x)
            for i in range(n):
                for j in range(n):
                    for k, (ax, ay) in enumerate(offs):
                        x[i, j, k] = Fraction(i + ax) / n
                        y[i, j, k] = Fraction(j + ay) / n
            return x, y
        a = self.offsets
        x = (eta[:, None, None] + a[None, None, :, 0]) / n
        y = (eta[None, :, None] + a[None, None, :, 1]) / n
        return np.broadcast_to(x, (n, n, self.block_size)).copy(), np.broadcast_to(
            y, (n, n, self.block_size)
        ).copy()


@dataclass(frozen=True)
class Velocity:
    omega_x: float
    omega_y: float

    def __post_init__(self):
        if self.omega_x < 0 or self.omega_y < 0:
            raise ValueError("unsupported velocity orientation: components must be >= 0")
        if self.omega_x + self.omega_y <= 0:
            raise ValueError("velocity must be nonzero")

    @classmethod
    def from_angle(cls, phi: float) -> "Velocity":
        wx, wy = math.cos(phi), math.sin(phi)
        # cos(pi/2) is 6e-17, not zero; snap so that axis-parallel cases stay exact
        wx = 0.0 if abs(wx) < 1e-15 else wx
        wy = 0.0 if abs(wy) < 1e-15 else wy
        return cls(wx, wy)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, (int, Fraction)) for w in (self.omega_x, self.omega_y))

    def as_array(self) -> np.ndarray:
        return np.array([float(self.omega_x), float(self.omega_y)])

    def norm(self) -> float:
        return math.hypot(float(self.omega_x), float(self.omega_y))


def as_velocity(omega) -> Velocity:
    if isinstance(omega, Velocity):
        return omega
    wx, wy = omega
    return Velocity(wx, wy)


@dataclass
class MeshFunction:
    geometry: MeshGeometry
    values: np.ndarray

    def __post_init__(self):
        g = self.geometry
        shape = (g.n_blocks, g.n_blocks, g.block_size)
        if self.values.shape != shape:
            raise ValueError(f"values must have shape {shape}, got {self.values.shape}")

    @classmethod
    def zeros(cls, geometry: MeshGeometry) -> "MeshFunction":
        n = geometry.n_blocks
        return cls(geometry, np.zeros((n, n, geometry.block_size)))

    def block(self, eta) -> np.ndarray:
        n = self.geometry.n_blocks
        return self.values[eta[0] % n, eta[1] % n]

    def copy(self) -> "MeshFunction":
        return MeshFunction(self.geometry, self.values.copy())

    def total(self):
        """Sum of all entries; the quantity conserved by the scheme."""
        return self.values.sum()

    def __add__(self, other: "MeshFunction") -> "MeshFunction":
        return MeshFunction(self.geometry, self.values + other.values)

    def __sub__(self, other: "MeshFunction") -> "MeshFunction":
        return MeshFunction(self.geometry, self.values - other.values)

    def __mul__(self, s) -> "MeshFunction":
        return MeshFunction(self.geometry, self.values * s)

    __rmul__ = __mul__


def project_lagrange(v: ScalarField, geometry: MeshGeometry, exact: bool = False) -> MeshFunction:
    """Sample ``v`` at every solution point.

    With ``exact=True`` the coordinates are Fractions (object arrays) and ``v``
    must accept them, e.g. a polynomial.
    """
    x, y = geometry.node_coordinates(exact=exact)
    values = np.asarray(v(x, y))
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape).copy()
    if not exact:
        values = values.astype(float)
    return MeshFunction(geometry, values)


def project_modified(
    v: ScalarField,
    dv_dx: ScalarField,
    dv_dy: ScalarField,
    d2v_dx2: ScalarField,
    geometry: MeshGeometry,
) -> MeshFunction:
    """Projection under which the scheme is 2-exact for ``omega = (1, 0)``.

    Adds ``h (v_x/2 - v_y)`` at nodes 3, 4, 5 and ``-h^2 v_xx / 6`` at nodes 1, 4.
    """
    if geometry.degree != 1:
        raise ValueError("modified projection is defined for degree 1 only")
    h = geometry.h
    base = project_lagrange(v, geometry).values
    first = project_lagrange(lambda x, y: 0.5 * dv_dx(x, y) - dv_dy(x, y), geometry).values
    second = project_lagrange(d2v_dx2, geometry).values
    values = base + h * FIRST_DERIVATIVE_NODES * first - (h * h / 6.0) * SECOND_DERIVATIVE_NODES * second
    return MeshFunction(geometry, values)


def block_l2_norm(f: MeshFunction) -> float:
    h = f.geometry.h
    return float(np.sqrt(h * h * np.sum(np.abs(f.values) ** 2)))


def exact_solution(u_like: MeshFunction, v_exact: ScalarField, t: float, omega) -> np.ndarray:
    """Values of ``v_exact(r - omega t)`` at the solution points of ``u_like``.

    The shifted arguments are reduced mod 1, which keeps long runs accurate.
    """
    w = as_velocity(omega).as_array()
    x, y = u_like.geometry.node_coordinates()
    return v_exact(np.mod(x - w[0] * t, 1.0), np.mod(y - w[1] * t, 1.0))


def max_pointwise_error(u: MeshFunction, v_exact: ScalarField, t: float, omega) -> float:
    return float(np.max(np.abs(u.values - exact_solution(u, v_exact, t, omega))))


def l2_error(u: MeshFunction, v_exact: ScalarField, t: float, omega) -> float:
    e = MeshFunction(u.geometry, u.values - exact_solution(u, v_exact, t, omega))
    return block_l2_norm(e)
