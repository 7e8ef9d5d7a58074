"""Local Raviart-Thomas flux reconstruction on the two cell triangles.

The flux on a triangle lives in RT_p (p = 0 or 1). It is pinned down by

* at each interior point (p = 1: the centroid): ``f = omega * u_own``;
* at ``p + 1`` points of each edge: ``f . n = (omega . n) * u_upwind``,
  where the upwind trace is the own one when ``omega . n >= 0``.

``L u = h div f`` at the solution points, so assembling the divergence
response to unit impulses on a unit block reproduces the stencil matrices
independently of the hard-coded tables in :mod:`sdrt.scheme`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import exact as ex
from .mesh import Velocity, as_velocity
from .scheme import STENCIL, StencilOperator

LOWER, UPPER = 0, 1
TRIANGLE_CORNERS = {
    LOWER: ((0, 0), (1, 0), (0, 1)),
    UPPER: ((0, 1), (1, 1), (1, 0)),
}
# dof index of each triangle vertex (degree 1) or of the triangle (degree 0)
VERTEX_DOFS = {LOWER: (0, 1, 2), UPPER: (3, 4, 5)}
CELL_DOFS = {LOWER: 0, UPPER: 1}

RT_DIMENSION = {0: 3, 1: 8}


class DegenerateGeometry(ValueError):
    pass


class StencilViolation(RuntimeError):
    pass


def edge_parameters(degree: int, rule: str) -> tuple:
    """Positions (in [0, 1]) of the flux points along an edge."""
    if degree == 0:
        return (Fraction(1, 2),)
    if rule == "gauss":
        s = math.sqrt(3.0) / 6.0
        return (0.5 - s, 0.5 + s)
    if rule == "uniform":
        return (Fraction(1, 3), Fraction(2, 3))
    raise ValueError(f"unknown edge rule {rule!r}")


@dataclass(frozen=True)
class Edge:
    start: tuple
    end: tuple
    normal: tuple[float, float]
    scaled_normal: tuple
    params: tuple

    def point(self, t) -> tuple:
        return tuple(s + t * (e - s) for s, e in zip(self.start, self.end))

    @property
    def points(self) -> tuple:
        return tuple(self.point(t) for t in self.params)


@dataclass(frozen=True)
class TriangleGeom:
    vertices: tuple
    edges: tuple
    interior_point: tuple

    @classmethod
    def from_vertices(cls, vertices, degree: int = 1, edge_rule: str = "gauss") -> "TriangleGeom":
        verts = tuple(tuple(Fraction(c) if not isinstance(c, float) else c for c in v) for v in vertices)
        (x1, y1), (x2, y2), (x3, y3) = verts
        if (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1) == 0:
            raise DegenerateGeometry("degenerate geometry")
        params = edge_parameters(degree, edge_rule)
        edges = []
        for i in range(3):
            p, q, r = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
            dx, dy = q[0] - p[0], q[1] - p[1]
            n = (dy, -dx)
            if n[0] * (r[0] - p[0]) + n[1] * (r[1] - p[1]) > 0:
                n = (-n[0], -n[1])
            length = math.hypot(float(n[0]), float(n[1]))
            unit = (float(n[0]) / length, float(n[1]) / length)
            edges.append(Edge(p, q, unit, n, params))
        centroid = tuple(sum(c) / 3 for c in zip(*verts))
        return cls(verts, tuple(edges), centroid)

    @property
    def area(self):
        (x1, y1), (x2, y2), (x3, y3) = self.vertices
        return abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)) / 2


def block_triangle(kind: int, offset=(0, 0), degree: int = 1, edge_rule: str = "gauss") -> TriangleGeom:
    verts = [(cx + offset[0], cy + offset[1]) for cx, cy in TRIANGLE_CORNERS[kind]]
    return TriangleGeom.from_vertices(verts, degree, edge_rule)


def rt_basis(degree: int, x, y) -> list[tuple]:
    if degree == 0:
        return [(1, 0), (0, 1), (x, y)]
    return [(1, 0), (x, 0), (y, 0), (0, 1), (0, x), (0, y), (x * x, x * y), (x * y, y * y)]


def rt_basis_divergence(degree: int, x, y) -> list:
    if degree == 0:
        return [0, 0, 2]
    return [0, 1, 0, 0, 0, 1, 3 * x, 3 * y]


@dataclass(frozen=True)
class RTElement:
    coeffs: tuple
    degree: int = 1

    def evaluate(self, x, y) -> tuple:
        fx = fy = 0
        for c, (bx, by) in zip(self.coeffs, rt_basis(self.degree, x, y)):
            fx = fx + c * bx
            fy = fy + c * by
        return fx, fy

    def divergence(self, x, y):
        return sum(c * d for c, d in zip(self.coeffs, rt_basis_divergence(self.degree, x, y)))


@dataclass(frozen=True)
class Condition:
    """One scalar collocation condition of the flux system."""

    point: tuple
    component: int | None = None  # interior condition on f[component]
    edge: int | None = None  # edge condition on f . n
    param: object = None


def collocation_conditions(tri: TriangleGeom, degree: int = 1) -> list[Condition]:
    conds = []
    if degree >= 1:
        conds += [Condition(tri.interior_point, component=0), Condition(tri.interior_point, component=1)]
    for i, e in enumerate(tri.edges):
        conds += [Condition(e.point(t), edge=i, param=t) for t in e.params]
    if len(conds) != RT_DIMENSION[degree]:
        raise AssertionError("condition count does not match dim RT_p")
    return conds


def _normal(tri: TriangleGeom, i: int, exact: bool):
    e = tri.edges[i]
    return e.scaled_normal if exact else e.normal


def rt_basis_matrix(tri: TriangleGeom, degree: int = 1, exact: bool = False):
    """Rows map RT coefficients to the collocation condition values.

    In exact mode the edge rows use the integer outward normal; the conditions
    are homogeneous in ``n`` so the solution is unchanged.
    """
    rows = []
    for cond in collocation_conditions(tri, degree):
        basis = rt_basis(degree, *cond.point)
        if cond.component is not None:
            rows.append([b[cond.component] for b in basis])
        else:
            nx, ny = _normal(tri, cond.edge, exact)
            rows.append([b[0] * nx + b[1] * ny for b in basis])
    if exact:
        m = ex.to_matrix(rows)
        if ex.determinant(m) == 0:
            raise DegenerateGeometry("degenerate geometry")
        return m
    m = np.array(rows, dtype=float)
    if abs(np.linalg.det(m)) < 1e-12:
        raise DegenerateGeometry("degenerate geometry")
    return m


@lru_cache(maxsize=64)
def _inverse_basis(tri: TriangleGeom, degree: int, exact: bool):
    m = rt_basis_matrix(tri, degree, exact)
    return ex.inverse(m) if exact else np.linalg.inv(m)


def _trace(values, t, degree):
    if degree == 0:
        return values
    a, b = values
    return (1 - t) * a + t * b


def reconstruct_flux(tri: TriangleGeom, u_own, u_neighbors, omega, degree: int = 1, exact: bool | None = None) -> RTElement:
    """Flux ``f_e[u]`` on ``tri``.

    ``u_own`` holds the vertex values of the own linear function (degree 1) or
    the cell value (degree 0). ``u_neighbors[i]`` is the neighbour trace on
    edge ``i``: its values at the edge start and end (degree 1) or the
    neighbour cell value (degree 0).
    """
    omega = as_velocity(omega)
    if exact is None:
        exact = omega.is_exact
    wx, wy = omega.omega_x, omega.omega_y
    if exact:
        conv = ex.as_fraction
        u_own = conv(u_own) if degree == 0 else tuple(map(conv, u_own))
        u_neighbors = [conv(v) if degree == 0 else tuple(map(conv, v)) for v in u_neighbors]
    if degree == 0:
        own_centroid = u_own
        own_edges = [u_own] * 3
    else:
        u1, u2, u3 = u_own
        own_centroid = (u1 + u2 + u3) / 3
        own_edges = [(u_own[i], u_own[(i + 1) % 3]) for i in range(3)]
    rhs = []
    for cond in collocation_conditions(tri, degree):
        if cond.component is not None:
            rhs.append((wx, wy)[cond.component] * own_centroid)
            continue
        nx, ny = _normal(tri, cond.edge, exact)
        wn = wx * nx + wy * ny
        side = own_edges[cond.edge] if wn >= 0 else u_neighbors[cond.edge]
        rhs.append(wn * _trace(side, cond.param, degree))
    inv = _inverse_basis(tri, degree, exact)
    if exact:
        coeffs = tuple(ex.matvec(inv, [ex.as_fraction(r) for r in rhs]))
    else:
        coeffs = tuple(inv @ np.array(rhs, dtype=float))
    return RTElement(coeffs, degree)


def divergence_at_vertices(f: RTElement, tri: TriangleGeom) -> tuple:
    return tuple(f.divergence(*v) for v in tri.vertices)


def _find_neighbor(kind: int, edge: Edge) -> tuple[tuple[int, int], int]:
    ends = {edge.start, edge.end}
    for offset in product((-1, 0, 1), repeat=2):
        for other in (LOWER, UPPER):
            if offset == (0, 0) and other == kind:
                continue
            corners = {(cx + offset[0], cy + offset[1]) for cx, cy in TRIANGLE_CORNERS[other]}
            if ends <= corners:
                return offset, other
    raise AssertionError("edge without neighbour")


def _dof_at(kind: int, offset, point, degree: int) -> int:
    if degree == 0:
        return CELL_DOFS[kind]
    for j, (cx, cy) in enumerate(TRIANGLE_CORNERS[kind]):
        if (cx + offset[0], cy + offset[1]) == tuple(point):
            return VERTEX_DOFS[kind][j]
    raise AssertionError("point is not a vertex of the triangle")


def _assemble_at(omega: Velocity, degree: int, edge_rule: str, exact: bool) -> dict:
    block = 6 if degree == 1 else 2
    zero = Fraction(0) if exact else 0.0
    offsets = list(product((-1, 0, 1), repeat=2))
    mats = {o: [[zero] * block for _ in range(block)] for o in offsets}
    for kind in (LOWER, UPPER):
        tri = block_triangle(kind, degree=degree, edge_rule=edge_rule)
        neighbors = [_find_neighbor(kind, e) for e in tri.edges]
        for src_offset, src_dof in product(offsets, range(block)):

            def val(o, k):
                return (1 if exact else 1.0) if (o, k) == (src_offset, src_dof) else zero

            if degree == 0:
                own = val((0, 0), CELL_DOFS[kind])
                nbr = [val(o, CELL_DOFS[nk]) for o, nk in neighbors]
            else:
                own = [val((0, 0), k) for k in VERTEX_DOFS[kind]]
                nbr = [
                    tuple(val(o, _dof_at(nk, o, p, 1)) for p in (e.start, e.end))
                    for e, (o, nk) in zip(tri.edges, neighbors)
                ]
            f = reconstruct_flux(tri, own, nbr, omega, degree, exact)
            if degree == 0:
                mats[src_offset][CELL_DOFS[kind]][src_dof] = f.divergence(*tri.interior_point)
            else:
                for k, d in zip(VERTEX_DOFS[kind], divergence_at_vertices(f, tri)):
                    mats[src_offset][k][src_dof] = d
    for o, m in mats.items():
        if o not in STENCIL and any(abs(x) > (0 if exact else 1e-12) for row in m for x in row):
            raise StencilViolation(f"stencil violation: dependence on block offset {o}")
    dtype = object if exact else float
    return {o: np.array(mats[o], dtype=dtype) for o in STENCIL}


def assemble_stencil(omega, degree: int = 1, edge_rule: str | None = None, exact: bool | None = None) -> StencilOperator:
    """Stencil matrices ``(Lx, Ly)`` derived from the RT reconstruction.

    Exact (Fraction) assembly is used when ``omega`` is rational; it needs the
    rational ``uniform`` edge rule, which yields the same operator as the
    Gauss-Legendre points since normal traces are linear on each edge.
    """
    omega = as_velocity(omega)
    if exact is None:
        exact = omega.is_exact
    if edge_rule is None:
        edge_rule = "uniform" if exact else "gauss"
    if exact and edge_rule == "gauss" and degree > 0:
        raise ValueError("Gauss-Legendre edge points are irrational; use edge_rule='uniform' in exact mode")
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    lx = _assemble_at(Velocity(one, zero), degree, edge_rule, exact)
    ly = _assemble_at(Velocity(zero, one), degree, edge_rule, exact)
    full = _assemble_at(omega, degree, edge_rule, exact)
    wx, wy = omega.omega_x, omega.omega_y
    for z in STENCIL:
        combo = wx * lx[z] + wy * ly[z]
        ok = np.all(combo == full[z]) if exact else np.allclose(combo, full[z], atol=1e-12, rtol=0)
        if not ok:
            raise AssertionError(f"stencil is not linear in omega at offset {z}")
    return StencilOperator(lx, ly, omega)
