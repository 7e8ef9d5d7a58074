"""Exact (rational) verification of the algebraic properties of SD-RT(1).

Polynomials are dicts ``{(i, j): coeff}`` meaning ``sum coeff x^i y^j``.
Velocities given as int/Fraction pairs are handled exactly; float pairs go
through the floating-point branch of :func:`order_criterion` only.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import exact as ex
from .mesh import SOLUTION_OFFSETS, Velocity
from .reconstruction import assemble_stencil
from .scheme import HARDCODED_X, HARDCODED_Y, STENCIL, hardcoded_operator

OFFSETS = SOLUTION_OFFSETS[1]
SECOND_ORDER = ((2, 0), (1, 1), (0, 2))


class UnsupportedOrder(ValueError):
    pass


class AppendixSystemDegenerate(ArithmeticError):
    pass


@dataclass(frozen=True)
class MultiIndex:
    m_x: int
    m_y: int

    def __post_init__(self):
        if self.m_x < 0 or self.m_y < 0:
            raise ValueError("multiindex components must be nonnegative")

    @property
    def order(self) -> int:
        return self.m_x + self.m_y

    @property
    def factorial(self) -> int:
        return math.factorial(self.m_x) * math.factorial(self.m_y)

    def scaled_monomial(self) -> dict:
        """``r^m / m!`` as a polynomial."""
        return {(self.m_x, self.m_y): Fraction(1, self.factorial)}


def as_multiindex(m) -> MultiIndex:
    return m if isinstance(m, MultiIndex) else MultiIndex(*m)


# -- polynomials --------------------------------------------------------------


def poly_eval(p: dict, x, y):
    return sum((c * x**i * y**j for (i, j), c in p.items()), Fraction(0))


def poly_dx(p: dict) -> dict:
    return {(i - 1, j): c * i for (i, j), c in p.items() if i > 0}


def poly_dy(p: dict) -> dict:
    return {(i, j - 1): c * j for (i, j), c in p.items() if j > 0}


def poly_add(*ps: dict) -> dict:
    out: dict = {}
    for p in ps:
        for k, c in p.items():
            out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c != 0}


def poly_scale(s, p: dict) -> dict:
    return {k: s * c for k, c in p.items()}


def transport_derivative(p: dict, omega) -> dict:
    wx, wy = omega
    return poly_add(poly_scale(wx, poly_dx(p)), poly_scale(wy, poly_dy(p)))


def lagrange_block(p: dict, block=(0, 0)) -> list:
    """``(Pi_1 p)_block``: values at ``block + a_xi``."""
    return [poly_eval(p, block[0] + ax, block[1] + ay) for ax, ay in OFFSETS]


# -- operator access ---------------------------------------------------------


def _rational_pair(omega) -> tuple[Fraction, Fraction]:
    wx, wy = omega
    return ex.as_fraction(wx), ex.as_fraction(wy)


def is_rational(omega) -> bool:
    return all(isinstance(w, (int, Fraction)) for w in omega)


def stencil_matrices(omega) -> dict:
    """``L_zeta`` for rational ``omega`` as exact matrices; omega may be (0, 0)."""
    wx, wy = _rational_pair(omega)
    return {
        z: ex.add(ex.scale(wx, ex.to_matrix(HARDCODED_X[z])), ex.scale(wy, ex.to_matrix(HARDCODED_Y[z])))
        for z in STENCIL
    }


def l_zero(omega) -> ex.Matrix:
    mats = stencil_matrices(omega)
    out = ex.zeros(6, 6)
    for m in mats.values():
        out = ex.add(out, m)
    return out


def _float_matrices(omega) -> dict:
    op = hardcoded_operator(Velocity(float(omega[0]), float(omega[1])), exact=False)
    return op.matrices


# -- truncation vectors ------------------------------------------------------


def scheme_defect(p: dict, omega, block=(0, 0), projection: Callable = lagrange_block) -> list:
    """``-(P (omega.grad) p)_block + sum_zeta L_zeta (P p)_{block+zeta}``.

    Vanishes for every p the scheme reproduces exactly in the sense of the
    projection ``P``.
    """
    exact = is_rational(omega)
    if exact:
        omega = _rational_pair(omega)
        mats = stencil_matrices(omega)
    else:
        mats = {z: m.tolist() for z, m in _float_matrices(omega).items()}
    out = [-v for v in projection(transport_derivative(p, omega), block)]
    for z, m in mats.items():
        vals = projection(p, (block[0] + z[0], block[1] + z[1]))
        out = [o + sum(a * b for a, b in zip(row, vals)) for o, row in zip(out, m)]
    return out


@dataclass(frozen=True)
class TruncationVector:
    m: MultiIndex
    omega: tuple
    value: tuple


def truncation_vector(m, omega, block=(0, 0)) -> TruncationVector:
    """Coefficient of the m-th derivative in the truncation error, |m| = 2."""
    m = as_multiindex(m)
    if m.order != 2:
        raise UnsupportedOrder("unsupported multiindex order")
    value = scheme_defect(m.scaled_monomial(), omega, block)
    return TruncationVector(m, tuple(omega), tuple(value))


def exactness_check(omega) -> bool:
    """True iff constants, x and y are reproduced exactly (1-exactness)."""
    return all(ex.is_zero(scheme_defect({k: Fraction(1)}, omega)) for k in ((0, 0), (1, 0), (0, 1)))


# -- co-kernel of L(0) -------------------------------------------------------


@dataclass(frozen=True)
class CokernelBasis:
    vectors: tuple
    regime: str

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def cokernel(omega) -> CokernelBasis:
    """Left null space of ``L(0)`` with an integer-primitive basis.

    When the all-ones vector belongs to it (always, by conservation) it comes
    first; every further vector is shifted along it to be nonnegative with a
    zero entry, taking the lexicographically larger of the two such choices.
    """
    basis = ex.left_nullspace(l_zero(omega))
    ones = [Fraction(1)] * 6
    if basis and ex.rank(basis + [ones]) == len(basis):
        chosen = [ones]
        for v in basis:
            if ex.rank(chosen + [v]) > len(chosen):
                up = tuple(ex.primitive([x - min(v) for x in v]))
                down = tuple(ex.primitive([max(v) - x for x in v]))
                chosen.append(max(up, down))
        basis = chosen
    vectors = tuple(tuple(ex.primitive([Fraction(x) for x in v])) for v in basis)
    wx, wy = _rational_pair(omega)
    regime = "interior" if wx > 0 and wy > 0 else "edge-parallel"
    return CokernelBasis(vectors, regime)


SL = ex.to_matrix(
    [
        [3, 6, 6, 3, 0, 3],
        [1, 1, 1, 0, 0, 3],
        [1, 1, 1, 3, 0, 0],
        [2, 1, 2, 1, 0, 1],
        [5, 5, 5, 3, 0, 3],
        [1, 1, 1, 1, 1, 1],
    ]
)
SR = ex.to_matrix(
    [
        [1, 0, 0, 0, -1, 1],
        [0, 1, 0, 1, -1, 1],
        [0, 0, 1, 0, 0, 1],
        [0, 0, 0, 0, 0, 1],
        [0, 0, 0, 1, 0, 1],
        [0, 0, 0, 1, -1, 1],
    ]
)


def slr_product(omega) -> ex.Matrix:
    return ex.scale(Fraction(-1, 9), ex.matmul(ex.matmul(SL, l_zero(omega)), SR))


def slr_target(omega) -> ex.Matrix:
    wx, wy = _rational_pair(omega)
    s = wx + wy
    return [
        [s, 0, 0, 0, 0, 0],
        [0, s, 0, 0, 0, 0],
        [0, 0, s, 0, 0, 0],
        [-wx / 3, wy / 3, -wx / 3, wx, 0, 0],
        [0, 0, 0, wx, wy, 0],
        [0, 0, 0, 0, 0, 0],
    ]


def verify_slr_factorization(omega) -> bool:
    return slr_product(omega) == ex.to_matrix(slr_target(omega))


# -- order criterion ---------------------------------------------------------


def _float_cokernel(l0: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    u, s, _ = np.linalg.svd(l0)
    null = s <= tol * max(s[0], 1.0)
    return u[:, null].T


def order_criterion(omega, tol: float = 1e-10) -> int:
    """2 if every f^m (|m| = 2) is orthogonal to coKer L(0), else 1.

    Rational omega: exact. Float omega: SVD co-kernel with relative
    orthogonality tolerance ``tol * |f| * |v|``.
    """
    if is_rational(omega):
        basis = [[Fraction(x) for x in v] for v in cokernel(omega).vectors]
        for m in SECOND_ORDER:
            f = truncation_vector(m, omega).value
            if any(ex.dot(v, f) != 0 for v in basis):
                return 1
        return 2
    omega = (float(omega[0]), float(omega[1]))
    l0 = sum(_float_matrices(omega).values())
    basis = _float_cokernel(np.asarray(l0, dtype=float))
    for m in SECOND_ORDER:
        f = np.array(truncation_vector(m, omega).value, dtype=float)
        for v in basis:
            if abs(v @ f) > tol * np.linalg.norm(f) * np.linalg.norm(v):
                return 1
    return 2


def order_by_rank(omega) -> int:
    """Brute force: order 2 iff rank [L(0) | f^m] = rank L(0) for all |m| = 2."""
    l0 = l_zero(omega)
    r = ex.rank(l0)
    for m in SECOND_ORDER:
        f = truncation_vector(m, omega).value
        if ex.rank([row + [fi] for row, fi in zip(l0, f)]) != r:
            return 1
    return 2


# -- modified projection (omega = (1, 0)) -----------------------------------

# affine forms in the unknowns: columns are (1, b, c, d)
UNKNOWNS = ("b", "c", "d")
_COL = {"b": 1, "c": 2, "d": 3}
_PATTERN = {
    "c": (0, 0, 1, 1, 1, 0),  # multiplies d/dx
    "d": (0, 0, 1, 1, 1, 0),  # multiplies d/dy
    "b": (1, 0, 0, 1, 0, 0),  # multiplies d2/dx2
}


def _known(v) -> np.ndarray:
    out = np.array([[Fraction(0)] * 4 for _ in range(6)], dtype=object)
    out[:, 0] = [ex.as_fraction(x) for x in v]
    return out


def _unknown_diag(name: str, v) -> np.ndarray:
    out = _known([0] * 6)
    out[:, _COL[name]] = [Fraction(p) * ex.as_fraction(x) for p, x in zip(_PATTERN[name], v)]
    return out


def appendix_forms() -> dict:
    """The three truncation vectors under the modified projection, as affine forms.

    Each value is a (6, 4) object array; row xi holds ``(const, [b], [c], [d])``.
    """
    mono = {name: lagrange_block({k: Fraction(1)}) for name, k in
            (("e", (0, 0)), ("x", (1, 0)), ("y", (0, 1)), ("xy", (1, 1)), ("x2", (2, 0)), ("y2", (0, 2)))}
    e, x, y, xy, x2, y2 = (mono[k] for k in ("e", "x", "y", "xy", "x2", "y2"))
    E = _known(e)
    xp = _known(x) + _unknown_diag("c", e)
    yp = _known(y) + _unknown_diag("d", e)
    x2p = _known(x2) + _unknown_diag("c", [2 * v for v in x]) + _unknown_diag("b", [2 * v for v in e])
    xyp = _known(xy) + _unknown_diag("c", y) + _unknown_diag("d", x)
    y2p = _known(y2) + _unknown_diag("d", [2 * v for v in y])
    l0 = np.array(ex.to_matrix(HARDCODED_X[(0, 0)]), dtype=object)
    lm = np.array(ex.to_matrix(HARDCODED_X[(-1, 0)]), dtype=object)
    # (Pi p)_{(-1,0)} expands p(x - 1, y) back onto the block-0 values
    fxx = -2 * xp + l0 @ x2p + lm @ (x2p - 2 * xp + E)
    fxy = -yp + l0 @ xyp + lm @ (xyp - yp)
    fyy = l0 @ y2p + lm @ y2p
    return {"fxx": fxx, "fxy": fxy, "fyy": fyy}


def format_affine(row) -> str:
    terms = []
    for name, c in zip(UNKNOWNS, row[1:]):
        if c:
            coef = "" if abs(c) == 1 else str(abs(c))
            terms.append(("-" if c < 0 else "+", f"{coef}{name}"))
    if row[0]:
        terms.append(("-" if row[0] < 0 else "+", str(abs(row[0]))))
    if not terms:
        return "0"
    sign, first = terms[0]
    text = ("-" if sign == "-" else "") + first
    for sign, t in terms[1:]:
        text += f" {sign} {t}"
    return text


@dataclass(frozen=True)
class ProjectionCoeffs:
    b: Fraction
    c: Fraction
    d: Fraction

    def as_tuple(self) -> tuple:
        return (self.b, self.c, self.d)


def solve_projection_coeffs() -> ProjectionCoeffs:
    rows = []
    for form in appendix_forms().values():
        for r in form:
            if any(r):
                rows.append(list(r[1:]) + [-r[0]])
    _, pivots = ex.rref(rows)
    if 3 in pivots or len(pivots) != 3:
        raise AppendixSystemDegenerate("appendix system degenerate")
    sol = ex.solve([r[:3] for r in rows], [r[3] for r in rows])
    return ProjectionCoeffs(*sol)


def modified_block(p: dict, block, coeffs: ProjectionCoeffs) -> list:
    """``(Pi~_1 p)_block`` with the coefficients ``coeffs``."""
    base = lagrange_block(p, block)
    px = lagrange_block(poly_dx(p), block)
    py = lagrange_block(poly_dy(p), block)
    pxx = lagrange_block(poly_dx(poly_dx(p)), block)
    out = []
    for xi in range(6):
        v = base[xi]
        v += _PATTERN["c"][xi] * coeffs.c * px[xi]
        v += _PATTERN["d"][xi] * coeffs.d * py[xi]
        v += _PATTERN["b"][xi] * coeffs.b * pxx[xi]
        out.append(v)
    return out


def modified_defect(m, coeffs: ProjectionCoeffs | None = None) -> list:
    coeffs = coeffs or solve_projection_coeffs()
    m = as_multiindex(m)
    p = {(m.m_x, m.m_y): Fraction(1)}
    return scheme_defect(p, (1, 0), projection=lambda q, blk: modified_block(q, blk, coeffs))


def two_exactness_check(coeffs: ProjectionCoeffs | None = None) -> bool:
    coeffs = coeffs or solve_projection_coeffs()
    monomials = [(i, j) for i in range(3) for j in range(3) if i + j <= 2]
    return all(ex.is_zero(modified_defect(m, coeffs)) for m in monomials)


# -- report ------------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)


def random_rational_omegas(n: int, seed: int, positive: bool = True) -> list:
    rng = random.Random(seed)
    lo = 1 if positive else 0
    out = []
    while len(out) < n:
        w = (Fraction(rng.randint(lo, 40), rng.randint(1, 40)), Fraction(rng.randint(lo, 40), rng.randint(1, 40)))
        if w[0] + w[1] > 0:
            out.append(w)
    return out


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def _oracle_check(tamper=None) -> Check:
    mismatches = []
    for label, w, table in (("x", (1, 0), HARDCODED_X), ("y", (0, 1), HARDCODED_Y)):
        assembled = assemble_stencil(w)
        got = assembled.lx if label == "x" else assembled.ly
        for z in STENCIL:
            ref = np.array(table[z], dtype=object)
            if tamper is not None and tamper[0] == label and tuple(tamper[1]) == z:
                ref = ref.copy()
                ref[tamper[2], tamper[3]] = tamper[4]
            for (i, j), r in np.ndenumerate(ref):
                if got[z][i, j] != r:
                    mismatches.append(f"L^{label}_{z}[{i + 1},{j + 1}]: hardcoded={r} assembled={got[z][i, j]}")
    return Check("assembly matches hardcoded matrices", not mismatches, "; ".join(mismatches))


def verification_report(seed: int = 0, n_random: int = 20, tamper=None) -> list[Check]:
    """Run every exact identity; ``tamper=(dir, zeta, i, j, value)`` perturbs the oracle table."""
    checks = [_oracle_check(tamper)]
    samples = random_rational_omegas(n_random, seed)
    axes = [(1, 0), (0, 1)]

    bad = [w for w in samples + axes + [(Fraction(3, 5), Fraction(4, 5))] if not exactness_check(w)]
    checks.append(Check("1-exactness (1, x, y)", not bad, "failed at " + ", ".join(map(_fmt, bad)) if bad else ""))

    ones = [Fraction(1)] * 6
    steady = [0, 0, 1, 1, 1, 0]
    ok = all(ex.is_zero(ex.matvec(l_zero(w), ones)) for w in samples + axes)
    ok = ok and ex.is_zero(ex.matvec(l_zero((1, 0)), steady))
    checks.append(Check("kernel facts of L(0)", ok))

    dims = {_fmt(w): cokernel(w).dimension for w in samples}
    ok = all(d == 1 for d in dims.values())
    ck_x = cokernel((1, 0))
    ck_y = cokernel((0, 1))
    ok_x = ck_x.dimension == 2 and ex.same_row_space(ck_x.vectors, [[1] * 6, [5, 5, 2, 0, 0, 3]])
    ok_y = ck_y.dimension == 2 and ex.same_row_space(ck_y.vectors, [[1] * 6, [5, 2, 5, 3, 0, 0]])
    checks.append(Check(
        "co-kernel of L(0)", ok and ok_x and ok_y,
        f"omega=(1,0): {list(ck_x.vectors)}; omega=(0,1): {list(ck_y.vectors)}",
        {"random_dimensions": sorted(set(dims.values()))},
    ))

    bad = [w for w in samples + axes + [(2, 3)] if not verify_slr_factorization(w)]
    checks.append(Check("S_L L(0) S_R factorization", not bad, ", ".join(map(_fmt, bad))))

    f20 = truncation_vector((2, 0), (1, 0)).value
    want = tuple(Fraction(s, 2) for s in (1, -1, 1, 1, -1, -1))
    checks.append(Check("f^(2,0) at omega=(1,0)", f20 == want, f"got {_fmt(f20)}"))

    bad = []
    for w in samples + axes:
        for m in SECOND_ORDER:
            if sum(truncation_vector(m, w).value) != 0:
                bad.append(f"m={m} omega={_fmt(w)}")
    checks.append(Check("zero mean truncation error", not bad, "; ".join(bad)))

    bad = []
    for w in samples[:4] + axes:
        for m in SECOND_ORDER:
            ref = truncation_vector(m, w).value
            for blk in ((1, 0), (0, 1), (1, 1)):
                if truncation_vector(m, w, blk).value != ref:
                    bad.append(f"m={m} omega={_fmt(w)} block={blk}")
    checks.append(Check("block independence of f^m", not bad, "; ".join(bad)))

    angles = {"0": 0.0, "pi/8": math.pi / 8, "pi/4": math.pi / 4, "pi/3": math.pi / 3, "pi/2": math.pi / 2}
    expected = {"0": 1, "pi/8": 2, "pi/4": 2, "pi/3": 2, "pi/2": 1}
    orders = {}
    for k, phi in angles.items():
        w = Velocity.from_angle(phi)
        orders[k] = order_criterion((w.omega_x, w.omega_y))
    checks.append(Check("order criterion by direction", orders == expected, json.dumps(orders), {"orders": orders}))

    mixed = random_rational_omegas(n_random, seed + 1, positive=False) + axes
    bad = [w for w in mixed if order_criterion(w) != order_by_rank(w)]
    checks.append(Check("order criterion agrees with rank test", not bad, ", ".join(map(_fmt, bad))))

    coeffs = solve_projection_coeffs()
    want = (Fraction(-1, 6), Fraction(1, 2), Fraction(-1))
    checks.append(Check(
        "modified projection coefficients", coeffs.as_tuple() == want,
        f"b={coeffs.b}, c={coeffs.c}, d={coeffs.d}",
        {"b": str(coeffs.b), "c": str(coeffs.c), "d": str(coeffs.d)},
    ))
    checks.append(Check("2-exactness under modified projection", two_exactness_check(coeffs)))
    return checks


def render_text(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}"
        if c.detail:
            line += f"  {c.detail}"
        lines.append(line)
    return "\n".join(lines)


def render_json(checks: list[Check]) -> str:
    return json.dumps([asdict(c) for c in checks], indent=2, default=str)
