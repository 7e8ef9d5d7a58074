"""Eigenvalue scan of the symbol L(phi) over directions and frequencies.

For ``omega = (cos xi, sin xi)`` and every ``phi`` on a uniform grid we record
the smallest real part of the eigenvalues and the 2-norm condition number of
the (unit-column) eigenvector matrix. Nonnegative real parts plus a bounded
condition number bound ``sup_nu ||exp(-nu L(phi))||``.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .mesh import Velocity
from .scheme import Symbol, hardcoded_operator, symbol

RESIDUAL_TOL = 1e-10
DEFAULT_NUS = tuple(2.0**k for k in range(-10, 11))


class EigenSolverError(RuntimeError):
    def __init__(self, message: str, xi=None, phi=None):
        super().__init__(f"{message} (xi={xi}, phi={phi})")
        self.xi = xi
        self.phi = phi


def _normalize_columns(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-2, keepdims=True)


def _check_residual(a: np.ndarray, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Samples whose Frobenius eigen-residual exceeds the tolerance."""
    r = a @ v - v * lam[..., None, :]
    res = np.linalg.norm(r, axis=(-2, -1))
    scale = np.linalg.norm(a, axis=(-2, -1))
    return res > RESIDUAL_TOL * np.maximum(scale, 1.0)


def eigen_decompose(sym: Symbol, xi=None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit-column eigenvectors of ``sym.matrix``."""
    a = np.asarray(sym.matrix, dtype=complex)
    try:
        lam, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as err:
        raise EigenSolverError(f"eigensolver did not converge: {err}", xi, sym.phi) from err
    v = _normalize_columns(v)
    if _check_residual(a, lam, v):
        raise EigenSolverError("eigen-residual above tolerance", xi, sym.phi)
    return lam, v


def condition_number(v: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(v, compute_uv=False)
    return s[..., 0] / s[..., -1]


def grid_count(span: float, step: float) -> int:
    n = round(span / step)
    if n < 1 or abs(n * step - span) > 1e-9 * span:
        raise ValueError(f"step {step!r} does not divide {span!r}")
    return n


def _symbol_batch(xi: float, phis: np.ndarray) -> np.ndarray:
    op = hardcoded_operator(Velocity.from_angle(xi), exact=False)
    lx, ly = op.lx, op.ly
    wx, wy = op.omega.omega_x, op.omega.omega_y
    ex_ = np.exp(-1j * phis)[:, None, None, None]
    ey_ = np.exp(-1j * phis)[None, :, None, None]
    return wx * (lx[(0, 0)] + lx[(-1, 0)] * ex_) + wy * (ly[(0, 0)] + ly[(0, -1)] * ey_)


def _scan_direction(args) -> tuple[np.ndarray, np.ndarray]:
    xi, phis = args
    a = _symbol_batch(xi, phis)
    try:
        lam, v = np.linalg.eig(a)
    except np.linalg.LinAlgError:
        for i, j in np.ndindex(a.shape[:2]):
            eigen_decompose(Symbol((phis[i], phis[j]), a[i, j]), xi)
        raise
    v = _normalize_columns(v)
    bad = _check_residual(a, lam, v)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise EigenSolverError("eigen-residual above tolerance", xi, (phis[i], phis[j]))
    return lam.real.min(axis=-1), condition_number(v)


@dataclass
class StabilityReport:
    xi_step: float
    phi_step: float
    xi: np.ndarray
    phi_x: np.ndarray
    phi_y: np.ndarray
    min_re: np.ndarray
    cond: np.ndarray

    @property
    def sample_count(self) -> int:
        return int(self.min_re.size)

    @property
    def global_min_re(self) -> float:
        return float(self.min_re.min())

    @property
    def global_max_cond(self) -> float:
        return float(self.cond.max())

    def worst_sample(self) -> dict:
        k = int(np.argmax(self.cond))
        return {
            "xi": float(self.xi[k]),
            "phi_x": float(self.phi_x[k]),
            "phi_y": float(self.phi_y[k]),
            "cond": float(self.cond[k]),
        }

    def summary(self) -> dict:
        worst = self.worst_sample()
        omega = Velocity.from_angle(worst["xi"])
        worst["semigroup_norm"] = semigroup_bound_probe(omega, (worst["phi_x"], worst["phi_y"]))
        return {
            "xi_step": self.xi_step,
            "phi_step": self.phi_step,
            "n_xi": int(np.unique(self.xi).size),
            "n_phi": int(np.unique(self.phi_x).size),
            "sample_count": self.sample_count,
            "global_min_re_lambda": self.global_min_re,
            "global_max_cond": self.global_max_cond,
            "worst_sample": worst,
        }

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("xi,phi_x,phi_y,min_re_lambda,cond\n")
            for row in zip(self.xi, self.phi_x, self.phi_y, self.min_re, self.cond):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def stability_scan(xi_step: float = math.pi / 100, phi_step: float = math.pi / 100, workers: int = 1) -> StabilityReport:
    """Scan ``xi`` in [0, pi/2] (inclusive) and ``phi`` in [0, 2 pi)^2."""
    n_xi = grid_count(math.pi / 2, xi_step)
    n_phi = grid_count(2 * math.pi, phi_step)
    xis = np.arange(n_xi + 1) * xi_step
    phis = np.arange(n_phi) * phi_step
    jobs = [(xi, phis) for xi in xis]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_direction, jobs))
    else:
        results = [_scan_direction(j) for j in jobs]
    px, py = np.meshgrid(phis, phis, indexing="ij")
    return StabilityReport(
        xi_step,
        phi_step,
        xi=np.repeat(xis, n_phi * n_phi),
        phi_x=np.tile(px.ravel(), len(xis)),
        phi_y=np.tile(py.ravel(), len(xis)),
        min_re=np.concatenate([r[0].ravel() for r in results]),
        cond=np.concatenate([r[1].ravel() for r in results]),
    )


def semigroup_bound_probe(omega, phi, nu_list=DEFAULT_NUS) -> float:
    """``max_nu ||exp(-nu L(phi))||_2`` over the given ``nu`` values."""
    if any(nu <= 0 for nu in nu_list):
        raise ValueError("nu values must be positive")
    a = symbol(hardcoded_operator(omega, exact=False), phi).matrix
    return max(float(np.linalg.norm(expm(-nu * a), 2)) for nu in nu_list)


def diagonalization_bound(lam: np.ndarray, v: np.ndarray, nu: float) -> float:
    """``cond(V) * max_j exp(-nu Re lambda_j)``, an upper bound for ``||exp(-nu L)||``."""
    return float(condition_number(v) * np.exp(-nu * lam.real).max())
