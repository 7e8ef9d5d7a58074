"""Method-of-lines time integration of the semi-discrete scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import MeshFunction, MeshGeometry, ScalarField, block_l2_norm, exact_solution
from .scheme import StencilOperator, apply_residual


class NumericalBlowUp(FloatingPointError):
    pass


@dataclass(frozen=True)
class TimeIntegrator:
    operator: StencilOperator
    geometry: MeshGeometry
    kind: str = "rk3"
    cfl: float = 0.1

    def __post_init__(self):
        if self.kind not in ("rk3", "rk4"):
            raise ValueError(f"unknown integrator {self.kind!r}")
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")

    @property
    def dt(self) -> float:
        return self.cfl * self.geometry.h / self.operator.omega.norm()

    def rhs(self, u: MeshFunction) -> MeshFunction:
        return apply_residual(self.operator, u)


def rk_step(integrator: TimeIntegrator, u: MeshFunction, dt: float) -> MeshFunction:
    """One SSP-RK3 (Shu-Osher) or classical RK4 step."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return u.copy()
    f = integrator.rhs
    if integrator.kind == "rk3":
        u1 = u + dt * f(u)
        u2 = 0.75 * u + 0.25 * (u1 + dt * f(u1))
        return (1.0 / 3.0) * u + (2.0 / 3.0) * (u2 + dt * f(u2))
    k1 = f(u)
    k2 = f(u + (0.5 * dt) * k1)
    k3 = f(u + (0.5 * dt) * k2)
    k4 = f(u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class ErrorTrace:
    times: list = field(default_factory=list)
    err_max: list = field(default_factory=list)
    err_l2: list = field(default_factory=list)
    total: list = field(default_factory=list)
    norm: list = field(default_factory=list)

    def record(self, t: float, u: MeshFunction, v_exact: ScalarField | None, omega) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("sample times must increase")
        self.times.append(t)
        if v_exact is not None:
            e = u.values - exact_solution(u, v_exact, t, omega)
            self.err_max.append(float(np.abs(e).max()))
            self.err_l2.append(block_l2_norm(MeshFunction(u.geometry, e)))
        self.total.append(float(u.total()))
        self.norm.append(block_l2_norm(u))

    def to_csv(self) -> str:
        lines = ["t,err_max,err_l2"]
        for t, a, b in zip(self.times, self.err_max, self.err_l2):
            lines.append(f"{t!r},{a!r},{b!r}")
        return "\n".join(lines) + "\n"


def sample_times(t_max: float, sample_every: float | None) -> list[float]:
    if sample_every is None or sample_every >= t_max:
        return [t_max]
    n = int(math.floor(t_max / sample_every + 1e-9))
    times = [k * sample_every for k in range(1, n + 1)]
    if t_max - times[-1] > 1e-12 * t_max:
        times.append(t_max)
    else:
        times[-1] = t_max
    return times


def integrate(
    integrator: TimeIntegrator,
    u0: MeshFunction,
    t_max: float,
    sample_every: float | None = None,
    v_exact: ScalarField | None = None,
) -> tuple[MeshFunction, ErrorTrace]:
    """Advance ``u0`` to ``t_max``; record errors at t = 0 and every ``sample_every``.

    Steps have the nominal size ``integrator.dt``; the step that reaches a
    sample time is shortened to land on it exactly.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    omega = integrator.operator.omega
    dt = integrator.dt
    u = u0.copy()
    trace = ErrorTrace()
    trace.record(0.0, u, v_exact, omega)
    t = 0.0
    for target in sample_times(t_max, sample_every):
        while target - t > 1e-12 * max(1.0, target):
            step = min(dt, target - t)
            if target - (t + step) < 1e-9 * dt:
                step = target - t
            # overflow surfaces as non-finite values, reported below
            with np.errstate(over="ignore", invalid="ignore"):
                u = rk_step(integrator, u, step)
            t += step
        t = target
        if not np.all(np.isfinite(u.values)):
            raise NumericalBlowUp(f"blow-up at t = {t}")
        trace.record(t, u, v_exact, omega)
    return u, trace
