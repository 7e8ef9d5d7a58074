import math

import numpy as np
import pytest
from conftest import fourier_reference

from sdrt.mesh import MeshFunction, MeshGeometry, Velocity, block_l2_norm, project_lagrange
from sdrt.scheme import hardcoded_operator
from sdrt.solver import NumericalBlowUp, TimeIntegrator, integrate, rk_step, sample_times


def integrator(omega, n, kind="rk3", cfl=0.1):
    return TimeIntegrator(hardcoded_operator(omega, exact=False), MeshGeometry(n), kind, cfl)


def test_constant_is_preserved():
    it = integrator((0.6, 0.8), 8)
    u0 = MeshFunction(it.geometry, np.full((8, 8, 6), 0.75))
    u, trace = integrate(it, u0, 0.3, v_exact=lambda x, y: 0.75 + 0 * x)
    assert np.abs(u.values - 0.75).max() < 1e-14
    assert max(trace.err_max) < 1e-14


@pytest.mark.parametrize("kind", ["rk3", "rk4"])
def test_linear_data_after_one_step(kind):
    # away from the periodic seam a linear profile is translated exactly
    w = Velocity(0.6, 0.8)
    it = integrator(w, 12, kind)
    v = lambda x, y: 2 * x - y
    u = rk_step(it, project_lagrange(v, it.geometry), it.dt)
    x, y = it.geometry.node_coordinates()
    want = v(x - w.omega_x * it.dt, y - w.omega_y * it.dt)
    assert np.abs(u.values - want)[4:, 4:].max() < 1e-13


def test_total_is_conserved():
    rng = np.random.default_rng(2)
    it = integrator(Velocity.from_angle(0.5), 10)
    u0 = MeshFunction(it.geometry, rng.normal(size=(10, 10, 6)))
    _, trace = integrate(it, u0, 2.0, sample_every=0.25)
    scale = np.abs(u0.values).sum()
    assert max(abs(t - trace.total[0]) for t in trace.total) <= 1e-12 * scale


def test_norm_growth_is_bounded():
    # the semigroup bound keeps ||u(t)|| within a modest multiple of ||u0||
    rng = np.random.default_rng(4)
    for xi in (0.0, 0.3, math.pi / 4, 1.2):
        it = integrator(Velocity.from_angle(xi), 8)
        u0 = MeshFunction(it.geometry, rng.normal(size=(8, 8, 6)))
        _, trace = integrate(it, u0, 3.0, sample_every=0.5)
        assert max(trace.norm) <= 32 * block_l2_norm(u0)


@pytest.mark.parametrize("kind,order", [("rk3", 3), ("rk4", 4)])
def test_temporal_order(kind, order):
    w = Velocity.from_angle(math.pi / 8)
    ref = fourier_reference(w, 10, 0.5)
    errs = []
    for cfl in (0.2, 0.1, 0.05):
        it = integrator(w, 10, kind, cfl)
        u, _ = integrate(it, project_lagrange(lambda x, y: np.sin(2 * math.pi * (x + y)), it.geometry), 0.5)
        errs.append(np.abs(u.values - ref).max())
    observed = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(abs(o - order) / order < 0.01 for o in observed), observed


def test_solution_matches_fourier_reference(initial_sine):
    w = Velocity.from_angle(0.3)
    g, u0 = initial_sine(16)
    it = TimeIntegrator(hardcoded_operator(w, exact=False), g, "rk4", 0.05)
    u, _ = integrate(it, u0, 0.4)
    assert np.abs(u.values - fourier_reference(w, 16, 0.4)).max() < 1e-6


def test_sample_times_land_on_t_max():
    assert sample_times(1.0, None) == [1.0]
    assert sample_times(1.0, 0.3) == pytest.approx([0.3, 0.6, 0.9, 1.0])
    assert sample_times(1.5, 0.5) == pytest.approx([0.5, 1.0, 1.5])


def test_trace_records_every_sample(sine, initial_sine):
    g, u0 = initial_sine(8)
    it = TimeIntegrator(hardcoded_operator((1.0, 0.0), exact=False), g)
    _, trace = integrate(it, u0, 1.0, sample_every=0.25, v_exact=sine)
    assert trace.times == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
    assert trace.to_csv().splitlines()[0] == "t,err_max,err_l2"
    assert len(trace.to_csv().splitlines()) == 6


def test_blow_up_is_reported():
    it = integrator((1.0, 0.0), 8, cfl=5.0)
    u0 = MeshFunction(it.geometry, np.random.default_rng(0).normal(size=(8, 8, 6)))
    with pytest.raises(NumericalBlowUp):
        integrate(it, u0, 400.0, sample_every=100.0)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        integrator((1.0, 0.0), 4, kind="euler")
    it = integrator((1.0, 0.0), 4)
    with pytest.raises(ValueError):
        integrate(it, MeshFunction.zeros(it.geometry), 0.0)
