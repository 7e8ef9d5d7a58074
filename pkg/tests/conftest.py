import math

import numpy as np
import pytest
from scipy.linalg import expm

from sdrt.mesh import MeshGeometry, project_lagrange
from sdrt.scheme import hardcoded_operator, symbol


def sine_profile(x, y):
    return np.sin(2 * math.pi * (x + y))


def fourier_reference(omega, n_blocks, t):
    """Semi-discrete solution for ``sin(2 pi (x + y))`` via the symbol of one Fourier mode."""
    g = MeshGeometry(n_blocks)
    op = hardcoded_operator(omega, exact=False)
    phi = (2 * math.pi * g.h, 2 * math.pi * g.h)
    z0 = np.exp(2j * math.pi * g.h * g.offsets.sum(axis=1))
    z = expm(-(t / g.h) * symbol(op, phi).matrix) @ z0
    eta = np.arange(n_blocks)
    wave = np.exp(1j * (phi[0] * eta[:, None] + phi[1] * eta[None, :]))
    return np.imag(wave[:, :, None] * z[None, None, :])


@pytest.fixture
def sine():
    return sine_profile


@pytest.fixture
def initial_sine():
    def make(n_blocks):
        g = MeshGeometry(n_blocks)
        return g, project_lagrange(sine_profile, g)

    return make
