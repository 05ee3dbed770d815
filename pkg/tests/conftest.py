import numpy as np
import pytest

from ledr import ConnectionField, constant_curvature_world, flat_world, sphere_world


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


@pytest.fixture
def sphere1():
    return sphere_world(1.0)


@pytest.fixture
def sphere2():
    return sphere_world(2.0)


@pytest.fixture
def flat2():
    return flat_world(2)


@pytest.fixture
def hyperbolic1():
    return constant_curvature_world(-1.0)


def chart_gap(world, a, b):
    """Max-norm chart distance, unwrapping the periodic coordinate of
    closed charts (sphere longitude, positive-curvature arc length)."""
    d = np.abs(np.asarray(a, float) - np.asarray(b, float))
    axis = period = None
    if world.kind == "sphere":
        axis, period = 1, 2 * np.pi
    elif world.kind == "constant_k" and world.params.get("k", 0.0) > 0:
        axis, period = 0, 2 * np.pi / np.sqrt(world.params["k"])
    if period is not None:
        wrapped = d[axis] % period
        d[axis] = min(wrapped, period - wrapped)
    return float(d.max())


def random_polynomial_connection(rng, dim=2, scale=0.3):
    """User-style field: quadratic polynomial Christoffels, FD partials."""
    c0 = rng.normal(scale=scale, size=(dim, dim, dim))
    c1 = rng.normal(scale=scale, size=(dim, dim, dim, dim))
    c2 = rng.normal(scale=scale, size=(dim, dim, dim, dim, dim))
    # torsion-free: symmetrize the lower pair
    c0 = 0.5 * (c0 + c0.transpose(0, 2, 1))
    c1 = 0.5 * (c1 + c1.transpose(0, 2, 1, 3))
    c2 = 0.5 * (c2 + c2.transpose(0, 2, 1, 3, 4))

    def gamma(x):
        return (
            c0
            + np.einsum("ijkl,l->ijk", c1, x)
            + 0.5 * np.einsum("ijklm,l,m->ijk", c2, x, x)
        )

    return ConnectionField(dim, gamma, tag="random-polynomial")


@pytest.fixture
def poly_conn(rng):
    return random_polynomial_connection(rng)
