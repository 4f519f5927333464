import numpy as np
import pytest

from leviflat import Chart, GraphModel, ManifoldSpec, PolyExpr, fixture


@pytest.fixture(scope="session")
def horned():
    return fixture("horned_sphere")


@pytest.fixture(scope="session")
def quadric():
    return fixture("quadric_elliptic")


@pytest.fixture(scope="session")
def saddle():
    return fixture("quadric_saddle")


@pytest.fixture(scope="session")
def lower_chart(horned):
    return horned.charts[0]


@pytest.fixture(scope="session")
def upper_chart(horned):
    return horned.charts[1]


def _double_well_terms(i, j, scale=1.0):
    """x_i^4 + x_j^4 + 4 x_i^2 - 2 x_j^2 on 4 variables, scaled."""

    def e(k, p):
        v = [0, 0, 0, 0]
        v[k] = p
        return tuple(v)

    return [
        (scale, e(i, 4)),
        (scale, e(j, 4)),
        (4 * scale, e(i, 2)),
        (-2 * scale, e(j, 2)),
    ]


@pytest.fixture(scope="session")
def two_saddle():
    """Sum of two decoupled double wells: 1-hyperbolic points at two values.

    Critical points: four minima at value -1.55, two 1-hyperbolic points at
    -0.55 and two at -1.0, one 2-hyperbolic point at 0.
    """
    alpha = 0.55
    terms = _double_well_terms(0, 1) + _double_well_terms(2, 3, scale=alpha)
    phi = PolyExpr.from_terms(4, terms)
    return ManifoldSpec(
        n=3,
        charts=(Chart(phi, ((-1.7, 1.7),) * 4, (-1.55, 0.5), name="wells"),),
        graph_model=GraphModel.REAL_GRAPH,
        name="two_saddle",
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def random_unitary(m, rng):
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
