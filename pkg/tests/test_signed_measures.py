import math

import numpy as np
import pytest

from riemcom import (
    CurvatureBounds,
    GeometryError,
    ModelSpace,
    SignedDiscreteMeasure,
    SpaceMismatch,
    jordan_masses,
    karcher_mean,
    normalize,
    support_radius,
)
from riemcom.testing import random_certified_measure

E2 = ModelSpace(0.0, 2)
S2 = ModelSpace(1.0, 2)


def measure(weights, space=E2):
    rng = np.random.default_rng(0)
    P = space.from_normal(space.origin(), rng.normal(size=(len(weights), 2)) * 0.1)
    return SignedDiscreteMeasure(space, P, weights)


@pytest.mark.parametrize("w, expected", [
    ((0.5, 0.5), (1.0, 0.0)),
    ((1.5, -0.5), (1.5, 0.5)),
    ((2, -1, 0), (2, 1)),
])
def test_jordan_masses(w, expected):
    m = measure(w)
    assert jordan_masses(m) == expected
    assert m.mu_plus - m.mu_minus == m.total_mass


def test_support_radius():
    c = E2.point([0, 0])
    assert support_radius(SignedDiscreteMeasure(E2, [[0, 0]], [1]), c) == 0
    assert support_radius(SignedDiscreteMeasure(E2, [[1, 0], [0, 2]], [1, 1]), c) == 2
    p = [math.sin(0.3), 0, math.cos(0.3)]
    assert support_radius(SignedDiscreteMeasure(S2, [p], [1]), S2.point([0, 0, 1])) == pytest.approx(0.3)
    with pytest.raises(SpaceMismatch):
        support_radius(measure([1, 1]), S2.point([0, 0, 1]))


@pytest.mark.parametrize("w, expected", [((2, 2), (0.5, 0.5)), ((3, -1), (1.5, -0.5))])
def test_normalize(w, expected):
    assert np.allclose(normalize(measure(w)).weights, expected)


def test_normalize_zero_mass():
    with pytest.raises(GeometryError):
        normalize(measure([1e-13, -1e-13]))


def test_validation():
    with pytest.raises(GeometryError):
        SignedDiscreteMeasure(E2, [[0, 0]], [1, 2])
    with pytest.raises(GeometryError):
        SignedDiscreteMeasure(E2, np.zeros((0, 2)), [])
    with pytest.raises(GeometryError):
        SignedDiscreteMeasure(S2, [[0, 0, 2]], [1])
    with pytest.raises(GeometryError):
        SignedDiscreteMeasure(E2, [[0, 0]], [math.nan])
    m = SignedDiscreteMeasure.from_points(S2.points([[0, 0, 1], [1, 0, 0]]), [1, 1])
    assert len(m) == 2 and m.points[1].ambient[0] == 1


@pytest.mark.parametrize("kappa", [1.0, -1.0, 0.0])
def test_minimiser_invariant_under_scaling(kappa):
    rng = np.random.default_rng(1)
    space = ModelSpace(kappa, 2)
    for _ in range(10):
        m, c, rho, bounds = random_certified_measure(space, rng)
        x = karcher_mean(m, c, rho, bounds)
        y = karcher_mean(m.with_weights(7.3 * m.weights), c, rho, bounds)
        assert space.dist(x.ambient, y.ambient) <= 1e-8
