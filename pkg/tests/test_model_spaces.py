import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemcom import (
    AntipodalPoints,
    DomainError,
    GeometryError,
    ModelPoint,
    ModelSpace,
    SpaceMismatch,
    TangentVector,
    angle,
    cosine_rule_side,
    distance,
    exp,
    log,
    tangent,
)

S2 = ModelSpace(1.0, 2)
E2 = ModelSpace(0.0, 2)
H2 = ModelSpace(-1.0, 2)


def test_space_validation():
    with pytest.raises(GeometryError):
        ModelSpace(1.0, 0)
    with pytest.raises(GeometryError):
        ModelSpace(math.inf, 2)
    assert ModelSpace(4.0, 3).injectivity_radius == pytest.approx(math.pi / 2)
    assert E2.injectivity_radius == math.inf and H2.injectivity_radius == math.inf
    assert ModelSpace(4.0, 3).ambient_dim == 4 and E2.ambient_dim == 2


def test_point_invariants():
    ModelPoint(ModelSpace(4.0, 2), [0, 0, 0.5])
    with pytest.raises(GeometryError):
        ModelPoint(S2, [0, 0, 1.001])
    with pytest.raises(GeometryError):
        ModelPoint(H2, [-1, 0, 0])
    with pytest.raises(GeometryError):
        ModelPoint(E2, [0, 0, 0])
    x = ModelPoint(S2, [0, 0, 1])
    with pytest.raises(GeometryError):
        TangentVector(x, [0, 0, 1])
    with pytest.raises(ValueError):
        x.ambient[0] = 1.0


def test_distance_examples():
    assert distance(E2.point([0, 0]), E2.point([3, 4])) == 5.0
    assert distance(S2.point([0, 0, 1]), S2.point([1, 0, 0])) == pytest.approx(math.pi / 2, abs=1e-15)
    y = H2.point([math.cosh(1), math.sinh(1), 0])
    assert distance(H2.point([1, 0, 0]), y) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(SpaceMismatch):
        distance(S2.point([0, 0, 1]), ModelSpace(1.0, 3).point([0, 0, 0, 1]))


def test_exp_examples():
    x = E2.point([1, 1])
    assert np.allclose(exp(x, TangentVector(x, [2, 0])).ambient, [3, 1])
    n = S2.point([0, 0, 1])
    assert np.allclose(exp(n, TangentVector(n, [math.pi / 2, 0, 0])).ambient, [1, 0, 0], atol=1e-15)
    o = H2.point([1, 0, 0])
    assert np.allclose(exp(o, TangentVector(o, [0, 2, 0])).ambient, [math.cosh(2), math.sinh(2), 0])
    with pytest.raises(DomainError):
        exp(n, TangentVector(n, [math.pi, 0, 0]))


def test_log_examples():
    for space in (S2, E2, H2):
        x = space.point(space.origin())
        assert np.all(log(x, x).ambient == 0)
    assert np.allclose(log(E2.point([1, 2]), E2.point([4, 0])).ambient, [3, -2])
    v = log(S2.point([0, 0, 1]), S2.point([1, 0, 0]))
    assert np.allclose(v.ambient, [math.pi / 2, 0, 0], atol=1e-15)
    with pytest.raises(AntipodalPoints):
        log(S2.point([0, 0, 1]), S2.point([0, 0, -1]))


def test_angle_examples():
    x = E2.point([0, 0])
    assert angle(x, E2.point([1, 0]), E2.point([2, 0])) == 0.0
    assert angle(x, E2.point([1, 0]), E2.point([1, 1])) == pytest.approx(math.pi / 4)
    n = S2.point([0, 0, 1])
    assert angle(n, S2.point([1, 0, 0]), S2.point([0, 1, 0])) == pytest.approx(math.pi / 2)
    with pytest.raises(DomainError):
        angle(x, x, E2.point([1, 0]))


def test_cosine_rule_side_examples():
    assert cosine_rule_side(0, 3, 4, math.pi / 2) == pytest.approx(5.0, rel=1e-15)
    assert cosine_rule_side(1, math.pi / 4, math.pi / 4, math.pi / 2) == pytest.approx(math.pi / 3, rel=1e-14)
    assert cosine_rule_side(-1, 1, 0.4, 0) == pytest.approx(0.6, rel=1e-14)
    with pytest.raises(DomainError):
        cosine_rule_side(1, 1.6, 0.1, 0.3)


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, math.pi))
def test_cosine_rule_continuity_at_zero(c, d, a):
    flat = cosine_rule_side(0, c, d, a)
    for k in (1e-8, -1e-8):
        assert cosine_rule_side(k, c, d, a) == pytest.approx(flat, rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("kappa", [4.0, 1.0, 0.0, -1.0, -3.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_exp_log_round_trip(kappa, n):
    space = ModelSpace(kappa, n)
    rng = np.random.default_rng(7)
    cap = 0.9 * min(1.0, space.injectivity_radius)
    base = rng.normal(size=(10_000, n))
    base *= (cap * rng.uniform(size=10_000) / np.linalg.norm(base, axis=1))[:, None]
    X = space.from_normal(space.origin(), base)
    xi = rng.normal(size=(10_000, n))
    xi *= (cap * rng.uniform(size=10_000) / np.linalg.norm(xi, axis=1))[:, None]
    V = np.einsum("bi,bid->bd", xi, space.frame(X))
    Y = space.exp_map(X, V)
    W = space.log_map(X, Y)
    err = space.norm(W - V) if kappa >= 0 else np.linalg.norm(W - V, axis=1)
    assert np.all(err <= 1e-9 * (1 + space.norm(V)))
    if kappa != 0:
        assert np.all(space.point_residual(Y) <= 1e-10)
        assert np.all(np.abs(space.inner(X, W)) <= 1e-10 * (1 + np.linalg.norm(X, axis=1)))
    assert np.allclose(space.dist(X, Y), space.norm(V), rtol=1e-10, atol=1e-15)


@pytest.mark.parametrize("kappa", [1.0, -1.0])
def test_frame_is_orthonormal_and_tangent(kappa):
    space = ModelSpace(kappa, 3)
    rng = np.random.default_rng(3)
    xi = rng.normal(size=(500, 3))
    if kappa > 0:
        xi *= (3.0 * rng.uniform(size=500) / np.linalg.norm(xi, axis=1))[:, None]
    X = space.from_normal(space.origin(), xi)
    F = space.frame(X)
    G = space.inner(F[:, :, None, :], F[:, None, :, :])
    assert np.allclose(G, np.eye(3), atol=1e-12)
    assert np.allclose(space.inner(F, X[:, None, :]), 0, atol=1e-12)
    # covers the southern hemisphere too
    if kappa > 0:
        F = space.frame(-space.origin())
        assert np.allclose(space.inner(F[:, None], F[None]), np.eye(3), atol=1e-14)


def test_tangent_coords_round_trip():
    x = H2.point(H2.from_normal(H2.origin(), [0.3, -0.8]))
    v = tangent(x, [0.2, 0.5])
    assert np.allclose(v.coords(), [0.2, 0.5])
    assert v.norm == pytest.approx(math.hypot(0.2, 0.5))


@settings(max_examples=200)
@given(st.sampled_from([1.0, 0.0, -1.0]),
       st.lists(st.floats(-0.6, 0.6), min_size=6, max_size=6))
def test_triangle_inequality(kappa, xs):
    space = ModelSpace(kappa, 2)
    P = space.from_normal(space.origin(), np.reshape(xs, (3, 2)))
    x, y, z = P
    assert space.dist(x, z) <= space.dist(x, y) + space.dist(y, z) + 1e-10
    assert space.dist(x, y) == pytest.approx(space.dist(y, x), abs=1e-15)


def test_short_distance_accuracy():
    # the stable formulas keep relative accuracy for tiny separations
    for space in (S2, H2):
        x = space.origin()
        y = space.from_normal(x, [1e-9, 0])
        assert space.dist(x, y) == pytest.approx(1e-9, rel=1e-9)
