import math

import numpy as np
import pytest

from riemcom import (
    CertificateFailed,
    CurvatureBounds,
    DomainError,
    GeometryError,
    MaxIterations,
    ModelSpace,
    SignedDiscreteMeasure,
    SingularSystem,
    barycentric_coords_euclidean,
    build_chart,
    differential_min_singular_value,
    distance,
    distortion_bound,
    energy,
    forward_map,
    forward_map_many,
    inverse_map,
    inverse_map_many,
    karcher_mean,
    orientation,
    shared_facet_check,
    gradient,
)
from riemcom.chart import _solve, jacobians, simplex_lattice
from riemcom.testing import facet_pair, random_certified_chart, random_certified_measure
from riemcom.verification import grid_minimize

E2 = ModelSpace(0.0, 2)
S2 = ModelSpace(1.0, 2)
H2 = ModelSpace(-1.0, 2)


def test_mean_flat_examples():
    m = SignedDiscreteMeasure(E2, [[0, 0], [2, 0]], [0.5, 0.5])
    x = karcher_mean(m, E2.point([0, 0]), 2.5, CurvatureBounds(0, 0))
    assert np.allclose(x.ambient, [1, 0], atol=1e-12)
    m = SignedDiscreteMeasure(E2, [[0, 0], [1, 0], [0, 1]], [-1, 1, 1])
    x = karcher_mean(m, E2.point([0.5, 0.5]), 3.0, CurvatureBounds(0, 0), force=True)
    assert np.allclose(x.ambient, [1, 1], atol=1e-12)


def test_mean_sphere_symmetric():
    # a quarter circle: the midpoint is the mean; the ball about p0 must reach it
    m = SignedDiscreteMeasure(S2, [[1, 0, 0], [0, 1, 0]], [0.5, 0.5])
    c = S2.point(np.array([math.cos(0.3), math.sin(0.3), 0]))
    x = karcher_mean(m, c, 0.78, CurvatureBounds(1, 1), force=True)
    assert np.allclose(x.ambient, [1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-12)
    m = SignedDiscreteMeasure(S2, [[math.cos(0.5), math.sin(0.5), 0], [math.cos(0.5), -math.sin(0.5), 0]], [0.5, 0.5])
    x = karcher_mean(m, S2.point([1, 0, 0]), 0.7, CurvatureBounds(1, 1))
    assert np.allclose(x.ambient, [1, 0, 0], atol=1e-12)


def test_mean_signed_sphere_matches_grid_oracle():
    n = S2.origin()
    P = S2.from_normal(n, [[0.03, 0.01], [-0.02, 0.04], [0.01, -0.035]])
    m = SignedDiscreteMeasure(S2, P, [1.2, 0.5, -0.7])
    c, rho = S2.point(n), 0.3
    x = karcher_mean(m, c, rho, CurvatureBounds(1, 1))
    g = grid_minimize(m, c, rho, 1e-3 * rho)
    assert g.local_min_count == 1
    assert distance(x, g.point) <= 2e-3 * rho


def test_mean_refuses_uncertified():
    m = SignedDiscreteMeasure(E2, [[0, 0], [1, 0], [0, 1]], [-1, 1, 1])
    with pytest.raises(CertificateFailed) as info:
        karcher_mean(m, E2.point([0.5, 0.5]), 1.0, CurvatureBounds(0, 0))
    assert "gradient_outward" in str(info.value)
    with pytest.raises(DomainError):
        karcher_mean(m, E2.point([0, 0]), 0.5, CurvatureBounds(0, 0))


def test_solver_energy_descent_and_interior(kappa):
    space = ModelSpace(kappa, 2)
    rng = np.random.default_rng(8)
    for _ in range(50):
        m, c, rho, bounds = random_certified_measure(space, rng)
        x, info = karcher_mean(m, c, rho, bounds, return_info=True)
        # non-increasing up to rounding of the energy itself
        assert np.all(np.diff(info.energies) <= 1e-14 * np.abs(info.energies[0]))
        assert info.grad_norm <= 1e-10 * rho * (m.mu_plus + m.mu_minus)
        assert gradient(m, x).norm <= 1e-10 * rho * (m.mu_plus + m.mu_minus) * (1 + 1e-6)
        assert distance(c, x) < rho
        assert info.energies[-1] == pytest.approx(energy(m, x))


def test_solver_iteration_cap():
    m = SignedDiscreteMeasure(S2, S2.from_normal(S2.origin(), [[0.1, 0], [0, 0.1]]), [0.5, 0.5])
    with pytest.raises(MaxIterations):
        _solve(S2, m.coords, m.weights, S2.origin(), 0.5, 0.0, max_iter=3)


def test_solver_batches_match_single():
    rng = np.random.default_rng(3)
    m, c, rho, _ = random_certified_measure(S2, rng)
    W = np.stack([m.weights, m.weights[::-1] * 0 + m.weights, np.abs(m.weights)])
    X, _, _, _ = _solve(S2, m.coords, W, c.ambient, rho, 1e-14)
    for w, x in zip(W, X):
        y, _, _, _ = _solve(S2, m.coords, w, c.ambient, rho, 1e-14)
        assert np.allclose(x, y[0], atol=1e-13)


@pytest.fixture
def small_triangle():
    def make(space, L0=0.002, s=1.0):
        P = space.from_normal(space.origin(), np.array([[0, 0], [L0, 0], [L0 / 2, L0 * 0.85]]))
        return build_chart(space, P, s=s)
    return make


def test_forward_reproduces_vertices(plane, small_triangle):
    ch = small_triangle(plane)
    X = forward_map_many(ch, ch.reference.vertices)
    assert np.all(plane.dist(X, ch.sigma) <= 1e-14)
    assert np.allclose(forward_map(ch, ch.reference.vertices[2]).ambient, ch.sigma[2], atol=1e-15)


def test_flat_forward_is_affine():
    rng = np.random.default_rng(0)
    P = np.array([[0.3, -0.2], [1.4, 0.1], [0.6, 1.2]])
    ch = build_chart(E2, P, s=1.5)
    U = ch.anchor_reference + rng.uniform(-1, 1, (300, 2)) * ch.L
    U = U[np.linalg.norm(U - ch.anchor_reference, axis=1) < ch.domain_radius]
    lam = barycentric_coords_euclidean(ch.reference, U)
    assert np.allclose(forward_map_many(ch, U), lam @ P, atol=1e-10)
    assert np.allclose(inverse_map_many(ch, lam @ P), lam, atol=1e-10)
    assert differential_min_singular_value(ch, U[0]) == pytest.approx(1.0, abs=1e-8)


def test_forward_domain(small_triangle):
    ch = small_triangle(S2)
    with pytest.raises(DomainError):
        forward_map(ch, ch.anchor_reference + [1.01 * ch.domain_radius, 0])
    with pytest.raises(GeometryError):
        forward_map(ch, [0.0, 0.0, 0.0])


def test_chart_construction_errors():
    P = S2.from_normal(S2.origin(), [[0, 0], [0.05, 0], [0.025, 0.04]])
    with pytest.raises(CertificateFailed):
        build_chart(S2, P)
    ch = build_chart(S2, P, force=True)
    assert ch.forced and not ch.certificate.satisfied
    with pytest.raises(GeometryError):
        build_chart(S2, P[:2])
    Q = S2.from_normal(S2.origin(), [[0, 0], [0.002, 0], [0.001, 0.0017]])
    with pytest.raises(GeometryError):
        build_chart(S2, Q, L=0.001)
    with pytest.raises(DomainError):
        build_chart(S2, Q, rho=1.0)
    ch = build_chart(S2, Q, L=0.0025)
    assert ch.certificate.inputs["L_equals_max_edge"] is False


def test_chart_invariants(plane, small_triangle):
    ch = small_triangle(plane)
    D = plane.dist(ch.sigma[:, None], ch.sigma[None])
    assert np.allclose(ch.reference.edge_lengths, D, rtol=1e-10)
    lo, hi = ch.certificate.interval
    assert lo < ch.rho < hi
    assert ch.center.ambient is not None and np.all(ch.center.ambient == ch.sigma[0])


def test_inverse_round_trip(plane):
    rng = np.random.default_rng(11)
    ch = random_certified_chart(plane, rng, s=1.5)
    U = ch.anchor_reference + rng.normal(size=(3000, 2)) * ch.L
    U = U[np.linalg.norm(U - ch.anchor_reference, axis=1) < ch.domain_radius][:1000]
    X = forward_map_many(ch, U)
    lam = inverse_map_many(ch, X)
    assert np.allclose(lam.sum(axis=1), 1)
    assert np.allclose(lam, barycentric_coords_euclidean(ch.reference, U), atol=1e-8)


def test_inverse_examples(plane, small_triangle):
    ch = small_triangle(plane)
    for i, p in enumerate(ch.sigma_points):
        assert np.allclose(inverse_map(ch, p), np.eye(3)[i], atol=1e-10)


def test_inverse_errors(small_triangle):
    ch = small_triangle(S2)
    far = S2.point(S2.from_normal(S2.origin(), [0.3, 0.2]))
    with pytest.raises(DomainError):
        inverse_map(ch, far)
    # a point on the line through two vertices makes the system singular in 1d logs
    mid = S2.point(S2.from_normal(ch.sigma[0], [0.0, 0.0]))
    assert np.allclose(inverse_map(ch, mid), [1, 0, 0], atol=1e-10)
    with pytest.raises(SingularSystem):
        inverse_map_many(ch, [[np.nan, 0.0, 1.0]], check=False)


@pytest.mark.parametrize("kappa", [1.0, -1.0])
def test_differential_and_distortion(kappa):
    space = ModelSpace(kappa, 2)
    rng = np.random.default_rng(21)
    ch = random_certified_chart(space, rng)
    bound = distortion_bound(ch.lambda_abs, ch.rho, ch.t)
    U = ch.anchor_reference + rng.normal(size=(200, 2)) * ch.L * 0.4
    U = U[np.linalg.norm(U - ch.anchor_reference, axis=1) < ch.domain_radius][:100]
    sv = np.linalg.svd(jacobians(ch, U), compute_uv=False)
    assert np.all(sv.min(axis=1) >= 1 - bound - 0.05)
    X = forward_map_many(ch, U)
    du = np.linalg.norm(U[:50] - U[50:100], axis=1)
    dx = space.dist(X[:50], X[50:100])
    assert np.all(np.abs(dx - du) <= bound * du)


def test_orientation(plane, small_triangle):
    ch = small_triangle(plane)
    assert orientation(ch) == 1
    swapped = build_chart(plane, ch.sigma[[1, 0, 2]], anchor=1)
    assert orientation(swapped) == -1


def test_orientation_flat_reference():
    V = np.array([[0, 0], [1, 0], [0.5, 0.9]])
    assert orientation(build_chart(E2, V)) == 1
    assert orientation(build_chart(E2, V[[0, 2, 1]])) == -1


def test_simplex_lattice():
    lat = simplex_lattice(2, 4)
    assert len(lat) == 15
    assert np.allclose(lat.sum(axis=1), 1) and np.all(lat >= 0)


def test_shared_facet_flat_pass():
    P = np.array([[0, 0], [1, 0], [0.5, 0.8]])
    Q = np.array([[1, 0], [0, 0], [0.4, -0.9]])
    a = build_chart(E2, P, s=1.5, L=1.2)
    b = build_chart(E2, Q, s=1.5, L=1.2, anchor=1)
    res = shared_facet_check(a, b, 200)
    assert res.passed and res.worst_violation <= 1e-8


@pytest.mark.parametrize("kappa", [1.0, -1.0])
def test_shared_facet_curved_pass(kappa):
    a, b = facet_pair(ModelSpace(kappa, 2), np.random.default_rng(5))
    assert orientation(a) == orientation(b)
    res = shared_facet_check(a, b, 500)
    assert res.status == "pass" and res.worst_violation <= 1e-8


def test_shared_facet_not_applicable():
    rng = np.random.default_rng(6)
    a, b = facet_pair(S2, rng, compatible=False)
    res = shared_facet_check(a, b, 100)
    assert res.status == "not_applicable" and "orientation" in res.reason
    a, b = facet_pair(S2, rng)
    assert shared_facet_check(a, build_chart(S2, b.sigma, anchor=1), 10).status == "not_applicable"
    P = np.array([[0, 0], [1, 0], [0.5, 0.8]])
    Q = np.array([[1, 0], [0, 0], [0.4, -0.9]])
    a = build_chart(E2, P, s=1.0, L=1.2)
    b = build_chart(E2, Q, s=1.0, L=1.2, anchor=1)
    assert "3/2" in shared_facet_check(a, b, 10).reason
