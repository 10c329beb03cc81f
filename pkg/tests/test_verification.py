import math

import numpy as np
import pytest

from riemcom import (
    CertificateFailed,
    CurvatureBounds,
    DomainError,
    GeometryError,
    ModelSpace,
    NotRealizable,
    SignedDiscreteMeasure,
    VerificationError,
    distance,
    f_kappa,
    karcher_mean,
)
from riemcom.testing import random_certified_measure
from riemcom.verification import (
    angle_comparison_check,
    boundary_outwardness_check,
    empirical_min_curvature,
    expansion_order_check,
    grid_minimize,
    hinge_comparison_check,
)

S2 = ModelSpace(1.0, 2)
E2 = ModelSpace(0.0, 2)
PI = math.pi


def test_hinge_examples():
    a_hi, a_mid, a_lo = hinge_comparison_check(0, 1, 1, PI / 4, PI / 4, PI / 2)
    assert a_hi == pytest.approx(PI / 3) and a_lo == pytest.approx(math.sqrt(2) * PI / 4)
    assert a_hi <= a_lo
    out = hinge_comparison_check(-1, 0, 1, 0.7, 0.3, 0.0)
    assert np.allclose(out, 0.4, rtol=1e-12)
    with pytest.raises(DomainError):
        hinge_comparison_check(1, 0, -1, 0.1, 0.1, 0.1)


def test_hinge_detects_violation(monkeypatch):
    import riemcom.verification as ver

    monkeypatch.setattr(ver, "cosine_rule_side", lambda k, c, d, a: 1.0 + k)
    with pytest.raises(VerificationError):
        ver.hinge_comparison_check(-1, 0, 1, 0.5, 0.5, 1.0)


def test_angle_examples():
    lo, mid, hi = angle_comparison_check(-1, 0, 1, (1, 1, 1))
    assert np.allclose(mid, PI / 3)
    assert np.allclose(hi, math.acos(math.cos(1) / (1 + math.cos(1))))
    assert np.allclose(lo, math.acos(math.cosh(1) / (1 + math.cosh(1))))
    assert np.allclose(hi, 1.2123958, atol=1e-7) and np.allclose(lo, 0.9187979, atol=1e-7)
    _, mid, _ = angle_comparison_check(0, 0, 0, (2, 1, 1))
    assert mid[0] == pytest.approx(PI)
    with pytest.raises(NotRealizable):
        angle_comparison_check(0, 0, 0, (3, 1, 1))
    with pytest.raises(NotRealizable):
        angle_comparison_check(0, 0, 1, (2.5, 2.5, 2.5))


def test_expansion_examples():
    fit = expansion_order_check(0, 0.5, 1.0)
    assert fit.coefficient == 0 and all(r == 0 for r in fit.ratios)
    fit = expansion_order_check(1, 0.5, 0.0)
    assert fit.coefficient == pytest.approx(0, abs=1e-12)
    fit = expansion_order_check(1, 0.5, PI / 2, [1e-2, 1e-3, 1e-4, 1e-5])
    assert fit.coefficient == pytest.approx(0.5 / math.tan(0.5) - 1, abs=1e-10)
    assert fit.coefficient == pytest.approx(-0.0847561, abs=1e-7)
    assert fit.order >= 0.9


def test_expansion_input_checks():
    with pytest.raises(DomainError):
        expansion_order_check(1, 0.5, 1.0, [0.1])
    with pytest.raises(DomainError):
        expansion_order_check(1, 0.5, 1.0, [0.01, 0.02])
    with pytest.raises(DomainError):
        expansion_order_check(1, 1.6, 1.0)


def test_boundary_outwardness_examples():
    c = S2.point(S2.origin())
    m = SignedDiscreteMeasure(S2, [c.ambient], [1.3])
    assert boundary_outwardness_check(m, c, 0.4) == pytest.approx(0.4 * 1.3, rel=1e-12)
    rng = np.random.default_rng(0)
    m, c, rho, _ = random_certified_measure(S2, rng)
    assert boundary_outwardness_check(m, c, rho, 1000) > 0


def test_boundary_outwardness_uncertified():
    c = E2.point([0, 0])
    m = SignedDiscreteMeasure(E2, [[0.5, 0], [-0.5, 0]], [2.0, -1.5])
    with pytest.raises(CertificateFailed):
        boundary_outwardness_check(m, c, 0.6)
    assert boundary_outwardness_check(m, c, 0.6, require_certificate=False) <= 0


def test_grid_minimize_examples():
    m = SignedDiscreteMeasure(E2, [[0, 0], [2, 0]], [0.5, 0.5])
    g = grid_minimize(m, E2.point([0.2, 0.1]), 1.5, 1e-3)
    assert np.linalg.norm(g.point.ambient - [1, 0]) <= 1e-3
    assert g.local_min_count == 1
    with pytest.raises(GeometryError):
        grid_minimize(SignedDiscreteMeasure(ModelSpace(0, 4), [[0, 0, 0, 0]], [1]),
                      ModelSpace(0, 4).point([0, 0, 0, 0]), 1, 0.1)


def test_grid_minimize_agrees_with_solver(kappa):
    rng = np.random.default_rng(9)
    for n in (1, 2, 3):
        space = ModelSpace(kappa, n)
        for _ in range(5):
            m, c, rho, bounds = random_certified_measure(space, rng)
            g = grid_minimize(m, c, rho, 1e-3 * rho)
            assert g.local_min_count == 1
            assert distance(karcher_mean(m, c, rho, bounds), g.point) <= 2e-3 * rho


def test_grid_minimize_detects_two_minima():
    # two equal masses far apart on the sphere with a big ball: the energy
    # is not convex and both bumps show up as separate local minima
    P = S2.from_normal(S2.origin(), [[1.7, 0], [-1.7, 0]])
    m = SignedDiscreteMeasure(S2, P, [0.5, 0.5])
    g = grid_minimize(m, S2.point(S2.origin()), 1.5, 0.02)
    assert g.local_min_count >= 2


def test_empirical_curvature_positive_on_certified():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m, c, rho, _ = random_certified_measure(S2, rng)
        assert empirical_min_curvature(m, c, rho) > 0


def test_f_kappa_against_expansion_grid():
    for kappa in (-2.0, 1.0):
        for alpha in (0.3, 1.2, 2.8):
            fit = expansion_order_check(kappa, 0.4, alpha)
            assert fit.coefficient == pytest.approx(float(f_kappa(kappa, alpha, 0.4)) - 1, abs=1e-6)
