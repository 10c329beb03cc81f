"""The weighted squared-distance energy and its derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError, SpaceMismatch
from .model_spaces import ModelPoint, ModelSpace, TangentVector
from .signed_measures import SignedDiscreteMeasure

TAYLOR_CUTOFF = 1e-6


@dataclass(frozen=True)
class CurvatureBounds:
    """Lower and upper bounds on sectional curvature."""

    lambda_lo: float
    lambda_hi: float

    def __post_init__(self):
        lo, hi = float(self.lambda_lo), float(self.lambda_hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise GeometryError("curvature bounds must be finite")
        if lo > hi:
            raise GeometryError(f"lambda_lo={lo} exceeds lambda_hi={hi}")
        object.__setattr__(self, "lambda_lo", lo)
        object.__setattr__(self, "lambda_hi", hi)

    @classmethod
    def exact(cls, space: ModelSpace) -> "CurvatureBounds":
        return cls(space.curvature, space.curvature)

    @classmethod
    def symmetric(cls, lambda_abs: float) -> "CurvatureBounds":
        return cls(-abs(lambda_abs), abs(lambda_abs))

    @property
    def lambda_abs(self) -> float:
        return max(abs(self.lambda_lo), abs(self.lambda_hi))

    def contains(self, kappa: float) -> bool:
        return self.lambda_lo <= kappa <= self.lambda_hi


def theta_over_tan(theta):
    """``theta / tan(theta)`` on [0, pi/2), with the removable point at 0."""
    theta = np.asarray(theta, dtype=float)
    small = theta < TAYLOR_CUTOFF
    safe = np.where(small, 1.0, theta)
    out = np.where(small, 1.0 - theta**2 / 3.0, safe / np.tan(safe))
    return out[()] if out.ndim == 0 else out


def theta_over_tanh(theta):
    """``theta / tanh(theta)`` on [0, inf), with the removable point at 0."""
    theta = np.asarray(theta, dtype=float)
    small = theta < TAYLOR_CUTOFF
    safe = np.where(small, 1.0, theta)
    out = np.where(small, 1.0 + theta**2 / 3.0, safe / np.tanh(safe))
    return out[()] if out.ndim == 0 else out


def _ratio(kappa: float, z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("distance argument must be nonnegative")
    if kappa > 0:
        theta = z * math.sqrt(kappa)
        if np.any(theta >= math.pi / 2):
            raise DomainError("f_kappa needs z*sqrt(k) < pi/2 for positive curvature")
        return theta_over_tan(theta)
    if kappa < 0:
        return theta_over_tanh(z * math.sqrt(-kappa))
    return np.ones_like(z)


def f_kappa(kappa: float, alpha, z):
    """Second-order coefficient of the squared-distance expansion in curvature
    ``kappa``: ``cos^2(alpha) + (theta/tan theta) sin^2(alpha)`` with
    ``theta = z sqrt|kappa|`` (``tanh`` for negative curvature)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > math.pi):
        raise DomainError("alpha must lie in [0, pi]")
    cos2 = np.cos(alpha) ** 2
    g = _ratio(float(kappa), z)
    out = cos2 + g * (1.0 - cos2)
    return out[()] if np.ndim(out) == 0 else out


def _f_from_cos2(kappa, cos2, z):
    g = _ratio(kappa, z)
    return g + (1.0 - g) * cos2


def _check(m: SignedDiscreteMeasure, x: ModelPoint):
    if x.space != m.space:
        raise SpaceMismatch("point and measure live in different spaces")


def energy_raw(space: ModelSpace, P, w, x):
    """``0.5 * sum_i w_i d(x, p_i)^2`` for ``x`` of shape ``(..., D)``."""
    d = space.dist(np.asarray(x)[..., None, :], P)
    return 0.5 * np.sum(w * d * d, axis=-1)


def gradient_raw(space: ModelSpace, P, w, x):
    V = space.log_map(np.asarray(x)[..., None, :], P)
    return -np.einsum("...k,...kd->...d", np.broadcast_to(w, V.shape[:-1]), V)


def energy(m: SignedDiscreteMeasure, x: ModelPoint) -> float:
    _check(m, x)
    return float(energy_raw(m.space, m.coords, m.weights, x.ambient))


def gradient(m: SignedDiscreteMeasure, x: ModelPoint) -> TangentVector:
    """Riemannian gradient ``-sum_i w_i log_x(p_i)``."""
    _check(m, x)
    g = gradient_raw(m.space, m.coords, m.weights, x.ambient)
    return TangentVector(x, m.space.to_tangent(x.ambient, g))


def second_derivative_lower_bound(
    m: SignedDiscreteMeasure, x: ModelPoint, u: TangentVector, bounds: CurvatureBounds
) -> float:
    """Lower bound on d^2/dt^2 E(exp_x(t u)) at t=0 from hinge comparison.

    Positive weights use the upper curvature bound, negative weights the lower
    one.
    """
    _check(m, x)
    space = m.space
    unorm = u.norm
    if abs(unorm - 1.0) > 1e-9:
        raise GeometryError(f"direction must be a unit vector (norm {unorm})")
    V = space.log_map(x.ambient, m.coords)
    d = space.norm(V)
    proj = space.inner(V, u.ambient)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos2 = np.where(d > 0, (proj / np.where(d > 0, d, 1.0)) ** 2, 1.0)
    cos2 = np.clip(cos2, 0.0, 1.0)
    w = m.weights
    pos, neg = w > 0, w < 0
    total = 0.0
    if np.any(pos):
        total += float(np.sum(w[pos] * _f_from_cos2(bounds.lambda_hi, cos2[pos], d[pos])))
    if np.any(neg):
        total -= float(np.sum(-w[neg] * _f_from_cos2(bounds.lambda_lo, cos2[neg], d[neg])))
    return total
