"""Simply connected spaces of constant curvature.

Points are stored in an ambient representation:

* ``curvature > 0``: the sphere of radius ``1/sqrt(k)`` in R^(n+1),
* ``curvature == 0``: R^n itself,
* ``curvature < 0``: the upper sheet of the hyperboloid <x, x> = 1/k in
  Minkowski space R^(1,n) with signature (-, +, ..., +).

The methods on :class:`ModelSpace` work on raw ``ndarray`` coordinates and
broadcast over leading axes; they are the fast path used by the solver. The
module-level functions take :class:`ModelPoint` / :class:`TangentVector`
values and validate them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AntipodalPoints, DomainError, GeometryError, SpaceMismatch

# distance(x, y) > pi/sqrt(k) - ANTIPODAL_TOL is treated as antipodal on spheres
ANTIPODAL_TOL = 1e-8
POINT_TOL = 1e-12


def _theta_over_sin(theta):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-6
    safe = np.where(small, 1.0, theta)
    return np.where(small, 1.0 + theta**2 / 6.0, safe / np.sin(safe))


def _theta_over_sinh(theta):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-6
    safe = np.where(small, 1.0, theta)
    return np.where(small, 1.0 - theta**2 / 6.0, safe / np.sinh(safe))


def _sin_over_theta(theta):
    return np.sinc(np.asarray(theta, dtype=float) / np.pi)


def _sinh_over_theta(theta):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-6
    safe = np.where(small, 1.0, theta)
    return np.where(small, 1.0 + theta**2 / 6.0, np.sinh(safe) / safe)


@dataclass(frozen=True)
class ModelSpace:
    """The model space of constant sectional curvature ``curvature`` and
    dimension ``dimension``."""

    curvature: float
    dimension: int

    def __post_init__(self):
        k = float(self.curvature)
        if not math.isfinite(k):
            raise GeometryError(f"curvature must be finite, got {self.curvature}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise GeometryError(f"dimension must be an integer >= 1, got {self.dimension}")
        object.__setattr__(self, "curvature", k)
        object.__setattr__(self, "dimension", int(self.dimension))

    # -- basic attributes ---------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return self.dimension if self.curvature == 0 else self.dimension + 1

    @property
    def radius(self) -> float:
        """Curvature radius ``1/sqrt(|k|)`` (infinite for the flat space)."""
        if self.curvature == 0:
            return math.inf
        return 1.0 / math.sqrt(abs(self.curvature))

    @property
    def injectivity_radius(self) -> float:
        if self.curvature > 0:
            return math.pi / math.sqrt(self.curvature)
        return math.inf

    def origin(self) -> np.ndarray:
        """Base point: north pole (last axis) on spheres, apex of the hyperboloid."""
        o = np.zeros(self.ambient_dim)
        if self.curvature > 0:
            o[-1] = self.radius
        elif self.curvature < 0:
            o[0] = self.radius
        return o

    # -- ambient bilinear form ---------------------------------------------

    def inner(self, u, v):
        """Ambient bilinear form; the Riemannian metric on tangent vectors."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        prod = u * v
        if self.curvature < 0:
            return prod[..., 1:].sum(axis=-1) - prod[..., 0]
        return prod.sum(axis=-1)

    def norm(self, v):
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    # -- projections ----------------------------------------------------------

    def project(self, a):
        """Closest-point style retraction of ambient coordinates onto the model."""
        a = np.array(a, dtype=float)
        k = self.curvature
        if k > 0:
            return a * (self.radius / np.linalg.norm(a, axis=-1, keepdims=True))
        if k < 0:
            spatial = a[..., 1:]
            a[..., 0] = np.sqrt(self.radius**2 + np.sum(spatial * spatial, axis=-1))
            return a
        return a

    def to_tangent(self, x, v):
        """Remove the component of ``v`` normal to the model at ``x``."""
        v = np.asarray(v, dtype=float)
        if self.curvature == 0:
            return v
        x = np.asarray(x, dtype=float)
        # <x, x> = 1/k in both curved models
        return v - (self.curvature * self.inner(x, v))[..., None] * x

    def point_residual(self, a):
        """Relative violation of the point constraint (0 for the flat space)."""
        a = np.asarray(a, dtype=float)
        if self.curvature == 0:
            return np.zeros(a.shape[:-1])
        res = np.abs(self.curvature * self.inner(a, a) - 1.0)
        if self.curvature < 0:
            res = np.where(a[..., 0] > 0, res, np.inf)
        return res

    # -- geometry on raw coordinates ---------------------------------------

    def _chord(self, x, y):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return d, np.maximum(self.inner(d, d), 0.0)

    def dist(self, x, y):
        """Geodesic distance, broadcasting over leading axes."""
        k = self.curvature
        delta, q = self._chord(x, y)
        if k == 0:
            return np.sqrt(q)
        if k > 0:
            x = np.asarray(x, dtype=float)
            perp = delta + (0.5 * k * q)[..., None] * x
            s = math.sqrt(k) * np.linalg.norm(perp, axis=-1)
            return np.arctan2(s, 1.0 - 0.5 * k * q) * self.radius
        return 2.0 * self.radius * np.arcsinh(np.sqrt(q) / (2.0 * self.radius))

    def log_map(self, x, y):
        """Inverse exponential map ``exp_x^{-1}(y)`` in ambient coordinates."""
        k = self.curvature
        x = np.asarray(x, dtype=float)
        delta, q = self._chord(x, y)
        if k == 0:
            return delta
        perp = delta + (0.5 * k * q)[..., None] * x
        R = self.radius
        if k > 0:
            s = np.linalg.norm(perp, axis=-1) / R
            theta = np.arctan2(s, 1.0 - 0.5 * k * q)
            if np.any(theta * R > math.pi * R - ANTIPODAL_TOL):
                raise AntipodalPoints("log undefined for antipodal points")
            scale = _theta_over_sin(theta)
        else:
            theta = 2.0 * np.arcsinh(np.sqrt(q) / (2.0 * R))
            scale = _theta_over_sinh(theta)
        return self.to_tangent(x, perp * scale[..., None])

    def exp_map(self, x, v):
        """Exponential map, projected back onto the model to remove drift."""
        k = self.curvature
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if k == 0:
            return x + v
        length = self.norm(v)
        theta = length / self.radius
        if k > 0:
            if np.any(length >= self.injectivity_radius):
                raise DomainError("tangent vector longer than the injectivity radius")
            out = x * np.cos(theta)[..., None] + v * _sin_over_theta(theta)[..., None]
        else:
            out = x * np.cosh(theta)[..., None] + v * _sinh_over_theta(theta)[..., None]
        return self.project(out)

    def frame(self, x):
        """Orthonormal tangent frame at ``x``, shape ``(..., n, D)``.

        The frame is the parallel transport of the standard frame at
        :meth:`origin` along the connecting geodesic, so it depends smoothly
        and deterministically on ``x``.
        """
        x = np.asarray(x, dtype=float)
        n, D, k = self.dimension, self.ambient_dim, self.curvature
        if k == 0:
            return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()
        R = self.radius
        lead = x.shape[:-1]
        if k > 0:
            base = np.zeros(lead + (n, D))
            base[..., np.arange(n), np.arange(n)] = 1.0
            o = self.origin()
            # transport from the south pole when x is in the southern cap
            sign = np.where(x[..., -1] < -0.5 * R, -1.0, 1.0)
            o_b = sign[..., None] * o
            denom = R * R + self.inner(o_b, x)
            coef = x[..., :n] / denom[..., None]
            return base - coef[..., :, None] * (o_b + x)[..., None, :]
        base = np.zeros(lead + (n, D))
        base[..., np.arange(n), np.arange(1, n + 1)] = 1.0
        o = self.origin()
        denom = R * R + R * x[..., 0]
        coef = x[..., 1:] / denom[..., None]
        return base + coef[..., :, None] * (o + x)[..., None, :]

    def to_normal(self, x, y):
        """Riemann normal coordinates of ``y`` about ``x`` (w.r.t. :meth:`frame`)."""
        v = self.log_map(x, y)
        F = self.frame(x)
        return self.inner(F, v[..., None, :])

    def from_normal(self, x, xi):
        """Inverse of :meth:`to_normal`."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        F = self.frame(x)
        v = np.einsum("...i,...id->...d", xi, F)
        return self.exp_map(x, v)

    # -- validated values -----------------------------------------------------

    def point(self, coords, project: bool = False) -> "ModelPoint":
        a = np.asarray(coords, dtype=float)
        if project:
            a = self.project(a)
        return ModelPoint(self, a)

    def points(self, coords, project: bool = False) -> tuple["ModelPoint", ...]:
        return tuple(self.point(c, project=project) for c in np.asarray(coords, dtype=float))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ModelPoint:
    space: ModelSpace
    ambient: np.ndarray = field(repr=True)

    def __post_init__(self):
        a = _frozen(self.ambient)
        if a.shape != (self.space.ambient_dim,):
            raise GeometryError(
                f"expected {self.space.ambient_dim} ambient coordinates, got shape {a.shape}"
            )
        if not np.all(np.isfinite(a)):
            raise GeometryError("non-finite coordinates")
        scale = max(1.0, abs(self.space.curvature) * float(a @ a))
        if self.space.point_residual(a) > POINT_TOL * scale:
            raise GeometryError(f"coordinates {a} do not lie on the model")
        object.__setattr__(self, "ambient", a)


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: ModelPoint
    ambient: np.ndarray

    def __post_init__(self):
        v = _frozen(self.ambient)
        x = self.base.ambient
        if v.shape != x.shape:
            raise GeometryError(f"tangent vector shape {v.shape} != point shape {x.shape}")
        space = self.base.space
        if space.curvature != 0:
            tol = POINT_TOL * max(1.0, float(np.linalg.norm(x))) * max(1.0, float(np.linalg.norm(v)))
            if abs(space.inner(x, v)) > tol:
                raise GeometryError("vector is not tangent at its base point")
        object.__setattr__(self, "ambient", v)

    @property
    def space(self) -> ModelSpace:
        return self.base.space

    @property
    def norm(self) -> float:
        return float(self.space.norm(self.ambient))

    def coords(self) -> np.ndarray:
        """Components in the orthonormal frame at the base point."""
        F = self.space.frame(self.base.ambient)
        return self.space.inner(F, self.ambient)


def _same_space(*pts):
    s = pts[0].space
    for p in pts[1:]:
        if p.space != s:
            raise SpaceMismatch(f"{p.space} != {s}")
    return s


def tangent(x: ModelPoint, coords) -> TangentVector:
    """Tangent vector at ``x`` with the given components in ``space.frame(x)``."""
    F = x.space.frame(x.ambient)
    return TangentVector(x, np.asarray(coords, dtype=float) @ F)


def distance(x: ModelPoint, y: ModelPoint) -> float:
    space = _same_space(x, y)
    return float(space.dist(x.ambient, y.ambient))


def exp(x: ModelPoint, v: TangentVector) -> ModelPoint:
    space = _same_space(x, v.base)
    if not np.allclose(v.base.ambient, x.ambient, rtol=0, atol=1e-12):
        raise GeometryError("tangent vector is based at a different point")
    return ModelPoint(space, space.exp_map(x.ambient, v.ambient))


def log(x: ModelPoint, y: ModelPoint) -> TangentVector:
    space = _same_space(x, y)
    return TangentVector(x, space.log_map(x.ambient, y.ambient))


def angle(x: ModelPoint, y: ModelPoint, z: ModelPoint) -> float:
    """Angle at ``x`` between the segments to ``y`` and ``z``."""
    space = _same_space(x, y, z)
    u = space.log_map(x.ambient, y.ambient)
    w = space.log_map(x.ambient, z.ambient)
    nu, nw = space.norm(u), space.norm(w)
    if nu == 0 or nw == 0:
        raise DomainError("angle undefined for a zero-length leg")
    u, w = u / nu, w / nw
    return float(2.0 * np.arctan2(space.norm(u - w), space.norm(u + w)))


def cosine_rule_side(kappa, c, delta, alpha):
    """Third side of a hinge with legs ``c``, ``delta`` and angle ``alpha``
    in the model space of curvature ``kappa``.

    Uses the haversine form of the cosine rules, which stays accurate for
    short sides. Broadcasts over array arguments.
    """
    kappa = float(kappa)
    c = np.asarray(c, dtype=float)
    delta = np.asarray(delta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(c < 0) or np.any(delta < 0):
        raise DomainError("hinge legs must be nonnegative")
    if np.any(alpha < 0) or np.any(alpha > math.pi):
        raise DomainError("hinge angle must lie in [0, pi]")
    half = np.sin(0.5 * alpha) ** 2
    if kappa > 0:
        s = math.sqrt(kappa)
        if np.any(c * s >= math.pi / 2) or np.any(delta * s >= math.pi / 2):
            raise DomainError("spherical hinge legs must be shorter than pi/(2 sqrt(k))")
        h = np.sin(0.5 * (c - delta) * s) ** 2 + np.sin(c * s) * np.sin(delta * s) * half
        out = 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0))) / s
    elif kappa < 0:
        s = math.sqrt(-kappa)
        h = np.sinh(0.5 * (c - delta) * s) ** 2 + np.sinh(c * s) * np.sinh(delta * s) * half
        out = 2.0 * np.arcsinh(np.sqrt(h)) / s
    else:
        out = np.sqrt((c - delta) ** 2 + 4.0 * c * delta * half)
    return out[()] if out.ndim == 0 else out


def cosine_rule_angle(kappa, a, b, c):
    """Angle opposite side ``a`` of the triangle with sides ``a, b, c`` in
    the model space of curvature ``kappa``; ``nan`` where unrealizable."""
    kappa = float(kappa)
    a, b, c = (np.asarray(t, dtype=float) for t in (a, b, c))
    if kappa > 0:
        s = math.sqrt(kappa)
        num = np.sin(0.5 * a * s) ** 2 - np.sin(0.5 * (b - c) * s) ** 2
        den = np.sin(b * s) * np.sin(c * s)
    elif kappa < 0:
        s = math.sqrt(-kappa)
        num = np.sinh(0.5 * a * s) ** 2 - np.sinh(0.5 * (b - c) * s) ** 2
        den = np.sinh(b * s) * np.sinh(c * s)
    else:
        num = a * a - (b - c) ** 2
        den = 4.0 * b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        h = num / den
    # absorb rounding at degenerate triangles
    h = np.where((h < 0) & (h > -1e-14), 0.0, h)
    h = np.where((h > 1) & (h < 1 + 1e-14), 1.0, h)
    out = np.where((h >= 0) & (h <= 1) & (den > 0), 2.0 * np.arcsin(np.sqrt(np.clip(h, 0, 1))), np.nan)
    return out[()] if out.ndim == 0 else out
