"""Numerical oracles for the comparison lemmas, the squared-distance
expansion, convexity and boundary behaviour of the energy, and a brute-force
grid minimiser used to cross-check the solver."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import ndimage

from .certificates import gradient_outward_certificate
from .energy import energy_raw, f_kappa, gradient_raw
from .errors import CertificateFailed, DomainError, GeometryError, NotRealizable, VerificationError
from .model_spaces import ModelPoint, ModelSpace, TangentVector, cosine_rule_angle, cosine_rule_side
from .signed_measures import SignedDiscreteMeasure, support_radius

ORDER_TOL = 1e-12


def _ordered(lo, mid, hi):
    if not lo <= mid <= hi:
        raise DomainError(f"curvatures must satisfy lo <= mid <= hi, got {lo}, {mid}, {hi}")


# -- comparison lemmas ------------------------------------------------------------


def hinge_comparison_check(kappa_lo, kappa_mid, kappa_hi, c, delta, alpha):
    """Third sides of the same hinge in three curvatures.

    Returns ``(a_hi, a_mid, a_lo)``; higher curvature gives the shorter side.
    Raises :class:`VerificationError` on an ordering violation beyond 1e-12.
    Array arguments broadcast.
    """
    _ordered(kappa_lo, kappa_mid, kappa_hi)
    a_hi = cosine_rule_side(kappa_hi, c, delta, alpha)
    a_mid = cosine_rule_side(kappa_mid, c, delta, alpha)
    a_lo = cosine_rule_side(kappa_lo, c, delta, alpha)
    tol = ORDER_TOL * (1.0 + np.abs(a_lo))
    bad = (a_hi > a_mid + tol) | (a_mid > a_lo + tol)
    if np.any(bad):
        raise VerificationError(f"hinge ordering violated at {int(np.sum(bad))} configurations")
    return a_hi, a_mid, a_lo


def _corner_angles(kappa, sides):
    a, b, c = (np.asarray(s, dtype=float) for s in sides)
    return np.stack([cosine_rule_angle(kappa, a, b, c),
                     cosine_rule_angle(kappa, b, c, a),
                     cosine_rule_angle(kappa, c, a, b)], axis=-1)


def angle_comparison_check(kappa_lo, kappa_mid, kappa_hi, sides):
    """Corner angles of a triangle with the given side lengths in three
    curvatures, each of shape ``(..., 3)`` (corners opposite ``a, b, c``).

    Returns ``(alpha_lo, alpha_mid, alpha_hi)``; angles grow with curvature.
    """
    _ordered(kappa_lo, kappa_mid, kappa_hi)
    a, b, c = (np.asarray(s, dtype=float) for s in sides)
    if kappa_hi > 0 and np.any((a + b + c) * math.sqrt(kappa_hi) >= 2 * math.pi):
        raise NotRealizable("perimeter too large for the positive curvature")
    out = tuple(_corner_angles(k, (a, b, c)) for k in (kappa_lo, kappa_mid, kappa_hi))
    if any(np.any(np.isnan(x)) for x in out):
        raise NotRealizable("side lengths violate the triangle inequality")
    lo, mid, hi = out
    bad = (lo > mid + ORDER_TOL * (1 + mid)) | (mid > hi + ORDER_TOL * (1 + hi))
    if np.any(bad):
        raise VerificationError(f"angle ordering violated at {int(np.sum(bad))} corners")
    return out


# -- expansion of the squared distance ------------------------------------------


@dataclass(frozen=True)
class ExpansionFit:
    coefficient: float
    expected: float
    order: float
    ratios: tuple[float, ...]


def _remainder(kappa, c, alpha, delta):
    """d(w, y)^2 - |log_x w - log_x y|^2 in multiprecision, where the hinge at
    x has legs c (to y) and delta (to w) meeting at angle alpha."""
    c, d, a = mpmath.mpf(c), mpmath.mpf(delta), mpmath.mpf(alpha)
    half = mpmath.sin(a / 2) ** 2
    if kappa > 0:
        s = mpmath.sqrt(kappa)
        h = mpmath.sin((c - d) * s / 2) ** 2 + mpmath.sin(c * s) * mpmath.sin(d * s) * half
        side = 2 * mpmath.asin(mpmath.sqrt(h)) / s
    elif kappa < 0:
        s = mpmath.sqrt(-kappa)
        h = mpmath.sinh((c - d) * s / 2) ** 2 + mpmath.sinh(c * s) * mpmath.sinh(d * s) * half
        side = 2 * mpmath.asinh(mpmath.sqrt(h)) / s
    else:
        side2 = (c - d) ** 2 + 4 * c * d * half
        return side2 - ((c - d) ** 2 + 4 * c * d * half)
    flat = (c - d) ** 2 + 4 * c * d * half
    return side * side - flat


def _neville_at_zero(x, y):
    """Value at 0 of the interpolating polynomial through (x_i, y_i)."""
    p = list(y)
    n = len(x)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i])
    return p[0]


def expansion_order_check(kappa, c, alpha, deltas=None, *, tol=1e-6, dps=60) -> ExpansionFit:
    """Fit the delta^2 coefficient of the squared-distance remainder.

    ``R(delta)/delta^2`` is extrapolated to ``delta -> 0`` over a geometric
    ladder and compared with ``f_kappa(alpha, c) - 1``. ``order`` is the
    log-log slope of ``|R/delta^2 - coefficient|`` against ``delta`` (inf when
    the remainder vanishes identically).
    """
    kappa, c, alpha = float(kappa), float(c), float(alpha)
    if not c > 0:
        raise DomainError("c must be positive")
    if kappa > 0 and c * math.sqrt(kappa) >= math.pi / 2:
        raise DomainError("c too large for the positive curvature")
    if deltas is None:
        deltas = [c / 10 * 0.5**j for j in range(10)]
    deltas = [float(d) for d in deltas]
    if any(not 0 < d <= c / 10 * (1 + 1e-12) for d in deltas):
        raise DomainError("deltas must lie in (0, c/10]")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    expected = float(f_kappa(kappa, alpha, c)) - 1.0
    with mpmath.workdps(dps):
        ratios = [_remainder(kappa, c, alpha, d) / mpmath.mpf(d) ** 2 for d in deltas]
        xs = [mpmath.mpf(d) for d in deltas]
        tail = min(len(xs), 6)
        coef = _neville_at_zero(xs[-tail:], ratios[-tail:])
        resid = [abs(r - coef) for r in ratios]
        if max(resid) < mpmath.mpf(10) ** (-dps + 10):
            order = math.inf
        else:
            lx = np.array([float(mpmath.log(d)) for d in xs])
            ly = np.array([float(mpmath.log(max(r, mpmath.mpf(10) ** (-dps)))) for r in resid])
            order = float(np.polyfit(lx[: len(xs) // 2 + 1], ly[: len(xs) // 2 + 1], 1)[0])
        coef_f = float(coef)
        ratios_f = tuple(float(r) for r in ratios)
    if abs(coef_f - expected) > tol:
        raise VerificationError(f"fitted coefficient {coef_f} differs from {expected}")
    if order < 0.9:
        raise VerificationError(f"remainder decays with order {order} < 1")
    return ExpansionFit(coef_f, expected, order, ratios_f)


# -- finite differences -----------------------------------------------------------


def fd_gradient(m: SignedDiscreteMeasure, x: ModelPoint, h: float | None = None) -> np.ndarray:
    """Central-difference gradient of the energy in the frame at ``x``."""
    space = m.space
    n = space.dimension
    if h is None:
        scale = float(np.max(space.dist(x.ambient, m.coords)))
        h = np.finfo(float).eps ** (1 / 3) * (1.0 + scale)
    F = space.frame(x.ambient)
    Y = space.exp_map(x.ambient, np.concatenate([h * F, -h * F]))
    E = energy_raw(space, m.coords, m.weights, Y)
    return (E[:n] - E[n:]) / (2 * h)


def _second_many(space: ModelSpace, P, w, X, U, h):
    """Five-point second derivative of t -> E(exp_x(t u)) at t = 0."""
    X = np.atleast_2d(X)
    U = np.atleast_2d(U)
    h = np.broadcast_to(np.asarray(h, dtype=float), (len(X),))
    steps = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    V = steps[None, :, None] * h[:, None, None] * U[:, None, :]
    Y = space.exp_map(np.broadcast_to(X[:, None, :], V.shape), V)
    E = energy_raw(space, P, w, Y)
    coeffs = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    return (E @ coeffs) / (h * h)


def fd_second_derivative(m: SignedDiscreteMeasure, x: ModelPoint, u: TangentVector,
                         h: float | None = None) -> float:
    """Second derivative of the energy along the geodesic through ``x`` with
    unit velocity ``u``, by a five-point stencil."""
    space = m.space
    if h is None:
        scale = float(np.max(space.dist(x.ambient, m.coords)))
        h = 1e-3 * max(scale, 1e-3)
    return float(_second_many(space, m.coords, m.weights, x.ambient, u.ambient, h)[0])


def empirical_min_curvature(m: SignedDiscreteMeasure, c: ModelPoint, rho: float,
                            samples: int = 200, seed: int = 0) -> float:
    """Smallest sampled second directional derivative of the energy over B(c, rho)."""
    space = m.space
    rng = np.random.default_rng(seed)
    n = space.dimension
    dirs = rng.normal(size=(samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rho * rng.uniform(size=samples) ** (1.0 / n)
    X = space.from_normal(c.ambient, dirs * radii[:, None])
    U = rng.normal(size=(samples, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    U = np.einsum("bi,bid->bd", U, space.frame(X))
    return float(_second_many(space, m.coords, m.weights, X, U, 1e-3 * rho).min())


# -- boundary behaviour -----------------------------------------------------------


def boundary_outwardness_check(m: SignedDiscreteMeasure, c: ModelPoint, rho: float,
                               samples: int = 1000, *, seed: int = 0,
                               require_certificate: bool = True) -> float:
    """Minimum over sampled boundary points of <outward normal, gradient>.

    With ``require_certificate`` the outward-gradient certificate must hold and
    a nonpositive minimum raises :class:`VerificationError`.
    """
    space = m.space
    r = support_radius(m, c)
    if require_certificate:
        cert = gradient_outward_certificate(m.mu_plus, m.mu_minus, rho, r)
        if not cert.satisfied:
            raise CertificateFailed(cert)
    n = space.dimension
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        dirs = np.random.default_rng(seed).normal(size=(samples, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    X = space.from_normal(c.ambient, rho * dirs)
    N = -space.log_map(X, c.ambient)
    N /= space.norm(N)[:, None]
    G = gradient_raw(space, m.coords, m.weights, X)
    out = float(np.min(space.inner(N, G)))
    if require_certificate and not out > 0:
        raise VerificationError(f"gradient not outward on the boundary (min {out})")
    return out


# -- brute-force minimisation ------------------------------------------------------

_GRID_CAP = {1: 20001, 2: 201, 3: 41}
_WINDOW = 6  # half-width, in fine cells, of each refinement window


@dataclass(frozen=True)
class GridResult:
    point: ModelPoint
    value: float
    local_min_count: int
    spacing: float


def _grid_energy(space, P, w, c, xi, rho):
    inside = np.linalg.norm(xi, axis=-1) <= rho
    E = np.full(xi.shape[:-1], np.inf)
    if inside.any():
        Y = space.from_normal(c, xi[inside])
        E[inside] = energy_raw(space, P, w, Y)
    return E


def grid_minimize(m: SignedDiscreteMeasure, c: ModelPoint, rho: float,
                  resolution: float) -> GridResult:
    """Exhaustive minimisation of the energy over the closed ball B(c, rho).

    The energy is tabulated on a normal-coordinate grid about ``c``; grid
    points no larger than all their neighbours are grouped into connected
    plateaus and counted. The best grid point is then refined on successively
    finer local windows until the spacing is at most ``resolution``.
    """
    space = m.space
    n = space.dimension
    if n > 3:
        raise GeometryError("grid minimisation supports dimension <= 3")
    if not (rho > 0 and resolution > 0):
        raise DomainError("rho and resolution must be positive")
    P, w, c0 = m.coords, m.weights, c.ambient
    N = min(_GRID_CAP[n], int(math.ceil(2 * rho / resolution)) + 1)
    N += (N + 1) % 2  # odd, so that c itself is a grid point
    axis = np.linspace(-rho, rho, N)
    h = axis[1] - axis[0]
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)
    E = _grid_energy(space, P, w, c0, mesh, rho)

    padded = np.pad(E, 1, constant_values=np.inf)
    local = np.isfinite(E)
    for offset in np.ndindex(*([3] * n)):
        if all(o == 1 for o in offset):
            continue
        sl = tuple(slice(o, o + N) for o in offset)
        local &= E <= padded[sl]
    _, count = ndimage.label(local, structure=np.ones((3,) * n))

    best = np.unravel_index(np.argmin(E), E.shape)
    xi = mesh[best]
    val = float(E[best])
    while h > resolution:
        h /= 4.0
        offs = np.arange(-_WINDOW, _WINDOW + 1) * h
        win = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), axis=-1) + xi
        Ew = _grid_energy(space, P, w, c0, win, rho)
        k = np.unravel_index(np.argmin(Ew), Ew.shape)
        if Ew[k] <= val:
            xi, val = win[k], float(Ew[k])
    point = ModelPoint(space, space.from_normal(c0, xi))
    return GridResult(point, val, int(count), float(h))
