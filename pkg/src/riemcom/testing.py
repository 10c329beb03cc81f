"""Random generators of certified instances, shared by the tests and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .certificates import theorem_com_certificate
from .chart import BarycentricChart, build_chart
from .energy import CurvatureBounds
from .errors import CertificateFailed
from .model_spaces import ModelPoint, ModelSpace
from .signed_measures import SignedDiscreteMeasure
from .simplex_geometry import EdgeLengthMatrix, realize_from_edge_lengths


def random_point(space: ModelSpace, rng, spread: float = 0.5) -> ModelPoint:
    """A point at normal-coordinate distance up to ``spread`` from the origin."""
    xi = rng.uniform(-1, 1, space.dimension) * spread / math.sqrt(space.dimension)
    return ModelPoint(space, space.from_normal(space.origin(), xi))


def regular_simplex(n: int) -> np.ndarray:
    """Vertices of a regular n-simplex with unit edges, vertex 0 at the origin."""
    E = np.eye(n + 1) / math.sqrt(2.0)
    # orthonormal basis of the hyperplane sum(x) = 0
    Q, _ = np.linalg.qr(np.vstack([np.ones(n + 1), np.eye(n + 1)[:-1]]).T)
    V = (E - E.mean(axis=0)) @ Q[:, 1:]
    return V - V[0]


def random_certified_measure(space: ModelSpace, rng, *, max_tries: int = 1000):
    """``(measure, centre, rho, bounds)`` with the existence/uniqueness
    certificate satisfied for the exact curvature bounds."""
    bounds = CurvatureBounds.exact(space)
    n = space.dimension
    cap = math.pi / (4 * math.sqrt(space.curvature)) if space.curvature > 0 else 1.0
    for _ in range(max_tries):
        k = int(rng.integers(2, 6))
        c = random_point(space, rng)
        rho = cap * rng.uniform(0.05, 0.6)
        mu_m = rng.uniform(0.0, 0.6) if rng.uniform() < 0.8 else 0.0
        n_neg = int(rng.integers(1, k)) if mu_m > 0 else 0
        neg = rng.dirichlet(np.ones(n_neg)) * mu_m if n_neg else np.zeros(0)
        pos = rng.dirichlet(np.ones(k - n_neg)) * (1.0 + mu_m)
        w = rng.permutation(np.concatenate([pos, -neg]))
        r_out = rho * (1.0 - mu_m) / (1.0 + mu_m)
        r = r_out * rng.uniform(0.1, 0.95)
        dirs = rng.normal(size=(k, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        xi = dirs * (r * rng.uniform(0.2, 1.0, k))[:, None]
        P = space.from_normal(c.ambient, xi)
        m = SignedDiscreteMeasure(space, P, w)
        if theorem_com_certificate(m, c, rho, bounds).satisfied:
            return m, c, rho, bounds
    raise RuntimeError("no certified instance found")


def random_simplex_points(space: ModelSpace, rng, L: float, *, jitter: float = 0.15,
                          base: ModelPoint | None = None) -> np.ndarray:
    """Jittered regular simplex with edges about ``L``, in normal coordinates at ``base``."""
    n = space.dimension
    V = regular_simplex(n)
    V = V + rng.uniform(-jitter, jitter, V.shape) * (np.arange(n + 1) > 0)[:, None]
    R = np.linalg.qr(rng.normal(size=(n, n)))[0]
    if np.linalg.det(R) < 0:
        R[:, 0] *= -1
    V = (V @ R.T) * L
    base = random_point(space, rng) if base is None else base
    return space.from_normal(base.ambient, V)


def certified_chart_size(n: int, s: float, lambda_abs: float, t: float) -> float:
    """Largest edge bound ``L`` allowed by the chart certificate for thickness ``t``."""
    if lambda_abs == 0:
        return 1.0
    return t * t / (25.0 * s * s * math.sqrt(lambda_abs))


def random_certified_chart(space: ModelSpace, rng, *, s: float = 1.0,
                           max_tries: int = 100) -> BarycentricChart:
    n = space.dimension
    lam = abs(space.curvature)
    for _ in range(max_tries):
        P = random_simplex_points(space, rng, 1.0, base=space.point(space.origin()))
        t = realize_from_edge_lengths(EdgeLengthMatrix.from_points(space, P)).t
        L = certified_chart_size(n, s, lam, t) * rng.uniform(0.2, 0.9)
        P = random_simplex_points(space, rng, L / 1.3, jitter=0.15)
        try:
            return build_chart(space, P, s=s, anchor=int(rng.integers(n + 1)))
        except CertificateFailed:
            continue
    raise RuntimeError("no certified chart found")


def facet_pair(space: ModelSpace, rng, *, s: float = 1.5, compatible: bool = True,
               shrink: float = 0.6):
    """Two certified charts sharing ``n`` vertices, with the non-shared vertices
    on opposite sides of the shared facet (or the same side, reflected, when
    ``compatible`` is false), anchored at the same shared vertex."""
    n = space.dimension
    lam = abs(space.curvature)
    t_guess = 0.35 if n == 2 else 0.2
    L0 = certified_chart_size(n, s, lam, t_guess) * shrink / 1.3 if lam else 1.0
    V = regular_simplex(n)
    V = V + rng.uniform(-0.08, 0.08, V.shape) * (np.arange(n + 1) > 0)[:, None]
    # reflect the last vertex through the hyperplane of the first n (through 0)
    basis = V[1:n].T
    if n == 1:
        q = -V[1]
    else:
        Qb, _ = np.linalg.qr(basis)
        p = V[n]
        q = 2 * Qb @ (Qb.T @ p) - p
        q = q + rng.uniform(-0.05, 0.05, n)
        # keep q strictly across the facet
        normal = p - Qb @ (Qb.T @ p)
        if (q - Qb @ (Qb.T @ q)) @ normal >= 0:
            q = 2 * Qb @ (Qb.T @ p) - p
    if not compatible:
        # overlapping: q on the same side as p
        q = V[n] * 0.8 + V[:n].mean(axis=0) * 0.2
    R = np.linalg.qr(rng.normal(size=(n, n)))[0]
    base = random_point(space, rng)
    to_space = lambda X: space.from_normal(base.ambient, (X @ R.T) * L0)
    P = to_space(V)
    Q = to_space(q[None, :])[0]
    sigma = P
    shared = P[:n]
    # reorder so that tau induces the same orientation as sigma
    if n >= 2:
        tau = np.vstack([shared[[1, 0] + list(range(2, n))], Q[None]])
    else:
        tau = np.vstack([Q[None], shared])
    anchor_tau = 1
    L = max(EdgeLengthMatrix.from_points(space, X).lengths.max() for X in (sigma, tau))
    a = build_chart(space, sigma, s=s, anchor=0, L=L)
    b = build_chart(space, tau, s=s, anchor=anchor_tau, L=L)
    return a, b
