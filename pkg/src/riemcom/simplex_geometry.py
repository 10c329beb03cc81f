"""Euclidean reference simplices realised from edge lengths."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NotRealizable

PD_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EdgeLengthMatrix:
    n: int
    lengths: np.ndarray

    def __post_init__(self):
        D = np.array(self.lengths, dtype=float)
        if D.shape != (self.n + 1, self.n + 1):
            raise GeometryError(f"expected a {(self.n + 1,) * 2} matrix, got {D.shape}")
        if not np.allclose(D, D.T, rtol=1e-12, atol=0):
            raise GeometryError("edge-length matrix must be symmetric")
        if np.any(np.diag(D) != 0):
            raise GeometryError("edge-length matrix must have a zero diagonal")
        off = D[~np.eye(self.n + 1, dtype=bool)]
        if np.any(off <= 0):
            raise GeometryError("off-diagonal edge lengths must be positive")
        D = 0.5 * (D + D.T)
        D.setflags(write=False)
        object.__setattr__(self, "lengths", D)

    @classmethod
    def from_points(cls, space, coords) -> "EdgeLengthMatrix":
        """Pairwise geodesic distances of points given in ambient coordinates."""
        P = np.asarray(coords, dtype=float)
        D = space.dist(P[:, None, :], P[None, :, :])
        np.fill_diagonal(D, 0.0)
        return cls(len(P) - 1, 0.5 * (D + D.T))


def _altitudes(V: np.ndarray) -> np.ndarray:
    """Distance from each vertex to the affine hull of the opposite facet."""
    k = len(V)
    out = np.empty(k)
    for i in range(k):
        facet = np.delete(V, i, axis=0)
        rel = V[i] - facet[0]
        span = (facet[1:] - facet[0]).T
        if span.shape[1] == 0:
            out[i] = np.linalg.norm(rel)
            continue
        coef, *_ = np.linalg.lstsq(span, rel, rcond=None)
        out[i] = np.linalg.norm(rel - span @ coef)
    return out


@dataclass(frozen=True, eq=False)
class EuclideanSimplex:
    """An n-simplex in E^n with cached size and quality measures."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] + 1:
            raise GeometryError(f"need n+1 vertices in E^n, got shape {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        diff = V[:, None, :] - V[None, :, :]
        edges = np.linalg.norm(diff, axis=-1)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_altitudes", _altitudes(V))

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def edge_lengths(self) -> np.ndarray:
        return self._edges

    @property
    def L(self) -> float:
        """Longest edge."""
        return float(self._edges.max())

    @property
    def altitudes(self) -> np.ndarray:
        return self._altitudes

    @property
    def a(self) -> float:
        """Smallest altitude."""
        return float(self._altitudes.min())

    @property
    def t(self) -> float:
        return thickness(self)


def realize_from_edge_lengths(d: EdgeLengthMatrix) -> EuclideanSimplex:
    """Euclidean simplex with the given edge lengths.

    Vertex 0 sits at the origin and the remaining vertices are the rows of the
    Cholesky factor of the Gram matrix, so the result is positively oriented
    with respect to the vertex order.
    """
    D2 = d.lengths**2
    G = 0.5 * (D2[0, 1:][:, None] + D2[0, 1:][None, :] - D2[1:, 1:])
    scale2 = float(D2.max())
    if np.linalg.eigvalsh(G).min() <= PD_TOL * scale2:
        raise NotRealizable("Gram matrix is not positive definite")
    try:
        F = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise NotRealizable(str(exc)) from None
    V = np.vstack([np.zeros(d.n), F])
    return EuclideanSimplex(V)


def thickness(s: EuclideanSimplex) -> float:
    """Smallest altitude over ``n`` times the longest edge."""
    L = s.L
    if L == 0:
        return 0.0
    return float(s.a / (s.n * L))


def _affine_system(s: EuclideanSimplex):
    V = s.vertices
    T = (V[:-1] - V[-1]).T
    if abs(np.linalg.det(T)) <= PD_TOL * max(s.L, 1e-300) ** s.n:
        raise GeometryError("degenerate simplex")
    return T


def barycentric_coords_euclidean(s: EuclideanSimplex, u) -> np.ndarray:
    """Affine barycentric coordinates of ``u`` (shape ``(n,)`` or ``(B, n)``).

    The last coordinate is ``1 - sum(others)`` so the sum is exactly one.
    """
    T = _affine_system(s)
    u = np.asarray(u, dtype=float)
    rhs = (u - s.vertices[-1]).T
    head = np.linalg.solve(T, rhs).T
    last = 1.0 - head.sum(axis=-1, keepdims=True)
    return np.concatenate([head, last], axis=-1)


def barycentric_gradients(s: EuclideanSimplex) -> np.ndarray:
    """Gradients of the affine coordinate functions, shape ``(n+1, n)``."""
    T = _affine_system(s)
    head = np.linalg.inv(T)
    return np.vstack([head, -head.sum(axis=0)])


def lambda_minus(lam) -> np.ndarray | float:
    """Sum of the negative barycentric coordinates (<= 0)."""
    lam = np.asarray(lam, dtype=float)
    out = np.minimum(lam, 0.0).sum(axis=-1)
    return float(out) if out.ndim == 0 else out
