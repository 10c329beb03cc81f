"""Riemannian barycentric coordinates on model spaces.

The core is a batched damped gradient iteration for the minimiser of
``0.5 * sum_i w_i d(x, p_i)^2`` over a closed ball, with weights of any sign.
A chart pairs a point set ``sigma`` with a Euclidean reference simplex of the
same edge lengths and maps parameter points ``u`` to the minimiser for the
affine barycentric weights of ``u``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import (
    Certificate,
    chart_certificate,
    convexity_certificate,
    gradient_outward_certificate,
    theorem_com_certificate,
)
from .energy import CurvatureBounds, energy_raw, gradient_raw
from .errors import (
    CertificateFailed,
    DomainError,
    GeometryError,
    MaxIterations,
    SingularSystem,
    SolverError,
)
from .model_spaces import ModelPoint, ModelSpace
from .signed_measures import SignedDiscreteMeasure
from .simplex_geometry import (
    EdgeLengthMatrix,
    EuclideanSimplex,
    barycentric_coords_euclidean,
    realize_from_edge_lengths,
)

MAX_ITER = 10_000
MAX_HALVINGS = 60
FACET_TOL = 1e-8
_EPS = np.finfo(float).eps


@dataclass
class SolverInfo:
    iterations: int
    grad_norm: float
    energies: list[float] = field(default_factory=list)
    certificate: Certificate | None = None


def _solve(space: ModelSpace, P, W, c, rho, tol, max_iter=MAX_ITER, trace=False):
    """Minimise the energy for every row of ``W`` inside the closed ball B(c, rho).

    Each step is ``x <- exp_x(-tau grad)``. ``tau`` starts at the inverse of the
    total mass (the exact step in flat space) and is halved until the energy
    decreases and the iterate stays in the ball. Near convergence, where energy
    differences drop below rounding, a step is also accepted if it keeps the
    energy within rounding and reduces the gradient norm.
    """
    P = np.asarray(P, dtype=float)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    B = len(W)
    c = np.asarray(c, dtype=float)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (B,))

    mu_p = np.clip(W, 0, None).sum(axis=1)
    mu_m = np.clip(-W, 0, None).sum(axis=1)
    total = mu_p - mu_m
    tau0 = np.where(total > 0, 1.0 / np.where(total > 0, total, 1.0), 1.0 / (mu_p + mu_m))
    absW = np.abs(W)
    max_step = 0.5 * space.injectivity_radius

    def evaluate(X, rows):
        d = space.dist(X[:, None, :], P)
        E = 0.5 * np.sum(W[rows] * d * d, axis=1)
        scale = 0.5 * np.sum(absW[rows] * d * d, axis=1)
        G = space.to_tangent(X, gradient_raw(space, P, W[rows], X))
        return E, scale, G, space.norm(G)

    X = np.tile(c, (B, 1))
    E, Escale, G, gn = evaluate(X, np.arange(B))
    iters = np.zeros(B, dtype=int)
    energies = [float(E[0])] if trace else []
    active = gn > tol

    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        tau = tau0[idx].copy()
        Xa, Ga, Ea, gna = X[idx], G[idx], E[idx], gn[idx]
        floor = 64.0 * _EPS * Escale[idx] + 1e-300
        pending = np.ones(len(idx), dtype=bool)
        for _h in range(MAX_HALVINGS):
            j = np.flatnonzero(pending)
            if len(j) == 0:
                break
            step = tau[j] * gna[j]
            ok = step < max_step
            cand = Xa[j].copy()
            if ok.any():
                cand[ok] = space.exp_map(Xa[j][ok], -tau[j][ok, None] * Ga[j][ok])
                ok[ok] = space.dist(c, cand[ok]) <= rho
            if ok.any():
                jj = j[ok]
                Ec, Sc, Gc, gnc = evaluate(cand[ok], idx[jj])
                good = (Ec < Ea[jj]) | ((Ec <= Ea[jj] + floor[jj]) & (gnc < gna[jj]))
                # accepted steps never raise the energy beyond rounding
                assert np.all(Ec[good] <= Ea[jj][good] + floor[jj][good])
                acc = jj[good]
                rows = idx[acc]
                X[rows], E[rows], Escale[rows], G[rows], gn[rows] = (
                    cand[ok][good], Ec[good], Sc[good], Gc[good], gnc[good])
                pending[acc] = False
            tau[pending] *= 0.5
        if pending.any():
            raise SolverError(
                f"line search failed for {int(pending.sum())} of {B} problems "
                f"(gradient norm {float(gna[pending].max()):.3g})"
            )
        iters[idx] += 1
        if trace:
            energies.append(float(E[0]))
        active = gn > tol
    else:
        if active.any():
            raise MaxIterations(f"no convergence after {max_iter} iterations")
    return X, gn, iters, energies


def karcher_mean(
    m: SignedDiscreteMeasure,
    c: ModelPoint,
    rho: float,
    bounds: CurvatureBounds,
    *,
    iota: float | None = None,
    force: bool = False,
    tol: float = 1e-10,
    max_iter: int = MAX_ITER,
    return_info: bool = False,
):
    """Centre of mass of a signed measure in the ball B(c, rho).

    Refuses to run unless the existence/uniqueness certificate holds, or
    ``force`` is set. Stops when the gradient norm is at most
    ``tol * rho * (mu_plus + mu_minus)``.
    """
    cert = None
    try:
        cert = theorem_com_certificate(m, c, rho, bounds, iota)
    except DomainError:
        if not force:
            raise
    if cert is not None and not cert.satisfied and not force:
        raise CertificateFailed(cert)
    threshold = tol * rho * (m.mu_plus + m.mu_minus)
    X, gn, iters, energies = _solve(
        m.space, m.coords, m.weights, c.ambient, rho, threshold, max_iter, trace=return_info
    )
    x = ModelPoint(m.space, X[0])
    if return_info:
        return x, SolverInfo(int(iters[0]), float(gn[0]), energies, cert)
    return x


# -- charts -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BarycentricChart:
    space: ModelSpace
    sigma: np.ndarray
    reference: EuclideanSimplex
    s: float
    anchor_vertex: int
    rho: float
    L: float
    lambda_abs: float
    certificate: Certificate
    forced: bool = False
    tol: float = 1e-12

    @property
    def n(self) -> int:
        return self.space.dimension

    @property
    def t(self) -> float:
        """Thickness measured against the chart's edge bound ``L``."""
        return self.reference.a / (self.n * self.L)

    @property
    def center(self) -> ModelPoint:
        return ModelPoint(self.space, self.sigma[self.anchor_vertex])

    @property
    def sigma_points(self) -> tuple[ModelPoint, ...]:
        return tuple(ModelPoint(self.space, p) for p in self.sigma)

    @property
    def anchor_reference(self) -> np.ndarray:
        return self.reference.vertices[self.anchor_vertex]

    @property
    def domain_radius(self) -> float:
        return self.s * self.L

    @property
    def bounds(self) -> CurvatureBounds:
        return CurvatureBounds.symmetric(self.lambda_abs)

    @property
    def support_radius(self) -> float:
        return float(np.max(self.space.dist(self.sigma[self.anchor_vertex], self.sigma)))


def build_chart(
    space: ModelSpace,
    sigma,
    *,
    s: float = 1.0,
    anchor: int = 0,
    rho: float | None = None,
    L: float | None = None,
    lambda_abs: float | None = None,
    force: bool = False,
) -> BarycentricChart:
    """Certify and build the barycentric chart of ``n+1`` points.

    ``L`` defaults to the longest geodesic edge and may be raised to share a
    bound between charts. ``rho`` defaults to a point just above the lower end
    of the admissible interval, which keeps the distortion bound small.
    """
    if not isinstance(sigma, np.ndarray) and len(sigma) and isinstance(sigma[0], ModelPoint):
        sigma = np.stack([p.ambient for p in sigma])
    P = np.array(sigma, dtype=float)
    n = space.dimension
    if P.shape != (n + 1, space.ambient_dim):
        raise GeometryError(f"need {n + 1} points of {space}, got array of shape {P.shape}")
    for row in P:
        ModelPoint(space, row)
    if not 0 <= anchor <= n:
        raise GeometryError(f"anchor index {anchor} out of range")
    ref = realize_from_edge_lengths(EdgeLengthMatrix.from_points(space, P))
    Lmax = ref.L
    if L is None:
        L = Lmax
    elif L < Lmax * (1 - 1e-12):
        raise GeometryError(f"L={L} is below the longest edge {Lmax}")
    if lambda_abs is None:
        lambda_abs = abs(space.curvature)
    elif lambda_abs < abs(space.curvature):
        raise GeometryError("lambda_abs must bound |curvature|")
    t = ref.a / (n * L)
    cert = chart_certificate(L, t, s, lambda_abs)
    cert = Certificate(
        cert.name, cert.satisfied, cert.margin,
        {**cert.inputs, "L_equals_max_edge": bool(L == Lmax)},
        cert.interval, cert.components, cert.failed_component,
    )
    if not cert.satisfied and not force:
        raise CertificateFailed(cert)
    lo, hi = cert.interval
    if rho is None:
        rho = min(lo * (1.0 + 1e-3), 0.5 * (lo + hi)) if lo < hi else lo * (1.0 + 1e-3)
    elif not (lo < rho < hi) and not force:
        raise DomainError(f"rho={rho} outside the admissible interval ({lo}, {hi})")
    P.setflags(write=False)
    return BarycentricChart(space, P, ref, float(s), int(anchor), float(rho), float(L),
                            float(lambda_abs), cert, bool(force))


def _in_domain(chart: BarycentricChart, U) -> np.ndarray:
    """Membership in the closed ball B(v, sL); with L the longest edge the
    reference vertices sit on its boundary when s = 1."""
    dist = np.linalg.norm(U - chart.anchor_reference, axis=-1)
    return dist <= chart.domain_radius * (1 + 1e-12)


def _check_weights(chart: BarycentricChart, lam: np.ndarray):
    """Existence/uniqueness conditions for every weight row (skipped when forced)."""
    if chart.forced:
        return
    r = chart.support_radius
    bounds = chart.bounds
    mu_p = np.clip(lam, 0, None).sum(axis=1)
    mu_m = np.clip(-lam, 0, None).sum(axis=1)
    for a, b in {(float(x), float(y)) for x, y in zip(mu_p, mu_m)}:
        out = gradient_outward_certificate(a, b, chart.rho, r)
        conv = convexity_certificate(a, b, chart.rho, bounds)
        if not out.satisfied:
            raise CertificateFailed(out)
        if not conv.satisfied:
            raise CertificateFailed(conv)


def _forward(chart: BarycentricChart, U, check_domain=True):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != chart.n:
        raise GeometryError(f"parameter points must have {chart.n} coordinates")
    if check_domain and not chart.forced:
        if np.any(~_in_domain(chart, U)):
            raise DomainError("parameter point outside the chart domain B(v, sL)")
    lam = barycentric_coords_euclidean(chart.reference, U)
    _check_weights(chart, lam)
    thresh = chart.tol * chart.rho * np.abs(lam).sum(axis=1)
    X, _, _, _ = _solve(chart.space, chart.sigma, lam, chart.sigma[chart.anchor_vertex],
                        chart.rho, thresh)
    return X


def forward_map_many(chart: BarycentricChart, U) -> np.ndarray:
    """Ambient coordinates of the images of parameter points ``U`` (shape ``(B, n)``)."""
    return _forward(chart, U)


def forward_map(chart: BarycentricChart, u) -> ModelPoint:
    return ModelPoint(chart.space, _forward(chart, np.asarray(u, dtype=float)[None, :])[0])


def inverse_map_many(chart: BarycentricChart, X, check: bool = True) -> np.ndarray:
    """Barycentric weights of points ``X`` (ambient, shape ``(B, D)``).

    At the minimiser ``sum_i lam_i log_x(p_i) = 0``; with ``sum_i lam_i = 1``
    this is a square linear system in the weights. With ``check`` the weights
    are mapped forward again and must land back on ``X`` from inside the domain.
    """
    space = chart.space
    X = np.atleast_2d(np.asarray(X, dtype=float))
    B, n = len(X), chart.n
    V = space.log_map(X[:, None, :], chart.sigma)
    F = space.frame(X)
    coords = space.inner(F[:, None, :, :], V[:, :, None, :]) / chart.L  # (B, k, n)
    A = np.ones((B, n + 1, n + 1))
    A[:, :n, :] = np.swapaxes(coords, 1, 2)
    if not np.all(np.isfinite(A)):
        raise SingularSystem("stationarity system has non-finite entries")
    cond = np.linalg.cond(A)
    if np.any(~np.isfinite(cond) | (cond > 1e10)):
        raise SingularSystem(f"stationarity system is singular (cond {np.max(cond):.3g})")
    rhs = np.zeros((B, n + 1))
    rhs[:, n] = 1.0
    lam = np.linalg.solve(A, rhs[..., None])[..., 0]
    if check:
        U = lam @ chart.reference.vertices
        if np.any(~_in_domain(chart, U)):
            raise DomainError("point lies outside the image of the chart domain")
        back = _forward(chart, U)
        err = space.dist(back, X)
        if np.any(err > 1e-8):
            raise DomainError(f"round trip failed (error {float(err.max()):.3g})")
    return lam


def inverse_map(chart: BarycentricChart, x: ModelPoint, check: bool = True) -> np.ndarray:
    if x.space != chart.space:
        raise GeometryError("point is not in the chart's space")
    return inverse_map_many(chart, x.ambient[None, :], check=check)[0]


def jacobians(chart: BarycentricChart, U, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobians of the forward map at ``U`` (shape ``(B, n, n)``),
    expressed in normal coordinates at each image point."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    B, n = U.shape
    if not chart.forced:
        if np.any(~_in_domain(chart, U)):
            raise DomainError("parameter point outside the chart domain B(v, sL)")
    h = 1e-5 * chart.L if h is None else h
    E = np.eye(n) * h
    stencil = np.concatenate([U[:, None, :] + E[None], U[:, None, :] - E[None], U[:, None, :]], axis=1)
    Y = _forward(chart, stencil.reshape(-1, n), check_domain=False).reshape(B, 2 * n + 1, -1)
    base = Y[:, -1, :]
    plus = chart.space.to_normal(base[:, None, :], Y[:, :n, :])
    minus = chart.space.to_normal(base[:, None, :], Y[:, n:2 * n, :])
    return np.swapaxes((plus - minus) / (2 * h), 1, 2)


def differential_min_singular_value(chart: BarycentricChart, u) -> float:
    J = jacobians(chart, np.asarray(u, dtype=float)[None, :])[0]
    return float(np.linalg.svd(J, compute_uv=False).min())


def orientation(chart: BarycentricChart) -> int:
    """Sign of the Jacobian determinant at the anchor vertex, in the tangent
    frame ``space.frame`` of that vertex. The reference simplex is positively
    oriented by construction, so this is the orientation of ``sigma``."""
    J = jacobians(chart, chart.anchor_reference[None, :])[0]
    det = float(np.linalg.det(J))
    if abs(det) <= 1e-10:
        raise GeometryError("degenerate chart: Jacobian determinant vanishes")
    return 1 if det > 0 else -1


# -- shared facets --------------------------------------------------------------


@dataclass(frozen=True)
class FacetCheck:
    status: str  # "pass", "fail" or "not_applicable"
    worst_violation: float = math.nan
    reason: str = ""
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def simplex_lattice(n: int, depth: int) -> np.ndarray:
    """All weight vectors with entries in ``{0, 1/depth, ..., 1}`` summing to one."""
    rows = []
    for bars in itertools.combinations(range(depth + n), n):
        edges = (-1,) + bars + (depth + n,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(n + 1)])
    return np.asarray(rows, dtype=float) / depth


def _match(P, Q, tol=1e-12):
    """index in Q of each row of P, or -1."""
    out = []
    for p in P:
        d = np.linalg.norm(Q - p, axis=1)
        j = int(np.argmin(d))
        out.append(j if d[j] <= tol * (1 + np.linalg.norm(p)) else -1)
    return np.asarray(out)


def _one_side(a: BarycentricChart, b: BarycentricChart, ia: int, ib: int, lam_a: np.ndarray):
    """Worst sign violation of b's coordinate ``ib`` over a's simplex samples."""
    U = lam_a @ a.reference.vertices
    X = _forward(a, U)
    lam_b = inverse_map_many(b, X, check=False)
    Ub = lam_b @ b.reference.vertices
    outside = int(np.sum(~_in_domain(b, Ub)))
    facet = lam_a[:, ia] == 0
    viol = np.where(facet, np.abs(lam_b[:, ib]), np.maximum(lam_b[:, ib], 0.0))
    return float(viol.max()), outside


def shared_facet_check(
    chart_sigma: BarycentricChart,
    chart_tau: BarycentricChart,
    samples: int = 1000,
    *,
    depth: int = 40,
    seed: int = 0,
) -> FacetCheck:
    """Check that two compatibly oriented charts sharing ``n`` vertices meet
    only in the shared facet.

    Samples each Riemannian simplex (a barycentric lattice plus ``samples``
    random weight vectors), pulls the samples back through the other chart,
    and requires the coordinate of the other chart's opposite vertex to be
    nonpositive, and zero on the facet itself.
    """
    a, b = chart_sigma, chart_tau
    na = lambda reason: FacetCheck("not_applicable", reason=reason)
    if a.space != b.space:
        return na("charts live in different spaces")
    n = a.n
    in_b = _match(a.sigma, b.sigma)
    in_a = _match(b.sigma, a.sigma)
    if np.sum(in_b >= 0) != n or np.sum(in_a >= 0) != n:
        return na("charts must share exactly n vertices")
    if abs(a.s - 1.5) > 1e-12 or abs(b.s - 1.5) > 1e-12:
        return na("both charts need scale s = 3/2")
    if abs(a.L - b.L) > 1e-12 * max(a.L, b.L):
        return na("charts need a common edge bound L")
    if not (a.certificate.satisfied and b.certificate.satisfied):
        return na("both charts must be certified")
    if in_b[a.anchor_vertex] != b.anchor_vertex:
        return na("charts must be anchored at the same shared vertex")
    if orientation(a) != orientation(b):
        return na("charts have opposite orientations")
    ip = int(np.flatnonzero(in_b < 0)[0])
    iq = int(np.flatnonzero(in_a < 0)[0])
    rng = np.random.default_rng(seed)
    lattice = simplex_lattice(n, depth)
    lam_a = np.vstack([lattice, rng.dirichlet(np.ones(n + 1), size=samples)])
    lam_b = np.vstack([lattice, rng.dirichlet(np.ones(n + 1), size=samples)])
    worst_ab, out_ab = _one_side(a, b, ip, iq, lam_a)
    worst_ba, out_ba = _one_side(b, a, iq, ip, lam_b)
    worst = max(worst_ab, worst_ba)
    outside = out_ab + out_ba
    total = len(lam_a) + len(lam_b)
    if outside:
        return FacetCheck("fail", worst, f"{outside} samples fall outside the other chart's domain", total)
    if worst > FACET_TOL:
        return FacetCheck("fail", worst, "simplices overlap beyond the shared facet", total)
    return FacetCheck("pass", worst, "", total)
