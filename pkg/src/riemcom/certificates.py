"""Verdicts for the explicit sufficient conditions on centres of mass and
barycentric charts.

Every check returns a :class:`Certificate` carrying the margin of its decisive
inequality, so callers can map slack as well as pass/fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .energy import CurvatureBounds, theta_over_tan, theta_over_tanh
from .errors import DomainError
from .model_spaces import ModelPoint
from .signed_measures import SignedDiscreteMeasure, jordan_masses, support_radius

# constant in the linearised curvature condition
C_LIN = 1.0 + math.pi / 2.0


@dataclass(frozen=True)
class Certificate:
    name: str
    satisfied: bool
    margin: float
    inputs: dict[str, Any] = field(default_factory=dict)
    interval: tuple[float, float] | None = None
    components: tuple["Certificate", ...] = ()
    failed_component: str | None = None

    def __bool__(self):
        return self.satisfied

    def to_record(self) -> dict[str, Any]:
        """Flat, JSON-friendly record."""
        rec: dict[str, Any] = {
            "name": self.name,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "inputs": dict(self.inputs),
        }
        if self.interval is not None:
            rec["interval"] = list(self.interval)
            rec["interval_nonempty"] = self.interval[0] < self.interval[1]
        if self.components:
            rec["components"] = [c.to_record() for c in self.components]
        if self.failed_component:
            rec["failed_component"] = self.failed_component
        return rec


def _inv_sqrt(lam: float) -> float:
    return math.inf if lam <= 0 else 1.0 / math.sqrt(lam)


def rho0(iota: float, lambda_hi: float) -> float:
    """Radius cap ``min(iota/2, pi/(4 sqrt(lambda_hi)))``."""
    if not iota > 0:
        raise DomainError(f"injectivity radius must be positive, got {iota}")
    return min(iota / 2.0, math.pi / 4.0 * _inv_sqrt(lambda_hi))


def convexity_certificate(mu_plus, mu_minus, rho, bounds: CurvatureBounds) -> Certificate:
    """Strict convexity of the energy on a ball of radius ``rho``; the case is
    chosen by the signs of the curvature bounds."""
    lo, hi = bounds.lambda_lo, bounds.lambda_hi
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    th_lo = 2.0 * rho * math.sqrt(abs(lo))
    th_hi = 2.0 * rho * math.sqrt(abs(hi))
    if hi > 0 and th_hi >= math.pi / 2:
        raise DomainError(f"rho={rho} too large: 2 rho sqrt(lambda_hi) must be < pi/2")
    if lo >= 0:
        case = "nonnegative"
        margin = float(theta_over_tan(th_hi)) * mu_plus - mu_minus
    elif hi >= 0:
        case = "mixed"
        margin = float(theta_over_tan(th_hi)) * mu_plus - float(theta_over_tanh(th_lo)) * mu_minus
    else:
        case = "nonpositive"
        margin = mu_plus - float(theta_over_tanh(th_lo)) * mu_minus
    return Certificate(
        "convexity",
        margin > 0,
        margin,
        dict(mu_plus=mu_plus, mu_minus=mu_minus, rho=rho, lambda_lo=lo, lambda_hi=hi,
             theta_lo=th_lo, theta_hi=th_hi, case=case),
    )


def gradient_outward_certificate(mu_plus, mu_minus, rho, r) -> Certificate:
    """Gradient of the energy points out of the ball of radius ``rho`` when the
    support lies within radius ``r`` of the same centre."""
    if not 0 <= r < rho:
        raise DomainError(f"need 0 <= r < rho, got r={r}, rho={rho}")
    margin = (rho - r) * mu_plus - (rho + r) * mu_minus
    return Certificate(
        "gradient_outward",
        margin > 0,
        margin,
        dict(mu_plus=mu_plus, mu_minus=mu_minus, rho=rho, r=r),
    )


def theorem_com_certificate(
    m: SignedDiscreteMeasure,
    c: ModelPoint,
    rho: float,
    bounds: CurvatureBounds,
    iota: float | None = None,
) -> Certificate:
    """Existence and uniqueness of the centre of mass of ``m`` in B(c, rho)."""
    if iota is None:
        iota = m.space.injectivity_radius
    r = support_radius(m, c)
    if not r < rho:
        raise DomainError(f"support radius {r} is not below rho={rho}")
    mu_p, mu_m = jordan_masses(m)
    cap = rho0(iota, bounds.lambda_hi)
    radius = Certificate(
        "radius_cap",
        rho < cap,
        1.0 - rho / cap if math.isfinite(cap) else 1.0,
        dict(rho=rho, rho0=cap, iota=iota, lambda_hi=bounds.lambda_hi),
    )
    outward = gradient_outward_certificate(mu_p, mu_m, rho, r)
    if radius.satisfied:
        convex = convexity_certificate(mu_p, mu_m, rho, bounds)
    else:
        convex = Certificate("convexity", False, -math.inf, dict(reason="rho >= rho0"))
    parts = (radius, outward, convex)
    scaled = (radius.margin, outward.margin / (rho * (mu_p + mu_m)), convex.margin)
    failed = [p.name for p in parts if not p.satisfied]
    return Certificate(
        "centre_of_mass",
        not failed,
        min(scaled),
        dict(r=r, rho=rho, mu_plus=mu_p, mu_minus=mu_m, iota=iota,
             lambda_lo=bounds.lambda_lo, lambda_hi=bounds.lambda_hi),
        components=parts,
        failed_component=", ".join(failed) or None,
    )


def linear_tan_bounds_check(theta: float) -> tuple[float, float, float, float]:
    """Both sides of ``1 - 2 theta/pi <= theta/tan(theta)`` and
    ``1 + theta >= theta/tanh(theta)``.

    The tan pair is ``nan`` outside [0, pi/2).
    """
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    if theta < math.pi / 2:
        lhs_tan, rhs_tan = 1.0 - 2.0 * theta / math.pi, float(theta_over_tan(theta))
    else:
        lhs_tan = rhs_tan = math.nan
    return lhs_tan, rhs_tan, 1.0 + theta, float(theta_over_tanh(theta))


def corollary_certificate(mu_minus, r, rho, lambda_abs, iota: float = math.inf) -> Certificate:
    """Simplified condition for normalised measures under ``|K| <= lambda_abs``:
    ``(1 + 2 mu_minus) r < rho < pi/(4 sqrt(lambda_abs)) / (1 + C mu_minus)``."""
    if lambda_abs < 0:
        raise DomainError("lambda_abs must be nonnegative")
    lo = (1.0 + 2.0 * mu_minus) * r
    hi = math.pi / 4.0 * _inv_sqrt(lambda_abs) / (1.0 + C_LIN * mu_minus)
    hi = min(hi, iota / 2.0)
    margin = min(rho - lo, hi - rho)
    return Certificate(
        "corollary",
        lo < rho < hi,
        margin,
        dict(mu_minus=mu_minus, r=r, rho=rho, lambda_abs=lambda_abs, iota=iota),
        interval=(lo, hi),
        failed_component=None if lo < rho < hi else ("lower" if rho <= lo else "upper"),
    )


def chart_interval(L, t, s, lambda_abs) -> tuple[float, float]:
    lo = (1.0 + 2.0 * s / t) * L
    hi = math.pi / 4.0 * _inv_sqrt(lambda_abs) / (1.0 + C_LIN * s / t)
    return lo, hi


def chart_certificate(L, t, s, lambda_abs) -> Certificate:
    """Size/thickness condition ``t^2 >= 25 s^2 L sqrt(lambda_abs)`` under which
    the barycentric map on B(v, sL) is an embedding; reports the admissible
    interval for rho."""
    if s < 1:
        raise DomainError(f"scale must be >= 1, got {s}")
    # t == 1 only for a segment (n = 1); the bound still holds there
    if not 0 < t <= 1:
        raise DomainError(f"thickness must lie in (0, 1], got {t}")
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    margin = t * t - 25.0 * s * s * L * math.sqrt(lambda_abs)
    lo, hi = chart_interval(L, t, s, lambda_abs)
    if margin >= 0:
        assert lo < hi, "thickness condition holds but the rho-interval is empty"
    ok = margin >= 0 and lo < hi
    return Certificate(
        "chart",
        ok,
        margin,
        dict(L=L, t=t, s=s, lambda_abs=lambda_abs),
        interval=(lo, hi),
        failed_component=None if ok else "thickness",
    )


def tilde_r_max(L, t, lambda_abs) -> float:
    """Radius of a parameter ball about a reference vertex on which every
    barycentric weight vector satisfies the simplified existence condition."""
    x = L * math.sqrt(lambda_abs)
    if x == 0:
        return math.inf
    if x > math.pi / 16 * (1 + 1e-12):
        raise DomainError(f"L sqrt(lambda) = {x} exceeds pi/16")
    inner = max(-3.0 + math.pi / (4.0 * x), 1.0)
    return L * t / 3.0 * (-1.0 + math.sqrt(inner))


def contained_ball_radius(s, L) -> float:
    """Radius of a geodesic ball about the anchor vertex inside the chart image."""
    if s < 1:
        raise DomainError(f"scale must be >= 1, got {s}")
    rbar = (s - 18.0 / (25.0 * s)) * L
    if s >= 1.5:
        assert rbar >= L
    return rbar


def distortion_bound(lambda_abs, rho, t) -> float:
    """Relative metric distortion factor ``50 lambda rho^2 / t^2``."""
    if lambda_abs > 0 and rho > t / (6.0 * math.sqrt(lambda_abs)) * (1 + 1e-12):
        raise DomainError(f"rho={rho} exceeds t/(6 sqrt(lambda))")
    return 50.0 * lambda_abs * rho * rho / (t * t)
