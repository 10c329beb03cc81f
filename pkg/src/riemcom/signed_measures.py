"""Discrete signed measures on a model space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SpaceMismatch
from .model_spaces import ModelPoint, ModelSpace

ZERO_MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignedDiscreteMeasure:
    """Weights ``weights[i]`` of arbitrary sign at ``points[i]``.

    Coordinates are kept as one ``(k, D)`` array; :attr:`points` gives the
    validated :class:`ModelPoint` view.
    """

    space: ModelSpace
    coords: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        P = np.array(self.coords, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if P.ndim != 2 or P.shape[1] != self.space.ambient_dim:
            raise GeometryError(f"coords must have shape (k, {self.space.ambient_dim}), got {P.shape}")
        if len(P) == 0 or len(P) != len(w):
            raise GeometryError("points and weights must have equal nonzero length")
        if not np.all(np.isfinite(w)):
            raise GeometryError("weights must be finite")
        # validates every point against the model
        for row in P:
            ModelPoint(self.space, row)
        P.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "coords", P)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, points, weights) -> "SignedDiscreteMeasure":
        points = list(points)
        if not points:
            raise GeometryError("empty measure")
        space = points[0].space
        for p in points:
            if p.space != space:
                raise SpaceMismatch("all support points must lie in one space")
        return cls(space, np.stack([p.ambient for p in points]), weights)

    @property
    def points(self) -> tuple[ModelPoint, ...]:
        return tuple(ModelPoint(self.space, row) for row in self.coords)

    def __len__(self):
        return len(self.weights)

    @property
    def mu_plus(self) -> float:
        return float(self.weights[self.weights > 0].sum())

    @property
    def mu_minus(self) -> float:
        return float(-self.weights[self.weights < 0].sum())

    @property
    def total_mass(self) -> float:
        return self.mu_plus - self.mu_minus

    def with_weights(self, weights) -> "SignedDiscreteMeasure":
        return SignedDiscreteMeasure(self.space, self.coords, weights)


def jordan_masses(m: SignedDiscreteMeasure) -> tuple[float, float]:
    """Masses of the positive and negative parts. Zero weights count in neither."""
    return m.mu_plus, m.mu_minus


def support_radius(m: SignedDiscreteMeasure, c: ModelPoint) -> float:
    """Radius of the smallest closed ball about ``c`` containing the support."""
    if c.space != m.space:
        raise SpaceMismatch("centre and measure live in different spaces")
    return float(np.max(m.space.dist(c.ambient, m.coords)))


def normalize(m: SignedDiscreteMeasure) -> SignedDiscreteMeasure:
    """Rescale the weights to total mass 1."""
    total = float(np.sum(m.weights))
    if abs(total) <= ZERO_MASS_TOL:
        raise GeometryError(f"cannot normalize a measure of total mass {total:.3g}")
    return m.with_weights(m.weights / total)
