"""Centres of mass of signed measures on constant-curvature model spaces,
Riemannian barycentric charts, and the certificates that guarantee them."""
from .certificates import (
    Certificate,
    chart_certificate,
    contained_ball_radius,
    convexity_certificate,
    corollary_certificate,
    distortion_bound,
    gradient_outward_certificate,
    linear_tan_bounds_check,
    rho0,
    theorem_com_certificate,
    tilde_r_max,
)
from .chart import (
    BarycentricChart,
    FacetCheck,
    build_chart,
    differential_min_singular_value,
    forward_map,
    forward_map_many,
    inverse_map,
    inverse_map_many,
    karcher_mean,
    orientation,
    shared_facet_check,
)
from .energy import CurvatureBounds, energy, f_kappa, gradient, second_derivative_lower_bound
from .errors import (
    AntipodalPoints,
    CertificateFailed,
    DomainError,
    GeometryError,
    MaxIterations,
    NotRealizable,
    SingularSystem,
    SolverError,
    SpaceMismatch,
    VerificationError,
)
from .model_spaces import (
    ModelPoint,
    ModelSpace,
    TangentVector,
    angle,
    cosine_rule_angle,
    cosine_rule_side,
    distance,
    exp,
    log,
    tangent,
)
from .signed_measures import SignedDiscreteMeasure, jordan_masses, normalize, support_radius
from .simplex_geometry import (
    EdgeLengthMatrix,
    EuclideanSimplex,
    barycentric_coords_euclidean,
    barycentric_gradients,
    lambda_minus,
    realize_from_edge_lengths,
    thickness,
)

__version__ = "0.1.0"
