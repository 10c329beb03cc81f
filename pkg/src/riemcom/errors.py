"""Exception hierarchy."""


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class SpaceMismatch(GeometryError):
    pass


class DomainError(GeometryError):
    """An argument lies outside the region where an operation is defined."""


class AntipodalPoints(DomainError):
    """Logarithm requested for (numerically) antipodal points on a sphere."""


class NotRealizable(GeometryError):
    """No Euclidean simplex has the requested edge lengths."""


class SingularSystem(GeometryError):
    """The stationarity system of the inverse chart map is rank deficient."""


class CertificateFailed(RuntimeError):
    """A sufficient condition did not hold and the caller did not force."""

    def __init__(self, certificate):
        self.certificate = certificate
        failed = certificate.failed_component or certificate.name
        super().__init__(
            f"certificate {certificate.name!r} not satisfied "
            f"(failing: {failed}, margin={certificate.margin:.6g})"
        )


class SolverError(RuntimeError):
    """The centre-of-mass iteration did not converge."""


class MaxIterations(SolverError):
    pass


class VerificationError(AssertionError):
    """A numerical check of an analytic statement failed."""
