"""Exception types shared across the package.

Validation errors signal bad input (wrong shapes, not a contraction, a
point outside the open ball).  Certification errors signal that a computed
object failed one of its own invariants; they carry enough context to name
the violated property.
"""


class RowballError(Exception):
    """Base class for all package errors."""


class ValidationError(RowballError):
    """Input rejected before any computation was attempted."""


class CertificationError(RowballError):
    """A computed result failed its post-condition checks."""


class ShapeMismatch(ValidationError):
    pass


class AmbientMismatch(ValidationError):
    pass


class NotContained(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class SignificantlyNegativeEigenvalue(ValidationError):
    pass


class NotARowContraction(ValidationError):
    pass


class NotStrictlyInsideBall(ValidationError):
    pass


class NotPolynomial(ValidationError):
    pass


class NotAnIsometry(ValidationError):
    pass


class CouplingsNotZero(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NearSingularResolvent(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class CompressionResidualExceeded(CertificationError):
    pass


class CertificationFailed(CertificationError):
    pass


class DefectNotRankOne(CertificationError):
    pass
