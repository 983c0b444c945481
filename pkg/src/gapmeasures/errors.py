"""Exception hierarchy.

Numeric failures derive from :class:`NumericError` so the CLI can map them
to their own exit status; malformed input files raise :class:`FormatError`.
"""


class GapError(Exception):
    """Base class for every error raised by this package."""


class NumericError(GapError):
    pass


class FormatError(GapError):
    pass


class NonFinite(NumericError):
    pass


class AsymmetryExceeded(NumericError):
    def __init__(self, deviation):
        super().__init__(f"matrix is not Hermitian: max |M_ij - conj(M_ji)| = {deviation:.3e}")
        self.deviation = deviation


class ConvergenceFailure(NumericError):
    pass


class NotPositive(NumericError):
    def __init__(self, eigenvalue):
        super().__init__(f"operator is not positive: eigenvalue {eigenvalue:.3e}")
        self.eigenvalue = eigenvalue


class NotNormalized(NumericError):
    pass


class EmptySupport(NumericError):
    pass


class OffSupport(NumericError):
    pass


class ZeroVector(NumericError):
    pass


class NonzeroMean(GapError):
    pass


class TailBoundTooLoose(NumericError):
    pass


class DimMismatch(GapError):
    pass


class EmptyBatch(GapError):
    pass


class NotOnSphere(NumericError):
    pass
