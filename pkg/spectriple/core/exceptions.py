class SpectralTripleException(Exception):
    """General spectriple exception"""


class TimeOutException(SpectralTripleException):
    """Raised when a certification batch exceeds its time budget."""


class InvalidInputError(SpectralTripleException):
    """Non-finite matrix entries or out-of-range parameters"""

    def __init__(self, message="invalid input"):
        super().__init__(message)


class MatrixSizeError(SpectralTripleException):
    """Requested matrix dimensions exceed MAX_MATRIX_DIM_INT"""

    def __init__(self, message="matrix dimensions too large"):
        super().__init__(message)


class TripleStructureError(SpectralTripleException):
    """Operators of a triple do not fit together (shapes, missing data)"""

    def __init__(self, message="malformed finite spectral triple"):
        super().__init__(message)


class TripleFormatError(TripleStructureError):
    """Triple document could not be parsed"""

    def __init__(self, message="malformed triple document"):
        super().__init__(message)


class RealStructureClassificationError(SpectralTripleException):
    """Real structure matches none of the block patterns of its KO dimension"""

    def __init__(self, message="real structure classification failed"):
        super().__init__(message)


class GaugeException(SpectralTripleException):
    """General gauge exception"""


class NotSelfAdjointError(GaugeException):
    """Inner fluctuation is not self-adjoint"""

    def __init__(self, message="one-form is not self-adjoint"):
        super().__init__(message)


class NotUnitaryError(GaugeException):
    """Gauge element is not unitary"""

    def __init__(self, message="element is not unitary"):
        super().__init__(message)


class NotInAlgebraError(GaugeException):
    """Matrix is not in the span of the represented algebra"""

    def __init__(self, message="element is not in the represented algebra"):
        super().__init__(message)


class GaugeCovarianceError(GaugeException):
    """fluctuate(A^u) differs from U fluctuate(A) U*"""

    def __init__(self, message="gauge covariance identity violated"):
        super().__init__(message)


class DistanceException(SpectralTripleException):
    """General distance exception"""


class UnsupportedRepresentationError(DistanceException):
    """Distance requested on a non-diagonal representation"""

    def __init__(self, message="representation is not diagonal"):
        super().__init__(message)


class DistanceConvergenceError(DistanceException):
    """Minimiser restarts disagree"""

    def __init__(self, message="distance restarts disagree"):
        super().__init__(message)


class CliffordConstructionError(SpectralTripleException):
    """No charge conjugation with the requested signs exists in the basis"""

    def __init__(self, message="charge conjugation construction failed"):
        super().__init__(message)


class TruncationError(SpectralTripleException):
    """Mode sum truncated too early"""

    def __init__(self, message="mode cut too small", required_mode_cut=None):
        super().__init__(message)
        self.required_mode_cut = required_mode_cut


class ModeSpaceError(SpectralTripleException):
    """Fourier mode set or gauge modes are not admissible"""

    def __init__(self, message="invalid mode space"):
        super().__init__(message)
