"""Exception hierarchy.

Every error raised on purpose by the library derives from ``VectkError``; the
CLI maps these onto its exit codes.
"""


class VectkError(Exception):
    """Base class for all library errors."""


class InputError(VectkError, ValueError):
    """Malformed or inconsistent input data."""


class NotHermitian(InputError):
    pass


class NotUnitary(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class AmbientMismatch(InputError):
    pass


class DegreeOutOfRange(InputError):
    pass


class CoverMismatch(InputError):
    pass


class TwistMismatch(InputError):
    pass


class UnknownScenario(InputError):
    pass


class EmbeddingTooSmall(InputError):
    pass


class NotACocycle(InputError):
    pass


class NotClosedSurface(InputError):
    pass


class NotProjectivelyFlat(InputError):
    pass


class IrrationalPhase(InputError):
    pass


class ComputationError(VectkError):
    """A well-formed input for which the requested construction does not exist."""


class CutoffOnSpectrum(ComputationError):
    pass


class NoGap(ComputationError):
    def __init__(self, message, patch=None):
        super().__init__(message)
        self.patch = patch


class IncompatibleSection(ComputationError):
    pass


class InconsistentIndex(ComputationError):
    pass
