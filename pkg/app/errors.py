"""Exception hierarchy for quiver construction, counting and corpus I/O"""


class DeBruijnError(ValueError):
    """Base class for every precondition failure raised by the toolkit"""


class AlphabetError(DeBruijnError):
    """Empty or duplicated alphabet, symbol outside the alphabet, or mismatched alphabets"""


class WordError(DeBruijnError):
    pass


class OrderError(DeBruijnError):
    """Order k outside 1..len(word)-1"""


class QuiverMismatchError(DeBruijnError):
    """Quivers of different order, alphabet or vertex scheme combined"""


class NotEulerianError(DeBruijnError):
    """In-degree differs from out-degree at some vertex"""


class DisconnectedQuiverError(DeBruijnError):
    pass


class EmptyQuiverError(DeBruijnError):
    pass


class NumericalInstabilityError(DeBruijnError):
    """Determinant came out nonpositive or non-finite"""


class GuardExceededError(DeBruijnError):
    """Brute-force search or exact result larger than its configured limit"""


class DomainError(DeBruijnError):
    """Arguments outside the domain of a closed-form expression"""


class FastaFormatError(DeBruijnError):
    pass


class GenBankFormatError(DeBruijnError):
    pass


class LabelCountError(DeBruijnError):
    pass


class DistanceMatrixError(DeBruijnError):
    pass


__all__ = [
    "DeBruijnError",
    "AlphabetError",
    "WordError",
    "OrderError",
    "QuiverMismatchError",
    "NotEulerianError",
    "DisconnectedQuiverError",
    "EmptyQuiverError",
    "NumericalInstabilityError",
    "GuardExceededError",
    "DomainError",
    "FastaFormatError",
    "GenBankFormatError",
    "LabelCountError",
    "DistanceMatrixError",
]
