"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map it onto the
process status without a lookup table: 2 for bad input, 3 for numerical
failure.
"""


class OrdCDError(Exception):
    exit_code = 2


class InputError(OrdCDError):
    """Bad user input or data (exit code 2)."""


class ParseError(InputError):
    pass


class ValidationError(InputError):
    pass


class DegenerateColumn(InputError):
    pass


class NodeOutOfRange(InputError):
    pass


class InapplicableMove(InputError):
    pass


class WouldCreateCycle(InapplicableMove):
    pass


class TooManyNodes(InputError):
    pass


class TooManyEdges(InputError):
    pass


class NodeCountMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DegenerateLabels(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class NotNormalized(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidParentCode(InputError):
    pass


class NumericalError(OrdCDError):
    exit_code = 3


class DegenerateTarget(NumericalError):
    """Target column has fewer than two observed levels."""

    exit_code = 2


class SeparationDetected(NumericalError):
    """Parameters ran past the bound: the likelihood is maximised at infinity.

    ``model`` holds the fit evaluated at the last iterate inside the bound,
    which the scoring layer uses for a finite penalised score.
    """

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model
