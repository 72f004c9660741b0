"""Exception types raised across the package."""


class CirclePrevError(Exception):
    """Base class for all errors raised by circleprev."""


class SchemaError(CirclePrevError, ValueError):
    """A JSON document does not match the expected layout."""


class OrderOutOfRange(CirclePrevError, ValueError):
    pass


class RegularityMismatch(CirclePrevError, ValueError):
    pass


class DegenerateComposition(CirclePrevError, ArithmeticError):
    """A composite would have delta == 1 and leave the group."""


class IdentityHasAllFixedPoints(CirclePrevError, ValueError):
    pass


class NotADiffeo(CirclePrevError, ValueError):
    pass


class NotADiffeoPath(NotADiffeo):
    pass


class ProbeError(CirclePrevError, ValueError):
    """Probe invariants violated at construction."""


class WindowOutsideDomain(CirclePrevError, ValueError):
    pass


class ZeroLambdaDerivative(CirclePrevError, ArithmeticError):
    pass


class SigmaZero(CirclePrevError, ValueError):
    pass


class LengthMismatch(CirclePrevError, ValueError):
    pass
