"""
Error hierarchy
All domain failures derive from NonlocalityError so callers can catch one type
"""


class NonlocalityError(ValueError):
    """Base class for every domain error raised by this package"""


class DimensionMismatch(NonlocalityError):
    pass


class InvalidDensityOperator(NonlocalityError):
    """Matrix failed the Hermiticity / trace / positivity checks"""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NotXType(NonlocalityError):
    pass


class UnknownMode(NonlocalityError):
    pass


class WrongKeepCount(NonlocalityError):
    pass


class NonUnitVector(NonlocalityError):
    pass


class OutOfRange(NonlocalityError):
    pass


class NonPositiveParameter(NonlocalityError):
    pass


class NonPositiveMass(NonPositiveParameter):
    pass


class NariaiViolation(NonlocalityError):
    """3·M·√Λ reached the Nariai limit (horizons merge)"""


class InvalidScenario(NonlocalityError):
    pass


class InvalidConfig(NonlocalityError):
    pass


class UnknownPreset(InvalidConfig):
    pass


class ParseError(NonlocalityError):
    pass
