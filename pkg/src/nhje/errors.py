"""Exception hierarchy.

``NumericalError`` subclasses signal that a computation could not deliver a
trustworthy number; the CLI maps them to exit status 3.
"""


class NHJEError(Exception):
    pass


class InvalidInputError(NHJEError, ValueError):
    pass


class PreconditionError(NHJEError, ValueError):
    pass


class DomainError(NHJEError, ValueError):
    pass


class NumericalError(NHJEError, ArithmeticError):
    pass


class ExtinctionError(NumericalError):
    """Postselected norm fell below the extinction guard."""


class BranchAmbiguityError(NumericalError):
    """Phase unwrapping found two equally close branches; refine the grid."""


class AccuracyError(NumericalError):
    def __init__(self, message: str, defect: float):
        super().__init__(f"{message} (estimated defect {defect:.3e})")
        self.defect = defect


class ConfigError(NHJEError, ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
