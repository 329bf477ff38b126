"""
Exception types shared by the positive-map toolkit
"""


class PosmapError(Exception):
    """Base class for all toolkit errors"""


class DimensionError(PosmapError, ValueError):
    """Operands have incompatible or invalid dimensions"""


class HermiticityError(PosmapError, ValueError):
    """A matrix required to be Hermitian deviates beyond tolerance"""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class CompositionMismatch(PosmapError, AssertionError):
    """The direct and tensor-route Choi matrices of a composition disagree"""


class ConeError(PosmapError):
    """A mapping cone cannot be built from the given generators"""


class HypothesisError(PosmapError):
    """A hypothesis of a verification routine does not hold"""

    def __init__(self, hypothesis: str, message: str):
        super().__init__(f"{hypothesis}: {message}")
        self.hypothesis = hypothesis


class MapFileError(PosmapError):
    """A map file is malformed; `field` names the offending entry"""

    def __init__(self, field: str, message: str, path: str = ""):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.path = path


class UsageError(PosmapError):
    """Bad command line"""
