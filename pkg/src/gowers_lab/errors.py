"""Exception hierarchy shared by every module."""


class GowersLabError(Exception):
    pass


class InvalidArgument(GowersLabError, ValueError):
    pass


class InvalidConductor(InvalidArgument):
    pass


class OutOfDomain(InvalidArgument):
    pass


class ResourceError(GowersLabError):
    """Raised when a requested computation exceeds its enumeration budget."""


class DegenerateConfig(GowersLabError):
    pass


class NumericConsistencyError(GowersLabError, ArithmeticError):
    pass
