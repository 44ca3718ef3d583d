"""Exception hierarchy shared by every module of the package."""


class DerivatorError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedRing(DerivatorError):
    pass


class NotAComplex(DerivatorError):
    pass


class NotAChainMap(DerivatorError):
    pass


class NotAHomotopy(DerivatorError):
    pass


class NotFree(DerivatorError):
    pass


class ShapeMismatch(DerivatorError):
    pass


class UnknownObject(DerivatorError):
    pass


class NotACategory(DerivatorError):
    pass


class NotAFunctor(DerivatorError):
    pass


class NotAGroup(DerivatorError):
    pass


class NotNormal(DerivatorError):
    pass


class NotCompatible(DerivatorError):
    pass


class NotHomotopyCommutative(DerivatorError):
    pass


class UnsupportedPrime(DerivatorError):
    pass


class WindowExceeded(DerivatorError):
    pass


class Undetermined(DerivatorError):
    pass
