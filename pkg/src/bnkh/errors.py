"""Exception hierarchy shared by every module."""


class BNKhError(Exception):
    """Base class for all engine errors."""


class InputError(BNKhError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class DuplicateLabel(InputError):
    pass


class OddLabel(InputError):
    pass


class NonRealizable(InputError):
    pass


class MultiComponent(InputError):
    pass


class InvalidDiagram(InputError):
    pass


class IdentityViolation(BNKhError):
    """A Frobenius-algebra axiom failed; the message names the axiom."""


class CapacityExceeded(BNKhError):
    """The generator count would exceed the configured memory budget."""


class UnknownResolution(InputError):
    pass


class NotAKnotComplex(BNKhError):
    pass


class EmptyBigrading(BNKhError):
    pass


class BadK(InputError):
    pass


class IllegalMove(InputError):
    pass


class BasepointViolation(IllegalMove):
    pass


class NotACycle(BNKhError):
    pass


class BasisMismatch(BNKhError):
    pass


class NonInvertibleBasisChange(BNKhError):
    pass


class NotDualPair(BNKhError):
    pass
