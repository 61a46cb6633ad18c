"""Exception hierarchy shared by the library and the CLI."""


class MwrcError(Exception):
    """Base class for all library errors."""


class ValidationError(MwrcError, ValueError):
    """Malformed or inconsistent input (pmf, channel, spec file, lengths)."""


class SpecMismatchError(MwrcError, ValueError):
    """Operands belong to different finite fields."""


class DomainError(MwrcError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvalidClassError(MwrcError, ValueError):
    """A source profile does not belong to the class an operation requires."""


class TooLargeError(MwrcError):
    """A desk-scale cap (enumeration size, search space) would be exceeded."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap
