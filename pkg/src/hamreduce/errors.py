"""Exception hierarchy shared across the package."""


class HamreduceError(Exception):
    """Base class for every error raised by this package."""


class InputError(HamreduceError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class CapExceeded(HamreduceError):
    """A desk-scale size cap was exceeded (CLI exit code 3)."""


class PromiseViolated(HamreduceError):
    """A promise problem instance falls in the forbidden gap (CLI exit code 4)."""
