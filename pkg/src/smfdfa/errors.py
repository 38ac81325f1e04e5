"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised for bad user-facing input: files, columns, malformed or
    out-of-domain values, invalid option combinations."""


class NumericalError(ArithmeticError):
    """Raised when a computation fails on admissible input, e.g. singular
    negative moments, degenerate spectra, or divergent training."""
