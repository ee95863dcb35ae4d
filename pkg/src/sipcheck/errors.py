"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Malformed spec, operator, vector, or mismatched dimensions."""


class DimensionMismatch(InvalidInput):
    def __init__(self, expected, got):
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class NumericalFailure(RuntimeError):
    """A numerical routine did not produce a trustworthy result."""
