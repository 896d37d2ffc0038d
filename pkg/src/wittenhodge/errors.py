"""Exception raised for inputs rejected before any numerics run."""


class ValidationError(ValueError):
    """Input rejected before any numerics ran (CLI exit code 2)."""

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail
