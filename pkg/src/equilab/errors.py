class ValidationError(ValueError):
    """Invalid input. ``field`` names the offending parameter when there is one."""

    def __init__(self, message, field=None):
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
