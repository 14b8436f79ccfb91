"""CLI module: run configs, command dispatch and bit-stable reports."""


class UsageError(ValueError):
    """Bad flags or config; `path` locates the offending JSON field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message
