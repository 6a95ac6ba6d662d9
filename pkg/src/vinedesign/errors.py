class ZeroVector(ValueError):
    """An angle was requested for a vector with (near) zero norm."""


class ZeroDirection(ValueError):
    """Aim angles were requested between two coincident points."""


class ParseError(ValueError):
    """A task or solution file could not be parsed."""

    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(ValueError):
    """A parsed task violates one of its invariants."""


class InvalidConfig(ValueError):
    """Engine configuration out of range."""


class DegenerateInput(ValueError):
    """Statistical test input too small or non-finite."""
