class ParseError(Exception):
    """Syntax or static-typing failure, with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class TypeCheckError(ParseError):
    """Scoping or typing violation found by the static checker."""
