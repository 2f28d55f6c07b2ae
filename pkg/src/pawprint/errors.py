"""Exception types shared across the toolkit."""


class PawprintError(Exception):
    """Base class for all toolkit errors."""


class DatasetError(PawprintError):
    """Dataset directory or image file cannot be used."""


class ShapeRejection(PawprintError):
    """A network architecture collapses the spatial dimensions below 1.

    Carries ``layer`` (1-based index of the offending layer) so search code
    can report which stage failed.
    """

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer


class ConvergenceError(PawprintError):
    """An iterative solver hit its iteration cap.

    ``iterations`` records how many iterations ran before giving up.
    """

    def __init__(self, message, iterations):
        super().__init__(message)
        self.iterations = iterations


class ParseError(PawprintError):
    """A structured text file violates its grammar.

    ``line`` and ``column`` locate the first violation (1-based; column may
    be None when the whole line is at fault).
    """

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}: " if column is None else f"line {line}, column {column}: "
        super().__init__(loc + message)
        self.line = line
        self.column = column


class ContainerError(PawprintError):
    """A serialized model container is malformed or unsupported."""
