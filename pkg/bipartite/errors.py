class bipartiteError(Exception):
    """Base class for every error raised by the package."""


class dimensionError(bipartiteError):
    """Operands live on different grids or have incompatible shapes."""


class preconditionError(bipartiteError):
    """An operation was called outside its documented domain."""


class numericError(bipartiteError):
    """A numerical routine failed or produced an unusable result."""


class zeroProbabilityError(numericError):
    """Collapse onto a level that carries no probability."""


class configurationError(bipartiteError):
    """
    Invalid configuration document.

    Attributes
    ----------
    lines : tuple of int
        1-based line numbers the error refers to, empty for defaults.
    """

    def __init__(self, message, lines=()):
        self.lines = tuple(lines)
        if self.lines:
            where = 'line' if len(self.lines) == 1 else 'lines'
            message = '{} {}: {}'.format(where, ', '.join(str(n) for n in self.lines), message)
        super().__init__(message)


class truncationWarning(UserWarning):
    """
    An eigenbasis expansion captured less weight than required.

    Attributes
    ----------
    deficit : float
        1 - captured weight
    """

    def __init__(self, message, deficit):
        self.deficit = deficit
        super().__init__(message)
