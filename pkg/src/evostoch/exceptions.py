"""Exception types raised by evostoch."""


class ConfigurationError(ValueError):
    """An option or parameter is outside its documented range."""


class DataFormatError(ValueError):
    """Input data could not be parsed or failed validation.

    ``source`` and ``row`` locate the offending input when known.
    """

    def __init__(self, message, source=None, row=None):
        self.source = source
        self.row = row
        where = []
        if source is not None:
            where.append(str(source))
        if row is not None:
            where.append(f"row {row}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class NoValidSolutionError(RuntimeError):
    """The evolutionary search never produced a valid individual."""
