class LabError(Exception):
    """Base class for every error raised by the lab apps."""


class ParameterError(LabError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class UnsupportedModelError(LabError, ValueError):
    """The graphon family has no implementation for the requested quantity."""


class SingularSystemError(LabError, ValueError):
    pass


class UnsupportedOrderError(LabError, ValueError):
    pass


class EmptyDataError(LabError, ValueError):
    """Raised when a filter, split or partition selects nothing."""


class MetricError(LabError, ValueError):
    pass


class ConfigError(LabError):
    """Invalid experiment configuration or a missing input file."""


class EdgeListParseError(LabError, ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
