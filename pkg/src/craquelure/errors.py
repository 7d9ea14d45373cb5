"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter violates its admissible range."""


class ConfigError(ValueError):
    """A configuration file is malformed or violates an invariant.

    Carries the offending line number or field name in the message.
    """


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The best iterate found so far is attached as ``iterate`` together with
    the corresponding ``report`` so callers can inspect or reuse it.
    """

    def __init__(self, message, iterate=None, report=None):
        super().__init__(message)
        self.iterate = iterate
        self.report = report
