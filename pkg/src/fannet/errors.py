"""Exception types raised by fannet.

Every error derives from :class:`FannetError` so callers (and the CLI) can
catch the whole family in one place.
"""


class FannetError(Exception):
    pass


class DimensionMismatch(FannetError, ValueError):
    pass


class NonFiniteInput(FannetError, ValueError):
    pass


class GridTooLarge(FannetError):
    pass


class SingletonBox(FannetError, ValueError):
    pass


class BaselineMisclassified(FannetError):
    """The sample is not classified correctly at zero noise."""


class NoCorrectSamples(FannetError):
    pass


class InvalidCounterexample(FannetError, ValueError):
    pass


class NodeOutOfRange(FannetError, IndexError):
    pass


class InvalidCuts(FannetError, ValueError):
    pass


class UnsupportedActivation(FannetError, ValueError):
    pass


class UnrecognizedOutput(FannetError):
    """Model checker output matched neither a proof nor a counterexample."""


class ParseError(FannetError):
    def __init__(self, message: str, position: str | None = None):
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)


class ValidationError(FannetError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"network failed validation: {lines}")


class LabelUnknown(FannetError, KeyError):
    pass


class IoError(FannetError, OSError):
    pass
