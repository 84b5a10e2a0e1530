"""Exception hierarchy."""


class StsError(Exception):
    """Base class for all errors raised by stsbench."""


class InvalidSubsystem(StsError, ValueError):
    pass


class NotHermitian(StsError, ValueError):
    pass


class DimMismatch(StsError, ValueError):
    pass


class InvalidSetting(StsError, ValueError):
    pass


class NeedTwoSettings(StsError, ValueError):
    pass


class InvalidChannel(StsError, ValueError):
    pass


class ParseError(StsError, ValueError):
    """Malformed input file; the message carries the line or field that failed."""


class ValidationError(StsError, ValueError):
    """Well-formed input that breaks a physical invariant."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class TooManyStrategies(StsError, ValueError):
    pass


class NumericalTrouble(StsError, RuntimeError):
    pass


class InvalidChainLength(StsError, ValueError):
    pass


class UnphysicalNoise(StsError, ValueError):
    pass


class IntegrationUnstable(StsError, RuntimeError):
    pass


class InvalidState(StsError, ValueError):
    pass


class IncompleteTomography(StsError, ValueError):
    pass


class ReportError(StsError, OSError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"cannot write report to {path}: {reason}")
