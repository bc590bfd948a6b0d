"""Exception hierarchy shared by every module of the package."""


class FPError(Exception):
    """Base class for all errors raised by nonlocal_fp."""


# grid / transforms
class GridError(FPError, ValueError):
    pass


class OddSize(GridError):
    pass


class TooSmall(GridError):
    pass


class ZeroDim(GridError):
    pass


class GridMismatch(GridError):
    pass


class AxisOutOfRange(GridError):
    pass


class UnsupportedOrder(GridError):
    pass


# parameters
class NonPositiveBeta(FPError, ValueError):
    pass


class NegativeTime(FPError, ValueError):
    pass


class SigmaOutOfRange(FPError, ValueError):
    pass


class InvalidP(FPError, ValueError):
    pass


class DimensionTooLow(FPError, ValueError):
    pass


# solver
class SolverError(FPError, RuntimeError):
    """Raised by a stepper; `t` is the time at which the failure happened."""

    def __init__(self, message: str = "", t: float | None = None):
        super().__init__(message)
        self.t = t


class DomainViolation(SolverError):
    """The marginal left the open set where the conditional force is defined."""


class NonFiniteInput(SolverError):
    pass


class NonFinite(SolverError):
    pass


class NoContraction(SolverError):
    pass


class InconsistentBias(SolverError):
    pass


# diagnostics
class DiagnosticsError(FPError):
    pass


class EmptyHistory(DiagnosticsError):
    pass


class SupersolutionNotEnabled(DiagnosticsError):
    pass


class DegenerateMarginal(DiagnosticsError):
    pass


class RunTooShort(DiagnosticsError):
    pass


# config
class ConfigError(FPError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass


# snapshots
class SnapshotError(FPError, IOError):
    pass


class BadMagic(SnapshotError):
    pass


class TruncatedFile(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass
