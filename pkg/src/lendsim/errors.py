"""Exception hierarchy shared by every simulator module."""


class LendSimError(Exception):
    """Base class for all simulator errors."""


class ArithmeticOverflow(LendSimError, OverflowError):
    pass


class DivisionError(LendSimError, ZeroDivisionError):
    pass


class DomainError(LendSimError, ValueError):
    pass


class InvalidState(LendSimError, ValueError):
    pass


class InvalidTime(LendSimError, ValueError):
    pass


class NotFound(LendSimError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "not found"


class ReserveFrozen(LendSimError):
    pass


class BorrowingDisabled(LendSimError):
    pass


class LiquidityExhausted(LendSimError):
    pass


class CollateralInsufficient(LendSimError):
    pass


class AmountExceedsBalance(LendSimError):
    pass


class OracleMissing(LendSimError):
    pass


class NotLiquidatable(LendSimError):
    pass


class CloseFactorExceeded(LendSimError):
    pass


class Unauthorized(LendSimError):
    pass


class InsufficientDepth(LendSimError):
    pass


class ConfigError(LendSimError):
    """Scenario validation failure; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message

    def __reduce__(self):
        return type(self), (self.path, self.message)


class SimulationError(LendSimError):
    """Runtime failure inside a tick; ``tick`` records where the run aborted."""

    def __init__(self, tick, cause):
        super().__init__(f"tick {tick}: {type(cause).__name__}: {cause}")
        self.tick = tick
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.tick, self.cause)


class ConservationError(LendSimError):
    pass


class DeterminismViolation(LendSimError):
    def __init__(self, tick, detail=""):
        super().__init__(f"runs diverge at tick {tick}" + (f" ({detail})" if detail else ""))
        self.tick = tick
        self.detail = detail

    def __reduce__(self):
        return type(self), (self.tick, self.detail)
