"""Utilization-based variable borrow rate with a single kink."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError, InvalidState
from .fixed import ONE, ZERO, FixedDec, dec, mul, mul_div


@dataclass(frozen=True)
class RateParams:
    """Annualized rate curve parameters.

    ``max_rate`` is derived (``r0 + slope1 + slope2``) and cached at
    construction.
    """

    r0: FixedDec
    u_optimal: FixedDec
    slope1: FixedDec
    slope2: FixedDec
    reserve_factor: FixedDec = ZERO
    max_rate: FixedDec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("r0", "u_optimal", "slope1", "slope2", "reserve_factor"):
            object.__setattr__(self, name, dec(getattr(self, name)))
        if not (ZERO < self.u_optimal < ONE):
            raise DomainError(f"u_optimal must lie in (0, 1), got {self.u_optimal}")
        for name in ("r0", "slope1", "slope2"):
            if getattr(self, name) < ZERO:
                raise DomainError(f"{name} must be >= 0")
        if not (ZERO <= self.reserve_factor <= ONE):
            raise DomainError("reserve_factor must lie in [0, 1]")
        object.__setattr__(self, "max_rate", self.r0 + self.slope1 + self.slope2)

    @classmethod
    def from_dict(cls, d: dict) -> RateParams:
        unknown = set(d) - {"preset", "r0", "u_optimal", "slope1", "slope2", "reserve_factor"}
        if unknown:
            raise DomainError(f"unknown rate field(s): {', '.join(sorted(unknown))}")
        if "preset" in d:
            base = PRESETS[d["preset"]]
            merged = {**base.to_dict(), **{k: v for k, v in d.items() if k != "preset"}}
            return cls.from_dict(merged)
        return cls(
            r0=dec(d.get("r0", 0)),
            u_optimal=dec(d["u_optimal"]),
            slope1=dec(d["slope1"]),
            slope2=dec(d["slope2"]),
            reserve_factor=dec(d.get("reserve_factor", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "r0": str(self.r0),
            "u_optimal": str(self.u_optimal),
            "slope1": str(self.slope1),
            "slope2": str(self.slope2),
            "reserve_factor": str(self.reserve_factor),
        }


# Aave V2 CRV curve, November 2022.
CRV_PARAMS = RateParams(r0=dec("0"), u_optimal=dec("0.45"), slope1=dec("0.07"), slope2=dec("3.00"))

PRESETS = {"CRV": CRV_PARAMS}


def utilization(total_debt: FixedDec, total_liquidity: FixedDec) -> FixedDec:
    """Fraction of deposited liquidity that is currently borrowed."""
    if total_debt < ZERO or total_liquidity < ZERO:
        raise InvalidState("utilization inputs must be non-negative")
    if total_liquidity == ZERO:
        return ZERO
    if total_debt > total_liquidity:
        raise InvalidState(f"debt {total_debt} exceeds liquidity {total_liquidity}")
    return mul_div(total_debt, ONE, total_liquidity)


def borrow_rate(u: FixedDec, p: RateParams) -> FixedDec:
    if u < ZERO or u > ONE:
        raise DomainError(f"utilization {u} outside [0, 1]")
    if u <= p.u_optimal:
        return p.r0 + mul_div(u, p.slope1, p.u_optimal)
    excess = u - p.u_optimal
    return p.r0 + p.slope1 + mul_div(excess, p.slope2, ONE - p.u_optimal)


def supply_rate(u: FixedDec, p: RateParams) -> FixedDec:
    """Rate earned by depositors: the borrow rate diluted by utilization and
    the protocol's reserve factor."""
    return mul(mul(borrow_rate(u, p), u), ONE - p.reserve_factor)
