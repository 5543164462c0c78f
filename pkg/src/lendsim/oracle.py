"""Heartbeat / deviation-threshold price feed with an optional pure lag.

Publication happens in two stages.  An observation becomes *eligible* once
``delay`` seconds have passed since it was made.  The newest eligible
observation is *published* when it deviates from the last published price
by more than ``deviation_threshold`` (relative), or when ``heartbeat``
seconds have elapsed since the last publication.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import DomainError, InvalidTime, NotFound, OracleMissing
from .fixed import ZERO, FixedDec, dec


@dataclass(frozen=True)
class OraclePolicy:
    heartbeat: int = 3600
    deviation_threshold: FixedDec = dec("0.005")
    delay: int = 0

    def __post_init__(self):
        object.__setattr__(self, "deviation_threshold", dec(self.deviation_threshold))
        if self.heartbeat <= 0:
            raise DomainError("heartbeat must be positive")
        if self.deviation_threshold < ZERO:
            raise DomainError("deviation_threshold must be >= 0")
        if self.delay < 0:
            raise DomainError("delay must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> OraclePolicy:
        unknown = set(d) - {"heartbeat", "deviation_threshold", "delay"}
        if unknown:
            raise DomainError(f"unknown oracle field(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        if "heartbeat" in d:
            kwargs["heartbeat"] = int(d["heartbeat"])
        if "deviation_threshold" in d:
            kwargs["deviation_threshold"] = dec(d["deviation_threshold"])
        if "delay" in d:
            kwargs["delay"] = int(d["delay"])
        return cls(**kwargs)


@dataclass
class OracleState:
    last_published: FixedDec | None = None
    last_update: int | None = None
    source_buffer: deque = field(default_factory=deque)


class PriceOracle:
    def __init__(self, policies: dict[str, OraclePolicy] | None = None):
        self.policies: dict[str, OraclePolicy] = dict(policies or {})
        self.states: dict[str, OracleState] = {a: OracleState() for a in self.policies}

    def add_asset(self, asset: str, policy: OraclePolicy | None = None, initial: FixedDec | None = None, t: int = 0):
        self.policies[asset] = policy or OraclePolicy()
        self.states[asset] = OracleState()
        if initial is not None:
            self._publish(asset, dec(initial), t)

    def _state(self, asset: str) -> OracleState:
        try:
            return self.states[asset]
        except KeyError:
            raise NotFound(f"oracle has no feed for {asset!r}") from None

    def _publish(self, asset, price, t):
        if price <= ZERO:
            raise DomainError("published price must be positive")
        st = self.states[asset]
        if st.last_update is not None and t < st.last_update:
            raise InvalidTime("publication time went backwards")
        st.last_published = price
        st.last_update = t

    def observe(self, asset: str, price: FixedDec, t: int) -> None:
        price = dec(price)
        if price <= ZERO:
            raise DomainError(f"non-positive price {price} for {asset}")
        st = self._state(asset)
        if st.source_buffer and t < st.source_buffer[-1][0]:
            raise InvalidTime("observations must be time-ordered")
        st.source_buffer.append((t, price))

    def publish_if_due(self, asset: str, now: int) -> FixedDec | None:
        """Publish the newest eligible observation if the policy says so."""
        st = self._state(asset)
        policy = self.policies[asset]
        buf = st.source_buffer
        newest = None
        while buf and buf[0][0] + policy.delay <= now:
            newest = buf.popleft()
        if newest is None:
            return None
        _, price = newest
        if st.last_published is None or self._deviates(price, st.last_published, policy.deviation_threshold) or (
            now - st.last_update >= policy.heartbeat
        ):
            self._publish(asset, price, now)
            return price
        # keep the unpublished candidate so a later heartbeat can still publish it
        buf.appendleft(newest)
        return None

    @staticmethod
    def _deviates(new: FixedDec, old: FixedDec, threshold: FixedDec) -> bool:
        # |new - old| / old > threshold, compared exactly
        return abs(new.raw - old.raw) * 10**18 > threshold.raw * old.raw

    def price(self, asset: str) -> FixedDec:
        st = self._state(asset)
        if st.last_published is None:
            raise OracleMissing(f"no published price for {asset}")
        return st.last_published

    def prices(self) -> dict[str, FixedDec]:
        return {a: st.last_published for a, st in self.states.items() if st.last_published is not None}
