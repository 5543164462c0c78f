"""Trading venues with price impact, scripted reference prices, arbitrage.

Centralized and decentralized exchanges alike are modeled as constant-product
pools that differ only in depth and fee.  :class:`InfiniteVenue` is the
zero-impact control: it fills any size at a fixed price against the outside
market.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, InsufficientDepth, NotFound
from .fixed import ONE, SCALE, ZERO, FixedDec, dec, div, mul, mul_div, round_div

SELL_BASE = "sell_base"
BUY_BASE = "buy_base"


@dataclass
class Venue:
    id: str
    base: str
    quote: str
    reserve_base: FixedDec
    reserve_quote: FixedDec
    fee: FixedDec = ZERO

    external = False

    def __post_init__(self):
        self.reserve_base = dec(self.reserve_base)
        self.reserve_quote = dec(self.reserve_quote)
        self.fee = dec(self.fee)
        if self.reserve_base <= ZERO or self.reserve_quote <= ZERO:
            raise DomainError(f"venue {self.id}: reserves must be positive")
        if not (ZERO <= self.fee < ONE):
            raise DomainError(f"venue {self.id}: fee must lie in [0, 1)")

    @property
    def k(self) -> int:
        return self.reserve_base.raw * self.reserve_quote.raw

    def quote_spot(self) -> FixedDec:
        return div(self.reserve_quote, self.reserve_base)

    def preview(self, direction: str, amount_in: FixedDec) -> FixedDec:
        amount_in = dec(amount_in)
        if amount_in <= ZERO:
            raise DomainError("amount_in must be positive")
        r_in, r_out = self._reserves(direction)
        effective = mul(amount_in, ONE - self.fee)
        out = r_out - mul_div(r_in, r_out, r_in + effective)
        if out >= r_out:
            raise InsufficientDepth(f"venue {self.id} cannot pay out {out}")
        return out

    def swap(self, direction: str, amount_in: FixedDec) -> FixedDec:
        """Trade ``amount_in`` and return the output amount.

        The full input (fee included) stays in the pool, so the reserve
        product only grows with fees.
        """
        amount_in = dec(amount_in)
        out = self.preview(direction, amount_in)
        if direction == SELL_BASE:
            self.reserve_base = self.reserve_base + amount_in
            self.reserve_quote = self.reserve_quote - out
        else:
            self.reserve_quote = self.reserve_quote + amount_in
            self.reserve_base = self.reserve_base - out
        return out

    def _reserves(self, direction):
        if direction == SELL_BASE:
            return self.reserve_base, self.reserve_quote
        if direction == BUY_BASE:
            return self.reserve_quote, self.reserve_base
        raise DomainError(f"unknown direction {direction!r}")

    def scaled(self, factor: FixedDec) -> Venue:
        return Venue(self.id, self.base, self.quote, mul(self.reserve_base, factor), mul(self.reserve_quote, factor), self.fee)


@dataclass
class InfiniteVenue:
    """Fills any size at ``price`` with no impact; counterparty is the outside market."""

    id: str
    base: str
    quote: str
    price: FixedDec
    fee: FixedDec = ZERO

    external = True

    def __post_init__(self):
        self.price = dec(self.price)
        self.fee = dec(self.fee)
        if self.price <= ZERO:
            raise DomainError(f"venue {self.id}: price must be positive")

    def quote_spot(self) -> FixedDec:
        return self.price

    def preview(self, direction: str, amount_in: FixedDec) -> FixedDec:
        amount_in = dec(amount_in)
        if amount_in <= ZERO:
            raise DomainError("amount_in must be positive")
        effective = mul(amount_in, ONE - self.fee)
        if direction == SELL_BASE:
            return mul(effective, self.price)
        if direction == BUY_BASE:
            return div(effective, self.price)
        raise DomainError(f"unknown direction {direction!r}")

    swap = preview


def quote_spot(venue) -> FixedDec:
    return venue.quote_spot()


def swap(venue, direction: str, amount_in: FixedDec) -> FixedDec:
    return venue.swap(direction, amount_in)


_ROOT_PREC = 10**40


def _positive_root(a: Fraction, b: Fraction, c: Fraction) -> Fraction:
    """Larger root of ``a x^2 + b x + c`` (a > 0, c <= 0)."""
    disc = b * b - 4 * a * c
    root = Fraction(math.isqrt(disc.numerator * disc.denominator * _ROOT_PREC**2), disc.denominator * _ROOT_PREC)
    return (-b + root) / (2 * a)


def rebalance_amount(venue: Venue, target_price: FixedDec):
    """Return ``(direction, amount_in)`` that moves spot to ``target_price``,
    or ``None`` when spot already equals it.

    Selling base with input ``A`` and fee ``f`` (g = 1 - f) leaves spot at
    ``b q / ((b + A g)(b + A))``; buying base with quote input ``A`` leaves it
    at ``(q + A)(q + A g) / (b q)``.  Each is a quadratic in ``A``.
    """
    target_price = dec(target_price)
    if target_price <= ZERO:
        raise DomainError("target price must be positive")
    spot = venue.quote_spot()
    if spot == target_price:
        return None
    b = Fraction(venue.reserve_base.raw, SCALE)
    q = Fraction(venue.reserve_quote.raw, SCALE)
    p = Fraction(target_price.raw, SCALE)
    g = 1 - Fraction(venue.fee.raw, SCALE)
    if target_price < spot:
        amount = _positive_root(p * g, p * b * (1 + g), p * b * b - b * q)
        direction = SELL_BASE
    else:
        amount = _positive_root(g, q * (1 + g), q * q - p * b * q)
        direction = BUY_BASE
    scaled = amount * SCALE
    raw = round_div(scaled.numerator, scaled.denominator)
    # the exact root lands between grid points; pick the neighbour whose
    # resulting spot is closest to the target
    best = None
    for candidate in range(max(raw - 2, 1), raw + 3):
        miss = abs(_spot_after(venue, direction, FixedDec(candidate)).raw - target_price.raw)
        if best is None or miss < best[0]:
            best = (miss, candidate)
    if best is None:
        return None
    return direction, FixedDec(best[1])


def _spot_after(venue: Venue, direction: str, amount_in: FixedDec) -> FixedDec:
    out = venue.preview(direction, amount_in)
    if direction == SELL_BASE:
        return div(venue.reserve_quote - out, venue.reserve_base + amount_in)
    return div(venue.reserve_quote + amount_in, venue.reserve_base - out)


def arbitrage_rebalance(venue: Venue, target_price: FixedDec):
    """Execute the swap that brings spot to ``target_price``.

    Returns ``(direction, amount_in, amount_out)`` or ``None`` if no trade
    was needed.  The arbitrageur is the outside market.
    """
    plan = rebalance_amount(venue, target_price)
    if plan is None:
        return None
    direction, amount_in = plan
    out = venue.swap(direction, amount_in)
    return direction, amount_in, out


# scripted reference prices -------------------------------------------------


def counter_uniform(seed: int, stream: str, counter: int) -> FixedDec:
    """Deterministic uniform draw in [-1, 1] keyed by ``(seed, stream, counter)``."""
    digest = hashlib.sha256(f"{seed}:{stream}:{counter}".encode()).digest()
    n = int.from_bytes(digest[:16], "big")
    return FixedDec(n % (2 * SCALE + 1) - SCALE)


class PriceScript:
    """Reference price path for one asset, indexed by tick.

    ``mode`` is ``constant`` (``value``), ``keyframes`` (``points`` as
    ``[tick, price]`` pairs, ``interpolation`` ``linear`` or ``step``) or
    ``random_walk`` (``start``, per-tick ``volatility``; multiplicative
    uniform shocks from :func:`counter_uniform`).
    """

    def __init__(self, asset: str, spec: dict, seed: int = 0):
        self.asset = asset
        self.mode = spec.get("mode", "constant")
        self.seed = seed
        if self.mode == "constant":
            self.value = dec(spec["value"])
        elif self.mode == "keyframes":
            pts = sorted((int(t), dec(p)) for t, p in spec["points"])
            if not pts:
                raise DomainError(f"{asset}: keyframes need at least one point")
            self.points = pts
            self.interpolation = spec.get("interpolation", "linear")
            if self.interpolation not in ("linear", "step"):
                raise DomainError(f"{asset}: unknown interpolation {self.interpolation!r}")
        elif self.mode == "random_walk":
            self.start = dec(spec["start"])
            self.volatility = dec(spec["volatility"])
            if not (ZERO <= self.volatility < ONE) or self.start <= ZERO:
                raise DomainError(f"{asset}: random walk needs start > 0 and volatility in [0, 1)")
            self._path = [self.start]
        else:
            raise DomainError(f"{asset}: unknown price mode {self.mode!r}")

    def price_at(self, tick: int) -> FixedDec:
        if self.mode == "constant":
            return self.value
        if self.mode == "keyframes":
            return self._keyframe(tick)
        while len(self._path) <= tick:
            t = len(self._path)
            shock = mul(self.volatility, counter_uniform(self.seed, self.asset, t))
            self._path.append(mul(self._path[-1], ONE + shock))
        return self._path[tick]

    def _keyframe(self, tick):
        pts = self.points
        if tick <= pts[0][0]:
            return pts[0][1]
        for (t0, p0), (t1, p1) in zip(pts, pts[1:]):
            if t0 <= tick < t1:
                if self.interpolation == "step":
                    return p0
                return p0 + mul_div(p1 - p0, FixedDec.from_integer(tick - t0), FixedDec.from_integer(t1 - t0))
        return pts[-1][1]


def exogenous_price_step(scripts: dict[str, PriceScript], asset: str, t: int) -> FixedDec:
    try:
        script = scripts[asset]
    except KeyError:
        raise NotFound(f"no price script for {asset!r}") from None
    return script.price_at(t)
