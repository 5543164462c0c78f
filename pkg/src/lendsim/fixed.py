"""18-decimal fixed-point numbers.

Every balance, price, rate and index in the simulator is a :class:`FixedDec`:
a signed integer mantissa interpreted at a scale of 10**18.  All operations
are exact integer arithmetic followed by a single rounding step, so results
are bit-identical on every platform.

The default rounding mode is half-away-from-zero.  Directed rounding is
available through :func:`mul_div` for the few places (health factors,
seizure amounts) where a conservative direction matters.
"""

from __future__ import annotations

import decimal
import enum
import math
import re

from .errors import ArithmeticOverflow, DivisionError, DomainError

DECIMALS = 18
SCALE = 10**DECIMALS
HALF_SCALE = SCALE // 2
MAX_RAW = 2**255 - 1

_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class Rounding(enum.Enum):
    HALF_AWAY = "half_away"
    DOWN = "down"  # toward negative infinity
    UP = "up"  # toward positive infinity


def round_div(num: int, den: int, rounding: Rounding = Rounding.HALF_AWAY) -> int:
    """Integer division of ``num / den`` with the requested rounding."""
    if den == 0:
        raise DivisionError("division by zero")
    if rounding is Rounding.DOWN:
        return num // den
    if rounding is Rounding.UP:
        return -((-num) // den)
    negative = (num < 0) != (den < 0)
    q, r = divmod(abs(num), abs(den))
    if 2 * r >= abs(den):
        q += 1
    return -q if negative else q


def _checked(raw: int) -> int:
    if raw > MAX_RAW or raw < -MAX_RAW:
        raise ArithmeticOverflow(f"fixed-point overflow: |{raw}| exceeds 2**255-1")
    return raw


class FixedDec:
    """Immutable fixed-point decimal with 18 fractional digits."""

    __slots__ = ("raw",)

    def __init__(self, raw: int):
        if type(raw) is not int:
            raise TypeError(f"FixedDec mantissa must be int, got {type(raw).__name__}")
        object.__setattr__(self, "raw", _checked(raw))

    def __setattr__(self, name, value):
        raise AttributeError("FixedDec is immutable")

    def __reduce__(self):
        if self.is_inf:
            return (_inf, ())
        return (FixedDec, (self.raw,))

    # construction ---------------------------------------------------------

    @classmethod
    def from_integer(cls, n: int) -> FixedDec:
        return cls(n * SCALE)

    @classmethod
    def parse(cls, text: str) -> FixedDec:
        """Parse a decimal string; digits beyond 18 decimals round half-away."""
        s = text.strip()
        if s.lower() in ("inf", "+inf", "infinity"):
            return INF
        if not _NUMBER_RE.match(s):
            raise DomainError(f"not a decimal number: {text!r}")
        with decimal.localcontext() as ctx:
            ctx.prec = 200
            value = decimal.Decimal(s).scaleb(DECIMALS)
            raw = int(value.to_integral_value(rounding=decimal.ROUND_HALF_UP))
        return cls(raw)

    @classmethod
    def of(cls, value) -> FixedDec:
        """Coerce ``str``, ``int``, ``Decimal`` or ``FixedDec`` to FixedDec.

        Floats are accepted only through their shortest repr, which is what a
        YAML loader produces for an unquoted literal such as ``0.45``.
        """
        if isinstance(value, FixedDec):
            return value
        if isinstance(value, bool):
            raise TypeError("bool is not a number")
        if isinstance(value, int):
            return cls.from_integer(value)
        if isinstance(value, str):
            return cls.parse(value)
        if isinstance(value, decimal.Decimal):
            return cls.parse(str(value))
        if isinstance(value, float):
            if math.isinf(value) and value > 0:
                return INF
            if not math.isfinite(value):
                raise DomainError(f"cannot represent {value!r}")
            return cls.parse(repr(value))
        raise TypeError(f"cannot convert {type(value).__name__} to FixedDec")

    # conversion -----------------------------------------------------------

    @property
    def is_inf(self) -> bool:
        return self.raw == _INF_RAW

    def to_integer(self) -> int:
        """Integer part, truncated toward zero."""
        self._finite()
        q = abs(self.raw) // SCALE
        return -q if self.raw < 0 else q

    def to_decimal(self) -> decimal.Decimal:
        self._finite()
        return decimal.Decimal(self.raw).scaleb(-DECIMALS)

    def __float__(self) -> float:
        # display and plotting only; never fed back into protocol state
        if self.is_inf:
            return math.inf
        return self.raw / SCALE

    def __int__(self) -> int:
        return self.to_integer()

    def __str__(self) -> str:
        if self.is_inf:
            return "inf"
        sign = "-" if self.raw < 0 else ""
        whole, frac = divmod(abs(self.raw), SCALE)
        if frac == 0:
            return f"{sign}{whole}"
        return f"{sign}{whole}.{frac:018d}".rstrip("0")

    def __repr__(self) -> str:
        return f"FixedDec('{self}')"

    # arithmetic -----------------------------------------------------------

    def _finite(self):
        if self.is_inf:
            raise DomainError("arithmetic on the +INF sentinel")

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        self._finite()
        other._finite()
        return FixedDec(self.raw + other.raw)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        self._finite()
        other._finite()
        return FixedDec(self.raw - other.raw)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other.__sub__(self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return div(self, other)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return div(other, self)

    def __neg__(self):
        self._finite()
        return FixedDec(-self.raw)

    def __pos__(self):
        return self

    def __abs__(self):
        self._finite()
        return FixedDec(abs(self.raw))

    def __bool__(self):
        return self.raw != 0

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.raw == other.raw

    def __hash__(self):
        return hash(("FixedDec", self.raw))

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.raw < other.raw

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.raw <= other.raw

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.raw > other.raw

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.raw >= other.raw


def _coerce(value):
    if isinstance(value, FixedDec):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return FixedDec.from_integer(value)
    return NotImplemented


_INF_RAW = MAX_RAW + 1


def _inf():
    return INF


INF = object.__new__(FixedDec)
object.__setattr__(INF, "raw", _INF_RAW)

ZERO = FixedDec(0)
ONE = FixedDec(SCALE)
ULP = FixedDec(1)


def add(a: FixedDec, b: FixedDec) -> FixedDec:
    return a + b


def sub(a: FixedDec, b: FixedDec) -> FixedDec:
    return a - b


def mul(a: FixedDec, b: FixedDec, rounding: Rounding = Rounding.HALF_AWAY) -> FixedDec:
    a._finite()
    b._finite()
    return FixedDec(_checked(round_div(a.raw * b.raw, SCALE, rounding)))


def div(a: FixedDec, b: FixedDec, rounding: Rounding = Rounding.HALF_AWAY) -> FixedDec:
    a._finite()
    b._finite()
    if b.raw == 0:
        raise DivisionError("division by zero")
    return FixedDec(_checked(round_div(a.raw * SCALE, b.raw, rounding)))


def mul_div(a: FixedDec, b: FixedDec, c: FixedDec, rounding: Rounding = Rounding.HALF_AWAY) -> FixedDec:
    """``a * b / c`` with one rounding step instead of two."""
    a._finite()
    b._finite()
    c._finite()
    if c.raw == 0:
        raise DivisionError("division by zero")
    return FixedDec(_checked(round_div(a.raw * b.raw, c.raw, rounding)))


def pow_int(base: FixedDec, n: int) -> FixedDec:
    """``base ** n`` by repeated squaring; each multiply rounds half-away."""
    if n < 0:
        raise DomainError("pow_int needs a non-negative exponent")
    result = ONE
    square = base
    while n:
        if n & 1:
            result = mul(result, square)
        n >>= 1
        if n:
            square = mul(square, square)
    return result


def sqrt(x: FixedDec) -> FixedDec:
    """Square root rounded down, computed on the integer mantissa."""
    x._finite()
    if x.raw < 0:
        raise DomainError("sqrt of a negative number")
    return FixedDec(math.isqrt(x.raw * SCALE))


def fmin(a: FixedDec, b: FixedDec) -> FixedDec:
    return a if a <= b else b


def fmax(a: FixedDec, b: FixedDec) -> FixedDec:
    return a if a >= b else b


dec = FixedDec.of
