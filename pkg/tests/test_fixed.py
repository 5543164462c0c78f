import pickle
from decimal import ROUND_HALF_UP, Decimal, localcontext

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lendsim.errors import ArithmeticOverflow, DivisionError, DomainError
from lendsim.fixed import (
    INF,
    MAX_RAW,
    ONE,
    SCALE,
    ZERO,
    FixedDec,
    Rounding,
    dec,
    div,
    mul,
    mul_div,
    pow_int,
    round_div,
    sqrt,
)

raws = st.integers(min_value=-(10**40), max_value=10**40)
fixed = raws.map(FixedDec)


def decimal_oracle(num: Decimal) -> int:
    """Reference rounding via the decimal module."""
    with localcontext() as ctx:
        ctx.prec = 200
        return int((num * SCALE).to_integral_value(rounding=ROUND_HALF_UP))


def test_mul_exact_product():
    assert mul(dec("1.5"), dec("2.0")) == dec("3")


def test_div_one_third():
    assert str(div(ONE, dec("3.0"))) == "0.333333333333333333"


def test_div_two_thirds_rounds_up():
    assert div(dec(2), dec(3)).raw == 666666666666666667


def test_half_away_on_negative_values():
    assert round_div(-5, 2) == -3
    assert round_div(5, 2) == 3
    assert round_div(-5, 2, Rounding.DOWN) == -3
    assert round_div(-5, 2, Rounding.UP) == -2


@given(fixed)
def test_mul_by_one_is_identity(x):
    assert mul(x, ONE) == x


@given(st.integers(min_value=-(10**37), max_value=10**37))
def test_integer_round_trip(n):
    assert FixedDec.from_integer(n).to_integer() == n


@given(fixed, fixed)
def test_mul_matches_decimal_oracle(a, b):
    with localcontext() as ctx:
        ctx.prec = 200
        exact = Decimal(a.raw) * Decimal(b.raw) / Decimal(SCALE) / Decimal(SCALE)
    assert mul(a, b).raw == decimal_oracle(exact)


@given(fixed, fixed.filter(lambda x: x.raw != 0))
def test_div_matches_decimal_oracle(a, b):
    with localcontext() as ctx:
        ctx.prec = 200
        exact = Decimal(a.raw) / Decimal(b.raw)
    assert div(a, b).raw == decimal_oracle(exact)


@given(fixed, fixed, fixed.filter(lambda x: x.raw != 0))
def test_mul_div_single_rounding(a, b, c):
    with localcontext() as ctx:
        ctx.prec = 200
        exact = Decimal(a.raw) * Decimal(b.raw) / Decimal(c.raw) / Decimal(SCALE)
    assert mul_div(a, b, c).raw == decimal_oracle(exact)


@given(fixed, fixed.filter(lambda x: x.raw > 0))
def test_directed_rounding_brackets_exact(a, b):
    lo = div(a, b, Rounding.DOWN)
    hi = div(a, b, Rounding.UP)
    assert lo <= div(a, b) <= hi
    assert hi.raw - lo.raw in (0, 1)


def test_pow_int():
    assert pow_int(dec("1.7"), 0) == ONE
    assert pow_int(dec("1.000001"), 2) == dec("1.000002000001")
    assert pow_int(dec(2), 10) == dec(1024)


def test_sqrt():
    assert sqrt(dec("0.81")) == dec("0.9")
    assert sqrt(dec(2)).raw == 1414213562373095048
    with pytest.raises(DomainError):
        sqrt(dec(-1))


def test_overflow_is_reported():
    big = FixedDec(MAX_RAW)
    with pytest.raises(ArithmeticOverflow):
        big + ONE
    with pytest.raises(ArithmeticOverflow):
        mul(big, dec(2))
    with pytest.raises(ArithmeticOverflow):
        FixedDec(MAX_RAW + 2)


def test_division_by_zero():
    with pytest.raises(DivisionError):
        div(ONE, ZERO)
    with pytest.raises(ZeroDivisionError):
        mul_div(ONE, ONE, ZERO)


def test_parse_and_format():
    assert dec("0.1") + dec("0.2") == dec("0.3")
    assert str(dec("1.50")) == "1.5"
    assert str(dec("-0.000000000000000001")) == "-0.000000000000000001"
    assert dec("1e-18").raw == 1
    assert dec("0.0000000000000000005").raw == 1  # half-away on parse
    assert dec(0.45) == dec("0.45")
    with pytest.raises(DomainError):
        dec("1.2.3")
    with pytest.raises(TypeError):
        dec(True)


def test_inf_sentinel():
    assert dec("inf") is INF
    assert INF > dec(10**50)
    assert str(INF) == "inf"
    assert pickle.loads(pickle.dumps(INF)) is INF
    with pytest.raises(DomainError):
        mul(INF, ONE)


@given(fixed)
def test_pickle_round_trip(x):
    assert pickle.loads(pickle.dumps(x)) == x


def test_immutable():
    x = dec(1)
    with pytest.raises(AttributeError):
        x.raw = 5
