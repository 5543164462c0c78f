import json

import pytest
from conftest import FLAT, fund, make_pool, supply
from hypothesis import given, settings
from hypothesis import strategies as st

from lendsim.errors import (
    AmountExceedsBalance,
    BorrowingDisabled,
    CloseFactorExceeded,
    CollateralInsufficient,
    DomainError,
    LiquidityExhausted,
    NotLiquidatable,
    ReserveFrozen,
    Unauthorized,
)
from lendsim.fixed import INF, ONE, ZERO, FixedDec, dec, mul
from lendsim.ledger import POOL
from lendsim.pool import (
    YEAR,
    Balances,
    LendingPool,
    ReserveConfig,
    ReserveState,
    accrue,
    bad_debt,
    health_factor,
    shortfall,
)
from lendsim.rates import CRV_PARAMS

CONFIGS = {
    "CRV": ReserveConfig(dec("0.55"), dec("0.89"), CRV_PARAMS),
    "USDC": ReserveConfig(dec("0.85"), dec("0.89"), FLAT),
    "A": ReserveConfig(dec("0.75"), dec("0.8"), FLAT),
    "B": ReserveConfig(dec("0.5"), dec("0.6"), FLAT),
}
PRICES_1 = {a: ONE for a in CONFIGS}


# valuation -------------------------------------------------------------------


def test_health_factor_at_threshold():
    b = Balances({"CRV": dec(100)}, {"USDC": dec(89)})
    assert health_factor(b, PRICES_1, CONFIGS) == ONE


def test_health_factor_without_debt_is_inf():
    assert health_factor(Balances({"CRV": dec(100)}, {}), PRICES_1, CONFIGS) is INF


def test_health_factor_multi_asset():
    b = Balances({"A": dec(100), "B": dec(50)}, {"USDC": dec(55)})
    assert health_factor(b, PRICES_1, CONFIGS) == dec(2)


def test_shortfall_and_bad_debt_records():
    under = Balances({"USDC": dec(80)}, {"CRV": dec(89)})
    healthy = Balances({"USDC": dec(200)}, {"CRV": dec(10)})
    assert shortfall(under, PRICES_1) == dec(9)
    records, total = bad_debt({"b": healthy, "a": under}, PRICES_1, timestamp=42)
    assert [(r.account, r.shortfall_value, r.timestamp) for r in records] == [("a", dec(9), 42)]
    assert total == dec(9)


def test_shortfall_starts_exactly_below_089():
    # one unit of collateral at lt 0.89: underwater iff debt value > 1 iff H < 0.89
    coll = Balances({"USDC": ONE}, {"CRV": ONE})
    for price in ("0.999999999999999999", "1", "1.000000000000000001"):
        prices = {"USDC": ONE, "CRV": dec(price)}
        h = health_factor(coll, prices, CONFIGS)
        assert (shortfall(coll, prices) > ZERO) == (h < dec("0.89"))


# accrual ---------------------------------------------------------------------


def full_reserve():
    return ReserveState(
        total_liquidity=dec(100),
        total_debt=dec(100),
        scaled_liquidity=dec(100),
        scaled_debt=dec(100),
    )


def test_accrual_one_day_at_cap():
    rs = accrue(full_reserve(), 86400, CRV_PARAMS)
    assert rs.borrow_index == dec("1.008410958904109589")


def test_accrual_zero_dt_is_noop():
    rs = full_reserve()
    assert accrue(rs, 0, CRV_PARAMS) is rs


def test_accrual_zero_utilization_keeps_index():
    rs = ReserveState(total_liquidity=dec(100), scaled_liquidity=dec(100))
    assert accrue(rs, YEAR, CRV_PARAMS).borrow_index == ONE


def test_treasury_share_is_minted():
    p = CRV_PARAMS.__class__.from_dict({"preset": "CRV", "reserve_factor": "0.2"})
    rs = accrue(full_reserve(), YEAR, p)
    assert rs.treasury_scaled > ZERO
    # lenders and treasury together own exactly what borrowers now owe
    assert abs(rs.total_liquidity.raw - rs.total_debt.raw) <= 2


# deposit / borrow / repay / withdraw ----------------------------------------


def usdc_crv_pool():
    pool = make_pool({"USDC": CONFIGS["USDC"], "CRV": CONFIGS["CRV"]})
    supply(pool, "lp", "CRV", 1000)
    return pool


def test_deposit_values_collateral():
    pool = usdc_crv_pool()
    supply(pool, "attacker", "USDC", 39_000_000)
    assert pool.balances("attacker").collateral == {"USDC": dec(39_000_000)}
    with pytest.raises(DomainError):
        pool.deposit("attacker", "USDC", ZERO)


def test_split_deposit_equals_single():
    a, b = usdc_crv_pool(), usdc_crv_pool()
    supply(a, "x", "USDC", 50)
    supply(a, "x", "USDC", 50)
    supply(b, "x", "USDC", 100)
    assert a.positions["x"] == b.positions["x"]
    assert a.reserves == b.reserves


def test_borrow_at_ltv_boundary():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 100)
    with pytest.raises(CollateralInsufficient):
        pool.borrow("x", "CRV", dec("85.000000000000000001"))
    pool.borrow("x", "CRV", dec(85))
    assert pool.current_debt("x", "CRV") == dec(85)
    assert pool.health_factor("x") > ONE


def test_borrow_errors():
    pool = usdc_crv_pool()
    with pytest.raises(CollateralInsufficient):
        pool.borrow("nobody", "CRV", dec(1))
    supply(pool, "whale", "USDC", 10_000)
    with pytest.raises(LiquidityExhausted):
        pool.borrow("whale", "CRV", dec(1001))


def test_repay_then_withdraw_empties_position():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 100)
    pool.borrow("x", "CRV", dec(50))
    pool.accrue(3600)
    fund(pool, "x", "CRV", 1)  # cover the interest
    pool.repay("x", "CRV")
    assert pool.withdraw("x", "USDC") == dec(100)
    assert pool.positions["x"].is_empty()


def test_partial_repay_at_current_index():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 100)
    pool.borrow("x", "CRV", dec(80))
    pool.accrue(86400 * 30)
    before = pool.current_debt("x", "CRV")
    assert before > dec(80)
    pool.repay("x", "CRV", dec(30))
    assert abs(pool.current_debt("x", "CRV").raw - (before - dec(30)).raw) <= 1


def test_repay_more_than_owed():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 100)
    pool.borrow("x", "CRV", dec(10))
    with pytest.raises(AmountExceedsBalance):
        pool.repay("x", "CRV", dec(11))


def test_withdraw_that_breaks_health_is_rejected():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 100)
    pool.borrow("x", "CRV", dec(80))
    # H = 0.89 C / 80 stays >= 1 only while C >= 89.887...; LTV needs C >= 94.117...
    with pytest.raises(CollateralInsufficient):
        pool.withdraw("x", "USDC", dec(6))
    pool.withdraw("x", "USDC", dec(5))


def test_max_borrowable_is_accepted():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 777)
    pool.set_prices({"USDC": ONE, "CRV": dec("0.62")})
    room = pool.max_borrowable("x", "CRV")
    supply(pool, "lp", "CRV", 10_000)
    pool.borrow("x", "CRV", room)
    assert pool.max_borrowable("x", "CRV") == ZERO


# liquidation -----------------------------------------------------------------


def liquidatable_pool(collateral="110"):
    pool = make_pool({"USDC": CONFIGS["USDC"], "CRV": ReserveConfig(dec("0.55"), dec("0.89"), FLAT, liquidation_bonus=dec("0.05"))})
    supply(pool, "lp", "CRV", 1000)
    pool.inject_position("t", {"USDC": dec(collateral)}, {"CRV": dec(100)})
    fund(pool, "liq", "CRV", 1000)
    return pool


def test_liquidation_hand_arithmetic():
    pool = make_pool({"USDC": ReserveConfig(dec("0.85"), dec("0.89"), FLAT, liquidation_bonus=dec("0.05")), "CRV": CONFIGS["CRV"]})
    supply(pool, "lp", "CRV", 1000)
    pool.inject_position("t", {"USDC": dec(110)}, {"CRV": dec(100)})
    fund(pool, "liq", "CRV", 100)
    res = pool.liquidate("liq", "t", "CRV", "USDC", dec(50))
    assert res.seized == dec("52.5")
    assert pool.current_debt("t", "CRV") == dec(50)
    assert pool.current_deposit("t", "USDC") == dec("57.5")
    assert pool.ledger.balance("liq", "USDC") == dec("52.5")


def test_health_exactly_one_is_not_liquidatable():
    pool = liquidatable_pool()
    pool.inject_position("edge", {"USDC": dec(100)}, {"CRV": dec(89)})
    assert pool.health_factor("edge") == ONE
    with pytest.raises(NotLiquidatable):
        pool.liquidate("liq", "edge", "CRV", "USDC", dec(1))


def test_close_factor_enforced():
    pool = liquidatable_pool()
    with pytest.raises(CloseFactorExceeded):
        pool.liquidate("liq", "t", "CRV", "USDC", dec("50.000000000000000001"))


def test_seizure_capped_at_collateral():
    pool = liquidatable_pool(collateral="40")
    res = pool.liquidate("liq", "t", "CRV", "USDC", dec(50))
    assert res.seized == dec(40)
    assert pool.current_deposit("t", "USDC") == ZERO


def test_bonus_never_deepens_shortfall():
    # collateral 101 vs debt 100: only 1 of equity is available as bonus
    pool = liquidatable_pool(collateral="101")
    res = pool.liquidate("liq", "t", "CRV", "USDC", dec(50))
    assert res.seized == dec(51)
    assert pool.shortfall("t") == ZERO


def test_seized_collateral_paid_as_deposit_without_cash():
    pool = liquidatable_pool()
    # drain USDC cash: someone borrows all of it
    supply(pool, "borrower", "CRV", 800)
    pool.borrow("borrower", "USDC", pool.available_liquidity("USDC"))
    res = pool.liquidate("liq", "t", "CRV", "USDC", dec(50))
    assert res.received_as_deposit
    assert pool.current_deposit("liq", "USDC") == res.seized


@st.composite
def positions(draw):
    assets = ["A", "B", "USDC", "CRV"]
    coll = {a: dec(draw(st.integers(0, 10**6))) for a in draw(st.sets(st.sampled_from(assets), min_size=1, max_size=3))}
    debt = {a: dec(draw(st.integers(1, 10**6))) for a in draw(st.sets(st.sampled_from(assets), min_size=1, max_size=2))}
    prices = {a: FixedDec(draw(st.integers(10**15, 10**20))) for a in assets}
    return Balances(coll, debt), prices


@settings(max_examples=300, deadline=None)
@given(positions())
def test_health_below_one_iff_debt_exceeds_weighted_collateral(case):
    b, prices = case
    weighted = sum(v.raw * prices[a].raw * CONFIGS[a].liquidation_threshold.raw for a, v in b.collateral.items())
    owed = sum(v.raw * prices[a].raw for a, v in b.debt.items()) * 10**18
    assert (health_factor(b, prices, CONFIGS) < ONE) == (weighted < owed)


# governance flags ------------------------------------------------------------


def test_freeze_semantics():
    pool = liquidatable_pool()
    pool.governance = "dao"
    supply(pool, "x", "USDC", 100)
    pool.borrow("x", "CRV", dec(10))
    with pytest.raises(Unauthorized):
        pool.set_reserve_flags("CRV", frozen=True, caller="x")
    pool.set_reserve_flags("CRV", frozen=True, caller="dao")
    with pytest.raises(ReserveFrozen):
        pool.borrow("x", "CRV", dec(1))
    with pytest.raises(ReserveFrozen):
        supply(pool, "y", "CRV", 1)
    fund(pool, "x", "CRV", 1)
    pool.repay("x", "CRV", dec(5))
    pool.liquidate("liq", "t", "CRV", "USDC", dec(10))
    pool.set_reserve_flags("CRV", frozen=False, caller="dao")
    pool.borrow("x", "CRV", dec(1))


def test_borrowing_disabled():
    pool = liquidatable_pool()
    supply(pool, "x", "USDC", 100)
    pool.set_reserve_flags("CRV", borrowing_enabled=False)
    with pytest.raises(BorrowingDisabled):
        pool.borrow("x", "CRV", dec(1))
    supply(pool, "y", "CRV", 1)  # deposits still allowed


def test_ltv_above_threshold_rejected():
    with pytest.raises(DomainError):
        ReserveConfig(dec("0.9"), dec("0.8"), FLAT)


# bookkeeping -----------------------------------------------------------------


def test_cash_matches_liquidity_minus_debt():
    pool = usdc_crv_pool()
    supply(pool, "x", "USDC", 1000)
    pool.borrow("x", "CRV", dec(500))
    for day in range(1, 30):
        pool.accrue(day * 86400)
        rs = pool.reserves["CRV"]
        assert abs((rs.total_liquidity - rs.total_debt).raw - pool.available_liquidity("CRV").raw) <= 1
        assert rs.borrow_index >= ONE and rs.liquidity_index >= ONE


def test_snapshot_round_trip():
    pool = liquidatable_pool()
    pool.accrue(86400)
    snap = json.loads(json.dumps(pool.snapshot()))
    again = LendingPool.from_snapshot(snap)
    assert again.snapshot() == pool.snapshot()
    assert again.health_factor("t") == pool.health_factor("t")
    assert again.ledger.balance(POOL, "CRV") == pool.ledger.balance(POOL, "CRV")
    assert mul(again.current_debt("t", "CRV"), ONE) == pool.current_debt("t", "CRV")
