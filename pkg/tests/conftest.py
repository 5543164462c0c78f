import copy

import pytest

from lendsim.fixed import dec
from lendsim.ledger import TokenLedger
from lendsim.pool import LendingPool, ReserveConfig
from lendsim.rates import CRV_PARAMS, RateParams

FLAT = RateParams(r0=dec("0"), u_optimal=dec("0.9"), slope1=dec("0.04"), slope2=dec("0.6"))


def make_pool(reserves, prices=None, governance=None):
    """``reserves``: asset -> (ltv, liquidation_threshold) or ReserveConfig."""
    pool = LendingPool(TokenLedger(), governance=governance)
    for asset, cfg in reserves.items():
        if not isinstance(cfg, ReserveConfig):
            ltv, lt = cfg
            cfg = ReserveConfig(dec(ltv), dec(lt), FLAT)
        pool.add_reserve(asset, cfg)
    pool.set_prices({a: dec((prices or {}).get(a, "1")) for a in reserves})
    return pool


def fund(pool, account, asset, amount):
    pool.ledger.mint(account, asset, dec(amount))


def supply(pool, account, asset, amount):
    fund(pool, account, asset, amount)
    pool.deposit(account, asset, dec(amount))


BASE_SCENARIO = {
    "name": "mini",
    "seed": 3,
    "tick_seconds": 60,
    "horizon_ticks": 20,
    "assets": [
        {
            "symbol": "USDC",
            "price": {"mode": "constant", "value": "1"},
            "reserve": {
                "ltv": "0.85",
                "liquidation_threshold": "0.89",
                "liquidation_bonus": "0.05",
                "rate_params": {"u_optimal": "0.9", "slope1": "0.04", "slope2": "0.6"},
            },
        },
        {
            "symbol": "CRV",
            "price": {"mode": "constant", "value": "1"},
            "reserve": {
                "ltv": "0.55",
                "liquidation_threshold": "0.89",
                "liquidation_bonus": "0.05",
                "rate_params": {"preset": "CRV"},
            },
        },
    ],
    "positions": [{"account": "lp", "deposits": {"USDC": "1000000", "CRV": "1000000"}}],
}


@pytest.fixture
def scenario_dict():
    """A fresh copy of a two-asset scenario with no agents."""
    return copy.deepcopy(BASE_SCENARIO)


@pytest.fixture
def crv_params():
    return CRV_PARAMS


# acceptance report -------------------------------------------------------------

_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "seconds": 0.0})
    entry["ok"] = entry["ok"] and report.passed
    entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        verdict = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}  {verdict}  {e['title']}  ({e['seconds']:.2f} s)")
