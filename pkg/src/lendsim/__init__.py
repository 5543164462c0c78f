"""Deterministic simulator of an over-collateralized lending market under
short-squeeze and price-manipulation attacks."""

from .engine import MetricsLog, World, compare_logs, replay_check, run, sweep
from .fixed import INF, ONE, ZERO, FixedDec, dec
from .oracle import OraclePolicy, PriceOracle
from .pool import LendingPool, ReserveConfig
from .rates import CRV_PARAMS, RateParams, borrow_rate, supply_rate, utilization
from .scenario import load_scenario

__version__ = "0.1.0"

__all__ = [
    "CRV_PARAMS",
    "INF",
    "LendingPool",
    "MetricsLog",
    "ONE",
    "OraclePolicy",
    "PriceOracle",
    "RateParams",
    "ReserveConfig",
    "World",
    "ZERO",
    "FixedDec",
    "borrow_rate",
    "compare_logs",
    "dec",
    "load_scenario",
    "replay_check",
    "run",
    "supply_rate",
    "sweep",
    "utilization",
]
