"""Walk through the bundled short-squeeze scenario tick by tick.

An attacker posts USDC, borrows CRV in tranches and sells it, pinning CRV
utilization at 100% and the borrow rate at its cap.  A defender keeps its own
large CRV-backed loan healthy by topping up collateral.  When the scripted
price rebounds the attacker's short is liquidated and the pool is left with
debt nobody can recover.

    python demos/squeeze_walkthrough.py
"""

from lendsim.engine import run
from lendsim.fixed import ONE
from lendsim.scenario import load_scenario

sc = load_scenario("squeeze_nov22")
log = run(sc)
s = log.summary
hours = sc.tick_seconds / 3600

print(f"{sc.name}: {sc.horizon_ticks} ticks of {sc.tick_seconds} s, scenario {sc.short_hash}")

util = log.column("utilization_CRV")
full = next(t for t, u in enumerate(util) if u == ONE)
print(f"CRV utilization first hits 100% at hour {full * hours:.1f}; borrow rate {log.value(full, 'borrow_rate_CRV')}")

prices = log.column("price_CRV")
low = min(range(len(prices)), key=prices.__getitem__)
print(f"market low {prices[low]} at hour {low * hours:.1f}, close {prices[-1]}")

for e in log.events:
    if e["kind"] == "liquidation":
        print(f"  hour {e['tick'] * hours:6.1f}  {e['agent']} liquidates {e['target']}: repays {e['amount']} {e['asset']}, seizes {e['seized']} {e['collateral_asset']}")

defender = s["agents"]["whale"]
print(f"defender top-ups: {defender['topups']}, CRV spent {defender['spent']}")
print(f"min health factors: {s['min_health_factor']}")
print(f"bad debt: before {s['initial_bad_debt']}, peak {s['peak_bad_debt']}, final {s['final_bad_debt']}")
