"""Two counterfactual sweeps: a slower oracle and a faster DAO.

The oracle sweep re-runs one scenario with the CRV feed delayed by 0 s to
one hour while CRV rallies against three short positions.  The governance
sweep re-runs the squeeze with the DAO able to halt CRV borrowing after
three days, one day, or immediately.

    python demos/delays.py
"""

from lendsim.engine import sweep
from lendsim.scenario import load_scenario

print("oracle delay -> final bad debt")
for delay, s in sweep(load_scenario("oracle_delay"), "assets.CRV.oracle.delay", [0, 60, 600, 3600]):
    print(f"  {delay:>5} s  {s['final_bad_debt']}  ({s['liquidations']} liquidations)")

print("governance delay -> peak bad debt")
for delay, s in sweep(load_scenario("governance_sweep"), "agents.dao.params.delay", [259200, 86400, 0], workers=3):
    print(f"  {delay / 86400:>4.1f} d  {s['peak_bad_debt']}")
