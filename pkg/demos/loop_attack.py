"""Leverage loop between two wallets against a lending pool.

Wallet A deposits stablecoins and borrows the target token; wallet B
deposits that token and borrows stablecoins back, buys more target, and so
on.  With no price impact the stable borrowed converges to the geometric
bound ltv_stable * ltv_target / (1 - ltv_target) of the starting capital.

    python demos/loop_attack.py
"""

from lendsim.engine import run
from lendsim.fixed import dec
from lendsim.scenario import load_scenario

for label, overrides in [("full headroom", []), ("first borrow seeded at 50%", ["agents.looper.params.seed_borrow=500000"])]:
    sc = load_scenario("loop_attack_ren", overrides)
    capital = dec(sc.wallets["attacker_a"]["USDC"])
    memory = run(sc).summary["agents"]["looper"]
    steps = memory["increments"][:4]
    print(f"{label}: {memory['iteration']} iterations, first increments {steps}")
    print(f"  cumulative stable borrowed {memory['cumulative']} = {dec(memory['cumulative']) / capital} x capital")
