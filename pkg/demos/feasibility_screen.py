"""Screen assets for squeeze feasibility from a liquidity snapshot.

An asset is interesting when the pool holds a large share of its market
cap, and more so when much of that is still available to borrow.

    python demos/feasibility_screen.py [snapshot.csv]
"""

import sys
from importlib import resources

from lendsim.feasibility import format_table, rank, read_snapshots

path = sys.argv[1] if len(sys.argv) > 1 else resources.files("lendsim").joinpath("scenarios", "snapshot_synthetic.csv")
ranked = rank(read_snapshots(path))
print(format_table(ranked), end="")
flagged = [r.snapshot.asset for r in ranked if r.available_flag and r.deposit_flag]
print(f"flagged on both thresholds: {', '.join(flagged) or 'none'}")
