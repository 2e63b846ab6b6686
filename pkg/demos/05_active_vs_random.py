"""Recovery frequency of active selection against random sampling.

A smaller version of the acceptance study; pass a seed count on the command
line for more (20 seeds takes a minute or two).
"""

import sys

import numpy as np

from bmlp import run_comparison

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
budgets = [0, 5, 10, 15, 20]
result = run_comparison(range(n_seeds), budgets)
print(result.to_csv())
for strategy in ("active", "random"):
    q = result.queries_to_recovery(strategy, cap=3927)
    print(f"{strategy:6s} median queries to recovery: {np.median(q):.1f}")
