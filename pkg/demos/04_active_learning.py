"""One active learning run at the 33-gene / 7-condition scale.

Each step picks the experiment with the lowest approximate expected cost,
asks the synthetic oracle for its label and refutes the hypotheses that
disagree.  Watch the version space collapse.
"""

import time

from bmlp import SyntheticOracle, active_loop, gen_isoenzyme_network

t0 = time.perf_counter()
problem = gen_isoenzyme_network(seed=3)
table = problem.prediction_table()
print(f"|H| = {table.shape[0]}, |T| = {table.shape[1]}, table built in {time.perf_counter() - t0:.1f}s")
print("hidden:", problem.hidden)

rec = active_loop(table, SyntheticOracle(problem.net, problem.hidden, table), budget=20)
for e in rec.log:
    print(f"{e.iteration:3d} {e.experiment:14s} {e.label}  alive={e.alive:5d}  "
          f"split={e.reduction_ratio:.3f}  H={e.entropy:6.3f}  best={e.best}")
print(f"stopped ({rec.stop_reason}) with {rec.hypothesis}")
