"""Transitive closure by repeated squaring on packed bit rows."""

import time

import numpy as np

from bmlp import BitMatrix, transitive_closure

chain = BitMatrix.from_strs(["0100", "0010", "0001", "0000"])
print("chain 0->1->2->3")
print("\n".join("".join("1" if b else "0" for b in row) for row in transitive_closure(chain).to_bools()))

rng = np.random.default_rng(0)
for n in (64, 256, 1024):
    adj = rng.random((n, n)) < 2.0 / n
    t0 = time.perf_counter()
    closed = transitive_closure(BitMatrix.from_bools(adj))
    dt = time.perf_counter() - t0
    print(f"n={n:5d}: {int(adj.sum()):6d} edges -> {int(closed.to_bools().sum()):8d} reachable pairs in {dt * 1e3:.1f} ms")
