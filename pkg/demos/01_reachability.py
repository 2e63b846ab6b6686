"""Reachability in a three-reaction network, matrix engine vs datalog.

c1 + c2 -> c3 + c4 -> c5 -> c4.  We compute the closure from {c1, c2} with
the bit-packed fixpoint, show the equivalent datalog program and its
groundings, then knock out the gene behind t2.
"""

from pathlib import Path

from bmlp import emit_datalog, load_network, query, reference_eval

net = load_network(Path(__file__).parent / "data" / "toy.net")
res = query(net, ["c1", "c2"])
print("closure from {c1,c2}:", net.decode(res.closure))
print("passes:", res.iterations, " fired:", [net.reactions[i].id for i in res.fired.indices()])

program = emit_datalog(net, "cond1", joins=False)
print("\nthe same network as a datalog program:\n" + program)
print("pathway(m1, Y) groundings:", sorted(y for _, y in reference_eval(program)))

res = query(net, ["c1", "c2"], knockouts=["g2"])
print("\nwith g2 knocked out (t2 off):", net.decode(res.closure))
