"""Knockout phenotypes and how a missing isoenzyme changes them.

A generated network hides one gene-reaction association.  The model without
it calls some knockouts lethal that the true network survives; the prediction
table tells those hypotheses apart.
"""

from bmlp import Experiment, Hypothesis, gen_isoenzyme_network, predict

problem = gen_isoenzyme_network(seed=0, n_genes=10, n_conditions=3)
net, hidden = problem.net, problem.hidden
print(f"{len(net.genes)} genes, {net.n_reactions} reactions, {len(net.conditions)} conditions")
print("hidden association:", hidden)

gene, rxn = hidden.associations[0]
partner = next(iter(net.gpr_genes[net.reaction_rows(rxn)[0]]))
for cond in ("c1", "c2"):
    exp = Experiment((partner,), cond)
    print(f"  knock out {partner} in {cond}: model says {predict(net, Hypothesis.empty(), exp).value},"
          f" truth says {predict(net, hidden, exp).value}")

table = problem.prediction_table()
print(f"\nprediction table {table.shape[0]} hypotheses x {table.shape[1]} experiments")
row = table.lethal[problem.hidden_index]
print("hypotheses with exactly the hidden row:", int((table.lethal == row).all(axis=1).sum()))
print("lethal fraction per hypothesis: min %.2f  max %.2f" % (table.lethal.mean(1).min(), table.lethal.mean(1).max()))
