import numpy as np
import pytest

from bmlp.harness import gen_isoenzyme_network
from bmlp.network import Hypothesis, NetworkError, parse_network
from bmlp.phenotype import Experiment, Label, instance_space, predict, predict_all

from .conftest import random_network

NET = """\
METABOLITES
c1 c2 c3 c4 c5
GENES
g1 g2 g3
REACTIONS
t1 : c1 + c2 -> c3 + c4 | g1
t2 : c3 + c4 -> c5 | g2
t3 : c5 -> c4 | TRUE
CONDITIONS
rich : sources = c1, c2 ; targets = c5
fed : sources = c1, c2, c5 ; targets = c5
"""


@pytest.fixture
def net():
    return parse_network(NET)


def test_labels(net):
    assert predict(net, Hypothesis.empty(), Experiment(("g2",), "rich")) is Label.POSITIVE
    assert predict(net, Hypothesis.single("g3", "t2"), Experiment(("g2",), "rich")) is Label.NEGATIVE
    assert predict(net, Hypothesis.empty(), Experiment((), "rich")) is Label.NEGATIVE
    assert predict(net, Hypothesis.empty(), Experiment(("g2",), "fed")) is Label.NEGATIVE


def test_experiment_validation(net):
    assert Experiment(("g2", "g1"), "rich").knockouts == ("g1", "g2")
    assert Experiment(("g2", "g1"), "rich").id == "rich:g1+g2"
    assert Experiment((), "rich").id == "rich:wt"
    with pytest.raises(ValueError):
        Experiment(("g1", "g1"), "rich")
    with pytest.raises(ValueError):
        Experiment(("g1", "g2", "g3"), "rich")
    with pytest.raises(NetworkError):
        predict(net, Hypothesis.empty(), Experiment(("zz",), "rich"))
    with pytest.raises(NetworkError):
        predict(net, Hypothesis.empty(), Experiment((), "nowhere"))


def test_label_values():
    assert Label.from_lethal(True).value == "pos" and Label.POSITIVE.lethal
    assert not Label.NEGATIVE.lethal


def test_instance_space_order(net):
    t = instance_space(net)
    assert len(t) == (3 + 3) * 2
    assert [e.id for e in t[:6]] == ["rich:g1", "rich:g2", "rich:g3", "rich:g1+g2", "rich:g1+g3", "rich:g2+g3"]


def test_wild_type_table(net):
    table = predict_all(net, [Hypothesis.empty()], [Experiment((), "rich")])
    assert table.shape == (1, 1) and not table.lethal[0, 0]


def test_predict_all_matches_predict(net):
    hyps = [Hypothesis.empty(), Hypothesis.single("g3", "t2"), Hypothesis.single("g1", "t2"),
            Hypothesis.parse("g3:t1,g3:t2")]
    exps = [Experiment((), "rich")] + instance_space(net)
    table = predict_all(net, hyps, exps)
    for i, h in enumerate(hyps):
        for j, e in enumerate(exps):
            assert table.label(i, j) is predict(net, h, e)


def test_predict_all_random_networks():
    rng = np.random.default_rng(77)
    for _ in range(15):
        net = random_network(rng, max_met=12, max_rxn=12, n_genes=4)
        rids = [r.id for r in net.reactions]
        hyps = [Hypothesis.empty()]
        for _ in range(5):
            if rids:
                hyps.append(Hypothesis.single(str(rng.choice(net.genes)), str(rng.choice(rids))))
        exps = instance_space(net)
        table = predict_all(net, hyps, exps, chunk=7)
        for i, h in enumerate(hyps):
            for j, e in enumerate(exps):
                assert table.lethal[i, j] == predict(net, h, e).lethal


def test_rescue_is_monotone():
    rng = np.random.default_rng(4)
    for _ in range(15):
        net = random_network(rng, max_met=10, max_rxn=10, n_genes=4)
        if not net.reactions:
            continue
        rid = [r.id for r in net.reactions]
        small = Hypothesis.single(str(rng.choice(net.genes)), str(rng.choice(rid)))
        big = Hypothesis(small.associations + ((str(rng.choice(net.genes)), str(rng.choice(rid))),))
        exps = instance_space(net)
        table = predict_all(net, [small, big], exps)
        assert not (table.lethal[1] & ~table.lethal[0]).any()


def test_hidden_row_equals_oracle_labels():
    from bmlp.harness import SyntheticOracle

    problem = gen_isoenzyme_network(1, 8, 2)
    table = problem.prediction_table()
    oracle = SyntheticOracle(problem.net, problem.hidden)  # computes labels directly
    row = table.lethal[problem.hidden_index]
    assert all(oracle(e).lethal == row[j] for j, e in enumerate(problem.experiments))
