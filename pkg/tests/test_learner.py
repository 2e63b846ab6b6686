import math

import numpy as np
import pytest

from bmlp.harness import SyntheticOracle, gen_isoenzyme_network
from bmlp.learner import (
    EmptyVersionSpaceError,
    ExhaustedError,
    LabeledExample,
    LearnerError,
    LearnerState,
    active_loop,
    best_hypothesis,
    compression,
    compression_value,
    compressions,
    consistent_hypotheses,
    entropy,
    expected_costs,
    initial_state,
    p_positive,
    posterior,
    random_loop,
    reduction_ratio,
    refute,
    select_experiment,
)
from bmlp.network import Hypothesis
from bmlp.phenotype import Experiment, Label, PredictionTable

POS, NEG = Label.POSITIVE, Label.NEGATIVE


def make_table(rows, sizes=None):
    lethal = np.array(rows, dtype=bool)
    nh, nt = lethal.shape
    sizes = sizes or [1] * nh
    hyps = [Hypothesis(tuple((f"g{i}", f"r{j}") for j in range(s))) for i, s in enumerate(sizes)]
    exps = [Experiment((), f"c{j}") for j in range(nt)]
    return PredictionTable(hyps, exps, lethal)


def state_with(table, alive, post, candidates, costs=None):
    nt = table.shape[1]
    return LearnerState(
        np.asarray(alive), (), np.zeros(len(alive)), np.asarray(post, dtype=float),
        np.asarray(candidates), np.ones(nt) if costs is None else np.asarray(costs, dtype=float),
    )


# -- compression --------------------------------------------------------------


def test_compression_values():
    assert compression_value(10, 10, 1, 0) == pytest.approx(9, abs=1e-9)
    assert compression_value(10, 20, 1, 5) == pytest.approx(7, abs=1e-9)
    assert compression_value(10, 0, 2, 3) == -2
    assert compression_value(0, 0, 2, 0) == -2


def test_compression_from_table():
    # h0 covers 2 of 4, one of them a labelled negative
    table = make_table([[1, 1, 0, 0], [0, 0, 0, 0]], sizes=[1, 2])
    ex = [LabeledExample(0, POS), LabeledExample(1, NEG), LabeledExample(2, POS)]
    assert compression(table, 0, ex) == pytest.approx(2 - 2 / 2 * (1 + 1))
    assert compression(table, 1, ex) == -2
    assert np.allclose(compressions(table, np.array([0, 1]), ex), [0.0, -2.0])


# -- posterior and entropy -------------------------------------------------------


def test_posterior_values():
    assert np.allclose(posterior([1.0, 1.0]), [0.5, 0.5], atol=1e-9)
    assert np.allclose(posterior([3.0, 1.0]), [0.8, 0.2], atol=1e-9)
    assert np.allclose(posterior([3.0, 1.0]), posterior([103.0, 101.0]), atol=1e-12)
    assert np.isclose(posterior([2000.0, 0.0, -5000.0]).sum(), 1.0)
    with pytest.raises(EmptyVersionSpaceError):
        posterior([])


def test_entropy_values():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-9)
    assert entropy([1.0]) == 0.0
    assert entropy(np.full(8, 1 / 8)) == pytest.approx(3.0, abs=1e-9)
    assert entropy([1.0, 0.0]) == 0.0


# -- p(t), EC and selection -----------------------------------------------------------


def test_p_positive():
    table = make_table([[1, 1, 0], [1, 0, 0]])
    st = state_with(table, [0, 1], [0.8, 0.2], [0, 1, 2])
    assert p_positive(st, table, 0) == pytest.approx(1.0, abs=1e-9)
    assert p_positive(st, table, 1) == pytest.approx(0.8, abs=1e-9)
    assert p_positive(st, table, 2) == pytest.approx(0.0, abs=1e-9)


def test_expected_cost_example():
    # column 0 (B) lumps both hypotheses together, column 1 (A) separates them
    table = make_table([[1, 1], [1, 0]])
    st = state_with(table, [0, 1], [0.5, 0.5], [0, 1])
    ec = expected_costs(st, table)
    assert ec[0] == pytest.approx(2.0, abs=1e-9)
    assert ec[1] == pytest.approx(1.0, abs=1e-9)
    assert select_experiment(st, table) == 1


def test_expected_cost_uses_other_costs():
    table = make_table([[1, 1, 0], [1, 0, 1]])
    st = state_with(table, [0, 1], [0.5, 0.5], [0, 1, 2], costs=[1.0, 3.0, 5.0])
    ec = expected_costs(st, table)
    # B column: p=1, J=1, mean of other costs (3+5)/2
    assert ec[0] == pytest.approx(1 + 4.0, abs=1e-9)
    assert ec[1] == pytest.approx(3.0, abs=1e-9)
    assert ec[2] == pytest.approx(5.0, abs=1e-9)


def test_select_single_candidate_and_ties():
    table = make_table([[1, 1, 0], [1, 0, 1]])
    assert select_experiment(state_with(table, [0, 1], [0.5, 0.5], [0]), table) == 0
    flat = make_table([[0, 0, 0], [0, 0, 0]])
    assert select_experiment(state_with(flat, [0, 1], [0.5, 0.5], [1, 2]), flat) == 1
    with pytest.raises(ExhaustedError):
        select_experiment(state_with(flat, [0, 1], [0.5, 0.5], []), flat)


def test_branch_entropy_matches_direct_computation():
    rng = np.random.default_rng(0)
    table = make_table((rng.random((9, 12)) < 0.4).astype(int).tolist())
    post = rng.random(9)
    post /= post.sum()
    st = state_with(table, np.arange(9), post, np.arange(12))
    ec = expected_costs(st, table)
    for t in range(12):
        pred = table.lethal[:, t]
        p = post[pred].sum()
        jp = entropy(post[pred] / p) if p > 0 else 0.0
        jn = entropy(post[~pred] / (1 - p)) if p < 1 else 0.0
        assert ec[t] == pytest.approx(1 + p * jp + (1 - p) * jn, abs=1e-9)


# -- refute and reduction ratio ------------------------------------------------------------


def test_refute_drops_inconsistent():
    table = make_table([[1, 0], [0, 0]])
    st = initial_state(table)
    after = refute(st, 0, POS, table)
    assert after.alive.tolist() == [0]
    assert after.posteriors.tolist() == [1.0]
    assert after.candidates.tolist() == [1]
    same = refute(st, 1, NEG, table)
    assert same.alive.tolist() == [0, 1]
    assert same.posteriors.sum() == pytest.approx(1.0)


def test_refute_errors():
    table = make_table([[1, 0], [1, 0]])
    st = initial_state(table)
    with pytest.raises(EmptyVersionSpaceError) as info:
        refute(st, 0, NEG, table)
    assert info.value.experiment == table.experiments[0] and info.value.label is NEG
    after = refute(st, 0, POS, table)
    with pytest.raises(LearnerError):
        refute(after, 0, POS, table)


def test_reduction_ratio():
    table = make_table([[1], [1], [1], [0], [0], [0], [0]])
    st = initial_state(table)
    assert reduction_ratio(st, table, 0) == pytest.approx(3 / 7)
    flat = make_table([[1], [1], [1]])
    assert reduction_ratio(initial_state(flat), flat, 0) == 0.0
    even = make_table([[1], [1], [0], [0]])
    assert reduction_ratio(initial_state(even), even, 0) == 0.5


def test_initial_state_costs_validated():
    table = make_table([[1, 0]])
    with pytest.raises(ValueError):
        initial_state(table, [1.0])
    with pytest.raises(ValueError):
        initial_state(table, [1.0, -1.0])


# -- loops ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_problem():
    problem = gen_isoenzyme_network(0, 5, 2)
    problem.prediction_table()
    return problem


def test_budget_zero_returns_prior_best(small_problem):
    table = small_problem.prediction_table()
    rec = active_loop(table, SyntheticOracle(small_problem.net, small_problem.hidden, table), 0)
    assert rec.log == []
    assert rec.result == best_hypothesis(initial_state(table))
    assert rec.stop_reason == "budget"


def test_active_recovers_small_network(small_problem):
    table = small_problem.prediction_table()
    oracle = SyntheticOracle(small_problem.net, small_problem.hidden, table)
    rec = active_loop(table, oracle, 30)
    assert rec.result == small_problem.hidden_index
    # only the hidden hypothesis agrees with every label
    all_labels = [LabeledExample(t, table.label(small_problem.hidden_index, t)) for t in range(table.shape[1])]
    assert consistent_hypotheses(table, all_labels).tolist() == [small_problem.hidden_index]


def test_version_space_matches_brute_force(small_problem):
    table = small_problem.prediction_table()
    oracle = SyntheticOracle(small_problem.net, small_problem.hidden, table)
    seen = []

    def check(state):
        assert state.alive.tolist() == consistent_hypotheses(table, state.examples).tolist()
        assert math.isclose(state.posteriors.sum(), 1.0, abs_tol=1e-9)
        seen.append(state.alive.size)

    random_loop(table, oracle, 25, np.random.default_rng(3), on_step=check, stop_when_single=False)
    assert seen == sorted(seen, reverse=True)
    assert len(seen) == 25


def test_random_loop_is_seeded(small_problem):
    table = small_problem.prediction_table()
    runs = [
        random_loop(table, SyntheticOracle(small_problem.net, small_problem.hidden, table), 10,
                    np.random.default_rng([4, 1])).to_lines()
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


def test_run_stops_when_exhausted():
    table = make_table([[1, 0], [1, 0], [1, 1]])
    rec = active_loop(table, lambda e: NEG if e.condition == "c1" else POS, 10)
    assert rec.stop_reason == "exhausted" and len(rec.log) == 2
    assert rec.alive_trace[-1] == 2
    rec = active_loop(table, lambda e: POS, 10)
    assert rec.stop_reason == "converged" and rec.result == 2


def test_run_record_lines(small_problem):
    table = small_problem.prediction_table()
    rec = active_loop(table, SyntheticOracle(small_problem.net, small_problem.hidden, table), 3)
    import json

    lines = [json.loads(x) for x in rec.to_lines().splitlines()]
    assert len(lines) == len(rec.log) + 1
    assert set(lines[0]) >= {"iteration", "experiment", "label", "alive", "reduction_ratio", "entropy"}
    assert lines[-1]["result"] == rec.hypothesis


def test_negative_budget_rejected():
    table = make_table([[1]])
    with pytest.raises(ValueError):
        active_loop(table, lambda e: POS, -1)
