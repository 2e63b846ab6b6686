"""Active version-space learning of gene-reaction associations.

Hypotheses are scored by MDL compression, turned into a base-2 softmax
posterior, and the next knockout experiment is the one with the lowest
approximate expected cost::

    EC(t) = C_t + p(t) * mean_{t' != t} C_t' * J(H_t)
                + (1 - p(t)) * mean_{t' != t} C_t' * J(H_t_bar)

where ``p(t)`` is the posterior mass of hypotheses predicting a lethal
outcome and ``J`` is the entropy of the renormalised posterior on each side.
Observed labels refute every inconsistent hypothesis.

All functions work on indices into a precomputed :class:`PredictionTable`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .phenotype import Experiment, Label, PredictionTable

Oracle = Callable[[Experiment], Label]

_TIE_RTOL = 1e-12


class LearnerError(RuntimeError):
    pass


class EmptyVersionSpaceError(LearnerError):
    """No hypothesis is consistent with the labelled examples."""

    def __init__(self, message: str, experiment: Experiment | None = None, label: Label | None = None):
        super().__init__(message)
        self.experiment = experiment
        self.label = label


class ExhaustedError(LearnerError):
    """No candidate experiments remain."""


@dataclass(frozen=True)
class LabeledExample:
    experiment: int  # index into the table's experiments
    label: Label


@dataclass(frozen=True)
class LearnerState:
    alive: np.ndarray  # sorted hypothesis indices (version space)
    examples: tuple[LabeledExample, ...]
    compressions: np.ndarray  # aligned with alive
    posteriors: np.ndarray  # aligned with alive
    candidates: np.ndarray  # sorted unlabelled experiment indices
    costs: np.ndarray  # C_t for every experiment in the table


# --------------------------------------------------------------------------
# scoring
# --------------------------------------------------------------------------


def compression_value(n_pos: int, pc: int, size: int, fp: int) -> float:
    """``|E+| - |E+| / pc * (size + fp)``; ``-size`` when ``pc`` is zero."""
    if pc == 0:
        return -float(size)
    return n_pos - (n_pos / pc) * (size + fp)


def compression(table: PredictionTable, h: int, examples: Sequence[LabeledExample]) -> float:
    """Compression of hypothesis ``h``.

    ``pc`` counts lethal predictions over the whole instance space of the
    table; ``fp`` counts labelled viable examples that ``h`` predicts lethal.
    """
    n_pos = sum(1 for e in examples if e.label.lethal)
    pc = int(table.lethal[h].sum())
    fp = sum(1 for e in examples if not e.label.lethal and table.lethal[h, e.experiment])
    return compression_value(n_pos, pc, table.hypotheses[h].size, fp)


def compressions(table: PredictionTable, hyps: np.ndarray, examples: Sequence[LabeledExample]) -> np.ndarray:
    """Vectorised :func:`compression` over hypothesis indices ``hyps``."""
    hyps = np.asarray(hyps, dtype=np.intp)
    n_pos = sum(1 for e in examples if e.label.lethal)
    pc = table.lethal[hyps].sum(axis=1)
    neg = [e.experiment for e in examples if not e.label.lethal]
    fp = table.lethal[np.ix_(hyps, neg)].sum(axis=1) if neg else np.zeros(len(hyps), dtype=np.int64)
    size = np.array([table.hypotheses[h].size for h in hyps], dtype=float)
    out = np.empty(len(hyps), dtype=float)
    zero = pc == 0
    out[zero] = -size[zero]
    nz = ~zero
    out[nz] = n_pos - (n_pos / pc[nz]) * (size[nz] + fp[nz])
    return out


def posterior(scores: np.ndarray) -> np.ndarray:
    """Base-2 softmax of compression scores."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise EmptyVersionSpaceError("posterior over an empty hypothesis set")
    w = np.exp2(scores - scores.max())
    return w / w.sum()


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0


def _branch_stats(state: LearnerState, table: PredictionTable, cands: np.ndarray):
    pred = table.lethal[np.ix_(state.alive, cands)]
    p = state.posteriors
    plogp = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    ppos = p @ pred
    pneg = p @ ~pred
    spos = plogp @ pred
    sneg = plogp @ ~pred
    return ppos, pneg, spos, sneg


def _branch_entropy(mass: np.ndarray, s: np.ndarray) -> np.ndarray:
    # entropy of p/mass restricted to a branch: -(1/mass) sum p log p + log mass
    out = np.zeros_like(mass)
    ok = mass > 0
    out[ok] = -s[ok] / mass[ok] + np.log2(mass[ok])
    return np.maximum(out, 0.0)


def p_positive(state: LearnerState, table: PredictionTable, t: int) -> float:
    """Posterior mass of alive hypotheses predicting a lethal outcome for ``t``."""
    return float(state.posteriors @ table.lethal[state.alive, t])


def expected_costs(state: LearnerState, table: PredictionTable) -> np.ndarray:
    """EC for every candidate, aligned with ``state.candidates``."""
    cands = state.candidates
    ppos, pneg, spos, sneg = _branch_stats(state, table, cands)
    jpos = _branch_entropy(ppos, spos)
    jneg = _branch_entropy(pneg, sneg)
    c = state.costs[cands]
    m = len(cands)
    mean_other = (c.sum() - c) / (m - 1) if m > 1 else np.zeros_like(c)
    return c + ppos * mean_other * jpos + pneg * mean_other * jneg


def _argmin_lowest(values: np.ndarray) -> int:
    lo = values.min()
    tol = _TIE_RTOL * max(1.0, abs(lo))
    return int(np.flatnonzero(values <= lo + tol)[0])


def select_experiment(state: LearnerState, table: PredictionTable) -> int:
    """Candidate experiment index with minimum expected cost."""
    if state.alive.size == 0:
        raise EmptyVersionSpaceError("no alive hypotheses")
    if state.candidates.size == 0:
        raise ExhaustedError("no candidate experiments left")
    return int(state.candidates[_argmin_lowest(expected_costs(state, table))])


def reduction_ratio(state: LearnerState, table: PredictionTable, t: int) -> float:
    """Minority fraction of the version space split by experiment ``t``."""
    if state.alive.size == 0:
        raise EmptyVersionSpaceError("no alive hypotheses")
    pos = int(table.lethal[state.alive, t].sum())
    return min(pos, state.alive.size - pos) / state.alive.size


# --------------------------------------------------------------------------
# state updates
# --------------------------------------------------------------------------


def _rescore(table: PredictionTable, alive: np.ndarray, examples) -> tuple[np.ndarray, np.ndarray]:
    comp = compressions(table, alive, examples)
    return comp, posterior(comp)


def initial_state(table: PredictionTable, costs: Sequence[float] | np.ndarray | None = None) -> LearnerState:
    nh, nt = table.shape
    if costs is None:
        costs = np.ones(nt)
    costs = np.asarray(costs, dtype=float)
    if costs.shape != (nt,):
        raise ValueError(f"need one cost per experiment ({nt}), got {costs.shape}")
    if np.any(costs < 0):
        raise ValueError("experiment costs must be non-negative")
    alive = np.arange(nh)
    comp, post = _rescore(table, alive, ())
    return LearnerState(alive, (), comp, post, np.arange(nt), costs)


def refute(state: LearnerState, t: int, label: Label, table: PredictionTable) -> LearnerState:
    """Record ``label`` for ``t`` and drop every hypothesis that disagrees."""
    pos = np.searchsorted(state.candidates, t)
    if pos >= state.candidates.size or state.candidates[pos] != t:
        raise LearnerError(f"experiment {t} is not an unlabelled candidate")
    keep = table.lethal[state.alive, t] == label.lethal
    alive = state.alive[keep]
    exp = table.experiments[t]
    if alive.size == 0:
        raise EmptyVersionSpaceError(
            f"label {label.value} for {exp.id} contradicts every remaining hypothesis", exp, label
        )
    examples = state.examples + (LabeledExample(t, label),)
    comp, post = _rescore(table, alive, examples)
    return replace(
        state,
        alive=alive,
        examples=examples,
        compressions=comp,
        posteriors=post,
        candidates=np.delete(state.candidates, pos),
    )


def best_hypothesis(state: LearnerState) -> int:
    """Alive hypothesis with the highest compression (lowest index on ties)."""
    return int(state.alive[int(np.argmax(state.compressions))])


def consistent_hypotheses(table: PredictionTable, examples: Sequence[LabeledExample]) -> np.ndarray:
    """Brute-force version space: hypotheses agreeing with every example."""
    ok = np.ones(table.shape[0], dtype=bool)
    for e in examples:
        ok &= table.lethal[:, e.experiment] == e.label.lethal
    return np.flatnonzero(ok)


# --------------------------------------------------------------------------
# the loop
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IterationLog:
    iteration: int
    experiment: str
    label: str
    alive: int
    reduction_ratio: float
    entropy: float
    best: str


@dataclass
class RunRecord:
    strategy: str
    result: int
    hypothesis: str
    log: list[IterationLog] = field(default_factory=list)
    best_trace: list[int] = field(default_factory=list)  # best hypothesis after 0..n queries
    alive_trace: list[int] = field(default_factory=list)
    stop_reason: str = ""
    final_state: LearnerState | None = None

    def to_lines(self) -> str:
        """Line-delimited JSON, one object per iteration plus a final summary."""
        lines = [
            json.dumps(
                {
                    "iteration": e.iteration,
                    "experiment": e.experiment,
                    "label": e.label,
                    "alive": e.alive,
                    "reduction_ratio": e.reduction_ratio,
                    "entropy": e.entropy,
                    "best": e.best,
                }
            )
            for e in self.log
        ]
        lines.append(
            json.dumps(
                {"result": self.hypothesis, "strategy": self.strategy, "queries": len(self.log), "stop": self.stop_reason}
            )
        )
        return "\n".join(lines) + "\n"


Selector = Callable[[LearnerState, PredictionTable], int]


def random_selector(rng: np.random.Generator) -> Selector:
    """Uniform selection without replacement, drawing a fresh index each call."""

    def pick(state: LearnerState, table: PredictionTable) -> int:
        if state.candidates.size == 0:
            raise ExhaustedError("no candidate experiments left")
        return int(state.candidates[rng.integers(state.candidates.size)])

    return pick


def run_loop(
    table: PredictionTable,
    oracle: Oracle,
    budget: int,
    selector: Selector = select_experiment,
    *,
    costs=None,
    strategy: str = "active",
    stop_when_single: bool = True,
    on_step: Callable[[LearnerState], None] | None = None,
) -> RunRecord:
    """Query, label, refute until budget, candidates or version space run out."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    state = initial_state(table, costs)
    best = best_hypothesis(state)
    record = RunRecord(strategy, best, str(table.hypotheses[best]))
    record.best_trace.append(best)
    record.alive_trace.append(int(state.alive.size))
    reason = "budget"
    while True:
        if len(record.log) >= budget:
            reason = "budget"
            break
        if state.candidates.size == 0:
            reason = "exhausted"
            break
        if stop_when_single and state.alive.size == 1:
            reason = "converged"
            break
        t = selector(state, table)
        ratio = reduction_ratio(state, table, t)
        exp = table.experiments[t]
        label = oracle(exp)
        state = refute(state, t, label, table)
        best = best_hypothesis(state)
        record.log.append(
            IterationLog(
                len(record.log) + 1,
                exp.id,
                label.value,
                int(state.alive.size),
                ratio,
                entropy(state.posteriors),
                str(table.hypotheses[best]),
            )
        )
        record.best_trace.append(best)
        record.alive_trace.append(int(state.alive.size))
        if on_step is not None:
            on_step(state)
    record.result = best
    record.hypothesis = str(table.hypotheses[best])
    record.stop_reason = reason
    record.final_state = state
    return record


def active_loop(table: PredictionTable, oracle: Oracle, budget: int, *, costs=None, **kw) -> RunRecord:
    return run_loop(table, oracle, budget, select_experiment, costs=costs, strategy="active", **kw)


def random_loop(table: PredictionTable, oracle: Oracle, budget: int, rng: np.random.Generator, **kw) -> RunRecord:
    """Passive baseline: same scoring and output rule, random instances."""
    return run_loop(table, oracle, budget, random_selector(rng), strategy="random", **kw)


__all__ = [
    "EmptyVersionSpaceError",
    "ExhaustedError",
    "IterationLog",
    "LabeledExample",
    "LearnerError",
    "LearnerState",
    "RunRecord",
    "active_loop",
    "best_hypothesis",
    "compression",
    "compression_value",
    "compressions",
    "consistent_hypotheses",
    "entropy",
    "expected_costs",
    "initial_state",
    "p_positive",
    "posterior",
    "random_loop",
    "reduction_ratio",
    "refute",
    "run_loop",
    "select_experiment",
]
