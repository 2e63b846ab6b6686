"""Label sources, synthetic isoenzyme networks and the active vs random study.

The synthetic generator builds a small GEM-like fragment: a few linear
pathways whose end products combine into ``biomass``, with each enzyme
function catalysing one pathway step or a side branch.  One gene shares a
function with an isoenzyme partner; that association is deleted from the
model and becomes the hidden hypothesis.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .datalog import reference_eval  # noqa: F401  (oracle re-exported for callers)
from .learner import RunRecord, active_loop, random_loop
from .network import (
    Condition,
    DirectedReaction,
    GprGene,
    GprOr,
    GprTrue,
    Hypothesis,
    Network,
)
from .phenotype import Experiment, Label, PredictionTable, instance_space, predict, predict_all

CSV_HEADER = ("strategy", "budget", "recovery_frequency", "mean_alive", "mean_queries")


class GenerationError(ValueError):
    pass


class OracleMiss(KeyError):
    """The dataset has no label for a requested experiment."""

    def __init__(self, experiment_id: str):
        super().__init__(experiment_id)
        self.experiment_id = experiment_id

    def __str__(self) -> str:
        return f"no label for experiment {self.experiment_id!r}"


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


class SyntheticOracle:
    """Labels from the network under a hidden true hypothesis."""

    def __init__(self, net: Network, hidden: Hypothesis, table: PredictionTable | None = None):
        self.net = net
        self.hidden = hidden
        self._row = None
        self._index = None
        if table is not None and hidden in table.hypotheses:
            self._row = table.lethal[table.hypotheses.index(hidden)]
            self._index = {e: i for i, e in enumerate(table.experiments)}
        self.queries = 0

    def __call__(self, exp: Experiment) -> Label:
        self.queries += 1
        if self._index is not None and exp in self._index:
            return Label.from_lethal(bool(self._row[self._index[exp]]))
        return predict(self.net, self.hidden, exp)


class DatasetOracle:
    """Labels looked up from ``experiment_id,condition,gene1[,gene2],label`` lines."""

    def __init__(self, labels: dict[Experiment, Label], ids: dict[Experiment, str] | None = None):
        self.labels = labels
        self.ids = ids or {}
        self.queries = 0

    @classmethod
    def parse(cls, text: str) -> "DatasetOracle":
        labels: dict[Experiment, Label] = {}
        ids: dict[Experiment, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (4, 5):
                raise ValueError(f"line {lineno}: expected 4 or 5 comma-separated fields")
            eid, cond, *genes, lab = parts
            genes = [g for g in genes if g]
            if lab not in ("pos", "neg"):
                raise ValueError(f"line {lineno}: label must be pos or neg, got {lab!r}")
            exp = Experiment(tuple(genes), cond)
            if exp in labels:
                raise ValueError(f"line {lineno}: duplicate experiment {exp.id}")
            labels[exp] = Label(lab)
            ids[exp] = eid
        return cls(labels, ids)

    @classmethod
    def load(cls, path) -> "DatasetOracle":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def __call__(self, exp: Experiment) -> Label:
        self.queries += 1
        try:
            return self.labels[exp]
        except KeyError:
            raise OracleMiss(exp.id) from None


def format_dataset(experiments: Sequence[Experiment], labels: Sequence[Label]) -> str:
    out = []
    for i, (exp, lab) in enumerate(zip(experiments, labels)):
        genes = list(exp.knockouts) or [""]
        out.append(",".join([f"e{i}", exp.condition, *genes, lab.value]))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# synthetic networks
# --------------------------------------------------------------------------


@dataclass
class IsoenzymeProblem:
    net: Network
    hidden: Hypothesis
    hypotheses: list[Hypothesis]
    experiments: list[Experiment]
    owners: dict[str, tuple[str, ...]] = field(default_factory=dict)  # function -> designated genes
    table: PredictionTable | None = None

    @property
    def hidden_index(self) -> int:
        return self.hypotheses.index(self.hidden)

    def prediction_table(self) -> PredictionTable:
        if self.table is None:
            self.table = predict_all(self.net, self.hypotheses, self.experiments)
        return self.table


def default_double_count(n_genes: int) -> int:
    n = round(n_genes * 6 / 33)
    return n if n >= 2 else 0


def gen_isoenzyme_network(
    seed: int,
    n_genes: int = 33,
    n_conditions: int = 7,
    n_double: int | None = None,
    n_pathways: int | None = None,
) -> IsoenzymeProblem:
    """Random GEM fragment with one deleted isoenzyme association.

    Genes are split into single-function and double-function genes.  Function
    ``i < n_single`` belongs to single gene ``i``; the double-function genes
    share the remaining functions in a ring, two each.  The hypothesis space
    pairs every gene with every function it does not own, plus the deleted
    original function and the empty hypothesis, which gives
    ``n_single*(n-1) + n_double*(n-2) + 2`` hypotheses (1052 at 27 + 6).
    """
    if n_genes < 4:
        raise GenerationError("need at least 4 genes")
    if n_conditions < 1:
        raise GenerationError("need at least one condition")
    if n_double is None:
        n_double = default_double_count(n_genes)
    if n_double == 1 or n_double < 0:
        raise GenerationError("double-function genes share functions in a ring and need n_double >= 2 or 0")
    n_single = n_genes - n_double
    if n_single < 2:
        raise GenerationError(f"need two single-function genes for the isoenzyme pair, got {n_single}")
    rng = np.random.default_rng(seed)

    genes = [f"g{i:02d}" for i in range(n_genes)]
    order = rng.permutation(n_genes)
    singles = [genes[i] for i in order[:n_single]]
    doubles = [genes[i] for i in order[n_single:]]
    n_func = n_genes
    func_names = [f"rxn{j:02d}" for j in rng.permutation(n_func)]
    owners: dict[str, tuple[str, ...]] = {}
    for i, g in enumerate(singles):
        owners[func_names[i]] = (g,)
    for j, g in enumerate(doubles):
        for f in (func_names[n_single + j], func_names[n_single + (j + 1) % n_double]):
            owners[f] = tuple(sorted(owners.get(f, ()) + (g,)))
    own: dict[str, set[str]] = {g: set() for g in genes}
    for f, gs in owners.items():
        for g in gs:
            own[g].add(f)

    iso_gene, partner = singles[0], singles[1]
    iso_func = func_names[0]

    # Pathway 0 ends in the isoenzyme step and is bypassed by the supplement of every
    # condition except minimal medium; the other functions are mostly sole
    # catalysts of essential steps, with a few redundant pairs and side branches.
    # The partner's own function sits on a side branch so that knocking the
    # partner out only blocks the isoenzyme step.
    rest = func_names[2:]
    rest = [rest[i] for i in rng.permutation(len(rest))]
    n_alt_pairs = max(1, len(rest) // 16) if len(rest) >= 4 else 0
    n_side = len(rest) // 24
    alt = [tuple(rest[2 * i: 2 * i + 2]) for i in range(n_alt_pairs)]
    side = [func_names[1]] + rest[2 * n_alt_pairs: 2 * n_alt_pairs + n_side]
    solo = rest[2 * n_alt_pairs + n_side:]
    if n_pathways is None:
        n_pathways = max(2, round(n_genes / 8))
    paths: list[list[tuple[str, ...]]] = [[] for _ in range(n_pathways)]
    n_pre = min(len(solo), int(rng.integers(0, 2)))
    paths[0].extend((f,) for f in solo[:n_pre])
    paths[0].append((iso_func,))
    units: list[tuple[str, ...]] = [(f,) for f in solo[n_pre:]] + alt
    units = [units[i] for i in rng.permutation(len(units))]
    for i, u in enumerate(units):
        paths[1 + i % (n_pathways - 1)].append(u)

    metabolites: list[str] = ["glc"]
    reactions: list[DirectedReaction] = []
    step_met: list[list[str]] = []
    met_idx: dict[str, int] = {"glc": 0}

    def met(name: str) -> int:
        if name not in met_idx:
            met_idx[name] = len(metabolites)
            metabolites.append(name)
        return met_idx[name]

    def gpr_of(f: str, model: bool):
        gs = owners[f]
        if f == iso_func:
            gs = (partner,) if model else tuple(sorted((iso_gene, partner)))
        terms = tuple(GprGene(g) for g in gs)
        return terms[0] if len(terms) == 1 else GprOr(terms)

    for p, steps in enumerate(paths):
        mets = [f"x{p}s{q}" for q in range(len(steps) + 1)]
        mets[-1] = f"bm{p}"
        step_met.append(mets)
        reactions.append(DirectedReaction(f"up{p}", (met("glc"),), (met(mets[0]),), GprTrue()))
        for q, unit in enumerate(steps):
            for f in unit:
                reactions.append(DirectedReaction(f, (met(mets[q]),), (met(mets[q + 1]),), gpr_of(f, True)))
    for j, f in enumerate(side):
        p = int(rng.integers(n_pathways))
        q = int(rng.integers(len(paths[p]) + 1))
        reactions.append(
            DirectedReaction(f, (met(step_met[p][q]),), (met(f"side{j}"),), gpr_of(f, True))
        )
    biomass = met("biomass")
    reactions.append(DirectedReaction("bio", tuple(sorted(met(f"bm{p}") for p in range(n_pathways))), (biomass,), GprTrue()))

    conditions = [Condition("c1", (0,), (biomass,))]
    for ci in range(1, n_conditions):
        sup = [met("bm0")]
        for p in range(1, n_pathways):
            if rng.random() < 0.3 and len(paths[p]) > 1:
                q = int(rng.integers(1, len(paths[p])))
                sup.append(met(step_met[p][q]))
        conditions.append(Condition(f"c{ci + 1}", tuple(sorted({0, *sup})), (biomass,)))

    def build(model: bool) -> Network:
        rx = tuple(
            DirectedReaction(r.id, r.reactants, r.products, gpr_of(r.id, model)) if r.id in owners else r
            for r in reactions
        )
        return Network(tuple(metabolites), tuple(genes), rx, tuple(conditions))

    net = build(model=True)
    hidden = Hypothesis.single(iso_gene, iso_func)

    pool = [Hypothesis.single(g, f) for g in genes for f in sorted(func_names) if f not in own[g]]
    pool.append(hidden)
    pool.sort(key=lambda h: h.associations)
    hypotheses = [Hypothesis.empty()] + pool
    experiments = instance_space(net)

    wt = Experiment((), "c1")
    for c in conditions:
        if predict(net, Hypothesis.empty(), Experiment((), c.name)).lethal:
            raise GenerationError(f"wild type is not viable in condition {c.name}")
    probe = Experiment((partner,), wt.condition)
    if not predict(net, Hypothesis.empty(), probe).lethal or predict(net, hidden, probe).lethal:
        raise GenerationError("deleted association is not observable under minimal medium")
    return IsoenzymeProblem(net, hidden, hypotheses, experiments, owners)


def expected_space_sizes(n_genes: int, n_conditions: int, n_double: int | None = None) -> tuple[int, int]:
    """(|H|, |T|) that :func:`gen_isoenzyme_network` produces."""
    if n_double is None:
        n_double = default_double_count(n_genes)
    n_single = n_genes - n_double
    h = n_single * (n_genes - 1) + n_double * (n_genes - 2) + 2
    t = (math.comb(n_genes, 2) + n_genes) * n_conditions
    return h, t


# --------------------------------------------------------------------------
# comparison study
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialConfig:
    seed: int
    budget: int
    strategy: str = "active"
    n_genes: int = 33
    n_conditions: int = 7


@dataclass
class TrialResult:
    seed: int
    strategy: str
    hidden: int
    best_trace: list[int]
    alive_trace: list[int]
    record: RunRecord

    def best_at(self, n: int) -> int:
        return self.best_trace[min(n, len(self.best_trace) - 1)]

    def alive_at(self, n: int) -> int:
        return self.alive_trace[min(n, len(self.alive_trace) - 1)]

    def queries_at(self, n: int) -> int:
        return min(n, len(self.best_trace) - 1)

    @property
    def queries_to_recovery(self) -> int | None:
        """Queries after which the output is the hidden hypothesis for good."""
        if self.best_trace[-1] != self.hidden:
            return None
        s = len(self.best_trace) - 1
        while s > 0 and self.best_trace[s - 1] == self.hidden:
            s -= 1
        return s


@dataclass
class ComparisonResult:
    budgets: list[int]
    trials: dict[str, list[TrialResult]]

    def rows(self) -> list[tuple]:
        out = []
        for strategy in sorted(self.trials):
            ts = self.trials[strategy]
            for n in self.budgets:
                rec = float(np.mean([t.best_at(n) == t.hidden for t in ts]))
                alive = float(np.mean([t.alive_at(n) for t in ts]))
                q = float(np.mean([t.queries_at(n) for t in ts]))
                out.append((strategy, n, rec, alive, q))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for strategy, n, rec, alive, q in self.rows():
            w.writerow([strategy, n, f"{rec:.6f}", f"{alive:.6f}", f"{q:.6f}"])
        return buf.getvalue()

    def recovery(self, strategy: str, budget: int) -> float:
        ts = self.trials[strategy]
        return float(np.mean([t.best_at(budget) == t.hidden for t in ts]))

    def queries_to_recovery(self, strategy: str, cap: int | None = None) -> list[int]:
        """Per-seed queries to recovery; unrecovered runs count as ``cap``."""
        out = []
        for t in self.trials[strategy]:
            q = t.queries_to_recovery
            if q is None:
                q = cap if cap is not None else len(t.best_trace) - 1
            out.append(q)
        return out


def run_trial(
    problem: IsoenzymeProblem, seed: int, strategy: str, budget: int, costs=None, on_step=None
) -> TrialResult:
    """One learning run.

    The run for budget ``N`` is a prefix of the run for any larger budget
    (selection only depends on the state), so callers may run once at the
    largest budget and read off shorter ones.
    """
    table = problem.prediction_table()
    oracle = SyntheticOracle(problem.net, problem.hidden, table)
    if strategy == "active":
        rec = active_loop(table, oracle, budget, costs=costs, on_step=on_step)
    elif strategy == "random":
        rng = np.random.default_rng([seed, 1])
        rec = random_loop(table, oracle, budget, rng, on_step=on_step)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return TrialResult(seed, strategy, problem.hidden_index, rec.best_trace, rec.alive_trace, rec)


def _seed_trials(args) -> list[TrialResult]:
    seed, n_genes, n_conditions, strategies, horizon = args
    problem = gen_isoenzyme_network(seed, n_genes, n_conditions)
    return [run_trial(problem, seed, s, horizon) for s in strategies]


def run_comparison(
    seeds: Iterable[int],
    budgets: Sequence[int],
    strategies: Sequence[str] = ("active", "random"),
    n_genes: int = 33,
    n_conditions: int = 7,
    horizon: int | None = None,
    workers: int = 1,
) -> ComparisonResult:
    """Recovery frequency of each strategy at each budget over seeded problems.

    Each seed gets its own generated network.  Runs go to ``horizon`` queries
    (default: the whole instance space) or until one hypothesis is left, so
    queries-to-recovery is available alongside the budgeted statistics.
    """
    seeds = list(seeds)
    budgets = sorted(set(int(b) for b in budgets))
    if horizon is None:
        horizon = expected_space_sizes(n_genes, n_conditions)[1]
    horizon = max(horizon, max(budgets, default=0))
    jobs = [(s, n_genes, n_conditions, tuple(strategies), horizon) for s in seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_seed_trials, jobs))
    else:
        results = [_seed_trials(j) for j in jobs]
    trials: dict[str, list[TrialResult]] = {s: [] for s in strategies}
    for per_seed in results:
        for t in per_seed:
            trials[t.strategy].append(t)
    return ComparisonResult(budgets, trials)


__all__ = [
    "CSV_HEADER",
    "ComparisonResult",
    "DatasetOracle",
    "GenerationError",
    "IsoenzymeProblem",
    "OracleMiss",
    "SyntheticOracle",
    "TrialConfig",
    "TrialResult",
    "expected_space_sizes",
    "format_dataset",
    "gen_isoenzyme_network",
    "run_comparison",
    "run_trial",
]
