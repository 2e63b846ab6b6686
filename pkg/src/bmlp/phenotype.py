"""Knockout phenotypes predicted from target reachability.

A mutant grows (negative label) when every target metabolite of the growth
condition is reachable from the condition's sources; otherwise it is lethal
(positive label).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitmat import pack_bools
from .ie import closure_batch, query
from .network import Hypothesis, Network, NetworkError, base_mask, hypothesis_rows

MAX_KNOCKOUTS = 2


class Label(enum.Enum):
    POSITIVE = "pos"  # lethal
    NEGATIVE = "neg"  # viable

    @classmethod
    def from_lethal(cls, lethal: bool) -> "Label":
        return cls.POSITIVE if lethal else cls.NEGATIVE

    @property
    def lethal(self) -> bool:
        return self is Label.POSITIVE


@dataclass(frozen=True)
class Experiment:
    knockouts: tuple[str, ...]
    condition: str

    def __post_init__(self):
        kos = tuple(sorted(self.knockouts))
        if len(set(kos)) != len(kos):
            raise ValueError(f"repeated gene in knockout set {kos}")
        if len(kos) > MAX_KNOCKOUTS:
            raise ValueError(f"at most {MAX_KNOCKOUTS} knockouts per experiment, got {len(kos)}")
        object.__setattr__(self, "knockouts", kos)

    @property
    def id(self) -> str:
        return f"{self.condition}:{'+'.join(self.knockouts) or 'wt'}"

    def __str__(self) -> str:
        return self.id


def _check_experiment(net: Network, exp: Experiment) -> None:
    net.condition(exp.condition)
    net.check_genes(exp.knockouts)


def predict(net: Network, hyp: Hypothesis, exp: Experiment) -> Label:
    _check_experiment(net, exp)
    cond = net.condition(exp.condition)
    closure = query(net, (net.metabolites[i] for i in cond.sources), exp.knockouts, hyp).closure
    viable = all(closure[i] for i in cond.targets)
    return Label.from_lethal(not viable)


@dataclass
class PredictionTable:
    """Lethality predictions for every (hypothesis, experiment) pair."""

    hypotheses: list[Hypothesis]
    experiments: list[Experiment]
    lethal: np.ndarray  # (|H|, |T|) bool

    def label(self, h: int, t: int) -> Label:
        return Label.from_lethal(bool(self.lethal[h, t]))

    @property
    def shape(self) -> tuple[int, int]:
        return self.lethal.shape

    def positive_coverage(self) -> np.ndarray:
        return self.lethal.sum(axis=1)


def predict_all(
    net: Network,
    hypotheses: Sequence[Hypothesis],
    experiments: Sequence[Experiment],
    chunk: int = 20000,
) -> PredictionTable:
    """Evaluate ``predict`` for all pairs.

    Masks are built per knockout set and de-duplicated, so each distinct
    (condition, mask) closure runs once; closures are batched.
    """
    hypotheses = list(hypotheses)
    experiments = list(experiments)
    for exp in experiments:
        _check_experiment(net, exp)
    nh, nt, k = len(hypotheses), len(experiments), net.n_reactions
    lethal = np.zeros((nh, nt), dtype=bool)
    if nh == 0 or nt == 0:
        return PredictionTable(hypotheses, experiments, lethal)

    assoc_h, assoc_g, assoc_r = [], [], []
    for hi, hyp in enumerate(hypotheses):
        for gi, row in hypothesis_rows(net, hyp):
            assoc_h.append(hi)
            assoc_g.append(gi)
            assoc_r.append(row)
    assoc_h_arr = np.asarray(assoc_h, dtype=np.intp)
    assoc_g_arr = np.asarray(assoc_g, dtype=np.intp)
    assoc_r_arr = np.asarray(assoc_r, dtype=np.intp)

    cond_src = {}
    cond_tgt = {}
    for c in net.conditions:
        cond_src[c.name] = pack_bools(np.isin(np.arange(net.n_metabolites), c.sources))
        cond_tgt[c.name] = pack_bools(np.isin(np.arange(net.n_metabolites), c.targets))

    by_ko: dict[tuple[str, ...], list[int]] = {}
    for ti, exp in enumerate(experiments):
        by_ko.setdefault(exp.knockouts, []).append(ti)

    # batch entries: (condition name, mask row) -> index into batch
    batch_key: dict[tuple[str, bytes], int] = {}
    batch_src: list[np.ndarray] = []
    batch_mask: list[np.ndarray] = []
    batch_tgt: list[np.ndarray] = []
    # for each experiment, the batch index per hypothesis
    lookup = np.zeros((nh, nt), dtype=np.intp)

    for kos, tis in by_ko.items():
        knocked = np.zeros(len(net.genes), dtype=bool)
        for g in kos:
            knocked[net.gene_index(g)] = True
        masks = np.tile(base_mask(net, kos), (nh, 1))
        if assoc_h_arr.size:
            live = ~knocked[assoc_g_arr]
            masks[assoc_h_arr[live], assoc_r_arr[live]] = True
        if k:
            uniq, inverse = np.unique(masks, axis=0, return_inverse=True)
            inverse = inverse.reshape(-1)
        else:
            uniq, inverse = masks[:1], np.zeros(nh, dtype=np.intp)
        for ti in tis:
            cname = experiments[ti].condition
            slots = np.empty(len(uniq), dtype=np.intp)
            for u, row in enumerate(uniq):
                key = (cname, row.tobytes())
                idx = batch_key.get(key)
                if idx is None:
                    idx = len(batch_src)
                    batch_key[key] = idx
                    batch_src.append(cond_src[cname])
                    batch_mask.append(row)
                    batch_tgt.append(cond_tgt[cname])
                slots[u] = idx
            lookup[:, ti] = slots[inverse]

    r1, r2 = net.matrices
    src = np.stack(batch_src)
    msk = np.stack(batch_mask) if k else np.zeros((len(batch_src), 0), dtype=bool)
    tgt = np.stack(batch_tgt)
    closed = np.empty_like(src)
    for start in range(0, len(src), chunk):
        sl = slice(start, start + chunk)
        closed[sl] = closure_batch(src[sl], r1, r2, msk[sl])
    viable = np.all((closed & tgt) == tgt, axis=1)
    lethal = ~viable[lookup]
    return PredictionTable(hypotheses, experiments, lethal)


def instance_space(net: Network, genes: Sequence[str] | None = None, conditions: Sequence[str] | None = None) -> list[Experiment]:
    """All single and unordered double knockouts under every condition.

    Ordered condition-major, then singles before doubles in gene order.
    """
    genes = list(net.genes if genes is None else genes)
    conditions = [c.name for c in net.conditions] if conditions is None else list(conditions)
    if not conditions:
        raise NetworkError("network declares no conditions")
    kos: list[tuple[str, ...]] = [(g,) for g in genes]
    kos += [(genes[i], genes[j]) for i in range(len(genes)) for j in range(i + 1, len(genes))]
    return [Experiment(ko, c) for c in conditions for ko in kos]


__all__ = ["Experiment", "Label", "PredictionTable", "instance_space", "predict", "predict_all"]
