from pathlib import Path

import numpy as np
import pytest

from bmlp.network import (
    Condition,
    DirectedReaction,
    GprAnd,
    GprGene,
    GprOr,
    GprTrue,
    Network,
    load_network,
)

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"
TOY_NET = DATA / "toy.net"


@pytest.fixture
def toy() -> Network:
    return load_network(TOY_NET)


@pytest.fixture
def toy_path() -> Path:
    return TOY_NET


def random_gpr(rng, genes):
    kind = rng.integers(4)
    if kind == 0 or not genes:
        return GprTrue()
    picks = [GprGene(g) for g in rng.choice(genes, size=min(len(genes), int(rng.integers(1, 4))), replace=False)]
    if kind == 1 or len(picks) == 1:
        return picks[0]
    return GprAnd(tuple(picks)) if kind == 2 else GprOr(tuple(picks))


def random_network(rng, max_met=32, max_rxn=32, n_genes=6, zero_reactant_p=0.05) -> Network:
    """Random network with underscore-free names that avoid the datalog constants."""
    n = int(rng.integers(1, max_met + 1))
    k = int(rng.integers(0, max_rxn + 1))
    mets = tuple(f"x{i}" for i in range(n))
    genes = tuple(f"g{i}" for i in range(n_genes))
    rxns = []
    for i in range(k):
        n_in = 0 if rng.random() < zero_reactant_p else int(rng.integers(1, min(n, 3) + 1))
        n_out = int(rng.integers(1, min(n, 3) + 1))
        lhs = tuple(sorted(rng.choice(n, size=n_in, replace=False).tolist()))
        rhs = tuple(sorted(rng.choice(n, size=n_out, replace=False).tolist()))
        rxns.append(DirectedReaction(f"r{i}", lhs, rhs, random_gpr(rng, list(genes))))
    n_src = int(rng.integers(0, min(n, 4) + 1))
    src = tuple(sorted(rng.choice(n, size=n_src, replace=False).tolist()))
    cond = Condition("c", src, (int(rng.integers(n)),))
    return Network(mets, genes, tuple(rxns), (cond,))


def floyd_warshall(adj: np.ndarray) -> np.ndarray:
    """Transitive closure R+ (paths of length >= 1), one relaxation per pivot."""
    reach = np.array(adj, dtype=bool)
    for m in range(reach.shape[0]):
        reach |= reach[:, m:m + 1] & reach[m:m + 1, :]
    return reach
