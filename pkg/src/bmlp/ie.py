"""Iterative extension: bottom-up reachability with boolean matrices.

Given a source vector ``v``, reactant matrix ``R1``, product matrix ``R2`` and
a transition mask ``t`` the engine repeats::

    f  = subset_rows(R1, v) AND t      # reactions whose reactants are present
    v' = v OR f . R2                   # add their products

until ``v'`` equals ``v``.  The fixpoint ``v*`` is the row of the ``pathway``
relation for the source hypernode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bitmat import BitMatrix, BitVec, DimensionError, band, beq, bor, subset_rows, vecmat_mul
from .network import Hypothesis, Network, gpr_mask


@dataclass(frozen=True)
class IEResult:
    closure: BitVec
    iterations: int
    fired: BitVec


def iterate_extension(v: BitVec, r1: BitMatrix, r2: BitMatrix, t: BitVec) -> IEResult:
    """Least fixpoint of ``v <- v OR (subset_rows(R1, v) AND t) . R2``.

    ``iterations`` counts loop bodies including the final one that finds no
    change, so an input with nothing enabled reports 1.
    """
    if r1.shape != r2.shape:
        raise DimensionError(f"R1 {r1.shape} and R2 {r2.shape} differ")
    if len(v) != r1.cols:
        raise DimensionError(f"source vector length {len(v)} != metabolite count {r1.cols}")
    if len(t) != r1.rows:
        raise DimensionError(f"mask length {len(t)} != reaction count {r1.rows}")
    fired = BitVec.zeros(r1.rows)
    iterations = 0
    while True:
        iterations += 1
        f = band(subset_rows(r1, v), t)
        fired = bor(fired, f)
        nxt = bor(v, vecmat_mul(f, r2))
        if beq(nxt, v):
            return IEResult(v, iterations, fired)
        v = nxt


def closure_batch(
    sources: np.ndarray,
    r1: BitMatrix,
    r2: BitMatrix,
    masks: np.ndarray,
) -> np.ndarray:
    """Run the fixpoint for many (source, mask) pairs at once.

    ``sources`` is a ``(B, words)`` uint64 array of packed source vectors and
    ``masks`` a ``(B, k)`` boolean array.  Returns the packed closures.
    """
    v = np.array(sources, dtype=np.uint64, copy=True)
    masks = np.asarray(masks, dtype=bool)
    if v.ndim != 2 or v.shape[1] != r1.data.shape[1]:
        raise DimensionError("sources must be (B, words) matching the matrices")
    if masks.shape != (v.shape[0], r1.rows):
        raise DimensionError("masks must be (B, k)")
    if r1.rows == 0 or v.shape[0] == 0:
        return v
    a = r1.data[None, :, :]
    b = r2.data[None, :, :]
    active = np.arange(v.shape[0])
    while active.size:
        cur = v[active]
        enabled = np.all((a & cur[:, None, :]) == a, axis=2) & masks[active]
        add = np.bitwise_or.reduce(np.where(enabled[:, :, None], b, np.uint64(0)), axis=1)
        nxt = cur | add
        changed = np.any(nxt != cur, axis=1)
        v[active] = nxt
        active = active[changed]
    return v


def query_pathway(
    net: Network,
    sources: Iterable[str],
    knockouts: Iterable[str] = (),
    hyp: Hypothesis | None = None,
) -> list[str]:
    """Metabolites reachable from ``sources`` in a mutant, in network order."""
    return net.decode(query(net, sources, knockouts, hyp).closure)


def query(
    net: Network,
    sources: Iterable[str],
    knockouts: Iterable[str] = (),
    hyp: Hypothesis | None = None,
) -> IEResult:
    r1, r2 = net.matrices
    return iterate_extension(net.encode(sources), r1, r2, gpr_mask(net, knockouts, hyp))


__all__ = ["IEResult", "closure_batch", "iterate_extension", "query", "query_pathway"]
