"""Metabolic networks as one-bounded elementary nets.

A network lists metabolites (places), directed reactions (transitions) with
gene-protein-reaction rules, and growth conditions.  Metabolite order fixes
the bit position of each metabolite; reaction order fixes the row of each
reaction in the reactant/product matrices.

Text format::

    METABOLITES
    c1 c2 c3 c4 c5
    GENES
    g1 g2
    REACTIONS
    t1 : c1 + c2 -> c3 + c4 | g1
    t2 : c3 + c4 -> c5 | g1 AND g2
    t3 : c5 <-> c4 | TRUE
    CONDITIONS
    cond1 : sources = c1, c2 ; targets = c5

``<->`` reactions are split into ``<id>_f`` and ``<id>_b`` rows on parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .bitmat import BitMatrix, BitVec


class NetworkError(ValueError):
    """Invalid reference or inconsistent network content."""


class ParseError(NetworkError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# --------------------------------------------------------------------------
# GPR expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GprTrue:
    def evaluate(self, knocked: frozenset[str] | set[str]) -> bool:
        return True

    def genes(self) -> frozenset[str]:
        return frozenset()

    def render(self) -> str:
        return "TRUE"


@dataclass(frozen=True)
class GprGene:
    name: str

    def evaluate(self, knocked) -> bool:
        return self.name not in knocked

    def genes(self) -> frozenset[str]:
        return frozenset([self.name])

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class GprAnd:
    terms: tuple

    def evaluate(self, knocked) -> bool:
        return all(t.evaluate(knocked) for t in self.terms)

    def genes(self) -> frozenset[str]:
        return frozenset().union(*(t.genes() for t in self.terms))

    def render(self) -> str:
        return " AND ".join(f"( {t.render()} )" if isinstance(t, GprOr) else t.render() for t in self.terms)


@dataclass(frozen=True)
class GprOr:
    terms: tuple

    def evaluate(self, knocked) -> bool:
        return any(t.evaluate(knocked) for t in self.terms)

    def genes(self) -> frozenset[str]:
        return frozenset().union(*(t.genes() for t in self.terms))

    def render(self) -> str:
        return " OR ".join(t.render() for t in self.terms)


GprExpr = GprTrue | GprGene | GprAnd | GprOr

_GPR_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse_gpr(text: str) -> GprExpr:
    """Parse ``expr := term (OR term)*; term := atom (AND atom)*``.

    ``atom`` is a gene name, ``TRUE`` or a parenthesised expression.  An
    empty string means ``TRUE``.
    """
    tokens = [m.group(1) for m in _GPR_TOKEN.finditer(text)]
    if not tokens:
        return GprTrue()
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        terms = [term()]
        while peek() == "OR":
            take()
            terms.append(term())
        return terms[0] if len(terms) == 1 else GprOr(tuple(terms))

    def term():
        atoms = [atom()]
        while peek() == "AND":
            take()
            atoms.append(atom())
        return atoms[0] if len(atoms) == 1 else GprAnd(tuple(atoms))

    def atom():
        tok = peek()
        if tok is None:
            raise ValueError("unexpected end of GPR expression")
        take()
        if tok == "(":
            inner = expr()
            if peek() != ")":
                raise ValueError("missing ')' in GPR expression")
            take()
            return inner
        if tok in (")", "AND", "OR"):
            raise ValueError(f"unexpected token {tok!r} in GPR expression")
        if tok == "TRUE":
            return GprTrue()
        return GprGene(tok)

    result = expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in GPR expression: {' '.join(tokens[pos:])}")
    return result


# --------------------------------------------------------------------------
# Network model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectedReaction:
    id: str
    reactants: tuple[int, ...]
    products: tuple[int, ...]
    gpr: GprExpr = field(default_factory=GprTrue)
    origin: str = ""
    direction: str = "forward"

    def __post_init__(self):
        if not self.origin:
            object.__setattr__(self, "origin", self.id)


@dataclass(frozen=True)
class Condition:
    name: str
    sources: tuple[int, ...]
    targets: tuple[int, ...]


@dataclass(frozen=True)
class Hypothesis:
    """A set of extra gene -> reaction associations.

    Reaction ids may name a directed row or the source reaction of a split
    reversible pair; in the latter case the association applies to both rows.
    """

    associations: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "associations", tuple(sorted(set(self.associations))))

    @classmethod
    def empty(cls) -> "Hypothesis":
        return cls(())

    @classmethod
    def single(cls, gene: str, reaction: str) -> "Hypothesis":
        return cls(((gene, reaction),))

    @classmethod
    def parse(cls, text: str) -> "Hypothesis":
        """Parse ``"g1:t2,g3:t4"``; an empty string is the empty hypothesis."""
        pairs = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            gene, sep, rxn = part.partition(":")
            if not sep or not gene or not rxn:
                raise ValueError(f"association must look like gene:reaction, got {part!r}")
            pairs.append((gene.strip(), rxn.strip()))
        return cls(tuple(pairs))

    @property
    def size(self) -> int:
        return len(self.associations)

    def __str__(self) -> str:
        if not self.associations:
            return "<empty>"
        return ",".join(f"{g}:{r}" for g, r in self.associations)


def split_reversible(
    rid: str,
    reactants: Iterable[int],
    products: Iterable[int],
    gpr: GprExpr,
    reversible: bool,
) -> list[DirectedReaction]:
    """Turn one reaction description into its directed rows.

    Irreversible reactions keep their id.  Reversible ones become ``rid_f``
    (as written) and ``rid_b`` (sides swapped), sharing the GPR.
    """
    lhs = tuple(sorted(set(reactants)))
    rhs = tuple(sorted(set(products)))
    if not reversible:
        return [DirectedReaction(rid, lhs, rhs, gpr, rid, "forward")]
    return [
        DirectedReaction(f"{rid}_f", lhs, rhs, gpr, rid, "forward"),
        DirectedReaction(f"{rid}_b", rhs, lhs, gpr, rid, "backward"),
    ]


@dataclass(frozen=True)
class Network:
    metabolites: tuple[str, ...]
    genes: tuple[str, ...]
    reactions: tuple[DirectedReaction, ...]
    conditions: tuple[Condition, ...] = ()

    def __post_init__(self):
        for kind, names in (("metabolite", self.metabolites), ("gene", self.genes)):
            seen = set()
            for n in names:
                if n in seen:
                    raise NetworkError(f"duplicate {kind} {n!r}")
                seen.add(n)
        nmet = len(self.metabolites)
        gene_set = set(self.genes)
        ids = set()
        for r in self.reactions:
            if r.id in ids:
                raise NetworkError(f"duplicate reaction id {r.id!r}")
            ids.add(r.id)
            for i in r.reactants + r.products:
                if not 0 <= i < nmet:
                    raise NetworkError(f"reaction {r.id!r} references metabolite index {i}")
            missing = r.gpr.genes() - gene_set
            if missing:
                raise NetworkError(f"reaction {r.id!r} GPR references unknown gene {sorted(missing)[0]!r}")
        cnames = set()
        for c in self.conditions:
            if c.name in cnames:
                raise NetworkError(f"duplicate condition {c.name!r}")
            cnames.add(c.name)
            if not c.targets:
                raise NetworkError(f"condition {c.name!r} has no targets")
            for i in c.sources + c.targets:
                if not 0 <= i < nmet:
                    raise NetworkError(f"condition {c.name!r} references metabolite index {i}")

    # lookups ------------------------------------------------------------
    @cached_property
    def _met_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.metabolites)}

    @cached_property
    def _gene_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.genes)}

    @cached_property
    def _cond_index(self) -> dict[str, Condition]:
        return {c.name: c for c in self.conditions}

    @cached_property
    def _rows_by_id(self) -> dict[str, list[int]]:
        rows: dict[str, list[int]] = {}
        for i, r in enumerate(self.reactions):
            rows.setdefault(r.id, []).append(i)
        for i, r in enumerate(self.reactions):
            if r.origin != r.id and r.origin not in {x.id for x in self.reactions}:
                rows.setdefault(r.origin, []).append(i)
        return rows

    @cached_property
    def matrices(self) -> tuple[BitMatrix, BitMatrix]:
        return build_matrices(self)

    @cached_property
    def gpr_genes(self) -> tuple[frozenset[str], ...]:
        return tuple(r.gpr.genes() for r in self.reactions)

    @property
    def n_metabolites(self) -> int:
        return len(self.metabolites)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def metabolite_index(self, name: str) -> int:
        try:
            return self._met_index[name]
        except KeyError:
            raise NetworkError(f"unknown metabolite {name!r}") from None

    def gene_index(self, name: str) -> int:
        try:
            return self._gene_index[name]
        except KeyError:
            raise NetworkError(f"unknown gene {name!r}") from None

    def condition(self, name: str) -> Condition:
        try:
            return self._cond_index[name]
        except KeyError:
            raise NetworkError(f"unknown condition {name!r}") from None

    def reaction_rows(self, rid: str) -> list[int]:
        """Rows for a directed id, or for both halves of a split reaction."""
        try:
            return self._rows_by_id[rid]
        except KeyError:
            raise NetworkError(f"unknown reaction {rid!r}") from None

    def origin_ids(self) -> list[str]:
        """Source reaction ids in file order, one per reversible pair."""
        seen: dict[str, None] = {}
        for r in self.reactions:
            seen.setdefault(r.origin, None)
        return list(seen)

    def encode(self, names: Iterable[str]) -> BitVec:
        return BitVec.from_indices(self.n_metabolites, [self.metabolite_index(n) for n in names])

    def decode(self, v: BitVec) -> list[str]:
        return [self.metabolites[i] for i in v.indices()]

    def check_genes(self, genes: Iterable[str]) -> frozenset[str]:
        genes = frozenset(genes)
        for g in genes:
            self.gene_index(g)
        return genes


def build_matrices(net: Network) -> tuple[BitMatrix, BitMatrix]:
    """Reactant matrix R1 and product matrix R2, one row per directed reaction."""
    k, n = net.n_reactions, net.n_metabolites
    r1 = np.zeros((k, n), dtype=bool)
    r2 = np.zeros((k, n), dtype=bool)
    for i, r in enumerate(net.reactions):
        r1[i, list(r.reactants)] = True
        r2[i, list(r.products)] = True
    if k == 0:
        return BitMatrix.zeros(0, n), BitMatrix.zeros(0, n)
    return BitMatrix.from_bools(r1), BitMatrix.from_bools(r2)


def base_mask(net: Network, knockouts: Iterable[str] = ()) -> np.ndarray:
    """Boolean array of reactions whose GPR holds with ``knockouts`` removed."""
    knocked = net.check_genes(knockouts)
    return np.fromiter((r.gpr.evaluate(knocked) for r in net.reactions), dtype=bool, count=net.n_reactions)


def hypothesis_rows(net: Network, hyp: Hypothesis) -> list[tuple[int, int]]:
    """Resolve associations to ``(gene index, reaction row)`` pairs."""
    out = []
    for gene, rid in hyp.associations:
        gi = net.gene_index(gene)
        out.extend((gi, row) for row in net.reaction_rows(rid))
    return out


def gpr_mask(net: Network, knockouts: Iterable[str] = (), hyp: Hypothesis | None = None) -> BitVec:
    """Transition mask for a mutant under a hypothesis.

    Bit ``i`` is the GPR of reaction ``i`` with knocked-out genes false and
    every other gene true, where each association ``g -> i`` of ``hyp`` adds
    ``g`` as an extra OR disjunct.
    """
    knocked = net.check_genes(knockouts)
    bits = base_mask(net, knocked)
    if hyp is not None:
        for gi, row in hypothesis_rows(net, hyp):
            if net.genes[gi] not in knocked:
                bits[row] = True
    return BitVec.from_bools(bits)


# --------------------------------------------------------------------------
# Text format
# --------------------------------------------------------------------------

_SECTIONS = ("METABOLITES", "GENES", "REACTIONS", "CONDITIONS")
_REACTION_LINE = re.compile(r"^(?P<id>\S+)\s*:\s*(?P<body>.*)$")


def _split_side(side: str, met_index: Mapping[str, int], lineno: int) -> list[int]:
    side = side.strip()
    if not side:
        return []
    out = []
    for name in (s.strip() for s in side.split("+")):
        if not name:
            raise ParseError("empty species name", lineno)
        if name not in met_index:
            raise ParseError(f"unknown metabolite {name!r}", lineno)
        out.append(met_index[name])
    return out


def _name_list(text: str, met_index: Mapping[str, int], lineno: int) -> list[int]:
    out = []
    for name in filter(None, (s.strip() for s in text.split(","))):
        if name not in met_index:
            raise ParseError(f"unknown metabolite {name!r}", lineno)
        out.append(met_index[name])
    return out


def parse_network(text: str) -> Network:
    """Parse the line-based network format into an indexed :class:`Network`."""
    section = None
    metabolites: list[str] = []
    genes: list[str] = []
    pending_rxn: list[tuple[int, str]] = []
    pending_cond: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line in _SECTIONS:
            section = line
            continue
        if section is None:
            raise ParseError(f"content before any section header: {line!r}", lineno)
        if section == "METABOLITES":
            metabolites.extend((n, lineno) for n in line.split())  # type: ignore[misc]
        elif section == "GENES":
            genes.extend((n, lineno) for n in line.split())  # type: ignore[misc]
        elif section == "REACTIONS":
            pending_rxn.append((lineno, line))
        else:
            pending_cond.append((lineno, line))

    met_index: dict[str, int] = {}
    for name, lineno in metabolites:  # type: ignore[misc]
        if name in met_index:
            raise ParseError(f"duplicate metabolite {name!r}", lineno)
        met_index[name] = len(met_index)
    gene_names: dict[str, None] = {}
    for name, lineno in genes:  # type: ignore[misc]
        if name in gene_names:
            raise ParseError(f"duplicate gene {name!r}", lineno)
        gene_names[name] = None

    reactions: list[DirectedReaction] = []
    ids: set[str] = set()
    for lineno, line in pending_rxn:
        m = _REACTION_LINE.match(line)
        if not m:
            raise ParseError(f"malformed reaction line {line!r}", lineno)
        rid, body = m.group("id"), m.group("body")
        eqn, _, gpr_text = body.partition("|")
        if "<->" in eqn:
            lhs, rhs = eqn.split("<->", 1)
            reversible = True
        elif "->" in eqn:
            lhs, rhs = eqn.split("->", 1)
            reversible = False
        else:
            raise ParseError(f"reaction {rid!r} lacks '->' or '<->'", lineno)
        try:
            gpr = parse_gpr(gpr_text)
        except ValueError as exc:
            raise ParseError(f"malformed GPR for {rid!r}: {exc}", lineno) from None
        for g in sorted(gpr.genes()):
            if g not in gene_names:
                raise ParseError(f"unknown gene {g!r} in GPR of {rid!r}", lineno)
        rows = split_reversible(
            rid,
            _split_side(lhs, met_index, lineno),
            _split_side(rhs, met_index, lineno),
            gpr,
            reversible,
        )
        for r in rows:
            if r.id in ids or (reversible and rid in ids):
                raise ParseError(f"duplicate reaction id {r.id!r}", lineno)
            ids.add(r.id)
        ids.add(rid)
        reactions.extend(rows)

    conditions: list[Condition] = []
    cond_names: set[str] = set()
    for lineno, line in pending_cond:
        name, sep, body = line.partition(":")
        name = name.strip()
        if not sep or not name:
            raise ParseError(f"malformed condition line {line!r}", lineno)
        if name in cond_names:
            raise ParseError(f"duplicate condition {name!r}", lineno)
        cond_names.add(name)
        fields: dict[str, str] = {}
        for part in body.split(";"):
            key, eq, val = part.partition("=")
            if not eq:
                raise ParseError(f"malformed condition field {part.strip()!r}", lineno)
            fields[key.strip()] = val
        if set(fields) - {"sources", "targets"}:
            raise ParseError(f"unknown condition field(s) {sorted(set(fields) - {'sources', 'targets'})}", lineno)
        sources = _name_list(fields.get("sources", ""), met_index, lineno)
        targets = _name_list(fields.get("targets", ""), met_index, lineno)
        if not targets:
            raise ParseError(f"condition {name!r} has no targets", lineno)
        conditions.append(Condition(name, tuple(sorted(set(sources))), tuple(sorted(set(targets)))))

    return Network(
        metabolites=tuple(met_index),
        genes=tuple(gene_names),
        reactions=tuple(reactions),
        conditions=tuple(conditions),
    )


def format_network(net: Network) -> str:
    """Render ``net`` in the text format; split pairs are merged back to ``<->``."""

    def side(idx: tuple[int, ...]) -> str:
        return " + ".join(net.metabolites[i] for i in idx)

    lines = ["METABOLITES", " ".join(net.metabolites), "GENES", " ".join(net.genes), "REACTIONS"]
    rxns = list(net.reactions)
    i = 0
    while i < len(rxns):
        r = rxns[i]
        nxt = rxns[i + 1] if i + 1 < len(rxns) else None
        if (
            r.direction == "forward"
            and r.id == f"{r.origin}_f"
            and nxt is not None
            and nxt.id == f"{r.origin}_b"
            and nxt.origin == r.origin
            and nxt.reactants == r.products
            and nxt.products == r.reactants
            and nxt.gpr == r.gpr
        ):
            lines.append(f"{r.origin} : {side(r.reactants)} <-> {side(r.products)} | {r.gpr.render()}")
            i += 2
            continue
        lines.append(f"{r.id} : {side(r.reactants)} -> {side(r.products)} | {r.gpr.render()}")
        i += 1
    lines.append("CONDITIONS")
    for c in net.conditions:
        src = ", ".join(net.metabolites[j] for j in c.sources)
        tgt = ", ".join(net.metabolites[j] for j in c.targets)
        lines.append(f"{c.name} : sources = {src} ; targets = {tgt}")
    return "\n".join(lines) + "\n"


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


# --------------------------------------------------------------------------
# Datalog rendering
# --------------------------------------------------------------------------

_PLAIN_CONST = re.compile(r"^[a-z][A-Za-z0-9_]*$")
EMPTY_NODE = "nil"


def datalog_const(name: str) -> str:
    if _PLAIN_CONST.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def hypernode(names: Iterable[str]) -> str:
    """Sorted underscore-joined rendering of a metabolite set."""
    return "_".join(sorted(names))


def emit_datalog(
    net: Network,
    cond: Condition | str,
    *,
    enabled: BitVec | None = None,
    joins: bool = True,
    source: str = "m1",
) -> str:
    """Render the reachability program for ``cond`` as datalog text.

    The facts and clauses follow the pathway program layout: one
    ``metabolites`` fact per source (plus the source hypernode), one
    ``reaction_i`` predicate per enabled directed reaction, bridging
    ``reaction`` clauses and the two recursive ``pathway`` clauses.

    With ``joins`` the program also gets a left-recursive ``pathway`` clause
    and one two-literal clause per reactant hypernode that assembles it from
    its parts, so that a reaction whose reactants arrive by different routes
    still fires.  Without ``joins`` hypernodes only connect where a fact
    names them, which is the bare graph reading.
    """
    if isinstance(cond, str):
        cond = net.condition(cond)
    mask = enabled.to_bools() if enabled is not None else np.ones(net.n_reactions, dtype=bool)
    if len(mask) != net.n_reactions:
        raise NetworkError("mask length does not match reaction count")
    names = net.metabolites
    c = datalog_const
    for m in names:
        if m == EMPTY_NODE or m == source:
            raise NetworkError(f"metabolite name {m!r} collides with a reserved datalog constant")
    src_names = [names[i] for i in cond.sources]

    def node(idx: tuple[int, ...]) -> str:
        if not idx:
            return EMPTY_NODE
        return hypernode(names[i] for i in idx)

    facts: list[str] = []
    if len(src_names) > 1:
        facts.append(f"metabolites({c(source)},{c(hypernode(src_names))}).")
    facts.extend(f"metabolites({c(source)},{c(n)})." for n in src_names)
    if any(mask[i] and not r.reactants for i, r in enumerate(net.reactions)):
        facts.append(f"metabolites({c(source)},{EMPTY_NODE}).")

    preds: list[str] = []
    joined: dict[tuple[int, ...], None] = {}
    for i, r in enumerate(net.reactions):
        if not mask[i] or not r.products:
            continue
        pred = f"reaction_{i + 1}"
        preds.append(pred)
        lhs = c(node(r.reactants))
        if len(r.products) > 1:
            facts.append(f"{pred}({lhs},{c(node(r.products))}).")
        facts.extend(f"{pred}({lhs},{c(names[p])})." for p in r.products)
        if len(r.reactants) > 1:
            joined.setdefault(r.reactants, None)

    rules = ["reaction(X,Y) :- metabolites(X,Y)."]
    rules.extend(f"reaction(X,Y) :- {p}(X,Y)." for p in preds)
    rules.append("pathway(X,Y) :- reaction(X,Y).")
    rules.append("pathway(X,Y) :- reaction(X,Z), pathway(Z,Y).")
    if joins:
        rules.append("pathway(X,Y) :- pathway(X,Z), reaction(Z,Y).")
        done: set[str] = set()
        for idx in joined:
            parts = sorted(names[i] for i in idx)
            prefix = parts[0]
            for part in parts[1:]:
                whole = f"{prefix}_{part}"
                if whole not in done:
                    done.add(whole)
                    rules.append(f"pathway(X,{c(whole)}) :- pathway(X,{c(prefix)}), pathway(X,{c(part)}).")
                prefix = whole
    taken = set(names)
    for hn in _hypernode_names(net, cond, mask, joins):
        if hn in taken:
            raise NetworkError(f"hypernode {hn!r} collides with a metabolite name")
    return "\n".join(facts + rules) + "\n"


def _hypernode_names(net: Network, cond: Condition, mask: np.ndarray, joins: bool) -> set[str]:
    names = net.metabolites
    out: set[str] = set()
    if len(cond.sources) > 1:
        out.add(hypernode(names[i] for i in cond.sources))
    for i, r in enumerate(net.reactions):
        if not mask[i]:
            continue
        for side in (r.reactants, r.products):
            if len(side) > 1:
                parts = sorted(names[j] for j in side)
                out.add("_".join(parts))
                if joins:
                    out.update("_".join(parts[:m]) for m in range(2, len(parts)))
    return out


__all__ = [
    "Condition",
    "DirectedReaction",
    "GprAnd",
    "GprExpr",
    "GprGene",
    "GprOr",
    "GprTrue",
    "Hypothesis",
    "Network",
    "NetworkError",
    "ParseError",
    "base_mask",
    "build_matrices",
    "emit_datalog",
    "format_network",
    "gpr_mask",
    "hypothesis_rows",
    "load_network",
    "parse_gpr",
    "parse_network",
    "split_reversible",
]
