"""Command-line entry point: ``bmlp {reach,closure,learn,compare}``.

Exit codes: 0 success, 1 other error, 2 I/O or usage error, 3 empty version
space, 4 dataset oracle has no label for a queried experiment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bitmat import BitMatrix, transitive_closure
from .harness import (
    DatasetOracle,
    OracleMiss,
    SyntheticOracle,
    gen_isoenzyme_network,
    run_comparison,
)
from .ie import query
from .learner import EmptyVersionSpaceError, active_loop, random_loop
from .network import Hypothesis, Network, NetworkError, parse_network
from .phenotype import instance_space, predict_all

EXIT_OK, EXIT_OTHER, EXIT_IO, EXIT_EMPTY, EXIT_MISS = 0, 1, 2, 3, 4
OUTPUT_DIR_ENV = "BMLP_OUTPUT_DIR"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_OTHER):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"{path}: no such file", EXIT_IO) from None
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_IO) from None


def _load_network(path: str) -> Network:
    return parse_network(_read_text(path))


def _hypothesis(specs: list[str] | None) -> Hypothesis:
    return Hypothesis.parse(",".join(specs or []))


def _split_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# --------------------------------------------------------------------------
# reach
# --------------------------------------------------------------------------


def cmd_reach(args, out) -> int:
    net = _load_network(args.network)
    if args.sources is not None:
        sources = _split_list(args.sources)
    else:
        cond = net.condition(args.condition) if args.condition else (net.conditions[0] if net.conditions else None)
        if cond is None:
            raise CliError("network has no conditions; pass --sources")
        sources = [net.metabolites[i] for i in cond.sources]
    res = query(net, sources, args.knockout or (), _hypothesis(args.hyp))
    reached = sorted(net.decode(res.closure))
    fired = [net.reactions[i].id for i in res.fired.indices()]
    print("reachable: " + " ".join(reached), file=out)
    print(f"iterations: {res.iterations}", file=out)
    print("fired: " + " ".join(fired), file=out)
    return EXIT_OK


# --------------------------------------------------------------------------
# closure
# --------------------------------------------------------------------------


def _node_key(name: str):
    return (0, int(name), "") if name.lstrip("-").isdigit() else (1, 0, name)


def parse_edges(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """``from to`` pairs, one per line; an optional ``NODES a b ...`` line declares isolated nodes."""
    nodes: set[str] = set()
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "NODES":
            nodes.update(parts[1:])
            continue
        if len(parts) != 2:
            raise CliError(f"line {lineno}: expected 'from to', got {line!r}")
        edges.append((parts[0], parts[1]))
        nodes.update(parts)
    return sorted(nodes, key=_node_key), edges


def cmd_closure(args, out) -> int:
    names, edges = parse_edges(_read_text(args.edges))
    idx = {n: i for i, n in enumerate(names)}
    m = np.zeros((len(names), len(names)), dtype=bool)
    for a, b in edges:
        m[idx[a], idx[b]] = True
    closed = transitive_closure(BitMatrix.from_bools(m)).to_bools()
    for i, j in zip(*np.nonzero(closed)):
        print(f"{names[i]} {names[j]}", file=out)
    return EXIT_OK


# --------------------------------------------------------------------------
# learn
# --------------------------------------------------------------------------


def default_hypotheses(net: Network) -> list[Hypothesis]:
    """Empty hypothesis plus every gene -> reaction pair not already in the GPR."""
    hyps = [Hypothesis.empty()]
    for rid in net.origin_ids():
        rows = net.reaction_rows(rid)
        present = net.gpr_genes[rows[0]]
        hyps.extend(Hypothesis.single(g, rid) for g in net.genes if g not in present)
    return hyps


def _read_costs(path: str, experiments) -> np.ndarray:
    by_id = {e.id: i for i, e in enumerate(experiments)}
    costs = np.ones(len(experiments))
    for lineno, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        eid, sep, val = line.rpartition(",")
        if not sep or eid.strip() not in by_id:
            raise CliError(f"{path}: line {lineno}: expected '<experiment id>,<cost>' for a known experiment")
        try:
            costs[by_id[eid.strip()]] = float(val)
        except ValueError:
            raise CliError(f"{path}: line {lineno}: bad cost {val!r}") from None
    return costs


def cmd_learn(args, out) -> int:
    if args.network:
        net = _load_network(args.network)
        hyps = default_hypotheses(net)
        exps = instance_space(net)
        hidden = None
    else:
        problem = gen_isoenzyme_network(args.seed, args.genes, args.conditions)
        net, hyps, exps, hidden = problem.net, problem.hypotheses, problem.experiments, problem.hidden
    if args.hidden:
        hidden = Hypothesis.parse(args.hidden)
        for gene, rid in hidden.associations:
            net.gene_index(gene)
            net.reaction_rows(rid)
        if hidden not in hyps:
            hyps.append(hidden)

    if args.oracle == "synthetic":
        if hidden is None:
            raise CliError("--oracle synthetic needs --hidden gene:reaction")
        table = predict_all(net, hyps, exps)
        oracle = SyntheticOracle(net, hidden, table)
    elif args.oracle.startswith("file:"):
        table = predict_all(net, hyps, exps)
        path = args.oracle[len("file:"):]
        try:
            oracle = DatasetOracle.parse(_read_text(path))
        except ValueError as exc:
            raise CliError(f"{path}: {exc}") from None
    else:
        raise CliError("--oracle must be 'synthetic' or 'file:<path>'", EXIT_IO)

    costs = _read_costs(args.costs, exps) if args.costs else None
    try:
        if args.strategy == "active":
            rec = active_loop(table, oracle, args.budget, costs=costs)
        else:
            rec = random_loop(table, oracle, args.budget, np.random.default_rng([args.seed, 1]))
    except EmptyVersionSpaceError as exc:
        raise CliError(f"empty version space: {exc}", EXIT_EMPTY) from None
    except OracleMiss as exc:
        raise CliError(str(exc), EXIT_MISS) from None

    for e in rec.log:
        print(
            f"{e.iteration}\t{e.experiment}\t{e.label}\talive={e.alive}\t"
            f"ratio={e.reduction_ratio:.4f}\tentropy={e.entropy:.4f}",
            file=out,
        )
    print(f"result: {rec.hypothesis}", file=out)
    if args.record:
        Path(args.record).write_text(rec.to_lines(), encoding="utf-8")
    return EXIT_OK


# --------------------------------------------------------------------------
# compare
# --------------------------------------------------------------------------


def cmd_compare(args, out) -> int:
    grid = {
        "genes": args.genes,
        "conditions": args.conditions,
        "budgets": [int(b) for b in _split_list(args.budgets)],
        "seeds": args.seeds,
        "seed_start": args.seed_start,
        "strategies": _split_list(args.strategies),
    }
    if args.config:
        try:
            override = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: {exc}") from None
        unknown = set(override) - set(grid)
        if unknown:
            raise CliError(f"{args.config}: unknown keys {sorted(unknown)}")
        grid.update(override)
    for s in grid["strategies"]:
        if s not in ("active", "random"):
            raise CliError(f"unknown strategy {s!r}")
    result = run_comparison(
        range(grid["seed_start"], grid["seed_start"] + grid["seeds"]),
        grid["budgets"],
        grid["strategies"],
        grid["genes"],
        grid["conditions"],
        workers=args.workers,
    )
    output = args.output
    if output is None:
        output = str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / "compare.csv")
    try:
        Path(output).write_text(result.to_csv(), encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{output}: {exc.strerror or exc}", EXIT_IO) from None
    for strategy in sorted(result.trials):
        recs = " ".join(f"N={n}:{result.recovery(strategy, n):.2f}" for n in result.budgets)
        q = result.queries_to_recovery(strategy)
        print(f"{strategy}: recovery {recs} median_queries_to_recovery={float(np.median(q)):.1f}", file=out)
    print(f"wrote {output}", file=out)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmlp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reach", help="metabolites reachable in a (mutant) network")
    r.add_argument("--network", required=True)
    g = r.add_mutually_exclusive_group()
    g.add_argument("--condition")
    g.add_argument("--sources", help="comma-separated source metabolites")
    r.add_argument("--knockout", action="append", metavar="GENE")
    r.add_argument("--hyp", action="append", metavar="GENE:REACTION")
    r.set_defaults(func=cmd_reach)

    c = sub.add_parser("closure", help="transitive closure of an edge list")
    c.add_argument("edges")
    c.set_defaults(func=cmd_closure)

    lr = sub.add_parser("learn", help="one active or random learning run")
    lr.add_argument("--network", help="network file; default is a generated isoenzyme network")
    lr.add_argument("--genes", type=int, default=33)
    lr.add_argument("--conditions", type=int, default=7)
    lr.add_argument("--oracle", default="synthetic", help="'synthetic' or 'file:<path>'")
    lr.add_argument("--hidden", metavar="GENE:REACTION")
    lr.add_argument("--seed", type=int, default=0)
    lr.add_argument("--budget", type=int, default=20)
    lr.add_argument("--strategy", choices=("active", "random"), default="active")
    lr.add_argument("--costs", help="file of '<experiment id>,<cost>' lines")
    lr.add_argument("--record", help="write the line-delimited run record here")
    lr.set_defaults(func=cmd_learn)

    cp = sub.add_parser("compare", help="active vs random recovery study, written as CSV")
    cp.add_argument("--genes", type=int, default=33)
    cp.add_argument("--conditions", type=int, default=7)
    cp.add_argument("--budgets", default="5,10,15,20")
    cp.add_argument("--seeds", type=int, default=20, help="number of seeds")
    cp.add_argument("--seed-start", type=int, default=0)
    cp.add_argument("--strategies", default="active,random")
    cp.add_argument("--workers", type=int, default=1)
    cp.add_argument("--config", help="JSON file overriding grid keys")
    cp.add_argument("--output", help=f"CSV path (default ${OUTPUT_DIR_ENV}/compare.csv)")
    cp.set_defaults(func=cmd_compare)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"bmlp: {exc}", file=err)
        return exc.code
    except NetworkError as exc:
        print(f"bmlp: {exc}", file=err)
        return EXIT_OTHER
    except (ValueError, KeyError) as exc:
        print(f"bmlp: {exc}", file=err)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
