"""A small naive bottom-up datalog evaluator.

Only used as an independent oracle for the matrix engine, so it favours
obviousness over speed: every round re-applies every rule to the full fact
set until nothing new appears.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

Atom = tuple[str, tuple[str, ...]]


class DatalogSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]


_TOKEN = re.compile(r"\s*(:-|'(?:[^'\\]|\\.)*'|[A-Za-z0-9_]+|[(),.])")


_VAR = "?"  # internal prefix; constants never carry it once unquoted


def _is_source_var(tok: str) -> bool:
    return tok[:1].isupper() or tok[:1] == "_"


def _is_var(term: str) -> bool:
    return term.startswith(_VAR)


def _unquote(tok: str) -> str:
    if tok.startswith("'"):
        return re.sub(r"\\(.)", r"\1", tok[1:-1])
    return tok


def _tokenize(text: str, lineno: int) -> list[str]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DatalogSyntaxError(f"line {lineno}: cannot tokenize {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
    return toks


def parse_program(text: str) -> tuple[set[Atom], list[Rule]]:
    """Parse one clause per line: ``p(a,b).`` or ``h(X,Y) :- b1(X,Z), b2(Z,Y).``"""
    facts: set[Atom] = set()
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        toks = _tokenize(line, lineno)
        pos = 0

        def atom() -> Atom:
            nonlocal pos
            if pos >= len(toks) or not re.match(r"[a-z]", toks[pos]):
                raise DatalogSyntaxError(f"line {lineno}: expected predicate")
            pred = toks[pos]
            pos += 1
            if pos >= len(toks) or toks[pos] != "(":
                raise DatalogSyntaxError(f"line {lineno}: expected '(' after {pred}")
            pos += 1
            args = []
            while True:
                if pos >= len(toks) or toks[pos] in "(),.":
                    raise DatalogSyntaxError(f"line {lineno}: expected term")
                tok = toks[pos]
                args.append(_VAR + tok if _is_source_var(tok) else _unquote(tok))
                pos += 1
                if pos < len(toks) and toks[pos] == ",":
                    pos += 1
                    continue
                if pos < len(toks) and toks[pos] == ")":
                    pos += 1
                    break
                raise DatalogSyntaxError(f"line {lineno}: expected ',' or ')'")
            return pred, tuple(args)

        head = atom()
        body: list[Atom] = []
        if pos < len(toks) and toks[pos] == ":-":
            pos += 1
            body.append(atom())
            while pos < len(toks) and toks[pos] == ",":
                pos += 1
                body.append(atom())
        if pos != len(toks) - 1 or toks[pos] != ".":
            raise DatalogSyntaxError(f"line {lineno}: clause must end with '.'")
        if body:
            rules.append(Rule(head, tuple(body)))
        else:
            if any(_is_var(a) for a in head[1]):
                raise DatalogSyntaxError(f"line {lineno}: fact contains a variable")
            facts.add(head)
    return facts, rules


def _match(pattern: tuple[str, ...], fact: tuple[str, ...], env: dict[str, str]) -> dict[str, str] | None:
    if len(pattern) != len(fact):
        return None
    out = dict(env)
    for p, f in zip(pattern, fact):
        if _is_var(p):
            if out.setdefault(p, f) != f:
                return None
        elif p != f:
            return None
    return out


class _Index:
    """Facts grouped by predicate and by (predicate, position, constant)."""

    def __init__(self):
        self.by_pred: dict[str, list[tuple[str, ...]]] = {}
        self.by_arg: dict[tuple[str, int, str], list[tuple[str, ...]]] = {}

    def add(self, atom: Atom) -> None:
        pred, args = atom
        self.by_pred.setdefault(pred, []).append(args)
        for i, a in enumerate(args):
            self.by_arg.setdefault((pred, i, a), []).append(args)

    def candidates(self, pred: str, pattern: tuple[str, ...], env: dict[str, str]):
        for i, p in enumerate(pattern):
            val = env.get(p) if _is_var(p) else p
            if val is not None:
                return self.by_arg.get((pred, i, val), ())
        return self.by_pred.get(pred, ())


def _solve(body: tuple[Atom, ...], index: _Index, env: dict[str, str]):
    if not body:
        yield env
        return
    (pred, args), rest = body[0], body[1:]
    for fargs in list(index.candidates(pred, args, env)):
        nxt = _match(args, fargs, env)
        if nxt is not None:
            yield from _solve(rest, index, nxt)


def evaluate(facts: set[Atom], rules: list[Rule]) -> set[Atom]:
    """Naive fixpoint: apply every rule to all facts until no change."""
    model = set(facts)
    index = _Index()
    for f in model:
        index.add(f)
    while True:
        new = set()
        for rule in rules:
            for env in _solve(rule.body, index, {}):
                head = (rule.head[0], tuple(env.get(a, a) if _is_var(a) else a for a in rule.head[1]))
                if any(_is_var(a) for a in head[1]):
                    raise DatalogSyntaxError("unsafe rule: head variable not bound by body")
                if head not in model:
                    new.add(head)
        if not new:
            return model
        model |= new
        for f in new:
            index.add(f)


def reference_eval(program: str, source: str = "m1", predicate: str = "pathway") -> set[tuple[str, str]]:
    """All ``predicate(source, Y)`` groundings in the least Herbrand model."""
    facts, rules = parse_program(program)
    model = evaluate(facts, rules)
    return {args for pred, args in model if pred == predicate and args[0] == source}


__all__ = ["DatalogSyntaxError", "Rule", "evaluate", "parse_program", "reference_eval"]
