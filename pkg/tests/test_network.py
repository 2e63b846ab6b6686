import numpy as np
import pytest

from bmlp.bitmat import BitVec
from bmlp.datalog import reference_eval
from bmlp.ie import query_pathway
from bmlp.network import (
    Condition,
    DirectedReaction,
    GprAnd,
    GprGene,
    GprOr,
    GprTrue,
    Hypothesis,
    Network,
    NetworkError,
    ParseError,
    emit_datalog,
    format_network,
    gpr_mask,
    parse_gpr,
    parse_network,
    split_reversible,
)

from .conftest import random_network

TOY_PROGRAM = """\
metabolites(m1,c1_c2).
metabolites(m1,c1).
metabolites(m1,c2).
reaction_1(c1_c2,c3_c4).
reaction_1(c1_c2,c3).
reaction_1(c1_c2,c4).
reaction_2(c3_c4,c5).
reaction_3(c5,c4).
reaction(X,Y) :- metabolites(X,Y).
reaction(X,Y) :- reaction_1(X,Y).
reaction(X,Y) :- reaction_2(X,Y).
reaction(X,Y) :- reaction_3(X,Y).
pathway(X,Y) :- reaction(X,Y).
pathway(X,Y) :- reaction(X,Z), pathway(Z,Y).
"""


def _norm(text):
    return [line.replace(" ", "") for line in text.splitlines() if line.strip()]


# -- parsing ------------------------------------------------------------------


def test_toy_parses(toy):
    assert toy.metabolites == ("c1", "c2", "c3", "c4", "c5")
    assert [r.id for r in toy.reactions] == ["t1", "t2", "t3"]
    assert toy.n_reactions == 3


def test_undeclared_metabolite_named():
    text = "METABOLITES\nc1\nREACTIONS\nt1 : c1 -> c9\n"
    with pytest.raises(ParseError, match="c9") as info:
        parse_network(text)
    assert info.value.line == 4


def test_empty_reaction_section():
    net = parse_network("METABOLITES\na b\nREACTIONS\nCONDITIONS\nc : sources = a ; targets = b\n")
    assert net.n_reactions == 0
    r1, r2 = net.matrices
    assert r1.shape == (0, 2) and r2.shape == (0, 2)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("METABOLITES\na\na\n", "duplicate metabolite"),
        ("a b\n", "before any section"),
        ("METABOLITES\na\nREACTIONS\nt1 : a => a\n", "lacks"),
        ("METABOLITES\na\nGENES\ng\nREACTIONS\nt1 : a -> a | h\n", "unknown gene"),
        ("METABOLITES\na\nGENES\ng\nREACTIONS\nt1 : a -> a | g AND\n", "malformed GPR"),
        ("METABOLITES\na\nREACTIONS\nt1 : a -> a\nt1 : a -> a\n", "duplicate reaction"),
        ("METABOLITES\na\nCONDITIONS\nc : sources = a\n", "no targets"),
        ("METABOLITES\na\nCONDITIONS\nc : sources = a ; foo = a ; targets = a\n", "unknown condition field"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_network(text)


def test_network_validation():
    with pytest.raises(NetworkError, match="unknown gene"):
        Network(("a",), (), (DirectedReaction("r", (0,), (0,), GprGene("g")),))
    with pytest.raises(NetworkError, match="metabolite index"):
        Network(("a",), (), (DirectedReaction("r", (0,), (3,)),))


# -- GPR ---------------------------------------------------------------------------


def test_gpr_parse_precedence():
    g = parse_gpr("a AND b OR c")
    assert g == GprOr((GprAnd((GprGene("a"), GprGene("b"))), GprGene("c")))
    assert parse_gpr("a AND (b OR c)") == GprAnd((GprGene("a"), GprOr((GprGene("b"), GprGene("c")))))
    assert parse_gpr("") == GprTrue()
    assert g.evaluate({"c"}) and not g.evaluate({"a", "c"})
    assert parse_gpr(g.render()) == g


@pytest.mark.parametrize("bad", ["(a", "a)", "AND a", "a OR", "a b"])
def test_gpr_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_gpr(bad)


# -- reversible splitting --------------------------------------------------------------


def test_split_reversible():
    f, b = split_reversible("r", [0, 1], [2], GprTrue(), True)
    assert (f.id, f.reactants, f.products) == ("r_f", (0, 1), (2,))
    assert (b.id, b.reactants, b.products) == ("r_b", (2,), (0, 1))
    assert f.origin == b.origin == "r"
    (only,) = split_reversible("r", [0], [1], GprTrue(), False)
    assert only.id == "r"


def test_reversible_shared_species_matches_datalog():
    net = parse_network(
        "METABOLITES\nA B C\nREACTIONS\nr1 : A <-> A + B\nr2 : A + B -> C\nCONDITIONS\nc : sources = A ; targets = C\n"
    )
    fwd, back = net.reactions[0], net.reactions[1]
    assert fwd.reactants == (0,) and fwd.products == (0, 1)
    assert back.reactants == (0, 1) and back.products == (0,)
    reached = set(query_pathway(net, ["A"]))
    ref = {y for _, y in reference_eval(emit_datalog(net, "c"))} & set(net.metabolites)
    assert reached == ref == {"A", "B", "C"}


def test_reversible_reaction_rows_by_origin():
    net = parse_network("METABOLITES\na b\nGENES\ng\nREACTIONS\nr : a <-> b | g\n")
    assert net.reaction_rows("r") == [0, 1]
    assert net.reaction_rows("r_b") == [1]
    assert net.origin_ids() == ["r"]
    with pytest.raises(NetworkError):
        net.reaction_rows("nope")


# -- matrices and masks --------------------------------------------------------------


def test_toy_matrices(toy):
    r1, r2 = toy.matrices
    assert str(r1.row(0)) == "11000"
    assert str(r2.row(0)) == "00110"
    assert str(r1.row(2)) == "00001" and str(r2.row(2)) == "00010"


def test_zero_reactant_row():
    net = parse_network("METABOLITES\na\nREACTIONS\nsrc :  -> a\n")
    r1, _ = net.matrices
    assert r1.row(0).count() == 0


def test_gpr_mask_examples(toy):
    assert str(gpr_mask(toy)) == "111"
    assert str(gpr_mask(toy, ["g2"])) == "101"
    # isoenzyme rescue: g1 adds to t2 while g2 is out
    assert str(gpr_mask(toy, ["g2"], Hypothesis.single("g1", "t2"))) == "111"
    # a knocked-out gene cannot rescue
    assert str(gpr_mask(toy, ["g1", "g2"], Hypothesis.single("g1", "t2"))) == "001"
    with pytest.raises(NetworkError):
        gpr_mask(toy, ["zz"])


def test_hypothesis_parse_and_render():
    h = Hypothesis.parse("g2:t1, g1:t2,g2:t1")
    assert h.size == 2 and str(h) == "g1:t2,g2:t1"
    assert str(Hypothesis.empty()) == "<empty>"
    with pytest.raises(ValueError):
        Hypothesis.parse("g1t2")


# -- text round trip ---------------------------------------------------------------------


def test_roundtrip_random_networks():
    rng = np.random.default_rng(11)
    for _ in range(50):
        net = random_network(rng)
        assert parse_network(format_network(net)) == net


def test_roundtrip_reversible(toy):
    text = "METABOLITES\na b\nGENES\ng h\nREACTIONS\nr : a <-> b | g OR h\nCONDITIONS\nc : sources = a ; targets = b\n"
    net = parse_network(text)
    assert parse_network(format_network(net)) == net
    assert "<->" in format_network(net)
    assert parse_network(format_network(toy)) == toy


# -- datalog emission -----------------------------------------------------------------


def test_toy_program_layout(toy):
    assert _norm(emit_datalog(toy, "cond1", joins=False)) == _norm(TOY_PROGRAM)


def test_join_clauses(toy):
    lines = _norm(emit_datalog(toy, "cond1"))
    assert _norm(TOY_PROGRAM) == lines[: len(_norm(TOY_PROGRAM))]
    assert "pathway(X,Y):-pathway(X,Z),reaction(Z,Y)." in lines
    assert "pathway(X,c3_c4):-pathway(X,c3),pathway(X,c4)." in lines


def test_empty_network_program():
    net = Network(("c1",), (), (), (Condition("c", (0,), (0,)),))
    lines = _norm(emit_datalog(net, "c", joins=False))
    assert lines == [
        "metabolites(m1,c1).",
        "reaction(X,Y):-metabolites(X,Y).",
        "pathway(X,Y):-reaction(X,Y).",
        "pathway(X,Y):-reaction(X,Z),pathway(Z,Y).",
    ]


def test_masked_reaction_dropped(toy):
    text = emit_datalog(toy, "cond1", enabled=BitVec.from_str("101"))
    assert "reaction_2" not in text


def test_hypernode_collision_rejected():
    net = parse_network("METABOLITES\na b a_b c\nREACTIONS\nr : a + b -> c\nCONDITIONS\nk : sources = a ; targets = c\n")
    with pytest.raises(NetworkError, match="collides"):
        emit_datalog(net, "k")


def test_reserved_constant_rejected():
    net = parse_network("METABOLITES\nm1 b\nCONDITIONS\nk : sources = m1 ; targets = b\n")
    with pytest.raises(NetworkError, match="reserved"):
        emit_datalog(net, "k")


def test_quoted_constants_roundtrip_through_evaluator():
    net = parse_network("METABOLITES\nGlc atp-c Z\nREACTIONS\nr : Glc + atp-c -> Z\nCONDITIONS\nk : sources = Glc, atp-c ; targets = Z\n")
    got = {y for _, y in reference_eval(emit_datalog(net, "k"))}
    assert {"Glc", "atp-c", "Z"} <= got
