import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from hxproof import jsonio
from hxproof import syntax as sx
from hxproof.syntax import (
    At, Atom, BOT, Bottom, CmpKind, Compare, Concat, Diamond, Implies, Jump,
    Nominal, Prop, Test, SymbolTable, SymbolSpaceError, SyntaxError_,
    concat, conj, disj, eps, expand_abbrev, iff, neg, nominals_of,
    parse_node, parse_path, print_node, rename_nominal, size, top,
)

# ---------------------------------------------------------------------------
# hypothesis strategies following the identifier conventions
# ---------------------------------------------------------------------------

props = st.sampled_from(["p", "q", "Person", "Date", "r2"])
noms = st.sampled_from(["i", "j", "k", "i1", "n0", "m'"])
mods = st.sampled_from(["a", "b", "born", "friends"])
cmps = st.sampled_from(["c", "val", "d1"])
kinds = st.sampled_from([CmpKind.EQ, CmpKind.NEQ])


def paths(node_strat, depth):
    base = st.one_of(
        st.builds(Atom, mods),
        st.builds(Jump, noms),
    )
    if depth <= 0:
        return base
    sub = paths(node_strat, depth - 1)
    return st.one_of(
        base,
        st.builds(Test, node_strat),
        st.builds(Concat, sub, sub),
    )


def nodes(depth):
    base = st.one_of(st.builds(Prop, props), st.builds(Nominal, noms),
                     st.just(BOT))
    if depth <= 0:
        return base
    sub = nodes(depth - 1)
    return st.one_of(
        base,
        st.builds(Implies, sub, sub),
        st.builds(At, noms, sub),
        st.builds(Diamond, mods, sub),
        st.builds(Compare, paths(sub, 1), kinds, cmps, paths(sub, 1)),
    )


node_exprs = nodes(3)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_example_query():
    e = parse_node("@i1 <i1: born (Date?) =val i1: friends born (Date?)>")
    assert isinstance(e, At) and e.nom == "i1"
    body = e.body
    assert isinstance(body, Compare) and body.kind is CmpKind.EQ
    assert body.cmp == "val"
    assert body.left == concat(Jump("i1"), Atom("born"), Test(Prop("Date")))
    assert body.right == concat(Jump("i1"), Atom("friends"), Atom("born"),
                                Test(Prop("Date")))


def test_parse_atoms():
    assert parse_node("p") == Prop("p")
    assert parse_node("~p") == Implies(Prop("p"), BOT)
    assert parse_node("i") == Nominal("i")
    assert parse_node("false") == BOT
    assert parse_node("true") == top()


def test_parse_sugar_expands():
    assert parse_node("p & q") == conj(Prop("p"), Prop("q"))
    assert parse_node("p | q") == disj(Prop("p"), Prop("q"))
    assert parse_node("p <-> q") == iff(Prop("p"), Prop("q"))
    assert parse_node("[a]p") == neg(Diamond("a", neg(Prop("p"))))
    assert parse_node("[a =c b]") == neg(
        Compare(Atom("a"), CmpKind.NEQ, "c", Atom("b")))
    assert parse_node("<eps>p") == conj(top(), Prop("p"))
    assert parse_node("<j:>p") == At("j", Prop("p"))


def test_parse_precedence():
    assert parse_node("p -> q -> r2") == \
        Implies(Prop("p"), Implies(Prop("q"), Prop("r2")))
    assert parse_node("@i p -> q") == Implies(At("i", Prop("p")), Prop("q"))
    assert parse_node("@i (p -> q)") == At("i", Implies(Prop("p"), Prop("q")))
    assert parse_node("p & q | r2") == disj(conj(Prop("p"), Prop("q")), Prop("r2"))


def test_parse_errors_carry_position():
    with pytest.raises(SyntaxError_) as e:
        parse_node("p -> ")
    assert "column" in str(e.value)
    with pytest.raises(SyntaxError_):
        parse_node("<a p")
    with pytest.raises(SyntaxError_):
        parse_node("@ <a>p")


def test_symbol_space_violation():
    table = SymbolTable()
    parse_node("@i p", table)
    with pytest.raises(SymbolSpaceError):
        parse_node("<p> q", table)  # p reused as a modality
    with pytest.raises(SymbolSpaceError):
        table.register("i", "prop")


def test_parse_sequent_parts():
    ante, cons = sx.parse_sequent_parts("@i p, <i: =c j:> |- @i q")
    assert At("i", Prop("p")) in ante
    assert Compare(Jump("i"), CmpKind.EQ, "c", Jump("j")) in ante
    assert cons == [At("i", Prop("q"))]
    empty_l, one_r = sx.parse_sequent_parts("|- @i p")
    assert empty_l == [] and len(one_r) == 1


# ---------------------------------------------------------------------------
# abbreviation expansion
# ---------------------------------------------------------------------------

def test_expand_abbrev_table():
    assert expand_abbrev("top") == Implies(BOT, BOT)
    assert expand_abbrev("eps") == Test(Implies(BOT, BOT))
    assert expand_abbrev("not", Prop("p")) == Implies(Prop("p"), BOT)
    assert expand_abbrev("and", Prop("p"), Prop("q")) == \
        neg(Implies(Prop("p"), neg(Prop("q"))))
    assert expand_abbrev("box_cmp", Atom("a"), CmpKind.EQ, "c", Atom("b")) == \
        neg(Compare(Atom("a"), CmpKind.NEQ, "c", Atom("b")))
    assert expand_abbrev("jump_dia", "j", Prop("p")) == At("j", Prop("p"))
    with pytest.raises(ValueError):
        expand_abbrev("nope")
    with pytest.raises(ValueError):
        expand_abbrev("not", Prop("p"), Prop("q"))


@given(node_exprs)
def test_expansion_contains_primitives_only(e):
    for sub in sx.subexpressions(e):
        assert isinstance(sub, (Prop, Nominal, Bottom, Implies, At, Diamond,
                                Compare, Atom, Jump, Test, Concat))


# ---------------------------------------------------------------------------
# size
# ---------------------------------------------------------------------------

def test_size_base_cases():
    assert size(Prop("p")) == 1
    assert size(Diamond("a", BOT)) == 2
    assert size(eps()) == 4  # test node + the three nodes of false -> false


def test_size_concat_adds_no_node():
    a, b = Atom("a"), Jump("i")
    assert size(Concat(a, b)) == size(a) + size(b)


@given(nodes(3))
def test_size_strictly_decreases_to_subexpressions(e):
    for sub in sx.subexpressions(e):
        if sub is not e and not isinstance(sub, Concat):
            assert size(sub) < size(e) or isinstance(e, Concat)


# ---------------------------------------------------------------------------
# nominals, renaming, flip
# ---------------------------------------------------------------------------

def test_nominals_of():
    assert nominals_of(parse_node("@i <a> j")) == {"i", "j"}
    assert nominals_of(parse_node("@k2 <i: a =c j:>")) == {"i", "j", "k2"}
    assert nominals_of(Prop("p")) == set()


def test_rename_nominal():
    e = parse_node("@i <a> j")
    assert rename_nominal(e, "j", "k") == parse_node("@i <a> k")
    assert rename_nominal(e, "i", "i") == e
    assert rename_nominal(Jump("i"), "i", "m") == Jump("m")


def test_flip_involution():
    for k in CmpKind:
        assert k.flip().flip() is k
    assert CmpKind.EQ.flip() is CmpKind.NEQ


# ---------------------------------------------------------------------------
# printing and roundtrips
# ---------------------------------------------------------------------------

def test_print_examples():
    assert print_node(Prop("p")) == "p"
    assert print_node(top()) == "true"
    assert print_node(neg(Prop("p"))) == "~p"
    assert print_node(eps() and parse_node("<eps =c eps>")) == "<eps =c eps>"


def test_roundtrip_example_queries():
    table = SymbolTable()
    queries = [
        "@i1 <i1: born (Date?) =val i1: friends born (Date?)>",
        "[i2: born (Date?) !=val i2: friends born (Date?)]",
        "<i1: (Person?) =name i2: (Person?)> & "
        "<i1: born (Date?) !=val i2: born (Date?)>",
    ]
    for q in queries:
        e = parse_node(q, table)
        assert parse_node(print_node(e), table) == e


@settings(max_examples=1000, deadline=None)
@given(node_exprs)
def test_roundtrip_random_asts(e):
    assert parse_node(print_node(e)) == e


@given(node_exprs)
def test_json_roundtrip(e):
    assert jsonio.node_from_json(jsonio.node_to_json(e)) == e


def test_left_nested_concat_roundtrips():
    p = Concat(Concat(Atom("a"), Atom("b")), Atom("born"))
    printed = sx.print_path(p)
    assert parse_path(printed) == p


def test_fresh_nominals_distinct():
    t = SymbolTable()
    t.register("i", "nom")
    a, b = t.fresh(), t.fresh()
    assert a != b and a.startswith("_n") and b.startswith("_n")
    t2 = SymbolTable()
    t2.register("_n0", "nom")
    assert t2.fresh() != "_n0"
