import json
import pathlib
import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from genutil import rand_model, rand_node, SIG
from hxproof import syntax as sx
from hxproof.kernel import sequent
from hxproof.model import (
    DataGraph, HybridDataModel, ModelError, UnassignedNominal, UnknownNode,
    check_sequent_validity, eval_box_compare, eval_node, eval_path,
    find_countermodel, ingest_datagraph, model_from_json, model_to_json,
    satisfies_set,
)
from hxproof.syntax import (
    At, Atom, BOT, CmpKind, Compare, Jump, Nominal, Prop, Test, concat,
    eps, neg, parse_node,
)

GOLDEN = pathlib.Path(__file__).resolve().parents[1] / "golden"


@pytest.fixture(scope="module")
def example1():
    graph = json.loads((GOLDEN / "example1-graph.json").read_text())
    return ingest_datagraph(DataGraph.from_json(graph))


@pytest.fixture(scope="module")
def queries():
    table = sx.SymbolTable()
    return {
        "q1": parse_node(
            "<i1: born (Date?) =val i1: friends born (Date?)>", table),
        "q2": parse_node(
            "[i2: born (Date?) !=val i2: friends born (Date?)]", table),
        "q3": parse_node(
            "<i1: (Person?) =name i2: (Person?)> & "
            "<i1: born (Date?) !=val i2: born (Date?)>", table),
    }


# ---------------------------------------------------------------------------
# worked example
# ---------------------------------------------------------------------------

def test_example1_model_exact(example1):
    m = example1
    assert m.nodes == frozenset({"n1", "n2", "n3", "n4", "n5", "n6"})
    assert m.rels["friends"] == frozenset(
        {("n1", "n2"), ("n2", "n1"), ("n2", "n3"), ("n3", "n2")})
    assert m.rels["born"] == frozenset(
        {("n1", "n4"), ("n2", "n5"), ("n3", "n6")})
    assert m.same_class("name", "n1", "n3")
    assert not m.same_class("name", "n1", "n2")
    assert m.same_class("val", "n4", "n5")
    assert not m.same_class("val", "n4", "n6")
    assert m.g == {"i1": "n1", "i2": "n3"}
    assert m.val["Person"] == frozenset({"n1", "n2", "n3"})
    assert m.val["Date"] == frozenset({"n4", "n5", "n6"})


def test_example1_queries_true_everywhere(example1, queries):
    for q in queries.values():
        assert all(eval_node(example1, n, q) for n in example1.nodes)


def test_example1_query1_shifted_to_i2_is_false(example1, queries):
    table = sx.SymbolTable()
    q = parse_node("<i2: born (Date?) =val i2: friends born (Date?)>", table)
    assert all(not eval_node(example1, n, q) for n in example1.nodes)


def test_eval_path_cases(example1):
    assert eval_path(example1, "n1", "n2", Atom("friends"))
    assert not eval_path(example1, "n1", "n3", Atom("friends"))
    assert eval_path(example1, "n4", "n1", Jump("i1"))
    assert eval_path(example1, "n2", "n2", eps())
    assert not eval_path(example1, "n2", "n3", eps())
    assert eval_path(example1, "n1", "n5",
                     concat(Atom("friends"), Atom("born")))
    with pytest.raises(UnknownNode):
        eval_path(example1, "n1", "zzz", Atom("friends"))


def test_eval_node_cases(example1):
    assert not eval_node(example1, "n1", BOT)
    assert eval_node(example1, "n1", Prop("Person"))
    assert eval_node(example1, "n4", Nominal("i1")) is False
    assert eval_node(example1, "n4", At("i1", Prop("Person")))


def test_neq_compare_is_not_negated_eq():
    # one endpoint pair related, another unrelated: both forms hold
    m = HybridDataModel.make(
        ["x", "y", "z"], rels={"a": [("x", "y"), ("x", "z")]},
        cmps={"c": [["x", "y"]]}, g={"i": "x"}, val={})
    phi_eq = Compare(eps(), CmpKind.EQ, "c", Atom("a"))
    phi_neq = Compare(eps(), CmpKind.NEQ, "c", Atom("a"))
    assert eval_node(m, "x", phi_eq)
    assert eval_node(m, "x", phi_neq)


def test_box_compare_vacuous_and_agreement(example1):
    # unsatisfiable left path: universal comparison holds vacuously
    dead = Atom("nowhere")
    assert eval_box_compare(example1, "n1", dead, Atom("born"),
                            CmpKind.EQ, "val")
    # query 2 read directly as a universal
    p1 = concat(Jump("i2"), Atom("born"), Test(Prop("Date")))
    p2 = concat(Jump("i2"), Atom("friends"), Atom("born"), Test(Prop("Date")))
    for n in example1.nodes:
        assert eval_box_compare(example1, n, p1, p2, CmpKind.NEQ, "val")


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 3))
def test_box_compare_agrees_with_expansion(seed, depth):
    rng = random.Random(seed)
    m = rand_model(rng, max_nodes=6)
    alpha, beta = (sx.Test(rand_node(rng, SIG, 1)) if rng.random() < 0.3
                   else sx.Atom("a") for _ in range(2))
    kind = rng.choice([CmpKind.EQ, CmpKind.NEQ])
    node = rng.choice(sorted(m.nodes))
    direct = eval_box_compare(m, node, alpha, beta, kind, "c")
    expanded = eval_node(m, node, neg(Compare(alpha, kind.flip(), "c", beta)))
    assert direct == expanded


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_compare_agrees_with_pair_enumeration_oracle(seed):
    # independent oracle: enumerate endpoint pairs with eval_path directly
    rng = random.Random(seed)
    m = rand_model(rng, max_nodes=6)
    alpha = rng.choice([sx.Atom("a"), sx.Jump("i"), sx.eps()])
    beta = rng.choice([sx.Atom("a"), sx.concat(sx.Atom("a"), sx.Atom("a"))])
    kind = rng.choice([CmpKind.EQ, CmpKind.NEQ])
    node = rng.choice(sorted(m.nodes))
    want = kind is CmpKind.EQ
    oracle = any(
        eval_path(m, node, x, alpha) and eval_path(m, node, y, beta)
        and m.same_class("c", x, y) == want
        for x in m.nodes for y in m.nodes)
    assert eval_node(m, node, Compare(alpha, kind, "c", beta)) == oracle


def test_satisfies_set(example1, queries):
    assert satisfies_set(example1, "n1", set())
    assert not satisfies_set(example1, "n1", {BOT})
    assert satisfies_set(example1, "n1", set(queries.values()))


# ---------------------------------------------------------------------------
# partitions and the comparison invariant
# ---------------------------------------------------------------------------

def test_partition_is_equivalence():
    rng = random.Random(3)
    for _ in range(20):
        m = rand_model(rng, max_nodes=5)
        pairs = m.cmp_pairs("c")
        nodes = sorted(m.nodes)
        for x in nodes:
            assert (x, x) in pairs
        for x, y in pairs:
            assert (y, x) in pairs
        for x, y in pairs:
            for y2, z in pairs:
                if y2 == y:
                    assert (x, z) in pairs


def test_single_node_no_attrs_gets_identity_partition():
    m = ingest_datagraph(DataGraph(nodes=[{"id": "n1"}], edges=[]))
    assert m.same_class("anything", "n1", "n1")


def test_shared_attribute_three_nodes_one_class():
    dg = DataGraph(nodes=[{"id": f"n{t}", "attrs": {"c": 7}} for t in range(3)],
                   edges=[])
    m = ingest_datagraph(dg)
    assert m.same_class("c", "n0", "n1") and m.same_class("c", "n1", "n2")


def test_ingest_rejects_duplicate_index():
    dg = DataGraph(nodes=[{"id": "n1", "index": "i"},
                          {"id": "n2", "index": "i"}], edges=[])
    with pytest.raises(ModelError):
        ingest_datagraph(dg)


def test_strict_nominals_flag():
    m = HybridDataModel.make(["x"], strict_nominals=True)
    with pytest.raises(UnassignedNominal):
        eval_node(m, "x", Nominal("ghost"))
    m2 = HybridDataModel.make(["x", "y"])
    assert eval_node(m2, min(m2.nodes), Nominal("ghost"))  # default node
    assert "ghost" in m2.defaulted_nominals


def test_model_json_roundtrip(example1):
    blob = model_to_json(example1)
    again = model_from_json(blob)
    assert again.nodes == example1.nodes
    assert again.rels == example1.rels
    assert again.g == example1.g
    for c in ("name", "val"):
        for x in example1.nodes:
            for y in example1.nodes:
                assert again.same_class(c, x, y) == example1.same_class(c, x, y)


# ---------------------------------------------------------------------------
# sequent validity and countermodels
# ---------------------------------------------------------------------------

def test_validity_unsatisfiable_antecedent():
    rng = random.Random(9)
    s = sequent({At("i", BOT)}, {At("i", Prop("p"))})
    for _ in range(10):
        assert check_sequent_validity(rand_model(rng), s)


def test_validity_reflexivity_sequent():
    rng = random.Random(10)
    s = sequent((), {At("i", Compare(eps(), CmpKind.EQ, "c", eps()))})
    for _ in range(20):
        assert check_sequent_validity(rand_model(rng), s)


def test_countermodel_simple():
    m = find_countermodel(sequent((), {At("i", Prop("p"))}), 1)
    assert m is not None and len(m.nodes) == 1
    assert not check_sequent_validity(m, sequent((), {At("i", Prop("p"))}))


def test_countermodel_none_for_valid():
    s = sequent((), {At("i", Compare(eps(), CmpKind.EQ, "c", eps()))})
    assert find_countermodel(s, 2) is None


def test_countermodel_two_nodes():
    s = sequent({At("i", sx.Diamond("a", Prop("p")))}, {At("i", Prop("p"))})
    m = find_countermodel(s, 2)
    assert m is not None and len(m.nodes) == 2
    assert not check_sequent_validity(m, s)
