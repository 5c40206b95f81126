import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from genutil import rand_derivation
from hxproof.kernel import (
    AX, CMP_L, CUT, DIA_L, DIA_R, EQ_T,
    IMP_L, NOM, S1, S2, S3, WL,
    Derivation, KernelError, PrincipalMissing, ShapeViolation,
    SideConditionViolated, Violation, axiom, check_derivation, cut,
    cut_complexity, cut_height, derivation_nominals, infer, is_restricted,
    open_leaf, premises, rename_nominal_derivation, sequent, weaken,
    weaken_to,
)
from hxproof.goldens import reflexivity
from hxproof.syntax import (
    At, Atom, CmpKind, Compare, Diamond, Implies, Jump, Nominal, Prop,
    eps,
)

P, Q = Prop("p"), Prop("q")


def atcmp(i, j, kind=CmpKind.EQ, c="c"):
    return Compare(Jump(i), kind, c, Jump(j))


# ---------------------------------------------------------------------------
# sequents
# ---------------------------------------------------------------------------

def test_restricted_membership():
    assert is_restricted(At("i", P))
    assert is_restricted(atcmp("i", "j"))
    assert not is_restricted(P)
    assert not is_restricted(Compare(Atom("a"), CmpKind.EQ, "c", Jump("j")))
    with pytest.raises(ShapeViolation):
        sequent({P}, ())


def test_sequents_are_sets():
    s = sequent({At("i", P)}, ())
    assert s.add_ante(At("i", P)) == s
    assert len(s.add_ante(At("i", Q)).ante) == 2


# ---------------------------------------------------------------------------
# rule schemas
# ---------------------------------------------------------------------------

def test_eqt_reflexivity_step():
    goal = sequent((), {At("i", Compare(eps(), CmpKind.EQ, "c", eps()))})
    [prem] = premises(goal, EQ_T, {"i": "i", "c": "c"})
    assert prem.ante == frozenset({atcmp("i", "i")})
    assert prem.cons == goal.cons


def test_ax_closes_and_is_shape_restricted():
    ok = sequent({At("i", P)}, {At("i", P)})
    assert premises(ok, AX, {"phi": At("i", P)}) == []
    assert premises(sequent({atcmp("i", "j")}, {atcmp("i", "j")}), AX,
                    {"phi": atcmp("i", "j")}) == []
    with pytest.raises(SideConditionViolated):
        bad = At("i", Implies(P, Q))
        premises(sequent({bad}, {bad}), AX, {"phi": bad})
    with pytest.raises(SideConditionViolated):
        ne = atcmp("i", "j", CmpKind.NEQ)
        premises(sequent({ne}, {ne}), AX, {"phi": ne})
    with pytest.raises(PrincipalMissing):
        premises(sequent({At("i", P)}, set()), AX, {"phi": At("i", P)})


def test_s3_schema_example():
    goal = sequent({At("i", Nominal("j")), atcmp("i", "k")}, {At("m", Q)})
    [prem] = premises(goal, S3, {"i": "i", "j": "j", "k": "k", "c": "c"})
    assert atcmp("j", "k") in prem.ante
    assert goal.ante <= prem.ante


def test_s1_shape_condition():
    goal = sequent({At("i", Nominal("j")), At("i", Implies(P, Q))}, ())
    with pytest.raises(SideConditionViolated):
        premises(goal, S1, {"i": "i", "j": "j", "phi": Implies(P, Q)})
    goal2 = sequent({At("i", Nominal("j")), At("i", Diamond("a", Nominal("k")))},
                    ())
    [prem] = premises(goal2, S1,
                      {"i": "i", "j": "j", "phi": Diamond("a", Nominal("k"))})
    assert At("j", Diamond("a", Nominal("k"))) in prem.ante


def test_s2_schema():
    goal = sequent({At("j", Nominal("k")), At("i", Diamond("a", Nominal("j")))},
                   ())
    [prem] = premises(goal, S2, {"i": "i", "j": "j", "k": "k", "a": "a"})
    assert At("i", Diamond("a", Nominal("k"))) in prem.ante


def test_freshness_side_conditions():
    goal = sequent({At("i", Diamond("a", P))}, ())
    with pytest.raises(SideConditionViolated):
        premises(goal, DIA_L, {"i": "i", "a": "a", "phi": P, "j": "i"})
    [prem] = premises(goal, DIA_L, {"i": "i", "a": "a", "phi": P, "j": "u"})
    assert At("u", P) in prem.ante
    cgoal = sequent({At("i", Compare(Atom("a"), CmpKind.EQ, "c", Atom("b")))},
                    ())
    with pytest.raises(SideConditionViolated):
        premises(cgoal, CMP_L, {"i": "i", "alpha": Atom("a"), "beta": Atom("b"),
                                "kind": CmpKind.EQ, "c": "c", "j": "u", "k": "u"})
    ngoal = sequent({At("i", P)}, ())
    with pytest.raises(SideConditionViolated):
        premises(ngoal, NOM, {"i": "i", "j": "i"})
    [nprem] = premises(ngoal, NOM, {"i": "i", "j": "j"})
    assert At("i", Nominal("j")) in nprem.ante


def test_cmp_rules_expand_path_evidence():
    cm = Compare(Jump("m"), CmpKind.EQ, "c", Atom("b"))
    goal = sequent({At("i", cm)}, ())
    [prem] = premises(goal, CMP_L, {"i": "i", "alpha": Jump("m"),
                                    "beta": Atom("b"), "kind": CmpKind.EQ,
                                    "c": "c", "j": "u", "k": "v"})
    assert At("i", At("m", Nominal("u"))) in prem.ante
    assert At("i", Diamond("b", Nominal("v"))) in prem.ante
    assert atcmp("u", "v") in prem.ante


def test_diar_requires_witness_step():
    goal = sequent((), {At("i", Diamond("a", P))})
    with pytest.raises(PrincipalMissing):
        premises(goal, DIA_R, {"i": "i", "a": "a", "phi": P, "j": "j"})


def test_structural_rules_not_backward():
    with pytest.raises(KernelError):
        premises(sequent((), ()), CUT, {"phi": At("i", P)})


# ---------------------------------------------------------------------------
# derivations, checking, mutation
# ---------------------------------------------------------------------------

def test_single_axiom_leaf_checks():
    d = axiom(AX, sequent({At("i", P)}, {At("i", P)}), {"phi": At("i", P)})
    assert check_derivation(d) == []
    assert d.height == 1


def test_reflexivity_transcription_checks_and_mutates():
    d = reflexivity()
    assert check_derivation(d) == []
    # deleting the EqT step detaches the axiom leaf from its justification
    def strip_eqt(node):
        if node.rule == EQ_T:
            return node.children[0]
        if not node.children:
            return node
        return Derivation(node.conclusion, node.rule, node.inst,
                          tuple(strip_eqt(c) for c in node.children))
    broken = strip_eqt(d)
    assert check_derivation(broken) != []


def test_check_reports_paths():
    good = axiom(AX, sequent({At("i", P)}, {At("i", P)}), {"phi": At("i", P)})
    wrapped = Derivation(sequent({At("i", Q)}, {At("i", Q)}), WL,
                         good.inst, (good,))
    violations = check_derivation(wrapped)
    assert violations and isinstance(violations[0], Violation)


def test_open_leaves_only_with_flag():
    leaf = open_leaf(sequent({At("i", P)}, ()))
    assert check_derivation(leaf) != []
    assert check_derivation(leaf, allow_open=True) == []


def test_cut_and_weaken_forward():
    ax1 = axiom(AX, sequent({At("i", P)}, {At("i", P)}), {"phi": At("i", P)})
    ax2 = axiom(AX, sequent({At("i", P), At("j", Q)}, {At("j", Q)}),
                {"phi": At("j", Q)})
    d = cut(ax1, ax2, At("i", P))
    assert d.conclusion == sequent({At("i", P), At("j", Q)}, {At("j", Q)})
    assert check_derivation(d) == []
    assert cut_height(d) == 2
    assert cut_complexity(d).as_tuple() == (2, 2)

    w = weaken(ax1, "left", At("k", Q))
    assert At("k", Q) in w.conclusion.ante
    assert check_derivation(w) == []
    # duplicate weakening: sequent unchanged, step still recorded
    w2 = weaken(ax1, "left", At("i", P))
    assert w2.conclusion == ax1.conclusion
    assert w2.rule == WL and check_derivation(w2) == []

    with pytest.raises(KernelError):
        cut(ax1, ax2, At("k", Q))
    with pytest.raises(ShapeViolation):
        weaken(ax1, "left", P)


def test_weaken_to():
    ax1 = axiom(AX, sequent({At("i", P)}, {At("i", P)}), {"phi": At("i", P)})
    target = sequent({At("i", P), At("j", Q)}, {At("i", P), atcmp("i", "j")})
    d = weaken_to(ax1, target)
    assert d.conclusion == target and check_derivation(d) == []
    with pytest.raises(KernelError):
        weaken_to(ax1, sequent((), {At("i", P)}))


def test_heights():
    ax1 = axiom(AX, sequent({At("i", P)}, {At("i", P)}), {"phi": At("i", P)})
    assert ax1.height == 1
    assert weaken(ax1, "left", At("j", Q)).height == 2
    # the transcribed reflexivity tree: two nested lemma branches
    assert reflexivity().height == 9


def test_infer_rejects_wrong_children():
    goal = sequent({At("i", Implies(P, Q))}, {At("m", P)})
    ax_raw = axiom(AX, sequent({At("m", P)}, {At("m", P)}), {"phi": At("m", P)})
    with pytest.raises(KernelError):
        infer(IMP_L, goal, {"i": "i", "phi": P, "psi": Q}, [ax_raw, ax_raw])


def test_rename_nominal_derivation():
    goal = sequent({At("i", Diamond("a", P))}, ())
    [prem] = premises(goal, DIA_L, {"i": "i", "a": "a", "phi": P, "j": "u"})
    d = infer(DIA_L, goal, {"i": "i", "a": "a", "phi": P, "j": "u"},
              [open_leaf(prem)])
    renamed = rename_nominal_derivation(d, "u", "w")
    assert check_derivation(renamed, allow_open=True) == []
    assert "w" in derivation_nominals(renamed)
    with pytest.raises(SideConditionViolated):
        rename_nominal_derivation(d, "u", "i")  # i occurs already


def test_rename_fresh_nominal_in_checked_derivation_rechecks():
    rng = random.Random(21)
    for _ in range(20):
        d = rand_derivation(rng, steps=5)
        noms = derivation_nominals(d)
        if not noms:
            continue
        old = sorted(noms)[0]
        renamed = rename_nominal_derivation(d, old, "_fresh9")
        assert check_derivation(renamed) == []


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_forward_composition_always_checks(seed):
    rng = random.Random(seed)
    d = rand_derivation(rng, steps=6)
    assert check_derivation(d) == []


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_fresh_nominals_absent_from_their_conclusions(seed):
    rng = random.Random(seed)
    d = rand_derivation(rng, steps=6)
    for _, node in d.walk():
        inst = node.inst_dict
        if node.rule in (NOM, DIA_L):
            assert inst["j"] not in node.conclusion.nominals()
        elif node.rule == CMP_L:
            assert not ({inst["j"], inst["k"]} & node.conclusion.nominals())
