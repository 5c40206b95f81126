"""Derived rules as macro expansions into primitive derivations.

Each macro takes a goal sequent and produces a derivation fragment whose open
leaves are exactly the derived rule's premisses (closed macros, like the
generalized axiom, return complete derivations). Fragments are built top-down
through the kernel's `premises`, so every context is exact by construction
and every expansion re-checks.
"""

from __future__ import annotations

from .kernel import (
    AT_5, AT_L, AT_R, AT_T, AX, BOT_RULE, CMP_L, CMP_R, DIA_L, DIA_R,
    EQ_5, EQ_T, IMP_L, IMP_R, NEQ_L, NEQ_R, S1,
    KernelError, Sequent, axiom, cut, graft, infer,
    open_leaf, premises, s1_shape, weaken_to,
)
from .syntax import (
    At, Atom, Bottom, BOT, CmpKind, Compare, Concat, Diamond, Implies, Jump,
    Nominal, Prop, Test, conj, dia, fresh_nominals, neg, nominals_of,
    print_node, top,
)


class MacroError(KernelError):
    pass


def step(rule, goal, inst, builders):
    """Apply one backward rule; builders produce the premiss subtrees."""
    prem = premises(goal, rule, inst)
    if len(prem) != len(builders):
        raise MacroError(f"{rule}: expected {len(prem)} premisses")
    return infer(rule, goal, inst, [b(s) for b, s in zip(builders, prem)])


def fill_open(reached, declared):
    """Connect a reached premiss to the macro's declared open leaf.

    The reached sequent may carry junk the schema discards (for instance a
    falsum put on the right by an implication step); weakenings bridge the
    difference exactly.
    """
    if reached == declared:
        return open_leaf(declared)
    return weaken_to(open_leaf(declared), reached)


def _fresh_for(goal, count, *extra):
    avoid = set(goal.nominals())
    for e in extra:
        avoid |= nominals_of(e) if not isinstance(e, str) else {e}
    return fresh_nominals(count, avoid)


# ---------------------------------------------------------------------------
# Closed macros
# ---------------------------------------------------------------------------

def cmp_tauto(goal, x, kind, c, y):
    """Close a goal with <x: ^c y:> on both sides (any comparison kind)."""
    e = Compare(Jump(x), kind, c, Jump(y))
    if kind is CmpKind.EQ:
        return axiom(AX, goal, {"phi": e})
    # inequality is not an axiom shape; route both occurrences through equality
    def after_neqr(s1_):
        def after_neql(s2_):
            eq = Compare(Jump(x), CmpKind.EQ, c, Jump(y))
            return axiom(AX, s2_, {"phi": eq})
        return step(NEQ_L, s1_, {"i": x, "j": y, "c": c}, [after_neql])
    return step(NEQ_R, goal, {"i": x, "j": y, "c": c}, [after_neqr])


def axg(goal, i, phi):
    """Generalized axiom (AxG): close @_i phi, Γ ⊢ Δ, @_i phi for any phi."""
    e = At(i, phi)
    if e not in goal.ante or e not in goal.cons:
        raise MacroError(f"AxG: {print_node(e)} must occur on both sides")
    match phi:
        case Prop(_) | Nominal(_):
            return axiom(AX, goal, {"phi": e})
        case Bottom():
            return axiom(BOT_RULE, goal, {"i": i})
        case Implies(lhs, rhs):
            def right_done(s):
                return step(IMP_L, s, {"i": i, "phi": lhs, "psi": rhs},
                            [lambda s1_: axg(s1_, i, lhs),
                             lambda s2_: axg(s2_, i, rhs)])
            return step(IMP_R, goal, {"i": i, "phi": lhs, "psi": rhs}, [right_done])
        case At(m, body):
            def left_done(s):
                def right_done(s2_):
                    return axg(s2_, m, body)
                return step(AT_R, s, {"j": i, "i": m, "phi": body}, [right_done])
            return step(AT_L, goal, {"j": i, "i": m, "phi": body}, [left_done])
        case Diamond(a, body):
            (u,) = _fresh_for(goal, 1)
            def left_done(s):
                def right_done(s2_):
                    return axg(s2_, u, body)
                return step(DIA_R, s, {"i": i, "a": a, "phi": body, "j": u},
                            [right_done])
            return step(DIA_L, goal, {"i": i, "a": a, "phi": body, "j": u},
                        [left_done])
        case Compare(alpha, kind, c, beta):
            u, v = _fresh_for(goal, 2)
            inst = {"i": i, "alpha": alpha, "beta": beta, "kind": kind, "c": c}
            def left_done(s):
                def right_done(s2_):
                    return cmp_tauto(s2_, u, kind, c, v)
                return step(CMP_R, s, dict(inst, j=u, k=v), [right_done])
            return step(CMP_L, goal, dict(inst, j=u, k=v), [left_done])
    raise MacroError(f"AxG: unexpected expression {print_node(phi)}")


def transfer(goal, i, j, phi):
    """Generalized substitution: close @_i j, @_i phi, Γ ⊢ Δ, @_j phi.

    Extends (S1) beyond its restricted shapes by structural recursion; the
    comparison case routes path evidence through cuts.
    """
    alias = At(i, Nominal(j))
    carrier = At(i, phi)
    target = At(j, phi)
    if alias not in goal.ante or carrier not in goal.ante:
        raise MacroError("transfer: alias or carrier missing on the left")
    if target not in goal.cons:
        raise MacroError("transfer: target missing on the right")
    if s1_shape(phi):
        def done(s):
            match phi:
                case Prop(_):
                    return axiom(AX, s, {"phi": target})
                case Bottom():
                    return axiom(BOT_RULE, s, {"i": j})
                case _:
                    return axg(s, j, phi)
        return step(S1, goal, {"i": i, "j": j, "phi": phi}, [done])
    match phi:
        case Nominal(k):
            return step(AT_5, goal, {"i": i, "j": j, "k": k},
                        [lambda s: axiom(AX, s, {"phi": At(j, Nominal(k))})])
        case At(m, body):
            def right_done(s):
                def left_done(s2_):
                    return axg(s2_, m, body)
                return step(AT_L, s, {"j": i, "i": m, "phi": body}, [left_done])
            return step(AT_R, goal, {"j": j, "i": m, "phi": body}, [right_done])
        case Implies(lhs, rhs):
            def right_done(s):
                def branch1(s1_):
                    # need @_i lhs from @_j lhs: flip the alias first
                    def t_done(s2_):
                        def t5_done(s3_):
                            return transfer(s3_, j, i, lhs)
                        return step(AT_5, s2_, {"i": i, "j": j, "k": i}, [t5_done])
                    return step(AT_T, s1_, {"i": i}, [t_done])
                def branch2(s1_):
                    return transfer(s1_, i, j, rhs)
                return step(IMP_L, s, {"i": i, "phi": lhs, "psi": rhs},
                            [branch1, branch2])
            return step(IMP_R, goal, {"i": j, "phi": lhs, "psi": rhs}, [right_done])
        case Diamond(a, body):
            (u,) = _fresh_for(goal, 1)
            def after_dial(s):
                def after_s1(s2_):
                    def after_diar(s3_):
                        return axg(s3_, u, body)
                    return step(DIA_R, s2_, {"i": j, "a": a, "phi": body, "j": u},
                                [after_diar])
                return step(S1, s, {"i": i, "j": j, "phi": Diamond(a, Nominal(u))},
                            [after_s1])
            return step(DIA_L, goal, {"i": i, "a": a, "phi": body, "j": u},
                        [after_dial])
        case Compare(alpha, kind, c, beta):
            u, v = _fresh_for(goal, 2)
            ev_a, ev_b = dia(alpha, Nominal(u)), dia(beta, Nominal(v))
            inst = {"i": i, "alpha": alpha, "beta": beta, "kind": kind, "c": c,
                    "j": u, "k": v}
            def after_cmpl(s):
                # bring @_j-side path evidence in through two cuts
                left1 = transfer(s.add_cons(At(j, ev_a)), i, j, ev_a)
                s_b = Sequent(s.ante | {At(j, ev_a)}, s.cons)
                left2 = transfer(s_b.add_cons(At(j, ev_b)), i, j, ev_b)
                s_c = Sequent(s_b.ante | {At(j, ev_b)}, s_b.cons)
                def after_cmpr(s2_):
                    return cmp_tauto(s2_, u, kind, c, v)
                core = step(CMP_R, s_c,
                            {"i": j, "alpha": alpha, "beta": beta, "kind": kind,
                             "c": c, "j": u, "k": v}, [after_cmpr])
                inner = cut(left2, core, At(j, ev_b))
                return exactly(cut(left1, inner, At(j, ev_a)), s)
            return step(CMP_L, goal, inst, [after_cmpl])
    raise MacroError(f"transfer: unexpected expression {print_node(phi)}")


def exactly(d, want):
    if d.conclusion != want:
        if d.conclusion.issubset(want):
            return weaken_to(d, want)
        raise MacroError(f"built {d.conclusion}, wanted {want}")
    return d


# ---------------------------------------------------------------------------
# Fragment macros (open leaves are the derived rule's premisses)
# ---------------------------------------------------------------------------

def top_left(goal, i):
    """(⊤L): prove Γ ⊢ Δ from @_i true, Γ ⊢ Δ."""
    t = At(i, top())
    lemma_goal = goal.add_cons(t)
    def after_impr(s):
        return axiom(BOT_RULE, s, {"i": i})
    lemma = step(IMP_R, lemma_goal, {"i": i, "phi": BOT, "psi": BOT}, [after_impr])
    return exactly(cut(lemma, open_leaf(goal.add_ante(t)), t), goal)


def and_left(goal, i, phi, psi):
    """(∧L): one open leaf @_i phi, @_i psi, Γ ⊢ Δ."""
    inner = Implies(phi, neg(psi))
    p = At(i, conj(phi, psi))
    if p not in goal.ante:
        raise MacroError(f"∧L: principal missing: {print_node(p)}")
    declared = goal.drop_ante(p).add_ante(At(i, phi), At(i, psi))
    def branch1(s):
        def step2(s2_):
            def step3(s3_):
                return fill_open(s3_, declared)
            return step(IMP_R, s2_, {"i": i, "phi": psi, "psi": BOT}, [step3])
        return step(IMP_R, s, {"i": i, "phi": phi, "psi": neg(psi)}, [step2])
    def branch2(s):
        return axiom(BOT_RULE, s, {"i": i})
    return step(IMP_L, goal, {"i": i, "phi": inner, "psi": BOT}, [branch1, branch2])


def and_right(goal, i, phi, psi):
    """(∧R): open leaves Γ ⊢ Δ, @_i phi and Γ ⊢ Δ, @_i psi."""
    inner = Implies(phi, neg(psi))
    p = At(i, conj(phi, psi))
    if p not in goal.cons:
        raise MacroError(f"∧R: principal missing: {print_node(p)}")
    rest = goal.drop_cons(p)
    declared1 = rest.add_cons(At(i, phi))
    declared2 = rest.add_cons(At(i, psi))
    def after_impr(s):
        def branch1(s1_):
            return fill_open(s1_, declared1)
        def branch2(s1_):
            def inner2(s2_):
                return fill_open(s2_, declared2)
            def botax(s2_):
                return axiom(BOT_RULE, s2_, {"i": i})
            return step(IMP_L, s1_, {"i": i, "phi": psi, "psi": BOT},
                        [inner2, botax])
        return step(IMP_L, s, {"i": i, "phi": phi, "psi": neg(psi)},
                    [branch1, branch2])
    return step(IMP_R, goal, {"i": i, "phi": inner, "psi": BOT}, [after_impr])


def iff_right(goal, i, phi, psi):
    """(↔R): open leaves @_i phi, Γ ⊢ Δ, @_i psi and @_i psi, Γ ⊢ Δ, @_i phi."""
    a, b = Implies(phi, psi), Implies(psi, phi)
    frag = and_right(goal, i, a, b)
    rest = goal.drop_cons(At(i, conj(a, b)))

    def extend(leaf):
        if leaf == rest.add_cons(At(i, a)):
            lhs, rhs = phi, psi
        elif leaf == rest.add_cons(At(i, b)):
            lhs, rhs = psi, phi
        else:
            raise MacroError("↔R: unexpected open leaf")
        declared = rest.add_ante(At(i, lhs)).add_cons(At(i, rhs))
        return step(IMP_R, leaf, {"i": i, "phi": lhs, "psi": rhs},
                    [lambda s: fill_open(s, declared)])

    return graft(frag, extend)


def cmp_flip(goal, x, kind, c, y):
    """(⟨▲⟩B): from <y: ^ x:>, Γ ⊢ Δ conclude <x: ^ y:>, Γ ⊢ Δ."""
    p = Compare(Jump(x), kind, c, Jump(y))
    if p not in goal.ante:
        raise MacroError(f"⟨▲⟩B: principal missing: {print_node(p)}")
    flipped = Compare(Jump(y), kind, c, Jump(x))
    declared = goal.drop_ante(p).add_ante(flipped)
    if x == y:
        return open_leaf(goal)
    if kind is CmpKind.EQ:
        def after_eqt(s):
            def after_eq5(s2_):
                return fill_open(s2_, declared)
            return step(EQ_5, s, {"i": x, "j": y, "k": x, "c": c}, [after_eq5])
        return step(EQ_T, goal, {"i": x, "c": c}, [after_eqt])
    # inequality: derive the flipped form by cutting on it
    lemma_goal = goal.add_cons(flipped)
    def after_neqr(s):
        def after_neql(s2_):
            def after_eqt(s3_):
                def after_eq5(s4_):
                    eq = Compare(Jump(x), CmpKind.EQ, c, Jump(y))
                    return axiom(AX, s4_, {"phi": eq})
                return step(EQ_5, s3_, {"i": y, "j": x, "k": y, "c": c},
                            [after_eq5])
            return step(EQ_T, s2_, {"i": y, "c": c}, [after_eqt])
        return step(NEQ_L, s, {"i": x, "j": y, "c": c}, [after_neql])
    lemma = step(NEQ_R, lemma_goal, {"i": y, "j": x, "c": c}, [after_neqr])
    return exactly(cut(lemma, open_leaf(declared), flipped), goal)


# ---------------------------------------------------------------------------
# Generalized diamond rules
# ---------------------------------------------------------------------------

def general_dia_left(goal, i, path, phi):
    """Decompose @_i <path> phi on the left down to atomic steps.

    Returns a fragment with one open leaf carrying the fully decomposed
    evidence (fresh nominals for atomic steps, jump and test reductions).
    """
    e = At(i, dia(path, phi))
    if e not in goal.ante:
        raise MacroError(f"generalized diamond: principal missing: {print_node(e)}")
    match path:
        case Atom(a):
            (u,) = _fresh_for(goal, 1)
            return step(DIA_L, goal, {"i": i, "a": a, "phi": phi, "j": u},
                        [open_leaf])
        case Jump(m):
            return step(AT_L, goal, {"j": i, "i": m, "phi": phi}, [open_leaf])
        case Test(psi):
            frag = and_left(goal, i, psi, phi)
            if psi != top():
                return frag
            # strip the vacuous @_i true from the open leaf
            (leaf_seq,) = [n.conclusion for _, n in frag.walk() if n.rule == "Open"]
            stripped = leaf_seq.drop_ante(At(i, top()))
            filler = weaken_to(open_leaf(stripped), leaf_seq)
            return graft(frag, {leaf_seq: filler})
        case Concat(head, tail):
            return _general_dia_concat_left(goal, i, head, tail, phi)
    raise MacroError(f"not a path: {path!r}")


def _general_dia_concat_left(goal, i, head, tail, phi):
    rest = dia(tail, phi)
    match head:
        case Atom(a):
            (u,) = _fresh_for(goal, 1, rest)
            frag = step(DIA_L, goal, {"i": i, "a": a, "phi": rest, "j": u},
                        [open_leaf])
            hand_off = (u, rest)
        case Jump(m):
            frag = step(AT_L, goal, {"j": i, "i": m, "phi": rest}, [open_leaf])
            hand_off = (m, rest)
        case Test(psi):
            frag = and_left(goal, i, psi, rest)
            hand_off = (i, rest)
        case Concat(h2, t2):
            frag = _general_dia_concat_left(goal, i, h2, Concat(t2, tail), phi)
            return frag
        case _:
            raise MacroError(f"not a path: {head!r}")
    (leaf,) = [n.conclusion for _, n in frag.walk() if n.rule == "Open"]
    base, _ = hand_off
    return graft(frag, {leaf: general_dia_left(leaf, base, tail, phi)})


def general_dia_right(goal, i, path, phi, witnesses=()):
    """Introduce @_i <path> phi on the right, given witness nominals.

    `witnesses` supplies one nominal per atomic step along the path, in
    order; jumps and tests consume none.
    """
    e = At(i, dia(path, phi))
    if e not in goal.cons:
        raise MacroError(f"generalized diamond: principal missing: {print_node(e)}")
    witnesses = list(witnesses)
    match path:
        case Atom(a):
            u = witnesses.pop(0)
            return step(DIA_R, goal, {"i": i, "a": a, "phi": phi, "j": u},
                        [open_leaf])
        case Jump(m):
            return step(AT_R, goal, {"j": i, "i": m, "phi": phi}, [open_leaf])
        case Test(psi):
            return and_right(goal, i, psi, phi)
        case Concat(head, tail):
            rest = dia(tail, phi)
            match head:
                case Atom(a):
                    u = witnesses[0]
                    frag = step(DIA_R, goal, {"i": i, "a": a, "phi": rest, "j": u},
                                [open_leaf])
                    nxt, used = u, 1
                case Jump(m):
                    frag = step(AT_R, goal, {"j": i, "i": m, "phi": rest},
                                [open_leaf])
                    nxt, used = m, 0
                case _:
                    raise MacroError("right decomposition handles atom/jump heads")
            (leaf,) = [n.conclusion for _, n in frag.walk() if n.rule == "Open"]
            return graft(frag, {leaf: general_dia_right(
                leaf, nxt, tail, phi, witnesses[used:])})
    raise MacroError(f"not a path: {path!r}")


# ---------------------------------------------------------------------------
# Named dispatch
# ---------------------------------------------------------------------------

MACROS = {
    "AxG": lambda goal, inst: axg(goal, inst["i"], inst["phi"]),
    "TopL": lambda goal, inst: top_left(goal, inst["i"]),
    "AndL": lambda goal, inst: and_left(goal, inst["i"], inst["phi"], inst["psi"]),
    "AndR": lambda goal, inst: and_right(goal, inst["i"], inst["phi"], inst["psi"]),
    "IffR": lambda goal, inst: iff_right(goal, inst["i"], inst["phi"], inst["psi"]),
    "CmpB": lambda goal, inst: cmp_flip(goal, inst["i"], inst["kind"],
                                        inst["c"], inst["j"]),
    "GenS1": lambda goal, inst: transfer(goal, inst["i"], inst["j"], inst["phi"]),
    "DiaGenL": lambda goal, inst: general_dia_left(goal, inst["i"],
                                                   inst["alpha"], inst["phi"]),
    "DiaGenR": lambda goal, inst: general_dia_right(
        goal, inst["i"], inst["alpha"], inst["phi"], inst.get("witnesses", ())),
}


def expand_macro(name, goal, inst):
    """Expand a named derived rule at `goal`; unknown names raise."""
    try:
        fn = MACROS[name]
    except KeyError:
        raise MacroError(f"unknown macro: {name}") from None
    return fn(goal, inst)
