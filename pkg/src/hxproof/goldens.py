"""The locked reference derivations.

Five derivations are locked as goldens: reflexivity, symmetry, and
transitivity of data equality, the key-paste translation template, and the
fresh-alias elimination tree from the basic hybrid fragment. Derived-rule
steps expand through the macro layer, so the trees contain primitive rule
applications only and pass the kernel check.
"""

from __future__ import annotations

from .derived import (
    and_left, and_right, axg, cmp_flip, cmp_tauto, exactly, iff_right, step,
    top_left,
)
from .hylo import simulate_reference_rule
from .kernel import (
    AT_5, AT_L, AT_R, AT_T, AX, CMP_L, CMP_R, DIA_L, EQ_5, EQ_T, IMP_L,
    IMP_R, S3, axiom, cut, graft, sequent, weaken_to,
)
from .syntax import (
    At, Atom, CmpKind, Compare, Diamond, Implies, Jump, Nominal, Prop, concat,
    conj, dia, eps, iff, nominals_of, top,
)


def reflexivity(i="i", c="c"):
    """⊢ @_i <eps =c eps>, via @T, ⊤L, inverse ∧L, ⟨▲⟩R, EqT, Ax."""
    goal_expr = At(i, Compare(eps(), CmpKind.EQ, c, eps()))
    root = sequent((), {goal_expr})
    ev = At(i, dia(eps(), Nominal(i)))          # @_i (true & i)

    def l1(s):  # @_i i ⊢ @_i<eps =c eps>   -- ⊤L then inverse ∧L via cut
        def l2(s2):  # @_i true, @_i i ⊢ ...
            lemma = and_right(s2.add_cons(ev), i, top(), Nominal(i))
            lemma = graft(lemma, lambda leaf: _close_axish(leaf, i))
            def l3(s3):  # @_i (true & i) ⊢ ...
                inst = {"i": i, "alpha": eps(), "beta": eps(),
                        "kind": CmpKind.EQ, "c": c, "j": i, "k": i}
                def l4(s4):
                    def l5(s5):
                        e = Compare(Jump(i), CmpKind.EQ, c, Jump(i))
                        return axiom(AX, s5, {"phi": e})
                    return step(EQ_T, s4, {"i": i, "c": c}, [l5])
                return step(CMP_R, s3, inst, [l4])
            body = l3(sequent({ev}, {goal_expr}))
            return exactly(cut(lemma, body, ev), s2)
        return _top_left_closed(s, i, l2)
    return step(AT_T, root, {"i": i}, [l1])


def _top_left_closed(goal, i, continue_with):
    frag = top_left(goal, i)
    (leaf,) = [n.conclusion for _, n in frag.walk() if n.rule == "Open"]
    return graft(frag, {leaf: continue_with(leaf)})


def _close_axish(leaf, i):
    """Close ⊢ ... @_i true / ⊢ ... @_i i leaves inside the reflexivity tree."""
    for e in leaf.cons:
        if e == At(i, top()) and e in leaf.ante:
            return axg(leaf, i, top())
        if e == At(i, Nominal(i)) and e in leaf.ante:
            return axiom(AX, leaf, {"phi": e})
    raise ValueError(f"unexpected open leaf {leaf}")


def symmetry(alpha=Atom("a"), beta=Atom("b"), kind=CmpKind.EQ, i="i", c="c"):
    """⊢ @_i(<alpha ^ beta> <-> <beta ^ alpha>) for atomic paths."""
    fwd = Compare(alpha, kind, c, beta)
    bwd = Compare(beta, kind, c, alpha)
    root = sequent((), {At(i, iff(fwd, bwd))})
    frag = iff_right(root, i, fwd, bwd)

    def one_direction(leaf):
        (src,) = [e for e in leaf.ante if isinstance(e, At)]
        src_cmp = src.body
        (dst,) = [e.body for e in leaf.cons if isinstance(e, At)]
        u, v = "_j", "_k"
        inst_l = {"i": i, "alpha": src_cmp.left, "beta": src_cmp.right,
                  "kind": kind, "c": c, "j": u, "k": v}
        def after_cmpl(s):
            inst_r = {"i": i, "alpha": dst.left, "beta": dst.right,
                      "kind": kind, "c": c, "j": v, "k": u}
            def after_cmpr(s2):
                flip_frag = cmp_flip(s2, u, kind, c, v)
                def close(leaf2):
                    return cmp_tauto(leaf2, v, kind, c, u)
                return graft(flip_frag, close)
            return step(CMP_R, s, inst_r, [after_cmpr])
        return step(CMP_L, leaf, inst_l, [after_cmpl])

    return graft(frag, one_direction)


def transitivity(alpha=Atom("a"), beta=Atom("b"), i="i", c="c"):
    """⊢ @_i(<alpha =c eps> & <eps =c beta> -> <alpha =c beta>)."""
    x, u, v, y = "_x", "_u", "_v", "_y"
    lhs1 = Compare(alpha, CmpKind.EQ, c, eps())
    lhs2 = Compare(eps(), CmpKind.EQ, c, beta)
    rhs = Compare(alpha, CmpKind.EQ, c, beta)
    root = sequent((), {At(i, Implies(conj(lhs1, lhs2), rhs))})
    eq = lambda m, n: Compare(Jump(m), CmpKind.EQ, c, Jump(n))

    def t12(s):    # Eq5 then Ax
        def t13(s2):
            return axiom(AX, s2, {"phi": eq(x, y)})
        return step(EQ_5, s, {"i": u, "j": x, "k": y, "c": c}, [t13])

    def t11(s):    # flip <x =c u> to <u =c x>
        return graft(cmp_flip(s, x, CmpKind.EQ, c, u), t12)

    def t9(s):     # S3 replaces v by u in <v =c y>, then discard the used pair
        def after_s3(s2):
            small = sequent({eq(x, u), eq(u, y)}, {eq(x, y)})
            return weaken_to(t11(small), s2)
        return step(S3, s, {"i": v, "j": u, "k": y, "c": c}, [after_s3])

    def t7(s):     # @5 merges the two names of the intermediate node
        def after_at5(s2):
            small = sequent({At(v, Nominal(u)), eq(x, u), eq(v, y)}, {eq(x, y)})
            return weaken_to(t9(small), s2)
        return step(AT_5, s, {"i": i, "j": v, "k": u}, [after_at5])

    def t6(s):     # ⟨▲⟩R with the atomic endpoints
        inst = {"i": i, "alpha": alpha, "beta": beta, "kind": CmpKind.EQ,
                "c": c, "j": x, "k": y}
        return step(CMP_R, s, inst, [t7])

    def t5(s):     # unpack @_i(true & v)
        frag = and_left(s, i, top(), Nominal(v))
        return graft(frag, t6)

    def t4(s):     # unpack @_i(true & u)
        frag = and_left(s, i, top(), Nominal(u))
        return graft(frag, t5)

    def t3(s):     # decompose @_i<eps =c beta> with fresh v, y
        inst = {"i": i, "alpha": eps(), "beta": beta, "kind": CmpKind.EQ,
                "c": c, "j": v, "k": y}
        return step(CMP_L, s, inst, [t4])

    def t2(s):     # decompose @_i<alpha =c eps> with fresh x, u
        inst = {"i": i, "alpha": alpha, "beta": eps(), "kind": CmpKind.EQ,
                "c": c, "j": x, "k": u}
        return step(CMP_L, s, inst, [t3])

    def t1(s):     # ∧L
        return graft(and_left(s, i, lhs1, lhs2), t2)

    return step(IMP_R, root, {"i": i, "phi": conj(lhs1, lhs2), "psi": rhs}, [t1])


def paste_template(chi, alpha=Atom("b"), beta=Atom("b2"), a="a", kind=CmpKind.EQ,
                   c="c", i="i", j="j", k="k", premiss=None):
    """Key-paste translation: ⊢ @_i(<j: a alpha ^ beta> -> chi).

    `premiss` must be a derivation of ⊢ @_i((@_j<a>k & <k: alpha ^ beta>) -> chi);
    when omitted, chi must make that sequent provable by the default builder.
    The nominals j, k and the witnesses must not occur in chi, alpha, beta.
    """
    x, y = "_x", "_y"
    used = nominals_of(chi) | nominals_of(alpha) | nominals_of(beta) | {i}
    for nom in (j, k, x, y):
        if nom in used:
            raise ValueError(f"nominal {nom} must be fresh for the template")
    full_path = concat(Jump(j), Atom(a), alpha)
    lhs = Compare(full_path, kind, c, beta)
    kpath_cmp = Compare(concat(Jump(k), alpha), kind, c, beta)
    step_atom = Diamond(a, Nominal(k))
    cut_expr = At(i, conj(At(j, step_atom), kpath_cmp))
    premiss_goal = sequent((), {At(i, Implies(conj(At(j, step_atom), kpath_cmp),
                                              chi))})
    if premiss is None:
        premiss = _paste_premiss_default(premiss_goal, i, chi,
                                         conj(At(j, step_atom), kpath_cmp))
    if premiss.conclusion != premiss_goal:
        raise ValueError("premiss derivation proves the wrong sequent")

    root = sequent((), {At(i, Implies(lhs, chi))})

    def p1(s):  # @_i<j: a alpha ^ beta> ⊢ @_i chi
        inst = {"i": i, "alpha": full_path, "beta": beta, "kind": kind,
                "c": c, "j": x, "k": y}
        def p2(s2):  # evidence decomposed; principal @_i@_j<a><alpha>x
            def p3(s3):  # @L stripped the outer @_i
                def p4(s4):  # <a>-step split off with fresh k
                    return _paste_cut(s4)
                return step(DIA_L, s3, {"i": j, "a": a,
                                        "phi": dia(alpha, Nominal(x)), "j": k},
                            [p4])
            return step(AT_L, s2, {"j": i, "i": j,
                                   "phi": dia(concat(Atom(a), alpha), Nominal(x))},
                        [p3])
        return step(CMP_L, s, inst, [p2])

    def _paste_cut(s4):
        # left: prove the conjunction; right: consume it via the premiss
        left_goal = s4.add_cons(cut_expr)
        left = and_right(left_goal, i, At(j, step_atom), kpath_cmp)

        def fill(leaf):
            target_a = At(i, At(j, step_atom))
            target_b = At(i, kpath_cmp)
            if target_a in leaf.cons:
                def inner(s5):
                    return axg(s5, j, step_atom)
                return step(AT_R, leaf, {"j": i, "i": j, "phi": step_atom},
                            [inner])
            if target_b in leaf.cons:
                return _paste_evidence_wrap(leaf)
            raise ValueError(f"unexpected conjunction leaf {leaf}")

        left = graft(left, fill)

        def right_branch():
            # inverse ->R: from ⊢ @_i(X -> chi) obtain @_i X ⊢ @_i chi
            inner_cut = At(i, Implies(conj(At(j, step_atom), kpath_cmp), chi))
            lgoal = sequent({cut_expr}, {At(i, chi), inner_cut})
            lhs_d = weaken_to(premiss, lgoal)
            rgoal = sequent({inner_cut, cut_expr}, {At(i, chi)})
            rhs_d = step(IMP_L, rgoal,
                         {"i": i, "phi": conj(At(j, step_atom), kpath_cmp),
                          "psi": chi},
                         [lambda s: axg(s, i, conj(At(j, step_atom), kpath_cmp)),
                          lambda s: axg(s, i, chi)])
            return exactly(cut(lhs_d, rhs_d, inner_cut),
                           sequent({cut_expr}, {At(i, chi)}))

        return exactly(cut(left, right_branch(), cut_expr), s4)

    def _paste_evidence_wrap(leaf):
        # inverse @L: re-wrap @_k<alpha>x as @_i@_k<alpha>x by a cut
        bare = At(k, dia(alpha, Nominal(x)))
        wrapped = At(i, dia(concat(Jump(k), alpha), Nominal(x)))
        lgoal = leaf.add_cons(wrapped)
        left = step(AT_R, lgoal, {"j": i, "i": k, "phi": dia(alpha, Nominal(x))},
                    [lambda s: axg(s, k, dia(alpha, Nominal(x)))])
        rgoal = sequent({wrapped, At(i, dia(beta, Nominal(y))),
                         Compare(Jump(x), kind, c, Jump(y))},
                        {At(i, kpath_cmp)})
        inst = {"i": i, "alpha": concat(Jump(k), alpha), "beta": beta,
                "kind": kind, "c": c, "j": x, "k": y}
        right = step(CMP_R, rgoal, inst,
                     [lambda s: cmp_tauto(s, x, kind, c, y)])
        return exactly(cut(left, right, wrapped), leaf)

    return step(IMP_R, root, {"i": i, "phi": lhs, "psi": chi}, [p1])


def _paste_premiss_default(goal, i, chi, antecedent):
    """Prove ⊢ @_i(X -> chi) when chi is itself a trivial implication."""
    def after_impr(s):
        match chi:
            case Implies(lhs, rhs) if lhs == rhs:
                def inner(s2):
                    return axg(s2, i, lhs)
                return step(IMP_R, s, {"i": i, "phi": lhs, "psi": rhs}, [inner])
            case _:
                raise ValueError(
                    "no default premiss builder for this chi; pass premiss=")
    return step(IMP_R, goal, {"i": i, "phi": antecedent, "psi": chi},
                [after_impr])


def nom2_golden(i="i", j="j", k="k", a="a"):
    """The fresh-alias simulation tree, instantiated and closed.

    End-sequent: @_i j, @_i <a> k ⊢ @_j <a> k.
    """
    gamma = {At(i, Nominal(j)), At(i, Diamond(a, Nominal(k)))}
    delta = {At(j, Diamond(a, Nominal(k)))}
    goal = sequent(gamma, delta)
    frag = simulate_reference_rule("Nom2", goal, {"i": i, "j": j, "k": k, "a": a})

    def close(leaf):
        alias = At(i, Nominal(j))
        if alias in leaf.cons:
            return axiom(AX, leaf, {"phi": alias})
        stepped = At(i, Diamond(a, Nominal(k)))
        if stepped in leaf.cons and stepped in leaf.ante:
            return axg(leaf, i, Diamond(a, Nominal(k)))
        moved = At(j, Diamond(a, Nominal(k)))
        if moved in leaf.cons and moved in leaf.ante:
            return axg(leaf, j, Diamond(a, Nominal(k)))
        raise ValueError(f"unexpected open leaf {leaf}")

    return graft(frag, close)


def prove_axiom_suite():
    """The five locked derivations, keyed by name."""
    q = Prop("q")
    return {
        "reflexivity": reflexivity(),
        "symmetry": symmetry(),
        "transitivity": transitivity(),
        "paste": paste_template(chi=Implies(q, q)),
        "nom2": nom2_golden(),
    }
