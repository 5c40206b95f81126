"""Bounded backward proof search and the explicit rule inverses.

Every rule of the calculus is invertible, so the search never backtracks:
it saturates with non-branching rules, branches only on left implications,
spends a fresh-nominal budget on left diamonds/comparisons, and enumerates
witnesses for the right rules. Closure rules fire at most once per
instantiation (the added atom acts as the seen-marker). Termination of the
calculus itself is open, so exhaustion reports Unknown honestly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .derived import axg, cmp_tauto, exactly, step
from .kernel import (
    ALL_RULES, AT_5, AT_L, AT_R, AT_T, AX, BOT_RULE, CMP_L, CMP_R, DIA_L,
    DIA_R, EQ_5, EQ_T, IMP_L, IMP_R, NEQ_L, NEQ_R, NOM, S1, S2, S3,
    Derivation, KernelError, Sequent, ax_shape, axiom, check_derivation,
    cut, expr_key, infer, premises, s1_shape, weaken, weaken_to,
)
from .model import HybridDataModel, check_sequent_validity, find_countermodel
from .syntax import (
    At, Bottom, BOT, CmpKind, Compare, Concat, Diamond, Implies, Jump,
    Nominal, Test, dia, fresh_nominals, neg, top,
)

DEFAULT_RULE_ORDER = (
    NEQ_L, NEQ_R, AT_L, AT_R, IMP_R,            # invertible decompositions
    AT_T, AT_5, S1, S2, S3, EQ_T, EQ_5,         # closure saturation
    IMP_L,                                      # branching
    DIA_L, CMP_L,                               # fresh-nominal rules
    DIA_R, CMP_R,                               # right witness rules
)


@dataclass(frozen=True)
class SearchConfig:
    """Bounds and strategy knobs for backward search.

    `max_depth` counts decomposition/branching/witness steps along a branch;
    closure saturation is separately bounded by its finite instance space.
    """

    max_depth: int = 12
    max_fresh_nominals: int = 4
    rule_order: tuple = DEFAULT_RULE_ORDER
    enable_countermodel: bool = True
    countermodel_nodes: int = 3
    allowed_rules: frozenset = frozenset(ALL_RULES)
    allow_evidence_cuts: bool = True

    def allows(self, rule):
        return rule in self.allowed_rules


@dataclass(frozen=True)
class Proved:
    derivation: Derivation
    status: str = "proved"


@dataclass(frozen=True)
class Refuted:
    model: HybridDataModel
    status: str = "refuted"


@dataclass(frozen=True)
class Unknown:
    report: dict = field(default_factory=dict)
    status: str = "unknown"


# ---------------------------------------------------------------------------
# Search engine
# ---------------------------------------------------------------------------

def _sorted(eset):
    return sorted(eset, key=expr_key)


def _try_close(seq):
    for e in _sorted(seq.ante & seq.cons):
        if ax_shape(e):
            return axiom(AX, seq, {"phi": e})
    for e in _sorted(seq.ante):
        match e:
            case At(i, Bottom()):
                return axiom(BOT_RULE, seq, {"i": i})
            case _:
                pass
    return None


def _decomposition_move(seq, cfg):
    """First applicable invertible non-branching decomposition."""
    for e in _sorted(seq.ante):
        match e:
            case Compare(Jump(i), CmpKind.NEQ, c, Jump(j)) if cfg.allows(NEQ_L):
                return NEQ_L, {"i": i, "j": j, "c": c}
            case At(j, At(i, phi)) if cfg.allows(AT_L):
                return AT_L, {"j": j, "i": i, "phi": phi}
            case _:
                pass
    for e in _sorted(seq.cons):
        match e:
            case Compare(Jump(i), CmpKind.NEQ, c, Jump(j)) if cfg.allows(NEQ_R):
                return NEQ_R, {"i": i, "j": j, "c": c}
            case At(j, At(i, phi)) if cfg.allows(AT_R):
                return AT_R, {"j": j, "i": i, "phi": phi}
            case At(i, Implies(phi, psi)) if cfg.allows(IMP_R):
                return IMP_R, {"i": i, "phi": phi, "psi": psi}
            case _:
                pass
    return None


CLOSURE_RULES = (AT_T, AT_5, S1, S2, S3, EQ_T, EQ_5)


def _closure_move(seq, cfg):
    """First closure-rule instance whose added atom is genuinely new.

    Rules fire in the order given by cfg.rule_order; since each instance
    fires at most once (the added atom marks it as done) the saturation
    reaches the same fixpoint under any order.
    """
    noms = sorted(seq.nominals())
    cmps = sorted({e.cmp for e in seq.ante | seq.cons if isinstance(e, Compare)})
    ante = seq.ante
    aliases = [(e.nom, e.body.name) for e in _sorted(ante)
               if isinstance(e, At) and isinstance(e.body, Nominal)]
    eqs = [e for e in _sorted(ante)
           if isinstance(e, Compare) and e.kind is CmpKind.EQ]
    order = [r for r in cfg.rule_order if r in CLOSURE_RULES and cfg.allows(r)]
    for rule in order:
        if rule == AT_T:
            for i in noms:
                if At(i, Nominal(i)) not in ante:
                    return AT_T, {"i": i}
        elif rule == EQ_T:
            for i in noms:
                for c in cmps:
                    if Compare(Jump(i), CmpKind.EQ, c, Jump(i)) not in ante:
                        return EQ_T, {"i": i, "c": c}
        elif rule == AT_5:
            for i, j in aliases:
                for i2, k in aliases:
                    if i2 == i and At(j, Nominal(k)) not in ante:
                        return AT_5, {"i": i, "j": j, "k": k}
        elif rule == S1:
            for i, j in aliases:
                for e in _sorted(ante):
                    if isinstance(e, At) and e.nom == i and s1_shape(e.body) \
                            and At(j, e.body) not in ante:
                        return S1, {"i": i, "j": j, "phi": e.body}
        elif rule == S2:
            steps = [(e.nom, e.body.mod, e.body.body.name)
                     for e in _sorted(ante)
                     if isinstance(e, At) and isinstance(e.body, Diamond)
                     and isinstance(e.body.body, Nominal)]
            for j, k in aliases:
                for i, a, j2 in steps:
                    if j2 == j and At(i, Diamond(a, Nominal(k))) not in ante:
                        return S2, {"i": i, "j": j, "k": k, "a": a}
        elif rule == S3:
            for i, j in aliases:
                for e in eqs:
                    if e.left.nom == i:
                        k = e.right.nom
                        if Compare(Jump(j), CmpKind.EQ, e.cmp, Jump(k)) \
                                not in ante:
                            return S3, {"i": i, "j": j, "k": k, "c": e.cmp}
        elif rule == EQ_5:
            for e1 in eqs:
                for e2 in eqs:
                    if e1.left == e2.left and e1.cmp == e2.cmp:
                        j, k = e1.right.nom, e2.right.nom
                        if Compare(Jump(j), CmpKind.EQ, e1.cmp, Jump(k)) \
                                not in ante:
                            return EQ_5, {"i": e1.left.nom, "j": j, "k": k,
                                          "c": e1.cmp}
    return None


def _branch_move(seq, cfg):
    if not cfg.allows(IMP_L):
        return None
    for e in _sorted(seq.ante):
        match e:
            case At(i, Implies(phi, psi)):
                return IMP_L, {"i": i, "phi": phi, "psi": psi}
            case _:
                pass
    return None


def _fresh_moves(seq, cfg, fresh_left):
    """Left diamond / comparison decompositions, cheapest first."""
    out = []
    for e in _sorted(seq.ante):
        match e:
            case At(i, Diamond(a, phi)) if not isinstance(phi, Nominal) \
                    and cfg.allows(DIA_L) and fresh_left >= 1:
                (j,) = fresh_nominals(1, seq.nominals())
                out.append((DIA_L, {"i": i, "a": a, "phi": phi, "j": j}, 1))
            case At(i, Compare(alpha, kind, c, beta)) if cfg.allows(CMP_L) \
                    and fresh_left >= 2:
                j, k = fresh_nominals(2, seq.nominals())
                out.append((CMP_L, {"i": i, "alpha": alpha, "beta": beta,
                                    "kind": kind, "c": c, "j": j, "k": k}, 2))
            case _:
                pass
    return out


def _witness_move(seq, cfg, fired):
    """Right witness rules; `fired` keys stop re-introduction loops."""
    noms = sorted(seq.nominals())
    for e in _sorted(seq.cons):
        match e:
            case At(i, Diamond(a, phi)) if cfg.allows(DIA_R):
                for j in noms:
                    key = (DIA_R, e, j)
                    if At(i, Diamond(a, Nominal(j))) in seq.ante \
                            and key not in fired \
                            and At(j, phi) not in seq.cons:
                        return (DIA_R, {"i": i, "a": a, "phi": phi, "j": j}), key
            case At(i, Compare(alpha, kind, c, beta)) if cfg.allows(CMP_R):
                for x in noms:
                    if At(i, dia(alpha, Nominal(x))) not in seq.ante:
                        continue
                    for y in noms:
                        if At(i, dia(beta, Nominal(y))) not in seq.ante:
                            continue
                        key = (CMP_R, e, x, y)
                        added = Compare(Jump(x), kind, c, Jump(y))
                        if key not in fired and added not in seq.cons:
                            return (CMP_R, {"i": i, "alpha": alpha,
                                            "beta": beta, "kind": kind,
                                            "c": c, "j": x, "k": y}), key
            case _:
                pass
    return None


def _eps_evidence_lemma(goal, i, x):
    """Closed proof of Γ ⊢ Δ, @_i (true & x) given @_i x on the left.

    Assembles empty-path evidence for a right comparison; this is the one
    place the search itself reaches for (Cut).
    """
    ev_body = dia(Test(top()), Nominal(x))   # true & x, expanded
    inner = Implies(top(), neg(Nominal(x)))
    def after_impr(s):
        def branch1(s1_):
            def after_impr2(s2_):
                return axiom(BOT_RULE, s2_, {"i": i})
            return step(IMP_R, s1_, {"i": i, "phi": BOT, "psi": BOT},
                        [after_impr2])
        def branch2(s1_):
            return step(IMP_L, s1_, {"i": i, "phi": Nominal(x), "psi": BOT},
                        [lambda s2_: axiom(AX, s2_, {"phi": At(i, Nominal(x))}),
                         lambda s2_: axiom(BOT_RULE, s2_, {"i": i})])
        return step(IMP_L, s, {"i": i, "phi": top(), "psi": neg(Nominal(x))},
                    [branch1, branch2])
    lemma_goal = goal.add_cons(At(i, ev_body))
    return step(IMP_R, lemma_goal, {"i": i, "phi": inner, "psi": BOT},
                [after_impr])


def _jump_head(path):
    match path:
        case Jump(m):
            return m, None
        case Concat(Jump(m), rest):
            return m, rest
        case _:
            return None, None


def _wrap_evidence_lemma(goal, i0, inner):
    """Closed proof of Γ ⊢ Δ, @_i0 @_m psi given @_m psi on the left."""
    def close(s):
        if ax_shape(inner):
            return axiom(AX, s, {"phi": inner})
        return axg(s, inner.nom, inner.body)
    return step(AT_R, goal.add_cons(At(i0, inner)),
                {"j": i0, "i": inner.nom, "phi": inner.body}, [close])


def _evidence_cut_move(seq, cfg, fired):
    """Evidence-assembly cuts for a right comparison.

    Empty-path components turn a known @_i x into @_i (true & x); jump-headed
    components re-wrap a known @_m psi as @_i @_m psi. All missing pieces for
    one comparison are returned together so they survive until the witness
    rule consumes them.
    """
    if not cfg.allow_evidence_cuts or not cfg.allows(CMP_R):
        return None
    epsilon = Test(top())
    noms = sorted(seq.nominals())
    for e in _sorted(seq.cons):
        if not (isinstance(e, At) and isinstance(e.body, Compare)):
            continue
        i0, cmp_ = e.nom, e.body
        pieces = []
        ok = True
        for comp in (cmp_.left, cmp_.right):
            if any(At(i0, dia(comp, Nominal(x))) in seq.ante for x in noms):
                continue
            piece = None
            if comp == epsilon:
                for x in noms:
                    if At(i0, Nominal(x)) in seq.ante:
                        piece = ("eps", x, At(i0, dia(epsilon, Nominal(x))))
                        break
            else:
                m, rest = _jump_head(comp)
                if m is not None:
                    for x in noms:
                        inner = At(m, Nominal(x)) if rest is None \
                            else At(m, dia(rest, Nominal(x)))
                        if inner in seq.ante:
                            piece = ("wrap", inner, At(i0, inner))
                            break
            if piece is None:
                ok = False
                break
            pieces.append(piece)
        if ok and pieces:
            key = ("Ev", e, tuple(p[2] for p in pieces))
            if key not in fired and all(p[2] not in seq.ante for p in pieces):
                return pieces, key
    return None



def _attempt(seq, depth_left, fresh_left, cfg, steps, fired=frozenset()):
    """Search one branch; returns a closed derivation or None."""
    trail = []
    cur = seq
    fired = set(fired)

    def fold(topd):
        d = topd
        for rule, inst, concl in reversed(trail):
            d = infer(rule, concl, inst, [d])
        return d

    while True:
        steps["visited"] += 1
        closed = _try_close(cur)
        if closed is not None:
            return fold(closed)

        # witness rules are additive and invertible; they run before the
        # consuming decompositions so assembled path evidence gets used
        wit = _witness_move(cur, cfg, fired) if depth_left > 0 else None
        if wit is not None:
            (rule, inst), key = wit
            fired.add(key)
            depth_left -= 1
            trail.append((rule, inst, cur))
            cur = premises(cur, rule, inst)[0]
            continue

        move = _decomposition_move(cur, cfg)
        cost = 1
        if move is None:
            move = _closure_move(cur, cfg)
            cost = 0
        if move is not None:
            rule, inst = move
            if cost and depth_left <= 0:
                return None
            depth_left -= cost
            trail.append((rule, inst, cur))
            cur = premises(cur, rule, inst)[0]
            continue

        if depth_left <= 0:
            return None

        ev = _evidence_cut_move(cur, cfg, fired)
        if ev is not None:
            pieces, key = ev
            bases, lemmas, cur2 = [], [], cur
            for kind_, data, evidence in pieces:
                bases.append(cur2)
                if kind_ == "eps":
                    lemmas.append(_eps_evidence_lemma(cur2, evidence.nom, data))
                else:
                    lemmas.append(_wrap_evidence_lemma(cur2, evidence.nom, data))
                cur2 = cur2.add_ante(evidence)
            rest = _attempt(cur2, depth_left - 1, fresh_left, cfg, steps,
                            fired | {key})
            if rest is None:
                return None
            out = rest
            for base, lemma, (_, _, evidence) in zip(
                    reversed(bases), reversed(lemmas), reversed(pieces)):
                out = exactly(cut(lemma, out, evidence), base)
            return fold(out)

        branch = _branch_move(cur, cfg)
        if branch is not None:
            rule, inst = branch
            p1, p2 = premises(cur, rule, inst)
            left = _attempt(p1, depth_left - 1, fresh_left, cfg, steps, fired)
            if left is None:
                return None
            right = _attempt(p2, depth_left - 1, fresh_left, cfg, steps, fired)
            if right is None:
                return None
            return fold(infer(rule, cur, inst, [left, right]))

        fresh = _fresh_moves(cur, cfg, fresh_left)
        if fresh:
            rule, inst, spent = fresh[0]
            fresh_left -= spent
            depth_left -= 1
            trail.append((rule, inst, cur))
            cur = premises(cur, rule, inst)[0]
            continue

        return None


def prove(goal, cfg=None):
    """Three-valued bounded proof search for a sequent.

    Proved results carry a derivation that re-checks; Refuted results carry
    a model verified to refute the goal; resource exhaustion is Unknown.
    """
    cfg = cfg or SearchConfig()
    steps = {"visited": 0}
    d = _attempt(goal, cfg.max_depth, cfg.max_fresh_nominals, cfg, steps)
    if d is not None:
        violations = check_derivation(d)
        if violations:
            raise KernelError(f"search produced an invalid tree: {violations[0]}")
        return Proved(d)
    if cfg.enable_countermodel:
        m = find_countermodel(goal, cfg.countermodel_nodes)
        if m is not None:
            if check_sequent_validity(m, goal):
                raise KernelError("countermodel search returned a non-refuting model")
            return Refuted(m)
    return Unknown({"visited": steps["visited"],
                    "max_depth": cfg.max_depth,
                    "max_fresh_nominals": cfg.max_fresh_nominals})


# ---------------------------------------------------------------------------
# Rule inverses
# ---------------------------------------------------------------------------

WEAKENING_INVERTIBLE = {AT_T, AT_5, NOM, S1, S2, S3, EQ_T, EQ_5, DIA_R, CMP_R}


def invert(rule, d, inst):
    """Derivations of each premiss of `rule`, given one of its conclusion.

    Additive rules invert by weakening; the remaining decompositions use the
    cut constructions (one per premiss). Axioms invert vacuously.
    """
    concl = d.conclusion
    targets = premises(concl, rule, inst)
    if rule in (AX, BOT_RULE):
        return []
    if rule in WEAKENING_INVERTIBLE:
        return [weaken_to(d, t) for t in targets]

    i = inst.get("i")
    if rule == IMP_R:
        phi, psi = inst["phi"], inst["psi"]
        p = At(i, Implies(phi, psi))
        left = weaken_to(d, concl.add_ante(At(i, phi)).add_cons(At(i, psi)))
        right_goal = Sequent.make({p, At(i, phi)}, {At(i, psi)})
        right = step(IMP_L, right_goal, {"i": i, "phi": phi, "psi": psi},
                     [lambda s: axg(s, i, phi), lambda s: axg(s, i, psi)])
        return [exactly(cut(left, right, p), targets[0])]

    if rule == IMP_L:
        phi, psi = inst["phi"], inst["psi"]
        p = At(i, Implies(phi, psi))
        t1, t2 = targets
        e1 = step(IMP_R, t1.add_cons(p), {"i": i, "phi": phi, "psi": psi},
                  [lambda s: axg(s, i, phi)])
        first = exactly(cut(e1, d, p), t1)
        e2 = step(IMP_R, t2.add_cons(p), {"i": i, "phi": phi, "psi": psi},
                  [lambda s: axg(s, i, psi)])
        second = exactly(cut(e2, weaken(d, "left", At(i, psi)), p), t2)
        return [first, second]

    if rule == AT_L:
        j, phi = inst["j"], inst["phi"]
        p = At(j, At(i, phi))
        e = step(AT_R, targets[0].add_cons(p), {"j": j, "i": i, "phi": phi},
                 [lambda s: axg(s, i, phi)])
        return [exactly(cut(e, d, p), targets[0])]

    if rule == AT_R:
        j, phi = inst["j"], inst["phi"]
        p = At(j, At(i, phi))
        left = weaken_to(d, concl.add_cons(At(i, phi)))
        right_goal = Sequent.make({p}, {At(i, phi)})
        right = step(AT_L, right_goal, {"j": j, "i": i, "phi": phi},
                     [lambda s: axg(s, i, phi)])
        return [exactly(cut(left, right, p), targets[0])]

    if rule == DIA_L:
        a, phi, j = inst["a"], inst["phi"], inst["j"]
        p = At(i, Diamond(a, phi))
        e = step(DIA_R, targets[0].add_cons(p),
                 {"i": i, "a": a, "phi": phi, "j": j},
                 [lambda s: axg(s, j, phi)])
        return [exactly(cut(e, d, p), targets[0])]

    if rule == CMP_L:
        alpha, beta = inst["alpha"], inst["beta"]
        kind, c, j, k = inst["kind"], inst["c"], inst["j"], inst["k"]
        p = At(i, Compare(alpha, kind, c, beta))
        e = step(CMP_R, targets[0].add_cons(p),
                 {"i": i, "alpha": alpha, "beta": beta, "kind": kind,
                  "c": c, "j": j, "k": k},
                 [lambda s: cmp_tauto(s, j, kind, c, k)])
        return [exactly(cut(e, d, p), targets[0])]

    if rule == NEQ_L:
        j, c = inst["j"], inst["c"]
        p = Compare(Jump(i), CmpKind.NEQ, c, Jump(j))
        eq = Compare(Jump(i), CmpKind.EQ, c, Jump(j))
        e = step(NEQ_R, targets[0].add_cons(p), {"i": i, "j": j, "c": c},
                 [lambda s: axiom(AX, s, {"phi": eq})])
        return [exactly(cut(e, d, p), targets[0])]

    if rule == NEQ_R:
        j, c = inst["j"], inst["c"]
        p = Compare(Jump(i), CmpKind.NEQ, c, Jump(j))
        eq = Compare(Jump(i), CmpKind.EQ, c, Jump(j))
        left = weaken(d, "left", eq)
        right_goal = Sequent.make({p, eq}, set())
        right = step(NEQ_L, right_goal, {"i": i, "j": j, "c": c},
                     [lambda s: axiom(AX, s, {"phi": eq})])
        return [exactly(cut(left, right, p), targets[0])]

    raise KernelError(f"no inverse construction for rule {rule}")


def prove_axiom_suite():
    """The locked reference derivations; see hxproof.goldens."""
    from .goldens import prove_axiom_suite as _suite
    return _suite()
