"""Cut elimination: locate a topmost cut and push it away.

Each pass selects a (Cut) with no other cut above it, so both premiss
derivations are cut-free, and applies the matching transformation family:
axiom and weakening interactions discharge the cut outright, a non-principal
cut permutes upward, and principal pairs split into cuts of strictly smaller
complexity under the lexicographic (expression size, cut height) measure.
Eigen-nominals are renamed eagerly before any permutation can capture them.

Two right rules can meet across a cut (the witness of a right comparison or
substitution produced by a right diamond); those reduce through the
substitution rule for modal steps. A cut whose formula is a wrapped
satisfaction or implication required as path evidence on the right admits no
local cut-free replacement at all (the evidence shape is not derivable on
the left without cut); `eliminate_cuts` then falls back to re-deriving the
nearest enclosing conclusion with cut-free proof search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .derived import exactly
from .kernel import (
    AT_L, AT_R, AX, BOT_RULE, CMP_L, CMP_R, CUT, DIA_L, DIA_R, IMP_L, IMP_R,
    NEQ_L, NEQ_R, S2, WL, WR,
    CutComplexity, Derivation, KernelError, axiom,
    cut, cut_complexity, derivation_nominals, infer, premises,
    substitute_nominal_derivation, weaken_to,
)
from .syntax import (
    At, Bottom, CmpKind, Compare, Diamond, Implies, Jump, Nominal,
    fresh_nominals, print_node,
)


class CutEliminationError(KernelError):
    pass


class CutStuck(CutEliminationError):
    """The selected cut admits no local, measure-decreasing replacement."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(message)


@dataclass
class ReduceEvent:
    kind: str
    path: tuple
    selected: CutComplexity | None
    introduced: list = field(default_factory=list)

    def decreasing(self):
        return all(c < self.selected for c in self.introduced)

    def as_json(self):
        return {"kind": self.kind, "path": list(self.path),
                "selected": None if self.selected is None
                else self.selected.as_tuple(),
                "introduced": [c.as_tuple() for c in self.introduced]}


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

def cut_positions(d):
    return [(path, node) for path, node in d.walk() if node.rule == CUT]


def topmost_cuts(d):
    """Cuts with no other cut above them (their premisses are cut-free)."""
    out = []
    for path, node in cut_positions(d):
        if not any(n.rule == CUT for child in node.children
                   for _, n in child.walk()):
            out.append((path, node))
    return out


def select_cut(d):
    """Topmost cut of minimal cut height; ties broken leftmost (preorder)."""
    cands = topmost_cuts(d)
    if not cands:
        return None
    best = min(range(len(cands)),
               key=lambda t: (cut_complexity(cands[t][1]).h, t))
    return cands[best]


# ---------------------------------------------------------------------------
# Roles of the cut expression in a premiss derivation
# ---------------------------------------------------------------------------

def _left_principal(rule, inst):
    """The formula a left rule consumes from the antecedent."""
    i = inst.get("i")
    match rule:
        case "ImpL":
            return At(i, Implies(inst["phi"], inst["psi"]))
        case "AtL":
            return At(inst["j"], At(i, inst["phi"]))
        case "DiaL":
            return At(i, Diamond(inst["a"], inst["phi"]))
        case "CmpL":
            return At(i, Compare(inst["alpha"], inst["kind"], inst["c"],
                                 inst["beta"]))
        case "NEqL":
            return Compare(Jump(i), CmpKind.NEQ, inst["c"], Jump(inst["j"]))
    return None


def _right_principal(rule, inst):
    """The formula a right rule acts on in the consequent."""
    i = inst.get("i")
    match rule:
        case "ImpR":
            return At(i, Implies(inst["phi"], inst["psi"]))
        case "AtR":
            return At(inst["j"], At(i, inst["phi"]))
        case "DiaR":
            return At(i, Diamond(inst["a"], inst["phi"]))
        case "CmpR":
            return At(i, Compare(inst["alpha"], inst["kind"], inst["c"],
                                 inst["beta"]))
        case "NEqR":
            return Compare(Jump(i), CmpKind.NEQ, inst["c"], Jump(inst["j"]))
    return None


def _required_left(rule, inst):
    """Antecedent formulas a rule needs and keeps across its premisses."""
    i, j, k = inst.get("i"), inst.get("j"), inst.get("k")
    match rule:
        case "At5":
            return {At(i, Nominal(j)), At(i, Nominal(k))}
        case "S1":
            return {At(i, Nominal(j)), At(i, inst["phi"])}
        case "S2":
            return {At(j, Nominal(k)), At(i, Diamond(inst["a"], Nominal(j)))}
        case "S3":
            return {At(i, Nominal(j)),
                    Compare(Jump(i), CmpKind.EQ, inst["c"], Jump(k))}
        case "Eq5":
            c = inst["c"]
            return {Compare(Jump(i), CmpKind.EQ, c, Jump(j)),
                    Compare(Jump(i), CmpKind.EQ, c, Jump(k))}
        case "DiaR":
            return {At(i, Diamond(inst["a"], Nominal(j)))}
        case "CmpR":
            from .syntax import dia
            return {At(i, dia(inst["alpha"], Nominal(j))),
                    At(i, dia(inst["beta"], Nominal(k)))}
    return set()


def _role_in_right(node, phi):
    inst = node.inst_dict
    if _left_principal(node.rule, inst) == phi:
        return "principal"
    if phi in _required_left(node.rule, inst):
        return "required"
    return "context"


def _role_in_left(node, phi):
    if _right_principal(node.rule, node.inst_dict) == phi:
        return "principal"
    return "context"


# ---------------------------------------------------------------------------
# Eigen-nominal hygiene
# ---------------------------------------------------------------------------

def _eigens_of(node):
    match node.rule:
        case "Nom" | "DiaL":
            return [node.inst_dict["j"]]
        case "CmpL":
            return [node.inst_dict["j"], node.inst_dict["k"]]
    return []


def eigen_refresh(d, forbidden):
    """Rename every eigen-nominal in the tree to a globally fresh one."""
    forbidden = set(forbidden) | derivation_nominals(d)

    def go(node):
        for old in _eigens_of(node):
            (new,) = fresh_nominals(1, forbidden)
            forbidden.add(new)
            node = substitute_nominal_derivation(node, old, new)
        return Derivation(node.conclusion, node.rule, node.inst,
                          tuple(go(c) for c in node.children))

    return go(d)


# ---------------------------------------------------------------------------
# Transformation families
# ---------------------------------------------------------------------------

def _axiom_formula(node):
    return node.inst_dict["phi"] if node.rule == AX else None


def _transform(node, scope_noms):
    """Replace one topmost cut; returns (replacement, introduced, kind)."""
    left, right = node.children
    phi = node.inst_dict["phi"]
    concl = node.conclusion

    # axiom premisses
    if left.rule == AX:
        chi = _axiom_formula(left)
        if chi != phi:
            return axiom(AX, concl, {"phi": chi}), [], "axiom-left"
        return weaken_to(right, concl), [], "axiom-left-cutformula"
    if left.rule == BOT_RULE:
        return axiom(BOT_RULE, concl, {"i": left.inst_dict["i"]}), [], "bot-left"
    if right.rule == AX:
        chi = _axiom_formula(right)
        if chi != phi:
            return axiom(AX, concl, {"phi": chi}), [], "axiom-right"
        return weaken_to(left, concl), [], "axiom-right-cutformula"
    bot_right_on_phi = False
    if right.rule == BOT_RULE:
        bot = At(right.inst_dict["i"], Bottom())
        if bot != phi:
            return axiom(BOT_RULE, concl, {"i": right.inst_dict["i"]}), [], "bot-right"
        # falsum as the cut formula is never right-principal: permute left
        bot_right_on_phi = True

    # a cut formula already present on the other side makes the cut redundant
    if phi in left.conclusion.ante:
        return weaken_to(right, concl), [], "redundant-left"
    if phi in right.conclusion.cons:
        return weaken_to(left, concl), [], "redundant-right"

    # the cut formula arrived by weakening
    if left.rule == WR and left.inst_dict["phi"] == phi \
            and phi not in left.children[0].conclusion.cons:
        return weaken_to(left.children[0], concl), [], "weakened-left"
    if right.rule == WL and right.inst_dict["phi"] == phi \
            and phi not in right.children[0].conclusion.ante:
        return weaken_to(right.children[0], concl), [], "weakened-right"

    if right.rule in (WL, WR):
        role_r = "context"  # a weakening of something else, or a duplicate
    elif bot_right_on_phi:
        role_r = "principal"
    else:
        role_r = _role_in_right(right, phi)
    if role_r == "context":
        return _permute(node, into="right", scope_noms=scope_noms)

    role_l = _role_in_left(left, phi) if left.rule not in (WL, WR) else "context"
    if role_l == "context":
        return _permute(node, into="left", scope_noms=scope_noms)

    # principal on both sides
    sel = cut_complexity(node)
    fam = (left.rule, right.rule)
    try:
        if fam == (IMP_R, IMP_L):
            return _family_imp(node, sel)
        if fam == (AT_R, AT_L):
            return _family_at(node, sel)
        if fam == (NEQ_R, NEQ_L):
            return _family_neq(node, sel)
        if fam == (DIA_R, DIA_L):
            return _family_dia(node, sel, scope_noms)
        if fam == (CMP_R, CMP_L):
            return _family_cmp(node, sel, scope_noms)
        if left.rule == DIA_R and role_r == "required":
            return _family_dia_required(node, sel)
    except CutStuck:
        raise
    except KernelError as e:
        raise CutStuck((), f"family construction failed: {e}") from None
    raise CutStuck((), f"no local reduction: {left.rule} against {right.rule} "
                       f"over {print_node(phi)}")


def _permute(node, into, scope_noms):
    """Push the cut above a rule for which the cut formula is context."""
    left, right = node.children
    phi = node.inst_dict["phi"]
    concl = node.conclusion
    target = right if into == "right" else left
    other = left if into == "right" else right

    if _eigens_of(target):
        target = eigen_refresh(
            target, scope_noms | derivation_nominals(other) | concl.nominals())

    if target.rule in (WL, WR):
        child = target.children[0]
        if into == "right":
            if phi not in child.conclusion.ante:
                raise CutStuck((), "cut formula lost under weakening")
            newcut = cut(other, child, phi)
        else:
            if phi not in child.conclusion.cons:
                raise CutStuck((), "cut formula lost under weakening")
            newcut = cut(child, other, phi)
        inner = weaken_to(newcut, concl)
        return inner, [cut_complexity(newcut)], f"permute-{into}-weakening"

    expected = premises(concl, target.rule, target.inst_dict)
    kids = []
    introduced = []
    for q, want in zip(target.children, expected):
        if into == "right":
            if phi not in q.conclusion.ante:
                raise CutStuck((), "cut formula not in premiss context")
            newcut = cut(other, q, phi)
        else:
            if phi not in q.conclusion.cons:
                raise CutStuck((), "cut formula not in premiss context")
            newcut = cut(q, other, phi)
        introduced.append(cut_complexity(newcut))
        if newcut.conclusion == want:
            kids.append(newcut)
        elif newcut.conclusion.issubset(want):
            kids.append(weaken_to(newcut, want))
        else:
            raise CutStuck((), f"permuted premiss does not fit {target.rule}")
    return (infer(target.rule, concl, target.inst_dict, kids),
            introduced, f"permute-{into}-{target.rule}")


def _family_imp(node, sel):
    left, right = node.children
    inst = left.inst_dict
    i, phi1, phi2 = inst["i"], inst["phi"], inst["psi"]
    d_l = left.children[0]
    q1, q2 = right.children
    e1 = cut(q1, d_l, At(i, phi1))
    e2 = cut(e1, q2, At(i, phi2))
    out = exactly(e2, node.conclusion)
    return out, [cut_complexity(e1), cut_complexity(e2)], "principal-imp"


def _family_at(node, sel):
    left, right = node.children
    inst = left.inst_dict
    inner = At(inst["i"], inst["phi"])
    newcut = cut(left.children[0], right.children[0], inner)
    out = exactly(newcut, node.conclusion)
    return out, [cut_complexity(newcut)], "principal-at"


def _family_neq(node, sel):
    left, right = node.children
    inst = left.inst_dict
    eq = Compare(Jump(inst["i"]), CmpKind.EQ, inst["c"], Jump(inst["j"]))
    newcut = cut(right.children[0], left.children[0], eq)
    out = exactly(newcut, node.conclusion)
    return out, [cut_complexity(newcut)], "principal-neq"


def _family_dia(node, sel, scope_noms):
    left, right = node.children
    phi = node.inst_dict["phi"]
    w = left.inst_dict["j"]
    body = left.inst_dict["phi"]
    cut1 = cut(left.children[0], right, phi)
    fresh_right = eigen_refresh(
        right, scope_noms | derivation_nominals(left) | {w})
    u = fresh_right.inst_dict["j"]
    q = substitute_nominal_derivation(fresh_right.children[0], u, w)
    step_formula = At(w, body)
    cut2 = cut(cut1, q, step_formula)
    out = exactly(cut2, node.conclusion)
    return out, [cut_complexity(cut1), cut_complexity(cut2)], "principal-dia"


def _family_cmp(node, sel, scope_noms):
    left, right = node.children
    phi = node.inst_dict["phi"]
    kind, c = left.inst_dict["kind"], left.inst_dict["c"]
    x, y = left.inst_dict["j"], left.inst_dict["k"]
    cut1 = cut(left.children[0], right, phi)
    fresh_right = eigen_refresh(
        right, scope_noms | derivation_nominals(left) | {x, y})
    u, v = fresh_right.inst_dict["j"], fresh_right.inst_dict["k"]
    q = substitute_nominal_derivation(fresh_right.children[0], u, x)
    q = substitute_nominal_derivation(q, v, y)
    atom = Compare(Jump(x), kind, c, Jump(y))
    cut2 = cut(cut1, q, atom)
    out = exactly(cut2, node.conclusion)
    return out, [cut_complexity(cut1), cut_complexity(cut2)], "principal-cmp"


def _family_dia_required(node, sel):
    """Right rules on both sides: route the modal step through substitution."""
    left, right = node.children
    phi = node.inst_dict["phi"]
    body = left.inst_dict["phi"]
    if not isinstance(body, Nominal):
        raise CutStuck((), "required modal evidence with a non-nominal body")
    i, a, w = left.inst_dict["i"], left.inst_dict["a"], left.inst_dict["j"]
    x = body.name
    cut1 = cut(left.children[0], right, phi)
    step_formula = At(w, Nominal(x))
    bridged = weaken_to(right, right.conclusion.add_ante(
        step_formula, At(i, Diamond(a, Nominal(w)))))
    s2_concl = bridged.conclusion.drop_ante(phi)
    s2_node = infer(S2, s2_concl, {"i": i, "j": w, "k": x, "a": a}, [bridged])
    cut2 = cut(cut1, s2_node, step_formula)
    out = exactly(cut2, node.conclusion)
    return out, [cut_complexity(cut1), cut_complexity(cut2)], "right-right-s2"


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def reduce_once(d):
    """Apply one transformation to the selected topmost cut.

    Returns (derivation, event); raises CutStuck when only the non-local
    fallback applies and ValueError when the tree is already cut-free.
    """
    sel = select_cut(d)
    if sel is None:
        raise ValueError("derivation is cut-free")
    path, node = sel
    scope = derivation_nominals(d)
    try:
        replacement, introduced, kind = _transform(node, scope)
    except CutStuck as e:
        raise CutStuck(path, str(e)) from None
    event = ReduceEvent(kind, path, cut_complexity(node), introduced)
    if not event.decreasing():
        raise CutEliminationError(
            f"non-decreasing reduction {kind}: {event.selected} -> {introduced}")
    return d.replace(path, replacement), event


def _fallback_reprove(d, path, fallback_cfg):
    """Re-derive the nearest enclosing conclusion with cut-free search."""
    from .search import Proved, SearchConfig, prove
    cfg = fallback_cfg or SearchConfig(
        max_depth=24, max_fresh_nominals=6, enable_countermodel=False,
        allow_evidence_cuts=False)
    for cut_len in range(len(path), -1, -1):
        prefix = path[:cut_len]
        target = d.at(prefix).conclusion
        result = prove(target, cfg)
        if isinstance(result, Proved):
            sub = result.derivation
            if any(n.rule == CUT for _, n in sub.walk()):
                continue
            return d.replace(prefix, sub), prefix, target
    raise CutEliminationError(
        "stuck cut and no enclosing conclusion re-derivable cut-free")


def eliminate_cuts(d, trace=None, fallback_cfg=None, max_steps=200000):
    """Iterate reduce_once to a cut-free derivation of the same end-sequent.

    Where no local transformation family applies (wrapped path
    evidence on the right), the smallest enclosing subderivation whose
    conclusion has a cut-free proof is re-derived by bounded search.
    """
    end = d.conclusion
    for _ in range(max_steps):
        if not cut_positions(d):
            if d.conclusion != end:
                raise CutEliminationError("end-sequent changed")
            return d
        try:
            d, event = reduce_once(d)
        except CutStuck as e:
            d, prefix, _ = _fallback_reprove(d, e.path, fallback_cfg)
            event = ReduceEvent("fallback-reprove", prefix, None, [])
        if trace is not None:
            trace.append(event)
    raise CutEliminationError("step limit exceeded")
