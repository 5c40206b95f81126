"""Trusted proof kernel: sequents, inference rules, derivation checking.

Sequents are pairs of finite sets of restricted node expressions (everything
is @-prefixed or an atomic comparison between two jumps). Each rule is a
schema applied backward: `premises(goal, rule, inst)` returns the premiss
sequents for a fully explicit instantiation, enforcing shape and freshness
side conditions. `check_derivation` re-verifies every node of a tree against
the schemas, so trees built through the forward helpers (`infer`, `cut`,
`weaken`) can never be unsound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import total_ordering

from .syntax import (
    At, Bottom, BOT, CmpKind, Compare, Diamond, Implies, Jump,
    Nominal, Prop, dia, nominals_of, print_node, rename_nominal, size,
)


class KernelError(Exception):
    pass


class ShapeViolation(KernelError):
    """A sequent member or instantiation breaks the restricted form."""


class PrincipalMissing(KernelError):
    """The instantiated principal expression is absent from the goal."""


class SideConditionViolated(KernelError):
    """A freshness or form side condition fails."""


# ---------------------------------------------------------------------------
# Sequents
# ---------------------------------------------------------------------------

def is_restricted(e):
    """Members must look like @_i phi or <i: ^c j:>."""
    match e:
        case At(_, _):
            return True
        case Compare(Jump(_), _, _, Jump(_)):
            return True
        case _:
            return False


def expr_key(e):
    """Stable total order on expressions, used for canonical display."""
    return print_node(e)


@dataclass(frozen=True)
class Sequent:
    ante: frozenset
    cons: frozenset

    def __post_init__(self):
        for e in list(self.ante) + list(self.cons):
            if not is_restricted(e):
                raise ShapeViolation(
                    f"not a restricted sequent member: {print_node(e)}")

    @staticmethod
    def make(ante=(), cons=()):
        return Sequent(frozenset(ante), frozenset(cons))

    def sorted_ante(self):
        return sorted(self.ante, key=expr_key)

    def sorted_cons(self):
        return sorted(self.cons, key=expr_key)

    def add_ante(self, *es):
        return Sequent(self.ante | set(es), self.cons)

    def add_cons(self, *es):
        return Sequent(self.ante, self.cons | set(es))

    def drop_ante(self, *es):
        return Sequent(self.ante - set(es), self.cons)

    def drop_cons(self, *es):
        return Sequent(self.ante, self.cons - set(es))

    def union(self, other):
        return Sequent(self.ante | other.ante, self.cons | other.cons)

    def issubset(self, other):
        return self.ante <= other.ante and self.cons <= other.cons

    def nominals(self):
        out = set()
        for e in self.ante | self.cons:
            out |= nominals_of(e)
        return out

    def __str__(self):
        lhs = ", ".join(print_node(e) for e in self.sorted_ante())
        rhs = ", ".join(print_node(e) for e in self.sorted_cons())
        return f"{lhs} |- {rhs}".strip()


def sequent(ante=(), cons=()):
    return Sequent.make(ante, cons)


# ---------------------------------------------------------------------------
# Rule identifiers
# ---------------------------------------------------------------------------

AX, BOT_RULE = "Ax", "Bot"
IMP_L, IMP_R = "ImpL", "ImpR"
AT_T, AT_5, NOM, S1, S2, S3 = "AtT", "At5", "Nom", "S1", "S2", "S3"
AT_L, AT_R, DIA_L, DIA_R, CMP_L, CMP_R = "AtL", "AtR", "DiaL", "DiaR", "CmpL", "CmpR"
EQ_T, EQ_5, NEQ_L, NEQ_R = "EqT", "Eq5", "NEqL", "NEqR"
CUT, WL, WR = "Cut", "WL", "WR"
OPEN = "Open"  # open fragment leaf, never accepted by a closed check

LOGICAL_RULES = (
    AX, BOT_RULE, IMP_L, IMP_R, AT_T, AT_5, NOM, S1, S2, S3,
    AT_L, AT_R, DIA_L, DIA_R, CMP_L, CMP_R, EQ_T, EQ_5, NEQ_L, NEQ_R,
)
STRUCTURAL_RULES = (CUT, WL, WR)
ALL_RULES = LOGICAL_RULES + STRUCTURAL_RULES

COMPARISON_RULES = frozenset({CMP_L, CMP_R, EQ_T, EQ_5, NEQ_L, NEQ_R, S3})


def ax_shape(e):
    """(Ax) closes only on @_i p, @_i j, or <i: =c j:>."""
    match e:
        case At(_, Prop(_)) | At(_, Nominal(_)):
            return True
        case Compare(Jump(_), CmpKind.EQ, _, Jump(_)):
            return True
        case _:
            return False


def s1_shape(phi):
    """(S1) substitutes only atoms: p, bottom, or <a>k."""
    match phi:
        case Prop(_) | Bottom() | Diamond(_, Nominal(_)):
            return True
        case _:
            return False


def _need(cond, exc, msg):
    if not cond:
        raise exc(msg)


def _in_ante(goal, e, what):
    _need(e in goal.ante, PrincipalMissing,
          f"{what} not in antecedent: {print_node(e)}")


def _in_cons(goal, e, what):
    _need(e in goal.cons, PrincipalMissing,
          f"{what} not in consequent: {print_node(e)}")


def premises(goal, rule, inst):
    """Backward reading of a rule: the premiss sequents of `goal`.

    `inst` maps the schema metavariables to concrete symbols/expressions.
    Structural rules are forward-only; ask `cut`/`weaken` instead.
    """
    i = inst.get("i")
    j = inst.get("j")
    k = inst.get("k")
    match rule:
        case "Ax":
            phi = inst["phi"]
            _need(ax_shape(phi), SideConditionViolated,
                  f"axiom expression has the wrong form: {print_node(phi)}")
            _in_ante(goal, phi, "axiom expression")
            _in_cons(goal, phi, "axiom expression")
            return []
        case "Bot":
            _in_ante(goal, At(i, BOT), "falsum")
            return []
        case "ImpL":
            p = At(i, Implies(inst["phi"], inst["psi"]))
            _in_ante(goal, p, "principal")
            rest = goal.drop_ante(p)
            return [rest.add_cons(At(i, inst["phi"])),
                    rest.add_ante(At(i, inst["psi"]))]
        case "ImpR":
            p = At(i, Implies(inst["phi"], inst["psi"]))
            _in_cons(goal, p, "principal")
            return [goal.drop_cons(p).add_ante(At(i, inst["phi"]))
                        .add_cons(At(i, inst["psi"]))]
        case "AtT":
            return [goal.add_ante(At(i, Nominal(i)))]
        case "At5":
            _in_ante(goal, At(i, Nominal(j)), "alias @_i j")
            _in_ante(goal, At(i, Nominal(k)), "alias @_i k")
            return [goal.add_ante(At(j, Nominal(k)))]
        case "Nom":
            _need(j not in goal.nominals(), SideConditionViolated,
                  f"nominal {j} occurs in the conclusion")
            return [goal.add_ante(At(i, Nominal(j)))]
        case "S1":
            phi = inst["phi"]
            _need(s1_shape(phi), SideConditionViolated,
                  f"S1 body must be p, false, or <a>k: {print_node(phi)}")
            _in_ante(goal, At(i, Nominal(j)), "alias @_i j")
            _in_ante(goal, At(i, phi), "carrier @_i phi")
            return [goal.add_ante(At(j, phi))]
        case "S2":
            a = inst["a"]
            _in_ante(goal, At(j, Nominal(k)), "alias @_j k")
            _in_ante(goal, At(i, Diamond(a, Nominal(j))), "step @_i<a>j")
            return [goal.add_ante(At(i, Diamond(a, Nominal(k))))]
        case "S3":
            c = inst["c"]
            _in_ante(goal, At(i, Nominal(j)), "alias @_i j")
            _in_ante(goal, Compare(Jump(i), CmpKind.EQ, c, Jump(k)), "comparison")
            return [goal.add_ante(Compare(Jump(j), CmpKind.EQ, c, Jump(k)))]
        case "AtL":
            p = At(j, At(i, inst["phi"]))
            _in_ante(goal, p, "principal")
            return [goal.drop_ante(p).add_ante(At(i, inst["phi"]))]
        case "AtR":
            p = At(j, At(i, inst["phi"]))
            _in_cons(goal, p, "principal")
            return [goal.drop_cons(p).add_cons(At(i, inst["phi"]))]
        case "DiaL":
            a, phi = inst["a"], inst["phi"]
            p = At(i, Diamond(a, phi))
            _in_ante(goal, p, "principal")
            _need(j not in goal.nominals(), SideConditionViolated,
                  f"nominal {j} occurs in the conclusion")
            return [goal.drop_ante(p)
                        .add_ante(At(i, Diamond(a, Nominal(j))), At(j, phi))]
        case "DiaR":
            a, phi = inst["a"], inst["phi"]
            p = At(i, Diamond(a, phi))
            _in_cons(goal, p, "principal")
            _in_ante(goal, At(i, Diamond(a, Nominal(j))), "witness step")
            return [goal.add_cons(At(j, phi))]
        case "CmpL":
            alpha, beta = inst["alpha"], inst["beta"]
            kind, c = inst["kind"], inst["c"]
            p = At(i, Compare(alpha, kind, c, beta))
            _in_ante(goal, p, "principal")
            _need(j != k, SideConditionViolated, "witness nominals must differ")
            fresh_clash = {j, k} & goal.nominals()
            _need(not fresh_clash, SideConditionViolated,
                  f"nominal(s) {sorted(fresh_clash)} occur in the conclusion")
            return [goal.drop_ante(p).add_ante(
                At(i, dia(alpha, Nominal(j))),
                At(i, dia(beta, Nominal(k))),
                Compare(Jump(j), kind, c, Jump(k)))]
        case "CmpR":
            alpha, beta = inst["alpha"], inst["beta"]
            kind, c = inst["kind"], inst["c"]
            p = At(i, Compare(alpha, kind, c, beta))
            _in_cons(goal, p, "principal")
            _in_ante(goal, At(i, dia(alpha, Nominal(j))), "path evidence (left)")
            _in_ante(goal, At(i, dia(beta, Nominal(k))), "path evidence (right)")
            return [goal.add_cons(Compare(Jump(j), kind, c, Jump(k)))]
        case "EqT":
            c = inst["c"]
            return [goal.add_ante(Compare(Jump(i), CmpKind.EQ, c, Jump(i)))]
        case "Eq5":
            c = inst["c"]
            _in_ante(goal, Compare(Jump(i), CmpKind.EQ, c, Jump(j)), "comparison")
            _in_ante(goal, Compare(Jump(i), CmpKind.EQ, c, Jump(k)), "comparison")
            return [goal.add_ante(Compare(Jump(j), CmpKind.EQ, c, Jump(k)))]
        case "NEqL":
            c = inst["c"]
            p = Compare(Jump(i), CmpKind.NEQ, c, Jump(j))
            _in_ante(goal, p, "principal")
            return [goal.drop_ante(p)
                        .add_cons(Compare(Jump(i), CmpKind.EQ, c, Jump(j)))]
        case "NEqR":
            c = inst["c"]
            p = Compare(Jump(i), CmpKind.NEQ, c, Jump(j))
            _in_cons(goal, p, "principal")
            return [goal.drop_cons(p)
                        .add_ante(Compare(Jump(i), CmpKind.EQ, c, Jump(j)))]
        case "Cut" | "WL" | "WR":
            raise KernelError(f"{rule} is applied forward; use cut()/weaken()")
    raise KernelError(f"unknown rule: {rule}")


def apply_rule(goal, rule, inst):
    """Public name for the backward reading; see `premises`."""
    return premises(goal, rule, inst)


def principal_exprs(goal, rule, inst):
    """The expressions a rule instance acts on inside its conclusion."""
    i, j, k = inst.get("i"), inst.get("j"), inst.get("k")
    match rule:
        case "Ax":
            return {inst["phi"]}
        case "Bot":
            return {At(i, BOT)}
        case "ImpL" | "ImpR":
            return {At(i, Implies(inst["phi"], inst["psi"]))}
        case "AtT" | "Nom" | "EqT":
            return set()
        case "At5":
            return {At(i, Nominal(j)), At(i, Nominal(k))}
        case "S1":
            return {At(i, Nominal(j)), At(i, inst["phi"])}
        case "S2":
            return {At(j, Nominal(k)), At(i, Diamond(inst["a"], Nominal(j)))}
        case "S3":
            return {At(i, Nominal(j)),
                    Compare(Jump(i), CmpKind.EQ, inst["c"], Jump(k))}
        case "AtL" | "AtR":
            return {At(j, At(i, inst["phi"]))}
        case "DiaL":
            return {At(i, Diamond(inst["a"], inst["phi"]))}
        case "DiaR":
            return {At(i, Diamond(inst["a"], inst["phi"])),
                    At(i, Diamond(inst["a"], Nominal(j)))}
        case "CmpL":
            return {At(i, Compare(inst["alpha"], inst["kind"], inst["c"], inst["beta"]))}
        case "CmpR":
            return {At(i, Compare(inst["alpha"], inst["kind"], inst["c"], inst["beta"])),
                    At(i, dia(inst["alpha"], Nominal(j))),
                    At(i, dia(inst["beta"], Nominal(k)))}
        case "Eq5":
            c = inst["c"]
            return {Compare(Jump(i), CmpKind.EQ, c, Jump(j)),
                    Compare(Jump(i), CmpKind.EQ, c, Jump(k))}
        case "NEqL" | "NEqR":
            return {Compare(Jump(i), CmpKind.NEQ, inst["c"], Jump(j))}
        case "Cut":
            return set()
        case "WL" | "WR":
            return {inst["phi"]}
    raise KernelError(f"unknown rule: {rule}")


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

def freeze_inst(inst):
    return tuple(sorted(inst.items()))


@dataclass(frozen=True)
class Derivation:
    """A sequent-labeled tree; every node records its full rule instance."""

    conclusion: Sequent
    rule: str
    inst: tuple
    children: tuple = ()
    height: int = field(init=False, compare=False, default=0)

    def __post_init__(self):
        h = 1 + max((c.height for c in self.children), default=0)
        object.__setattr__(self, "height", h)

    @property
    def inst_dict(self):
        return dict(self.inst)

    def walk(self, path=()):
        yield path, self
        for t, c in enumerate(self.children):
            yield from c.walk(path + (t,))

    def at(self, path):
        d = self
        for t in path:
            d = d.children[t]
        return d

    def replace(self, path, new):
        if not path:
            return new
        t, rest = path[0], path[1:]
        kids = list(self.children)
        kids[t] = kids[t].replace(rest, new)
        return Derivation(self.conclusion, self.rule, self.inst, tuple(kids))

    def rules_used(self):
        return {node.rule for _, node in self.walk()}


def open_leaf(seq):
    """A fragment premiss: a leaf justified by assumption, not by a rule."""
    return Derivation(seq, OPEN, ())


def axiom(rule, conclusion, inst):
    """A closed leaf; raises unless the axiom schema applies."""
    got = premises(conclusion, rule, inst)
    if got:
        raise KernelError(f"{rule} is not an axiom")
    return Derivation(conclusion, rule, freeze_inst(inst))


def infer(rule, conclusion, inst, children):
    """One backward rule application, verified against the schema."""
    want = premises(conclusion, rule, inst)
    got = [c.conclusion for c in children]
    if want != got:
        raise KernelError(
            f"{rule} premiss mismatch:\n  want {[str(s) for s in want]}\n"
            f"  got  {[str(s) for s in got]}")
    return Derivation(conclusion, rule, freeze_inst(inst), tuple(children))


def cut(left, right, phi):
    """(Cut): from Γ ⊢ Δ, φ and φ, Γ' ⊢ Δ' conclude Γ, Γ' ⊢ Δ, Δ'."""
    if not is_restricted(phi):
        raise ShapeViolation(f"cut expression not restricted: {print_node(phi)}")
    if phi not in left.conclusion.cons:
        raise KernelError(f"cut expression missing on the left: {print_node(phi)}")
    if phi not in right.conclusion.ante:
        raise KernelError(f"cut expression missing on the right: {print_node(phi)}")
    concl = Sequent(
        left.conclusion.ante | (right.conclusion.ante - {phi}),
        (left.conclusion.cons - {phi}) | right.conclusion.cons)
    return Derivation(concl, CUT, freeze_inst({"phi": phi}), (left, right))


def cut_conclusion_ok(node):
    left, right = node.children
    phi = node.inst_dict["phi"]
    if not is_restricted(phi):
        return False
    if phi not in left.conclusion.cons or phi not in right.conclusion.ante:
        return False
    want = Sequent(
        left.conclusion.ante | (right.conclusion.ante - {phi}),
        (left.conclusion.cons - {phi}) | right.conclusion.cons)
    return want == node.conclusion


def weaken(d, side, phi):
    """(WL)/(WR): add φ on one side; a duplicate still records the step."""
    if not is_restricted(phi):
        raise ShapeViolation(f"weakened expression not restricted: {print_node(phi)}")
    if side == "left":
        return Derivation(d.conclusion.add_ante(phi), WL,
                          freeze_inst({"phi": phi}), (d,))
    if side == "right":
        return Derivation(d.conclusion.add_cons(phi), WR,
                          freeze_inst({"phi": phi}), (d,))
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def weaken_to(d, target):
    """Chain of weakenings from d's end-sequent up to `target` (a superset)."""
    if not d.conclusion.issubset(target):
        raise KernelError(
            f"cannot weaken {d.conclusion} to non-superset {target}")
    for e in sorted(target.ante - d.conclusion.ante, key=expr_key):
        d = weaken(d, "left", e)
    for e in sorted(target.cons - d.conclusion.cons, key=expr_key):
        d = weaken(d, "right", e)
    return d


def weakening_ok(node):
    child = node.children[0]
    phi = node.inst_dict["phi"]
    if node.rule == WL:
        return (node.conclusion.ante == child.conclusion.ante | {phi}
                and node.conclusion.cons == child.conclusion.cons)
    return (node.conclusion.cons == child.conclusion.cons | {phi}
            and node.conclusion.ante == child.conclusion.ante)


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: tuple
    message: str

    def __str__(self):
        where = "/".join(map(str, self.path)) or "root"
        return f"[{where}] {self.message}"


def check_derivation(d, allow_open=False):
    """Re-verify every node; returns a list of violations (empty = ok)."""
    out = []
    for path, node in d.walk():
        try:
            _check_node(node, allow_open)
        except KernelError as e:
            out.append(Violation(path, str(e)))
    return out


def _check_node(node, allow_open):
    if node.rule == OPEN:
        if not allow_open:
            raise KernelError("open leaf in a closed derivation")
        if node.children:
            raise KernelError("open leaf with children")
        return
    if node.rule == CUT:
        if len(node.children) != 2:
            raise KernelError("Cut needs exactly two premisses")
        if not cut_conclusion_ok(node):
            raise KernelError("Cut conclusion does not match its premisses")
        return
    if node.rule in (WL, WR):
        if len(node.children) != 1:
            raise KernelError("weakening needs exactly one premiss")
        if not weakening_ok(node):
            raise KernelError("weakening conclusion does not match its premiss")
        return
    if node.rule not in LOGICAL_RULES:
        raise KernelError(f"unknown rule: {node.rule}")
    want = premises(node.conclusion, node.rule, node.inst_dict)
    got = [c.conclusion for c in node.children]
    if want != got:
        raise KernelError(
            f"{node.rule} premisses do not match: want "
            f"{[str(s) for s in want]}, got {[str(s) for s in got]}")


def is_provable_tree(d):
    return not check_derivation(d, allow_open=False)


def open_leaves(d):
    return [(path, node.conclusion) for path, node in d.walk() if node.rule == OPEN]


def graft(fragment, fillers):
    """Replace each open leaf with a derivation of the same sequent.

    `fillers` maps sequents to derivations (or is a callable sequent->tree).
    """
    if fragment.rule == OPEN:
        filler = fillers(fragment.conclusion) if callable(fillers) \
            else fillers[fragment.conclusion]
        if filler.conclusion != fragment.conclusion:
            raise KernelError("graft filler proves the wrong sequent")
        return filler
    if not fragment.children:
        return fragment
    kids = tuple(graft(c, fillers) for c in fragment.children)
    return Derivation(fragment.conclusion, fragment.rule, fragment.inst, kids)


# ---------------------------------------------------------------------------
# Cut bookkeeping and renaming
# ---------------------------------------------------------------------------

@total_ordering
@dataclass(frozen=True)
class CutComplexity:
    """Lexicographic (size of active cut expression, cut height)."""

    k: int
    h: int

    def __lt__(self, other):
        return (self.k, self.h) < (other.k, other.h)

    def as_tuple(self):
        return (self.k, self.h)


def cut_height(node):
    if node.rule != CUT:
        raise KernelError("cut_height on a non-Cut node")
    return node.children[0].height + node.children[1].height


def cut_complexity(node):
    if node.rule != CUT:
        raise KernelError("cut_complexity on a non-Cut node")
    return CutComplexity(size(node.inst_dict["phi"]), cut_height(node))


def _rename_inst_value(v, old, new):
    if isinstance(v, str):
        return new if v == old else v
    if isinstance(v, (CmpKind,)):
        return v
    return rename_nominal(v, old, new)


def _rename_nominal_inst(inst, rule, old, new):
    out = {}
    for key, v in inst:
        if key in ("a", "c"):  # modality / comparison symbols, not nominals
            out[key] = v
        else:
            out[key] = _rename_inst_value(v, old, new)
    return freeze_inst(out)


def rename_nominal_derivation(d, old, new):
    """Rewrite a derivation under a nominal renaming (capture-avoiding).

    `new` must not occur anywhere in the tree; the result re-checks.
    """
    if old == new:
        return d
    if any(new in node.conclusion.nominals() for _, node in d.walk()):
        raise SideConditionViolated(
            f"nominal {new} already occurs in the derivation")
    return substitute_nominal_derivation(d, old, new)


def substitute_nominal_derivation(d, old, new):
    """Unchecked nominal substitution throughout a derivation.

    Callers must ensure no eigen-nominal capture (the eliminator refreshes
    eigen-nominals first); use rename_nominal_derivation for the safe form.
    """
    if old == new:
        return d
    seq = Sequent(
        frozenset(rename_nominal(e, old, new) for e in d.conclusion.ante),
        frozenset(rename_nominal(e, old, new) for e in d.conclusion.cons))
    kids = tuple(substitute_nominal_derivation(c, old, new)
                 for c in d.children)
    return Derivation(seq, d.rule, _rename_nominal_inst(d.inst, d.rule, old, new), kids)


def derivation_nominals(d):
    out = set()
    for _, node in d.walk():
        out |= node.conclusion.nominals()
        for key, v in node.inst:
            if key in ("a", "c"):
                continue
            if isinstance(v, str):
                out.add(v)
            elif not isinstance(v, CmpKind):
                out |= nominals_of(v)
    return out
