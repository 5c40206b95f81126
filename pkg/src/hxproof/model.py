"""Hybrid data models and the executable satisfaction relation.

A model is a finite node set, one accessibility relation per modality symbol,
one comparison equivalence per comparison symbol (stored as a partition, so
reflexivity/symmetry/transitivity hold by construction), a total nominal
assignment, and a valuation. Includes data-graph ingestion (attribute values
abstracted into comparison classes) and bounded countermodel search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import syntax as sx
from .syntax import (
    At, Atom, Bottom, CmpKind, Compare, Concat, Diamond, Implies, Jump,
    Nominal, Prop, Test,
)


class ModelError(Exception):
    pass


class UnknownNode(ModelError):
    pass


class UnassignedNominal(ModelError):
    pass


def _partition_from_classes(nodes, classes):
    """Normalize a list of blocks into a node -> class-id map over `nodes`."""
    class_of = {}
    for cid, block in enumerate(classes):
        for n in block:
            if n not in nodes:
                raise UnknownNode(f"comparison class mentions unknown node {n!r}")
            if n in class_of:
                raise ModelError(f"node {n!r} appears in two comparison classes")
            class_of[n] = cid
    next_id = len(classes)
    for n in nodes:
        if n not in class_of:
            class_of[n] = next_id
            next_id += 1
    return class_of


@dataclass
class HybridDataModel:
    """M = (N, {R_a}, {~_c}, g, V); immutable after construction by convention."""

    nodes: frozenset
    rels: dict            # modality symbol -> frozenset of (n, m) pairs
    cmp_class: dict       # comparison symbol -> {node: class id}
    g: dict               # nominal -> node (partial; see default_node)
    val: dict             # prop symbol -> frozenset of nodes
    strict_nominals: bool = False
    default_node: str = field(default=None)
    defaulted_nominals: set = field(default_factory=set)

    def __post_init__(self):
        if not self.nodes:
            raise ModelError("node set must be non-empty")
        if self.default_node is None:
            self.default_node = min(self.nodes)
        for a, pairs in self.rels.items():
            for n, m in pairs:
                if n not in self.nodes or m not in self.nodes:
                    raise UnknownNode(f"relation {a} uses unknown node")
        for i, n in self.g.items():
            if n not in self.nodes:
                raise UnknownNode(f"nominal {i} assigned to unknown node {n!r}")
        for p, ns in self.val.items():
            for n in ns:
                if n not in self.nodes:
                    raise UnknownNode(f"valuation of {p} uses unknown node")

    @staticmethod
    def make(nodes, rels=None, cmps=None, g=None, val=None, strict_nominals=False):
        """Build from plain collections; `cmps` maps symbol -> list of blocks."""
        nodes = frozenset(nodes)
        cmp_class = {c: _partition_from_classes(nodes, blocks)
                     for c, blocks in (cmps or {}).items()}
        return HybridDataModel(
            nodes=nodes,
            rels={a: frozenset(tuple(p) for p in pairs)
                  for a, pairs in (rels or {}).items()},
            cmp_class=cmp_class,
            g=dict(g or {}),
            val={p: frozenset(ns) for p, ns in (val or {}).items()},
            strict_nominals=strict_nominals)

    # -- component access -------------------------------------------------

    def node_of(self, nominal):
        """Total nominal assignment; unplaced nominals go to the default node."""
        try:
            return self.g[nominal]
        except KeyError:
            if self.strict_nominals:
                raise UnassignedNominal(f"nominal {nominal!r} is unassigned") from None
            self.defaulted_nominals.add(nominal)
            return self.default_node

    def related(self, a, n, m):
        return (n, m) in self.rels.get(a, frozenset())

    def same_class(self, c, n, m):
        classes = self.cmp_class.get(c)
        if classes is None:
            # Unmentioned comparison symbols behave as the identity partition.
            return n == m
        return classes[n] == classes[m]

    def cmp_pairs(self, c):
        """The comparison as an explicit pair set (for invariant checks)."""
        return frozenset((n, m) for n in self.nodes for m in self.nodes
                         if self.same_class(c, n, m))

    def holds(self, p, n):
        return n in self.val.get(p, frozenset())


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------

def eval_path(model, n, n2, alpha):
    """M, n, n2 |= alpha for a path expression."""
    if n not in model.nodes or n2 not in model.nodes:
        raise UnknownNode(f"unknown node in ({n!r}, {n2!r})")
    match alpha:
        case Atom(a):
            return model.related(a, n, n2)
        case Jump(i):
            return model.node_of(i) == n2
        case Test(phi):
            return n == n2 and eval_node(model, n, phi)
        case Concat(left, right):
            return any(eval_path(model, n, mid, left)
                       and eval_path(model, mid, n2, right)
                       for mid in model.nodes)
    raise TypeError(f"not a path: {alpha!r}")


def _path_targets(model, n, alpha):
    return [m for m in model.nodes if eval_path(model, n, m, alpha)]


def eval_node(model, n, phi):
    """M, n |= phi for a node expression in primitive form."""
    if n not in model.nodes:
        raise UnknownNode(f"unknown node {n!r}")
    match phi:
        case Prop(p):
            return model.holds(p, n)
        case Nominal(i):
            return model.node_of(i) == n
        case Bottom():
            return False
        case Implies(lhs, rhs):
            return (not eval_node(model, n, lhs)) or eval_node(model, n, rhs)
        case At(i, body):
            return eval_node(model, model.node_of(i), body)
        case Diamond(a, body):
            return any(model.related(a, n, m) and eval_node(model, m, body)
                       for m in model.nodes)
        case Compare(alpha, kind, c, beta):
            # both comparison forms are existential; neq is NOT the negation of eq
            want = kind is CmpKind.EQ
            ends_a = _path_targets(model, n, alpha)
            if not ends_a:
                return False
            ends_b = _path_targets(model, n, beta)
            return any(model.same_class(c, x, y) == want
                       for x in ends_a for y in ends_b)
    raise TypeError(f"not a node expression: {phi!r}")


def eval_box_compare(model, n, alpha, beta, kind, c):
    """[alpha ^ beta] read directly as a universal over endpoint pairs."""
    want = kind is CmpKind.EQ
    ends_a = _path_targets(model, n, alpha)
    ends_b = _path_targets(model, n, beta)
    return all(model.same_class(c, x, y) == want
               for x in ends_a for y in ends_b)


def satisfies_set(model, n, exprs):
    return all(eval_node(model, n, phi) for phi in exprs)


def check_sequent_validity(model, seq):
    """True iff the model does not refute the sequent.

    Sequent members are node-independent (@-prefixed or atomic comparisons),
    so evaluation at an arbitrary fixed node suffices.
    """
    here = model.default_node
    if not satisfies_set(model, here, seq.ante):
        return True
    return any(eval_node(model, here, phi) for phi in seq.cons)


# ---------------------------------------------------------------------------
# Data graph ingestion
# ---------------------------------------------------------------------------

@dataclass
class DataGraph:
    """Pre-abstraction input: labeled nodes with attribute:value records."""

    nodes: list     # [{"id": str, "labels": [str], "attrs": {c: value}, "index": str?}]
    edges: list     # [{"from": str, "label": str, "to": str}]

    @staticmethod
    def from_json(d):
        return DataGraph(nodes=list(d["nodes"]), edges=list(d.get("edges", [])))

    def to_json(self):
        return {"nodes": self.nodes, "edges": self.edges}


def ingest_datagraph(dg):
    """Abstract a data graph into a hybrid data model.

    Propositions come from node labels, nominals from index labels, and each
    attribute c becomes the comparison relating nodes with equal c-values
    (closed under reflexivity; nodes lacking c sit in singleton classes).
    """
    ids = []
    seen = set()
    for nd in dg.nodes:
        nid = nd["id"]
        if nid in seen:
            raise ModelError(f"duplicate node id {nid!r}")
        seen.add(nid)
        ids.append(nid)

    g = {}
    val = {}
    by_attr_value = {}
    for nd in dg.nodes:
        nid = nd["id"]
        for label in nd.get("labels", []):
            val.setdefault(label, set()).add(nid)
        idx = nd.get("index")
        if idx is not None:
            if idx in g:
                raise ModelError(f"duplicate index label {idx!r}")
            g[idx] = nid
        for attr, value in nd.get("attrs", {}).items():
            by_attr_value.setdefault(attr, {}).setdefault(value, set()).add(nid)

    rels = {}
    for edge in dg.edges:
        rels.setdefault(edge["label"], set()).add((edge["from"], edge["to"]))

    cmps = {}
    for attr, groups in by_attr_value.items():
        cmps[attr] = [sorted(block) for block in groups.values() if len(block) > 1]

    return HybridDataModel.make(ids, rels=rels, cmps=cmps, g=g, val=val)


# ---------------------------------------------------------------------------
# JSON model format
# ---------------------------------------------------------------------------

def model_to_json(model):
    classes = {}
    for c, class_of in model.cmp_class.items():
        blocks = {}
        for n, cid in class_of.items():
            blocks.setdefault(cid, []).append(n)
        classes[c] = sorted(sorted(b) for b in blocks.values() if len(b) > 1)
    return {
        "nodes": sorted(model.nodes),
        "rels": {a: sorted(map(list, pairs)) for a, pairs in model.rels.items()},
        "cmp": classes,
        "g": dict(sorted(model.g.items())),
        "val": {p: sorted(ns) for p, ns in model.val.items()},
    }


def model_from_json(d, strict_nominals=False):
    return HybridDataModel.make(
        d["nodes"],
        rels={a: [tuple(p) for p in pairs] for a, pairs in d.get("rels", {}).items()},
        cmps=d.get("cmp", {}),
        g=d.get("g", {}),
        val=d.get("val", {}),
        strict_nominals=strict_nominals)


# ---------------------------------------------------------------------------
# Bounded countermodel search
# ---------------------------------------------------------------------------

def _signature(seq):
    props, noms, mods, cmps = set(), set(), set(), set()
    for e in seq.ante | seq.cons:
        props |= sx.prop_symbols_of(e)
        noms |= sx.nominals_of(e)
        mods |= sx.mod_symbols_of(e)
        cmps |= sx.cmp_symbols_of(e)
    return sorted(props), sorted(noms), sorted(mods), sorted(cmps)


def _partitions(items):
    """All set partitions of `items` (restricted growth enumeration)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for t in range(len(part)):
            yield part[:t] + [[first] + part[t]] + part[t + 1:]
        yield [[first]] + part


def _deps(expr):
    uses_v = bool(sx.prop_symbols_of(expr))
    uses_r = bool(sx.mod_symbols_of(expr))
    return uses_v, uses_r


def _g_assignments(noms, nodes):
    """Nominal assignments canonical up to node relabeling.

    Restricted-growth enumeration: each nominal lands on an already-used node
    or the next unused one. Sound because every other model component is
    enumerated over all nodes symmetrically and sequent members are
    node-independent, so refutability is isomorphism-invariant.
    """
    def rec(t, used):
        if t == len(noms):
            yield ()
            return
        for idx in range(min(used + 1, len(nodes))):
            for rest in rec(t + 1, max(used, idx + 1)):
                yield (nodes[idx],) + rest
    for assign in rec(0, 0):
        yield dict(zip(noms, assign))


def _scratch_model(nodes):
    """Unvalidated mutable model for the enumeration loops."""
    m = HybridDataModel.__new__(HybridDataModel)
    m.nodes = frozenset(nodes)
    m.rels = {}
    m.cmp_class = {}
    m.g = {}
    m.val = {}
    m.strict_nominals = False
    m.default_node = nodes[0]
    m.defaulted_nominals = set()
    return m


def find_countermodel(seq, max_nodes):
    """Search models of at most `max_nodes` nodes refuting the sequent.

    Returns a refuting model or None (inconclusive within the bound). The
    enumeration is exhaustive per size; members not depending on valuations
    or relations prune the corresponding inner loops early.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    props, noms, mods, cmps = _signature(seq)
    # refutation demands: all of ante true, all of cons false
    demands = [(phi, True) for phi in sorted(seq.ante, key=sx.print_node)] + \
              [(phi, False) for phi in sorted(seq.cons, key=sx.print_node)]
    base = [d for d in demands if _deps(d[0]) == (False, False)]
    with_v = [d for d in demands if _deps(d[0]) == (True, False)]
    with_r = [d for d in demands if _deps(d[0])[1]]

    for n_count in range(1, max_nodes + 1):
        nodes = [f"n{t}" for t in range(1, n_count + 1)]
        here = nodes[0]
        pair_list = [(x, y) for x in nodes for y in nodes]
        all_partitions = [
            {c: _partition_from_classes(frozenset(nodes), blocks)
             for c, blocks in zip(cmps, parts)}
            for parts in itertools.product(list(_partitions(nodes)),
                                           repeat=len(cmps))]
        v_choices = [
            {p: frozenset(ns) for p, ns in zip(props, choice)}
            for choice in itertools.product(
                *[list(itertools.chain.from_iterable(
                    itertools.combinations(nodes, r)
                    for r in range(n_count + 1)))
                  for _ in props])]
        r_subsets = [frozenset(s) for s in itertools.chain.from_iterable(
            itertools.combinations(pair_list, r)
            for r in range(len(pair_list) + 1))]
        r_choices = [dict(zip(mods, combo)) for combo in
                     itertools.product(r_subsets, repeat=len(mods))]

        m = _scratch_model(nodes)
        for g in _g_assignments(noms, nodes):
            m.g = g
            for cmp_map in all_partitions:
                m.cmp_class = cmp_map
                m.rels, m.val = {}, {}
                if not all(eval_node(m, here, phi) == want
                           for phi, want in base):
                    continue
                for val in v_choices:
                    m.val = val
                    m.rels = {}
                    if not all(eval_node(m, here, phi) == want
                               for phi, want in with_v):
                        continue
                    if not with_r:
                        return HybridDataModel.make(
                            nodes, rels={a: set() for a in mods},
                            cmps={c: _blocks_of(cmp_map[c]) for c in cmps},
                            g=m.g, val=val)
                    for rels in r_choices:
                        m.rels = rels
                        if all(eval_node(m, here, phi) == want
                               for phi, want in with_r):
                            return HybridDataModel.make(
                                nodes, rels=rels,
                                cmps={c: _blocks_of(cmp_map[c]) for c in cmps},
                                g=m.g, val=val)
    return None


def _blocks_of(class_of):
    blocks = {}
    for n, cid in class_of.items():
        blocks.setdefault(cid, []).append(n)
    return [sorted(b) for b in blocks.values()]
