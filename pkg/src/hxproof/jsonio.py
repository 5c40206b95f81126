"""Stable JSON encodings for ASTs, sequents, derivations, and models.

The AST schema is tag + children; canonical dumps sort keys and sequent
members so identical inputs always produce byte-identical output.
"""

from __future__ import annotations

import json

from . import syntax as sx
from .kernel import Derivation, Sequent, freeze_inst


def node_to_json(e):
    match e:
        case sx.Prop(name):
            return {"tag": "prop", "name": name}
        case sx.Nominal(name):
            return {"tag": "nom", "name": name}
        case sx.Bottom():
            return {"tag": "bot"}
        case sx.Implies(lhs, rhs):
            return {"tag": "imp", "lhs": node_to_json(lhs), "rhs": node_to_json(rhs)}
        case sx.At(nom, body):
            return {"tag": "at", "nom": nom, "body": node_to_json(body)}
        case sx.Diamond(mod, body):
            return {"tag": "dia", "mod": mod, "body": node_to_json(body)}
        case sx.Compare(left, kind, cmp_sym, right):
            return {"tag": "cmp", "left": path_to_json(left), "kind": kind.value,
                    "cmp": cmp_sym, "right": path_to_json(right)}
    raise TypeError(f"not a node expression: {e!r}")


def node_from_json(d):
    match d["tag"]:
        case "prop":
            return sx.Prop(d["name"])
        case "nom":
            return sx.Nominal(d["name"])
        case "bot":
            return sx.BOT
        case "imp":
            return sx.Implies(node_from_json(d["lhs"]), node_from_json(d["rhs"]))
        case "at":
            return sx.At(d["nom"], node_from_json(d["body"]))
        case "dia":
            return sx.Diamond(d["mod"], node_from_json(d["body"]))
        case "cmp":
            return sx.Compare(path_from_json(d["left"]), sx.CmpKind(d["kind"]),
                              d["cmp"], path_from_json(d["right"]))
    raise ValueError(f"unknown node tag: {d['tag']!r}")


def path_to_json(p):
    match p:
        case sx.Atom(mod):
            return {"tag": "mod", "name": mod}
        case sx.Jump(nom):
            return {"tag": "jump", "nom": nom}
        case sx.Test(body):
            return {"tag": "test", "body": node_to_json(body)}
        case sx.Concat(left, right):
            return {"tag": "concat", "left": path_to_json(left),
                    "right": path_to_json(right)}
    raise TypeError(f"not a path: {p!r}")


def path_from_json(d):
    match d["tag"]:
        case "mod":
            return sx.Atom(d["name"])
        case "jump":
            return sx.Jump(d["nom"])
        case "test":
            return sx.Test(node_from_json(d["body"]))
        case "concat":
            return sx.Concat(path_from_json(d["left"]), path_from_json(d["right"]))
    raise ValueError(f"unknown path tag: {d['tag']!r}")


def sequent_to_json(s):
    return {"ante": [node_to_json(e) for e in s.sorted_ante()],
            "cons": [node_to_json(e) for e in s.sorted_cons()]}


def sequent_from_json(d):
    return Sequent.make((node_from_json(e) for e in d["ante"]),
                        (node_from_json(e) for e in d["cons"]))


def _inst_value_to_json(key, v):
    if key in ("i", "j", "k"):
        return {"kind": "nominal", "name": v}
    if key == "a":
        return {"kind": "modality", "name": v}
    if key == "c":
        return {"kind": "comparison", "name": v}
    if key == "kind":
        return {"kind": "cmpkind", "value": v.value}
    if key in ("alpha", "beta"):
        return {"kind": "path", "expr": path_to_json(v)}
    return {"kind": "node", "expr": node_to_json(v)}


def _inst_value_from_json(d):
    match d["kind"]:
        case "nominal" | "modality" | "comparison":
            return d["name"]
        case "cmpkind":
            return sx.CmpKind(d["value"])
        case "path":
            return path_from_json(d["expr"])
        case "node":
            return node_from_json(d["expr"])
    raise ValueError(f"unknown instantiation value kind: {d['kind']!r}")


def derivation_to_json(d):
    from .kernel import OPEN, principal_exprs
    try:
        principal = sorted(
            (node_to_json(e)
             for e in principal_exprs(d.conclusion, d.rule, d.inst_dict)),
            key=str) if d.rule != OPEN else []
    except Exception:
        principal = []
    return {
        "rule": d.rule,
        "principal": principal,
        "inst": {key: _inst_value_to_json(key, v) for key, v in d.inst},
        "conclusion": sequent_to_json(d.conclusion),
        "children": [derivation_to_json(c) for c in d.children],
    }


def derivation_from_json(d):
    inst = freeze_inst({key: _inst_value_from_json(v) for key, v in d["inst"].items()})
    return Derivation(
        sequent_from_json(d["conclusion"]), d["rule"], inst,
        tuple(derivation_from_json(c) for c in d["children"]))


def dumps_canonical(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
