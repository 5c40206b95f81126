#!/usr/bin/env python3
"""Regenerate the golden corpus under golden/.

Writes the five locked derivations plus the worked data-graph example and
its abstracted model. Run from the repository root.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from hxproof import jsonio                      # noqa: E402
from hxproof.derived import axg                 # noqa: E402
from hxproof.goldens import prove_axiom_suite   # noqa: E402
from hxproof.kernel import check_derivation, sequent  # noqa: E402
from hxproof.model import (DataGraph, ingest_datagraph,  # noqa: E402
                           model_to_json)
from hxproof.search import invert               # noqa: E402
from hxproof.syntax import At, Prop             # noqa: E402

EXAMPLE_GRAPH = {
    "nodes": [
        {"id": "n1", "labels": ["Person"], "attrs": {"name": "Alice"},
         "index": "i1"},
        {"id": "n2", "labels": ["Person"], "attrs": {"name": "Bob"}},
        {"id": "n3", "labels": ["Person"], "attrs": {"name": "Alice"},
         "index": "i2"},
        {"id": "n4", "labels": ["Date"], "attrs": {"val": "1977-07-07"}},
        {"id": "n5", "labels": ["Date"], "attrs": {"val": "1977-07-07"}},
        {"id": "n6", "labels": ["Date"], "attrs": {"val": "1975-05-05"}},
    ],
    "edges": [
        {"from": "n1", "label": "friends", "to": "n2"},
        {"from": "n2", "label": "friends", "to": "n1"},
        {"from": "n2", "label": "friends", "to": "n3"},
        {"from": "n3", "label": "friends", "to": "n2"},
        {"from": "n1", "label": "born", "to": "n4"},
        {"from": "n2", "label": "born", "to": "n5"},
        {"from": "n3", "label": "born", "to": "n6"},
    ],
}


def inv_atl_instance():
    """One cut-bearing inverse-of-@L construction, for the cutfree demo."""
    wrapped = At("j", At("i", Prop("p")))
    concl = sequent({wrapped}, {wrapped})
    d = axg(concl, "j", At("i", Prop("p")))
    [premiss] = invert("AtL", d, {"j": "j", "i": "i", "phi": Prop("p")})
    return premiss


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "golden"
    out.mkdir(exist_ok=True)
    suite = dict(prove_axiom_suite(), **{"inv-atL": inv_atl_instance()})
    for name, deriv in suite.items():
        violations = check_derivation(deriv)
        if violations:
            raise SystemExit(f"{name} does not check: {violations[0]}")
        (out / f"{name}.json").write_text(
            jsonio.dumps_canonical(jsonio.derivation_to_json(deriv)))
        print(f"wrote golden/{name}.json")
    (out / "example1-graph.json").write_text(
        jsonio.dumps_canonical(EXAMPLE_GRAPH))
    model = ingest_datagraph(DataGraph.from_json(EXAMPLE_GRAPH))
    (out / "example1-model.json").write_text(
        jsonio.dumps_canonical(model_to_json(model)))
    print("wrote golden/example1-graph.json, golden/example1-model.json")


if __name__ == "__main__":
    main()
