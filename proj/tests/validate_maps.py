#!/usr/bin/env python3
"""Independent checker for the shipped map documents."""
import json
import math
import pathlib
import sys

import jsonschema
import networkx as nx

POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["lanes", "signals"],
    "properties": {
        "lanes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "width", "centerline", "successors", "left", "right"],
                "properties": {
                    "id": {"type": "string"},
                    "width": {"type": "number", "exclusiveMinimum": 0},
                    "centerline": {"type": "array", "items": POINT, "minItems": 2},
                    "successors": {"type": "array", "items": {"type": "string"}},
                    "left": {"type": ["string", "null"]},
                    "right": {"type": ["string", "null"]},
                },
            },
        },
        "signals": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind", "lane", "s"],
                "properties": {
                    "id": {"type": "string"},
                    "kind": {"enum": ["traffic_light", "stop_sign"]},
                    "lane": {"type": "string"},
                    "s": {"type": "number", "minimum": 0},
                    "phase": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 3, "maxItems": 3},
                    "offset": {"type": "number"},
                },
            },
        },
    },
}


def check(path):
    doc = json.loads(path.read_text(encoding="utf-8"))
    jsonschema.validate(doc, SCHEMA)
    lanes = {lane["id"]: lane for lane in doc["lanes"]}
    assert len(lanes) == len(doc["lanes"]), "duplicate lane id"
    g = nx.Graph()
    g.add_nodes_from(lanes)
    for lid, lane in lanes.items():
        pts = lane["centerline"]
        for a, b in zip(pts, pts[1:]):
            assert math.dist(a, b) > 0, f"{lid}: zero-length segment"
        for ref in lane["successors"]:
            assert ref in lanes, f"{lid}: successor {ref} missing"
            g.add_edge(lid, ref)
        for side, other in (("left", "right"), ("right", "left")):
            ref = lane[side]
            if ref is None:
                continue
            assert ref in lanes, f"{lid}: {side} {ref} missing"
            assert lanes[ref][other] == lid, f"{lid}: {side} neighbour {ref} does not point back"
            g.add_edge(lid, ref)
    for sig in doc["signals"]:
        assert sig["lane"] in lanes, f"signal {sig['id']}: lane {sig['lane']} missing"
        length = sum(math.dist(a, b) for a, b in zip(lanes[sig["lane"]]["centerline"], lanes[sig["lane"]]["centerline"][1:]))
        assert sig["s"] <= length, f"signal {sig['id']}: s beyond lane end"
        assert ("phase" in sig) == (sig["kind"] == "traffic_light"), f"signal {sig['id']}: phase"
    assert nx.is_connected(g), "lane graph not connected"
    return doc


def main(argv):
    root = pathlib.Path(argv[1]) if len(argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "maps"
    paths = sorted(root.glob("*.map.json"))
    if not paths:
        print(f"no maps under {root}")
        return 1
    failed = 0
    for path in paths:
        try:
            doc = check(path)
            if path.name == "four_lane.map.json":
                lanes = doc["lanes"]
                assert len(lanes) == 4, "four_lane: expected 4 lanes"
                # outer lanes have one neighbour, inner lanes two
                sides = sorted(sum(l[s] is not None for s in ("left", "right")) for l in lanes)
                assert sides == [1, 1, 2, 2], f"four_lane: adjacency {sides}"
            print(f"ok   {path.name}")
        except (AssertionError, jsonschema.ValidationError) as e:
            failed += 1
            print(f"FAIL {path.name}: {getattr(e, 'message', e)}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
