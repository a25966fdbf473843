from __future__ import annotations

import itertools
import json
import random

import pytest

from genflow.errors import CycleDetected, MalformedDocument, SchemaViolation
from genflow.graph import (
    NodeInstance,
    Workflow,
    parse_workflow,
    serialize_workflow,
    topo_order,
    validate,
)

from conftest import FIXTURES


def make_workflow(nodes, wid="wf"):
    return Workflow(id=wid, name=wid, description="", tags=[], likes=0, nodes=nodes)


def image_node(nid, type_name="invert", src=None):
    inputs = {"image": (src, "image")} if src else {}
    return NodeInstance(nid, type_name, {}, inputs)


def test_parse_minimal_zero_nodes():
    doc = {"version": 1, "id": "empty", "name": "Empty", "nodes": []}
    wf = parse_workflow(json.dumps(doc).encode())
    assert wf.nodes == []
    assert wf.id == "empty"


def test_parse_duplicate_node_id_rejected():
    doc = {
        "version": 1,
        "id": "dup",
        "name": "Dup",
        "nodes": [
            {"id": "n1", "type": "invert"},
            {"id": "n1", "type": "invert"},
        ],
    }
    with pytest.raises(SchemaViolation, match="duplicate"):
        parse_workflow(json.dumps(doc).encode())


def test_parse_bad_syntax():
    with pytest.raises(MalformedDocument):
        parse_workflow(b"{not json")
    with pytest.raises(MalformedDocument):
        parse_workflow(b"\xff\xfe")


def test_parse_img2img_fixture_counts():
    data = (FIXTURES / "workflows" / "img2img_basic.flow.json").read_bytes()
    wf = parse_workflow(data)

    # Independent count: walk the raw document, not the parsed model.
    raw = json.loads(data)
    raw_nodes = len(raw["nodes"])
    raw_connections = sum(len(n.get("inputs", {})) for n in raw["nodes"])
    assert raw_nodes == 5 and raw_connections == 4

    assert len(wf.nodes) == 5
    assert len(wf.connections()) == 4


def test_parse_unknown_top_level_fields_preserved():
    doc = {"version": 1, "id": "x", "name": "x", "nodes": [], "custom_meta": {"a": 1}}
    wf = parse_workflow(json.dumps(doc).encode())
    assert wf.extra == {"custom_meta": {"a": 1}}
    assert json.loads(serialize_workflow(wf))["custom_meta"] == {"a": 1}


def test_round_trip_isomorphic():
    data = (FIXTURES / "workflows" / "img2img_basic.flow.json").read_bytes()
    wf1 = parse_workflow(data)
    wf2 = parse_workflow(serialize_workflow(wf1))
    assert [(n.id, n.type_name, n.params, n.inputs) for n in wf1.nodes] == [
        (n.id, n.type_name, n.params, n.inputs) for n in wf2.nodes
    ]
    assert (wf1.id, wf1.name, wf1.tags, wf1.likes) == (wf2.id, wf2.name, wf2.tags, wf2.likes)


def test_validate_clean_chain(catalog):
    wf = make_workflow([image_node("a", "mock_generate"), image_node("b", src="a")])
    assert validate(wf, catalog).findings == []


def test_validate_two_cycle(catalog):
    wf = make_workflow([image_node("a", src="b"), image_node("b", src="a")])
    assert "CYCLE" in validate(wf, catalog).codes()


def test_validate_unknown_type_names_node(catalog):
    wf = make_workflow([NodeInstance("n1", "IPAdapterApply", {}, {})])
    report = validate(wf, catalog)
    assert report.codes() == {"UNKNOWN_TYPE"}
    assert report.executable  # routes to the resolver, not a hard failure
    assert "IPAdapterApply" in report.unknown_types()


def test_validate_bad_port_and_kind_mismatch(catalog):
    wf = make_workflow(
        [
            NodeInstance("a", "text_prompt", {"text": "hi"}, {}),
            NodeInstance("b", "invert", {}, {"image": ("a", "text")}),
            NodeInstance("c", "invert", {}, {"nope": ("a", "text")}),
        ]
    )
    codes = validate(wf, catalog).codes()
    assert "KIND_MISMATCH" in codes and "BAD_PORT" in codes


def test_validate_unbound_input(catalog):
    wf = make_workflow([NodeInstance("a", "invert", {}, {})])
    assert "UNBOUND_INPUT" in validate(wf, catalog).codes()


def test_topo_single_node():
    wf = make_workflow([image_node("only", "mock_generate")])
    assert topo_order(wf) == ["only"]


def test_topo_diamond_lexicographically_smallest():
    wf = make_workflow(
        [
            NodeInstance("a", "mock_generate", {}, {}),
            NodeInstance("b", "invert", {}, {"image": ("a", "image")}),
            NodeInstance("c", "invert", {}, {"image": ("a", "image")}),
            NodeInstance(
                "d", "concat_text", {},
                {"text_a": ("b", "image"), "text_b": ("c", "image")},
            ),
        ]
    )
    order = topo_order(wf)

    # Oracle: enumerate every permutation, keep the valid topological
    # orders, take the lexicographically smallest.
    edges = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    valid = [
        p
        for p in itertools.permutations("abcd")
        if all(p.index(u) < p.index(v) for u, v in edges)
    ]
    assert order == list(min(valid))
    assert order == ["a", "b", "c", "d"]


def test_topo_cycle_raises():
    wf = make_workflow([image_node("a", src="b"), image_node("b", src="a")])
    with pytest.raises(CycleDetected):
        topo_order(wf)


def _brute_force_has_cycle(n: int, edges: set[tuple[int, int]]) -> bool:
    def dfs(node, stack, seen):
        seen.add(node)
        stack.add(node)
        for u, v in edges:
            if u == node:
                if v in stack:
                    return True
                if v not in seen and dfs(v, stack, seen):
                    return True
        stack.discard(node)
        return False

    seen: set[int] = set()
    return any(dfs(i, set(), seen) for i in range(n) if i not in seen)


@pytest.mark.parametrize("seed", range(100))
def test_cycle_detection_matches_dfs_oracle(catalog, seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    edges = set()
    for _ in range(rng.randint(0, 2 * n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            edges.add((u, v))
    nodes = [
        NodeInstance(
            f"n{i}",
            "invert",
            {},
            {
                f"image{j}": (f"n{u}", "image")
                for j, (u, v) in enumerate(sorted(edges))
                if v == i
            },
        )
        for i in range(n)
    ]
    wf = make_workflow(nodes)
    expected = _brute_force_has_cycle(n, edges)
    assert ("CYCLE" in validate(wf, catalog).codes()) == expected
