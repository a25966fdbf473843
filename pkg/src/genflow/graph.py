"""Canonical workflow data model: parsing, validation, topological order.

The canonical document is JSON (UTF-8) with top-level keys ``version``
(=1), ``id``, ``name``, ``description``, ``tags``, ``likes``, ``nodes``.
Unknown top-level fields are preserved verbatim so documents round-trip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .catalog import NodeCatalog, ParamSpec
from .errors import CycleDetected, MalformedDocument, SchemaViolation

FORMAT_VERSION = 1

_KNOWN_TOP_LEVEL = {"version", "id", "name", "description", "tags", "likes", "nodes"}

_PARAM_KIND_TYPES: dict[str, tuple[type, ...]] = {
    "string": (str,),
    "integer": (int,),
    "real": (int, float),
    "boolean": (bool,),
}


@dataclass(frozen=True)
class NodeInstance:
    id: str
    type_name: str
    params: dict[str, Any] = field(default_factory=dict)
    # input port -> (source node id, source output port)
    inputs: dict[str, tuple[str, str]] = field(default_factory=dict)


@dataclass
class Workflow:
    id: str
    name: str
    description: str
    tags: list[str]
    likes: int
    nodes: list[NodeInstance]
    version: int = FORMAT_VERSION
    extra: dict[str, Any] = field(default_factory=dict)

    def node_map(self) -> dict[str, NodeInstance]:
        return {n.id: n for n in self.nodes}

    def connections(self) -> list[tuple[str, str, str, str]]:
        """All edges as (src node, src port, dst node, dst port)."""
        edges = []
        for node in self.nodes:
            for port, (src, src_port) in node.inputs.items():
                edges.append((src, src_port, node.id, port))
        return edges


@dataclass(frozen=True)
class Finding:
    code: str  # CYCLE | UNKNOWN_TYPE | BAD_PORT | KIND_MISMATCH | UNBOUND_INPUT
    node_id: str | None
    detail: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}

    @property
    def executable(self) -> bool:
        return self.codes() <= {"UNKNOWN_TYPE"}

    def unknown_types(self) -> set[str]:
        return {
            f.detail.split(":", 1)[0]
            for f in self.findings
            if f.code == "UNKNOWN_TYPE"
        }


def parse_workflow(data: bytes | str) -> Workflow:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"bad JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("top level must be an object")

    for key in ("version", "id", "name", "nodes"):
        if key not in doc:
            raise SchemaViolation(f"missing required field {key!r}")
    if doc["version"] != FORMAT_VERSION:
        raise SchemaViolation(f"unsupported version {doc['version']!r}")
    if not isinstance(doc["nodes"], list):
        raise SchemaViolation("'nodes' must be an array")
    likes = doc.get("likes", 0)
    if not isinstance(likes, int) or likes < 0:
        raise SchemaViolation("'likes' must be a non-negative integer")
    tags = doc.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise SchemaViolation("'tags' must be an array of strings")

    nodes: list[NodeInstance] = []
    seen: set[str] = set()
    for raw in doc["nodes"]:
        if not isinstance(raw, dict):
            raise SchemaViolation("each node must be an object")
        for key in ("id", "type"):
            if key not in raw or not isinstance(raw[key], str) or not raw[key]:
                raise SchemaViolation(f"node missing string field {key!r}")
        node_id = raw["id"]
        if node_id in seen:
            raise SchemaViolation(f"duplicate node id {node_id!r}")
        seen.add(node_id)
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise SchemaViolation(f"node {node_id!r}: 'params' must be an object")
        raw_inputs = raw.get("inputs", {})
        if not isinstance(raw_inputs, dict):
            raise SchemaViolation(f"node {node_id!r}: 'inputs' must be an object")
        inputs: dict[str, tuple[str, str]] = {}
        for port, ref in raw_inputs.items():
            if (
                not isinstance(ref, dict)
                or not isinstance(ref.get("node"), str)
                or not isinstance(ref.get("port"), str)
            ):
                raise SchemaViolation(
                    f"node {node_id!r}: input {port!r} must be "
                    '{"node": id, "port": name}'
                )
            inputs[port] = (ref["node"], ref["port"])
        nodes.append(NodeInstance(node_id, raw["type"], dict(params), inputs))

    # Connection targets must exist; this is structural, not catalog-dependent.
    for node in nodes:
        for port, (src, _src_port) in node.inputs.items():
            if src not in seen:
                raise SchemaViolation(
                    f"node {node.id!r}: input {port!r} references unknown node {src!r}"
                )

    extra = {k: v for k, v in doc.items() if k not in _KNOWN_TOP_LEVEL}
    return Workflow(
        id=doc["id"],
        name=doc["name"],
        description=doc.get("description", ""),
        tags=list(tags),
        likes=likes,
        nodes=nodes,
        version=doc["version"],
        extra=extra,
    )


def serialize_workflow(workflow: Workflow) -> bytes:
    doc: dict[str, Any] = {
        "version": workflow.version,
        "id": workflow.id,
        "name": workflow.name,
        "description": workflow.description,
        "tags": workflow.tags,
        "likes": workflow.likes,
        "nodes": [
            {
                "id": n.id,
                "type": n.type_name,
                "params": n.params,
                "inputs": {
                    port: {"node": src, "port": src_port}
                    for port, (src, src_port) in n.inputs.items()
                },
            }
            for n in workflow.nodes
        ],
    }
    doc.update(workflow.extra)
    return json.dumps(doc, indent=2).encode("utf-8")


def _detect_cycle(workflow: Workflow) -> list[str] | None:
    """Iterative DFS; returns one cycle's node ids, or None."""
    adjacency: dict[str, set[str]] = {n.id: set() for n in workflow.nodes}
    for src, _sp, dst, _dp in workflow.connections():
        adjacency[src].add(dst)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in adjacency}
    for start in adjacency:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, list[str]]] = [(start, sorted(adjacency[start]))]
        color[start] = GRAY
        path = [start]
        while stack:
            nid, pending = stack[-1]
            if pending:
                nxt = pending.pop(0)
                if color[nxt] == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, sorted(adjacency[nxt])))
            else:
                color[nid] = BLACK
                path.pop()
                stack.pop()
    return None


def validate(workflow: Workflow, catalog: NodeCatalog) -> ValidationReport:
    report = ValidationReport()
    node_map = workflow.node_map()

    cycle = _detect_cycle(workflow)
    if cycle is not None:
        report.findings.append(
            Finding("CYCLE", None, " -> ".join(cycle))
        )

    for node in workflow.nodes:
        spec = catalog.get(node.type_name)
        if spec is None:
            report.findings.append(
                Finding("UNKNOWN_TYPE", node.id, f"{node.type_name}: not in catalog")
            )
            continue

        for port, (src, src_port) in node.inputs.items():
            if port not in spec.inputs:
                report.findings.append(
                    Finding("BAD_PORT", node.id, f"undeclared input port {port!r}")
                )
                continue
            src_spec = catalog.get(node_map[src].type_name)
            if src_spec is None:
                continue  # reported as UNKNOWN_TYPE on the source node
            if src_port not in src_spec.outputs:
                report.findings.append(
                    Finding(
                        "BAD_PORT",
                        node.id,
                        f"source {src!r} has no output port {src_port!r}",
                    )
                )
            elif src_spec.outputs[src_port] != spec.inputs[port]:
                report.findings.append(
                    Finding(
                        "KIND_MISMATCH",
                        node.id,
                        f"input {port!r} expects {spec.inputs[port].value}, "
                        f"got {src_spec.outputs[src_port].value} from {src!r}",
                    )
                )

        for port in spec.inputs:
            if port in node.inputs:
                continue
            fallback: ParamSpec | None = spec.params.get(port)
            if port in node.params or (fallback is not None and fallback.default is not None):
                continue
            report.findings.append(
                Finding("UNBOUND_INPUT", node.id, f"input {port!r} is unbound")
            )

        for name, value in node.params.items():
            pspec = spec.params.get(name)
            if pspec is None:
                continue  # extra params tolerated; executors ignore them
            allowed = _PARAM_KIND_TYPES[pspec.kind]
            if isinstance(value, bool) and pspec.kind != "boolean":
                report.findings.append(
                    Finding("KIND_MISMATCH", node.id, f"param {name!r} kind")
                )
            elif not isinstance(value, allowed):
                report.findings.append(
                    Finding("KIND_MISMATCH", node.id, f"param {name!r} kind")
                )

    return report


def topo_order(workflow: Workflow) -> list[str]:
    """Kahn's algorithm; ties broken by ascending node id."""
    import heapq

    indegree = {n.id: 0 for n in workflow.nodes}
    outgoing: dict[str, set[str]] = {n.id: set() for n in workflow.nodes}
    for src, _sp, dst, _dp in workflow.connections():
        if dst not in outgoing[src]:
            outgoing[src].add(dst)
            indegree[dst] += 1

    ready = [nid for nid, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for child in sorted(outgoing[nid]):
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, child)

    if len(order) != len(workflow.nodes):
        raise CycleDetected("workflow connection graph contains a cycle")
    return order
