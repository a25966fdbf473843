"""Deterministic workflow execution.

Nodes are evaluated in topological order; executors are pure functions of
their params and input values, so any legal schedule (including the
thread-pool one) produces bit-identical artifacts.
"""

from __future__ import annotations

import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .catalog import ExecutionContext, NodeCatalog
from .errors import ExecutorFailure, GenFlowError, SchemaViolation
from .graph import NodeInstance, Workflow, topo_order, validate


@dataclass
class NodeRun:
    outputs: dict[str, Any]
    elapsed_ms: float
    written_files: list[str] = field(default_factory=list)


@dataclass
class ExecutionResult:
    runs: dict[str, NodeRun]
    order: list[str]

    def written_files(self) -> list[str]:
        files: list[str] = []
        for nid in self.order:
            files.extend(self.runs[nid].written_files)
        return files


def _gather_inputs(node: NodeInstance, catalog: NodeCatalog, runs: dict[str, NodeRun]) -> dict:
    spec = catalog.get(node.type_name)
    assert spec is not None
    values: dict[str, Any] = {}
    for port in spec.inputs:
        if port in node.inputs:
            src, src_port = node.inputs[port]
            values[port] = runs[src].outputs[src_port]
        elif port in node.params:
            values[port] = node.params[port]
        elif spec.params.get(port) is not None and spec.params[port].default is not None:
            values[port] = spec.params[port].default
    return values


def _effective_params(node: NodeInstance, catalog: NodeCatalog) -> dict:
    spec = catalog.get(node.type_name)
    assert spec is not None
    params = {
        name: p.default for name, p in spec.params.items() if p.default is not None
    }
    params.update(node.params)
    return params


def _run_node(
    node: NodeInstance,
    catalog: NodeCatalog,
    runs: dict[str, NodeRun],
    workspace: Path,
) -> NodeRun:
    spec = catalog.get(node.type_name)
    assert spec is not None
    ctx = ExecutionContext(workspace=workspace)
    inputs = _gather_inputs(node, catalog, runs)
    params = _effective_params(node, catalog)
    started = time.perf_counter()
    try:
        outputs = spec.executor(ctx, params, inputs)
    except GenFlowError:
        raise
    except Exception as exc:
        raise ExecutorFailure(node.id, exc) from exc
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return NodeRun(outputs=outputs, elapsed_ms=elapsed_ms, written_files=ctx.written_files)


def execute(
    workflow: Workflow,
    catalog: NodeCatalog,
    workspace: str | Path,
    max_workers: int = 1,
) -> ExecutionResult:
    """Run the workflow in ``workspace``; requires an executable report."""
    workspace = Path(workspace)
    report = validate(workflow, catalog)
    if report.findings:
        # UNKNOWN_TYPE is resolvable upstream, but execution itself needs
        # every type present.
        raise SchemaViolation(
            f"workflow not executable: {sorted(report.codes())}"
        )

    order = topo_order(workflow)
    node_map = workflow.node_map()
    runs: dict[str, NodeRun] = {}

    if max_workers <= 1:
        for nid in order:
            runs[nid] = _run_node(node_map[nid], catalog, runs, workspace)
        return ExecutionResult(runs=runs, order=order)

    dependents: dict[str, set[str]] = {nid: set() for nid in node_map}
    pending_deps: dict[str, set[str]] = {
        nid: {src for src, _ in node_map[nid].inputs.values()} for nid in node_map
    }
    for nid, deps in pending_deps.items():
        for dep in deps:
            dependents[dep].add(nid)

    submitted: set[str] = set()
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {}
        for nid in order:
            if not pending_deps[nid]:
                submitted.add(nid)
                futures[pool.submit(_run_node, node_map[nid], catalog, runs, workspace)] = nid
        while futures:
            done, _ = wait(futures, return_when=FIRST_COMPLETED)
            for fut in done:
                nid = futures.pop(fut)
                runs[nid] = fut.result()  # re-raises executor failures
                for child in sorted(dependents[nid]):
                    pending_deps[child].discard(nid)
                    if not pending_deps[child] and child not in submitted:
                        submitted.add(child)
                        futures[pool.submit(_run_node, node_map[child], catalog, runs, workspace)] = child

    return ExecutionResult(runs=runs, order=order)
