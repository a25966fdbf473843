"""Dependency extraction and resolve/install with a timing harness.

The harness times three operations (workflow search, node-pack install,
model install) in two modes: ``local`` consults only the registry and its
blob cache; ``remote`` routes every lookup and fetch through a simulated
web path with injected latency. This reproduces the ordering of the
local-vs-web comparison, not any absolute figures.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import NodeCatalog
from .errors import FetchFailure
from .graph import Workflow
from .registry import (
    KIND_MODEL,
    KIND_NODE_PACK,
    MODEL_EXTENSIONS,
    AssetDescriptor,
    AssetRegistry,
    CacheFetcher,
    install,
)

OP_SEARCH = "search_workflow"
OP_INSTALL_NODES = "install_missing_nodes"
OP_INSTALL_MODELS = "install_missing_models"


@dataclass(frozen=True)
class TimingSample:
    operation: str  # search_workflow | install_missing_nodes | install_missing_models
    mode: str  # local | remote
    elapsed_ms: float

    def __post_init__(self):
        if self.elapsed_ms < 0:
            raise ValueError("elapsed must be >= 0")


@dataclass
class DependencyReport:
    workflow_id: str
    required_node_types: set[str] = field(default_factory=set)
    required_models: set[str] = field(default_factory=set)
    missing_node_types: set[str] = field(default_factory=set)
    missing_models: set[str] = field(default_factory=set)

    @property
    def satisfied(self) -> bool:
        return not self.missing_node_types and not self.missing_models

    def to_json(self) -> dict:
        return {
            "workflow_id": self.workflow_id,
            "required_node_types": sorted(self.required_node_types),
            "required_models": sorted(self.required_models),
            "missing_node_types": sorted(self.missing_node_types),
            "missing_models": sorted(self.missing_models),
        }


def _model_installed(root: Path, model_name: str) -> bool:
    models_dir = root / "models"
    if not models_dir.is_dir():
        return False
    return any(p.name == model_name for p in models_dir.rglob("*") if p.is_file())


def _node_pack_installed(root: Path, type_name: str) -> bool:
    return (root / "custom_nodes" / type_name).exists()


def extract_dependencies(
    workflow: Workflow,
    catalog: NodeCatalog,
    root: str | Path | None = None,
) -> DependencyReport:
    """Required node types are the workflow's type names; required models
    are string params with a recognized checkpoint extension. Missing is
    required minus catalog and minus what's already on disk."""
    root = Path(root) if root else None
    report = DependencyReport(workflow_id=workflow.id)
    for node in workflow.nodes:
        report.required_node_types.add(node.type_name)
        for value in node.params.values():
            if isinstance(value, str) and value.lower().endswith(MODEL_EXTENSIONS):
                report.required_models.add(value)

    for type_name in report.required_node_types:
        if type_name in catalog:
            continue
        if root is not None and _node_pack_installed(root, type_name):
            continue
        report.missing_node_types.add(type_name)

    for model in report.required_models:
        if root is not None and _model_installed(root, model):
            continue
        report.missing_models.add(model)
    return report


class SimulatedRemote:
    """Stand-in for web exploration: lookups and fetches sleep a
    configured latency and bump a shared call counter."""

    def __init__(
        self,
        assets: dict[tuple[str, str], tuple[AssetDescriptor, bytes]] | None = None,
        latency_ms: float = 0.0,
    ):
        self.assets = dict(assets or {})
        self.latency_ms = latency_ms
        self.calls = 0

    def _wait(self) -> None:
        self.calls += 1
        if self.latency_ms > 0:
            time.sleep(self.latency_ms / 1000.0)

    def search_workflow(self, query: str) -> None:
        self._wait()

    def lookup(self, name: str, kind: str) -> AssetDescriptor | None:
        self._wait()
        entry = self.assets.get((name, kind))
        return entry[0] if entry else None

    def fetch(self, descriptor: AssetDescriptor) -> bytes:
        self._wait()
        entry = self.assets.get((descriptor.name, descriptor.kind))
        if entry is None:
            raise FetchFailure(f"remote has no asset {descriptor.name}")
        return entry[1]


def _plan(
    names: set[str],
    kind: str,
    mode: str,
    registry: AssetRegistry,
    remote: SimulatedRemote | None,
) -> list[AssetDescriptor]:
    plan = []
    for name in sorted(names):
        if mode == "local":
            descriptor = registry.lookup(name, kind)
        else:
            descriptor = remote.lookup(name, kind) if remote else None
        if descriptor is not None:
            plan.append(descriptor)
    return plan


def timed_resolve_and_install(
    workflow: Workflow,
    mode: str,
    *,
    catalog: NodeCatalog,
    registry: AssetRegistry,
    root: str | Path,
    cache: CacheFetcher,
    remote: SimulatedRemote | None = None,
    do_install: bool = True,
) -> tuple[DependencyReport, list[TimingSample], "list"]:
    """Full pipeline with one TimingSample per table row.

    Returns (final dependency report, samples, install statuses).
    """
    if mode not in ("local", "remote"):
        raise ValueError("mode must be 'local' or 'remote'")
    if mode == "remote" and remote is None:
        raise ValueError("remote mode requires a SimulatedRemote")
    root = Path(root)
    samples: list[TimingSample] = []
    statuses = []

    started = time.perf_counter()
    if mode == "local":
        # The local database answers the search: registry + disk scan.
        report = extract_dependencies(workflow, catalog, root)
        for name in sorted(report.missing_node_types):
            registry.lookup(name, KIND_NODE_PACK)
    else:
        remote.search_workflow(workflow.description or workflow.name)
        report = extract_dependencies(workflow, catalog, root)
    samples.append(
        TimingSample(OP_SEARCH, mode, (time.perf_counter() - started) * 1000.0)
    )

    fetcher = cache if mode == "local" else remote

    started = time.perf_counter()
    if do_install:
        plan = _plan(report.missing_node_types, KIND_NODE_PACK, mode, registry, remote)
        statuses.extend(install(plan, fetcher, root, registry).statuses)
    samples.append(
        TimingSample(OP_INSTALL_NODES, mode, (time.perf_counter() - started) * 1000.0)
    )

    started = time.perf_counter()
    if do_install:
        plan = _plan(report.missing_models, KIND_MODEL, mode, registry, remote)
        statuses.extend(install(plan, fetcher, root, registry).statuses)
    samples.append(
        TimingSample(OP_INSTALL_MODELS, mode, (time.perf_counter() - started) * 1000.0)
    )

    final_report = extract_dependencies(workflow, catalog, root)
    return final_report, samples, statuses


_ROW_TITLES = {
    OP_SEARCH: "Search Workflow",
    OP_INSTALL_NODES: "Install Missing Nodes",
    OP_INSTALL_MODELS: "Install Missing Models",
}


def format_timing_table(
    local_samples: list[TimingSample], remote_samples: list[TimingSample]
) -> str:
    """Three operation rows plus a total, local and remote columns."""
    local_by_op = {s.operation: s.elapsed_ms for s in local_samples}
    remote_by_op = {s.operation: s.elapsed_ms for s in remote_samples}
    lines = [f"{'Operation':<24}{'Local (ms)':>14}{'Remote (ms)':>14}"]
    for op in (OP_SEARCH, OP_INSTALL_NODES, OP_INSTALL_MODELS):
        lines.append(
            f"{_ROW_TITLES[op]:<24}{local_by_op.get(op, 0.0):>14.1f}"
            f"{remote_by_op.get(op, 0.0):>14.1f}"
        )
    lines.append(
        f"{'Total':<24}{sum(local_by_op.values()):>14.1f}"
        f"{sum(remote_by_op.values()):>14.1f}"
    )
    return "\n".join(lines)
