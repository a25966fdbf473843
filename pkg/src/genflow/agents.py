"""Supervised multi-agent exploration over a simulated web environment.

An orchestrator delegates to two workers: a web-search agent that clicks
through SimSite pages using fused element detections, and a file agent
that parses downloaded workflow documents and extracts dependencies.
Workers never talk to each other; every task flows through the
orchestrator, and each agent keeps an append-only, replayable memory.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .catalog import NodeCatalog
from .errors import GenFlowError, MalformedDocument, SchemaViolation
from .graph import parse_workflow
from .merge import DetectedElement, MergeConfig, combine_elements, element_from_json
from .registry import AssetDescriptor, AssetRegistry, CacheFetcher, sha256_hex
from .resolver import DependencyReport, extract_dependencies

ORCHESTRATOR = "orchestrator"
WEB_AGENT = "web_agent"
FILE_AGENT = "file_agent"

_TOKEN = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class AgentMessage:
    sender: str
    recipient: str
    kind: str  # TaskAssign | Observation | Result | Failure
    payload: dict[str, Any]
    step: int


@dataclass
class AgentMemory:
    agent_id: str
    entries: list[tuple[int, str, str]] = field(default_factory=list)

    def record(self, step: int, action: str, observation: str) -> None:
        self.entries.append((step, action, observation))


@dataclass
class SimPage:
    w_elements: list[DetectedElement]
    o_elements: list[DetectedElement]
    links: dict[str, str]  # element "target" property -> page id
    downloads: dict[str, bytes]  # element "target" property -> document bytes


@dataclass
class SimSite:
    pages: dict[str, SimPage]
    start: str
    # (name, kind) -> (descriptor, content bytes): install metadata the
    # web agent can capture for assets referenced by found workflows.
    assets: dict[tuple[str, str], tuple[AssetDescriptor, bytes]] = field(
        default_factory=dict
    )

    def __post_init__(self):
        for page_id, page in self.pages.items():
            for target in page.links.values():
                if target not in self.pages:
                    raise ValueError(f"page {page_id!r} links to unknown page {target!r}")
        if self.start not in self.pages:
            raise ValueError(f"unknown start page {self.start!r}")

    @classmethod
    def from_json(cls, doc: dict) -> "SimSite":
        pages = {}
        for page_id, raw in doc["pages"].items():
            downloads = {}
            for key, value in raw.get("downloads", {}).items():
                if isinstance(value, str):
                    downloads[key] = value.encode("utf-8")
                else:
                    downloads[key] = json.dumps(value).encode("utf-8")
            pages[page_id] = SimPage(
                w_elements=[element_from_json(e) for e in raw.get("w_elements", [])],
                o_elements=[element_from_json(e) for e in raw.get("o_elements", [])],
                links=dict(raw.get("links", {})),
                downloads=downloads,
            )
        assets = {}
        for name, raw in doc.get("assets", {}).items():
            if "content_b64" in raw:
                content = base64.b64decode(raw["content_b64"])
            else:
                content = raw.get("content", "").encode("utf-8")
            descriptor = AssetDescriptor(
                name=name,
                kind=raw["kind"],
                url=raw.get("url", f"sim://{name}"),
                save_path=raw["save_path"],
                size_bytes=len(content),
                checksum=sha256_hex(content),
            )
            assets[(name, raw["kind"])] = (descriptor, content)
        return cls(pages=pages, start=doc.get("start", "home"), assets=assets)

    @classmethod
    def load(cls, path: str | Path) -> "SimSite":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Action:
    kind: str  # click | download | give_up
    target: str = ""
    page_id: str = ""
    element_index: int = -1
    score: int = 0


def _tokens(text: str) -> set[str]:
    return set(_TOKEN.findall(text.lower()))


def score_element(element: DetectedElement, query_tokens: set[str]) -> int:
    element_tokens: set[str] = set()
    for value in element.properties.values():
        element_tokens |= _tokens(value)
    return len(element_tokens & query_tokens)


def web_agent_step(
    page: SimPage,
    visited: set[str],
    query_tokens: set[str],
    tau: float = 0.5,
) -> Action:
    """Pick the best actionable fused element by token overlap.

    Ties go to the lowest combined-list index; zero overlap gives up.
    Elements linking to already-visited pages are not actionable (the
    memory-enforced no-revisit rule).
    """
    elements = combine_elements(page.w_elements, page.o_elements, MergeConfig(tau))
    best: tuple[int, int, Action] | None = None  # (score, -index) maximized
    for index, element in enumerate(elements):
        target = element.properties.get("target", "")
        if target in page.downloads:
            action = Action("download", target, element_index=index)
        elif target in page.links and page.links[target] not in visited:
            action = Action("click", target, page_id=page.links[target], element_index=index)
        else:
            continue
        score = score_element(element, query_tokens)
        if best is None or score > best[0]:
            best = (score, index, action)
    if best is None or best[0] == 0:
        return Action("give_up")
    score, index, action = best
    return Action(action.kind, action.target, action.page_id, index, score)


def file_agent_run(
    document: bytes, catalog: NodeCatalog, root: str | Path | None = None
) -> tuple[DependencyReport | None, dict | None, str]:
    """Parse a document and extract dependencies; failures are data."""
    try:
        workflow = parse_workflow(document)
    except (MalformedDocument, SchemaViolation) as exc:
        return None, None, f"{type(exc).__name__}: {exc}"
    report = extract_dependencies(workflow, catalog, root)
    histogram: dict[str, int] = {}
    for node in workflow.nodes:
        histogram[node.type_name] = histogram.get(node.type_name, 0) + 1
    summary = {
        "workflow_id": workflow.id,
        "node_count": len(workflow.nodes),
        "type_histogram": histogram,
        "model_references": sorted(report.required_models),
    }
    return report, summary, ""


@dataclass
class OrchestrationResult:
    success: bool
    failure_reason: str = ""  # not_found | budget_exhausted | malformed_document
    workflow_doc: bytes | None = None
    report: DependencyReport | None = None
    trace: list[dict] = field(default_factory=list)
    messages: list[AgentMessage] = field(default_factory=list)
    memories: dict[str, AgentMemory] = field(default_factory=dict)
    captured: list[AssetDescriptor] = field(default_factory=list)


class _Conversation:
    """Owns the monotone step counter and the message log."""

    def __init__(self):
        self.step = 0
        self.messages: list[AgentMessage] = []

    def send(self, sender: str, recipient: str, kind: str, payload: dict) -> AgentMessage:
        self.step += 1
        message = AgentMessage(sender, recipient, kind, payload, self.step)
        self.messages.append(message)
        return message


def orchestrate(
    query: str,
    site: SimSite,
    budget: int,
    *,
    catalog: NodeCatalog,
    registry: AssetRegistry | None = None,
    cache: CacheFetcher | None = None,
    root: str | Path | None = None,
    tau: float = 0.5,
) -> OrchestrationResult:
    """Rule-based plan: web search until a document is downloaded, then
    file parse, then install-metadata capture for missing assets. Each
    delegation costs one unit of budget."""
    if budget < 1:
        raise ValueError("budget must be >= 1")

    conversation = _Conversation()
    memories = {
        agent: AgentMemory(agent) for agent in (ORCHESTRATOR, WEB_AGENT, FILE_AGENT)
    }
    result = OrchestrationResult(
        success=False, messages=conversation.messages, memories=memories
    )
    query_tokens = _tokens(query)
    visited: set[str] = set()
    current = site.start
    delegations = 0
    document: bytes | None = None
    report: DependencyReport | None = None

    def delegate(worker: str, task: str, payload: dict) -> bool:
        nonlocal delegations
        if delegations >= budget:
            return False
        delegations += 1
        conversation.send(ORCHESTRATOR, worker, "TaskAssign", {"task": task, **payload})
        memories[ORCHESTRATOR].record(conversation.step, f"assign:{task}", f"to={worker}")
        return True

    while True:
        # Phase 1: web search, one page step per delegation.
        if document is None:
            if not delegate(WEB_AGENT, "web_search", {"page": current, "query": query}):
                result.failure_reason = "budget_exhausted"
                return result
            visited.add(current)
            page = site.pages[current]
            action = web_agent_step(page, visited, query_tokens, tau)
            memories[WEB_AGENT].record(
                conversation.step,
                f"{action.kind}:{action.target}",
                f"page={current} score={action.score}",
            )
            result.trace.append(
                {
                    "step": conversation.step,
                    "worker": WEB_AGENT,
                    "task": "web_search",
                    "page": current,
                    "action": action.kind,
                    "target": action.target,
                }
            )
            if action.kind == "download":
                document = page.downloads[action.target]
                conversation.send(
                    WEB_AGENT,
                    ORCHESTRATOR,
                    "Result",
                    {"document": document.decode("utf-8", "replace"), "page": current},
                )
            elif action.kind == "click":
                current = action.page_id
                conversation.send(
                    WEB_AGENT, ORCHESTRATOR, "Observation", {"moved_to": current}
                )
            else:
                conversation.send(
                    WEB_AGENT, ORCHESTRATOR, "Failure", {"reason": "not_found"}
                )
                result.failure_reason = "not_found"
                return result
            continue

        # Phase 2: parse the downloaded document.
        if report is None:
            if not delegate(FILE_AGENT, "file_parse", {}):
                result.failure_reason = "budget_exhausted"
                return result
            result.trace.append(
                {"step": conversation.step, "worker": FILE_AGENT, "task": "file_parse"}
            )
            report, summary, failure = file_agent_run(document, catalog, root)
            if failure:
                memories[FILE_AGENT].record(conversation.step, "parse", failure)
                conversation.send(FILE_AGENT, ORCHESTRATOR, "Failure", {"cause": failure})
                result.failure_reason = "malformed_document"
                return result
            memories[FILE_AGENT].record(
                conversation.step, "parse", f"nodes={summary['node_count']}"
            )
            conversation.send(
                FILE_AGENT,
                ORCHESTRATOR,
                "Result",
                {"report": report.to_json(), "summary": summary},
            )
            continue

        # Phase 3: capture install metadata for missing assets.
        missing = sorted(report.missing_node_types) + sorted(report.missing_models)
        if missing:
            if not delegate(WEB_AGENT, "capture_metadata", {"assets": missing}):
                result.failure_reason = "budget_exhausted"
                return result
            result.trace.append(
                {
                    "step": conversation.step,
                    "worker": WEB_AGENT,
                    "task": "capture_metadata",
                    "assets": missing,
                }
            )
            captured = []
            for name in sorted(report.missing_node_types):
                entry = site.assets.get((name, "node_pack"))
                if entry:
                    captured.append(entry)
            for name in sorted(report.missing_models):
                entry = site.assets.get((name, "model"))
                if entry:
                    captured.append(entry)
            for descriptor, content in captured:
                if cache is not None:
                    cache.store(content)
                if registry is not None:
                    registry.upsert(descriptor)
                result.captured.append(descriptor)
            memories[WEB_AGENT].record(
                conversation.step,
                "capture",
                ",".join(d.name for d, _ in captured) or "none",
            )
            conversation.send(
                WEB_AGENT,
                ORCHESTRATOR,
                "Result",
                {"captured": [d.name for d, _ in captured]},
            )

        result.success = True
        result.workflow_doc = document
        result.report = report
        return result


def replay_web_memory(
    memory: AgentMemory, site: SimSite, query: str, tau: float = 0.5
) -> list[str]:
    """Re-derive the web agent's search actions from its memory.

    Each recorded page is re-evaluated against the same site; a mismatch
    raises, so a clean return certifies deterministic replay.
    """
    query_tokens = _tokens(query)
    visited: set[str] = set()
    actions: list[str] = []
    for step, recorded, observation in memory.entries:
        if recorded.startswith("capture"):
            continue
        fields = dict(
            part.split("=", 1) for part in observation.split() if "=" in part
        )
        page_id = fields["page"]
        visited.add(page_id)
        action = web_agent_step(site.pages[page_id], visited, query_tokens, tau)
        replayed = f"{action.kind}:{action.target}"
        if replayed != recorded:
            raise GenFlowError(
                f"replay diverged at step {step}: {replayed!r} != {recorded!r}"
            )
        actions.append(replayed)
    return actions
