"""``genflow`` command line interface."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .agents import SimSite, orchestrate
from .catalog import builtin_catalog
from .config import Config
from .embedding import make_embedder
from .errors import GenFlowError
from .executor import execute
from .graph import parse_workflow
from .index import VectorIndex
from .ingest import ingest_record, load_corpus_document
from .merge import MergeConfig, combine_elements, element_to_json, load_detections
from .pilot import FallbackSignal, PilotQuery, pilot_search
from .registry import AssetRegistry, CacheFetcher
from .resolver import SimulatedRemote, format_timing_table, timed_resolve_and_install


def _data_dir() -> Path:
    return Path(os.environ.get("GENFLOW_DATA_DIR", "./genflow-data"))


def _open_index(config: Config) -> VectorIndex:
    return VectorIndex.open_or_create(
        _data_dir() / "index.gfix", config.get_int("embed.dimension")
    )


@click.group()
def main():
    """GenFlow: workflow retrieval, dependency resolution, execution."""


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
def ingest(paths):
    """Ingest corpus documents (files or directories of JSON docs)."""
    config = Config.load()
    index = _open_index(config)
    embedder = make_embedder(config)
    files: list[Path] = []
    for path in map(Path, paths):
        files.extend(sorted(path.glob("*.json")) if path.is_dir() else [path])
    for path in files:
        doc = load_corpus_document(path)
        ingest_record(doc, embedder, index, config.get("ingest.stopwords_path"))
        click.echo(f"ingested {doc.workflow_id}")
    index.save()
    click.echo(f"index size: {len(index)}")


@main.command()
@click.argument("query")
@click.option("--k", default=None, type=int)
def search(query, k):
    """Flow Pilot search over the local index."""
    config = Config.load()
    index = _open_index(config)
    embedder = make_embedder(config)
    outcome = pilot_search(
        PilotQuery(query, k or config.get_int("pilot.k")),
        index,
        embedder,
        sim_threshold=config.get_float("search.threshold"),
        alpha=config.get_float("pilot.alpha"),
        stopwords_path=config.get("ingest.stopwords_path"),
    )
    if isinstance(outcome, FallbackSignal):
        click.echo("no results above threshold (exploration fallback)")
        sys.exit(1)
    for result in outcome:
        click.echo(
            f"{result.rank}. {result.workflow_id} "
            f"score={result.final_score:.3f} sim={result.similarity:.3f} "
            f"likes={result.likes}  {result.snippet}"
        )


@main.command()
@click.argument("workflow_file", type=click.Path(exists=True))
@click.option("--workspace", default=".", type=click.Path())
@click.option("--threads", default=1, type=int)
def run(workflow_file, workspace, threads):
    """Execute a workflow document."""
    workflow = parse_workflow(Path(workflow_file).read_bytes())
    try:
        result = execute(workflow, builtin_catalog(), workspace, max_workers=threads)
    except GenFlowError as exc:
        raise click.ClickException(str(exc))
    for nid in result.order:
        click.echo(f"{nid}: {result.runs[nid].elapsed_ms:.2f} ms")
    for path in result.written_files():
        click.echo(f"wrote {path}")


@main.command()
@click.argument("workflow_file", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["local", "remote"]), default="local")
@click.option("--install", "do_install", is_flag=True, default=False)
@click.option("--site", type=click.Path(exists=True), default=None,
              help="SimSite fixture backing remote mode")
def resolve(workflow_file, mode, do_install, site):
    """Resolve dependencies; prints the timing comparison table."""
    config = Config.load()
    workflow = parse_workflow(Path(workflow_file).read_bytes())
    root = _data_dir()
    registry = AssetRegistry(root / "registry.jsonl")
    cache = CacheFetcher(root / "cache")
    remote = None
    if mode == "remote":
        assets = SimSite.load(site).assets if site else {}
        remote = SimulatedRemote(
            assets, latency_ms=config.get_float("fetch.simulated.latency_ms")
        )
    report, samples, _ = timed_resolve_and_install(
        workflow,
        mode,
        catalog=builtin_catalog(),
        registry=registry,
        root=root,
        cache=cache,
        remote=remote,
        do_install=do_install,
    )
    click.echo(json.dumps(report.to_json(), indent=2))
    local = samples if mode == "local" else []
    remote_s = samples if mode == "remote" else []
    click.echo(format_timing_table(local, remote_s))


@main.command("merge-elements")
@click.option("--w", "w_file", required=True, type=click.Path(exists=True))
@click.option("--o", "o_file", required=True, type=click.Path(exists=True))
@click.option("--tau", default=0.5, type=float)
def merge_elements(w_file, o_file, tau):
    """Fuse two detection files; emits combined JSON on stdout."""
    combined = combine_elements(
        load_detections(w_file), load_detections(o_file), MergeConfig(tau)
    )
    click.echo(json.dumps([element_to_json(e) for e in combined], indent=2))


@main.command()
@click.option("--site", required=True, type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--budget", default=20, type=int)
def explore(site, query, budget):
    """Run the multi-agent exploration against a SimSite fixture."""
    root = _data_dir()
    root.mkdir(parents=True, exist_ok=True)
    result = orchestrate(
        query,
        SimSite.load(site),
        budget,
        catalog=builtin_catalog(),
        registry=AssetRegistry(root / "registry.jsonl"),
        cache=CacheFetcher(root / "cache"),
        root=root,
    )
    for entry in result.trace:
        click.echo(json.dumps(entry))
    if result.success:
        click.echo(f"success: {result.report.workflow_id}")
    else:
        click.echo(f"failure: {result.failure_reason}")
        sys.exit(1)


@main.command()
@click.option("--port", default=8765, type=int)
@click.option("--host", default="127.0.0.1")
def serve(port, host):
    """Start the HTTP service."""
    import uvicorn

    from .service import EngineState, create_app

    app = create_app(EngineState(_data_dir()))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
