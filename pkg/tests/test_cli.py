from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from genflow.cli import main

from conftest import FIXTURES


@pytest.fixture()
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("GENFLOW_DATA_DIR", str(tmp_path / "data"))
    monkeypatch.delenv("GENFLOW_CONFIG", raising=False)
    return CliRunner()


def test_ingest_then_search(runner):
    result = runner.invoke(main, ["ingest", str(FIXTURES / "corpus")])
    assert result.exit_code == 0, result.output
    assert "index size: 50" in result.output

    result = runner.invoke(main, ["search", "convert image to image workflow"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0].startswith("1. ")
    top_ids = {line.split()[1] for line in lines}
    assert {"wf_img2img_basic", "wf_thinkdiffusion_img2img"} <= top_ids


def test_search_fallback_exit_code(runner):
    runner.invoke(main, ["ingest", str(FIXTURES / "corpus")])
    result = runner.invoke(main, ["search", "quantum chromodynamics lattice"])
    assert result.exit_code == 1
    assert "fallback" in result.output


def test_run_workflow(runner, tmp_path):
    workspace = tmp_path / "ws"
    workspace.mkdir()
    doc = {
        "version": 1, "id": "cli", "name": "cli", "nodes": [
            {"id": "gen", "type": "mock_generate",
             "params": {"prompt": "p", "seed": 7, "width": 4, "height": 4}, "inputs": {}},
            {"id": "out", "type": "save_image", "params": {"path": "out.ppm"},
             "inputs": {"image": {"node": "gen", "port": "image"}}},
        ],
    }
    wf_path = tmp_path / "wf.json"
    wf_path.write_text(json.dumps(doc))
    result = runner.invoke(main, ["run", str(wf_path), "--workspace", str(workspace)])
    assert result.exit_code == 0, result.output
    assert (workspace / "out.ppm").exists()


def test_run_invalid_workflow_fails_cleanly(runner, tmp_path):
    doc = {
        "version": 1, "id": "bad", "name": "bad", "nodes": [
            {"id": "a", "type": "invert", "params": {},
             "inputs": {"image": {"node": "a", "port": "image"}}},
        ],
    }
    wf_path = tmp_path / "bad.json"
    wf_path.write_text(json.dumps(doc))
    result = runner.invoke(main, ["run", str(wf_path)])
    assert result.exit_code != 0
    assert "Error" in result.output


def test_resolve_prints_report_and_table(runner):
    result = runner.invoke(
        main,
        ["resolve", str(FIXTURES / "workflows" / "thinkdiffusion_img2img.flow.json")],
    )
    assert result.exit_code == 0, result.output
    assert "ThinkDiffusionXL.safetensors" in result.output
    assert "Total" in result.output


def test_resolve_remote_installs_from_site(runner, tmp_path, monkeypatch):
    data_dir = tmp_path / "data2"
    monkeypatch.setenv("GENFLOW_DATA_DIR", str(data_dir))
    result = runner.invoke(
        main,
        [
            "resolve",
            str(FIXTURES / "workflows" / "thinkdiffusion_img2img.flow.json"),
            "--mode", "remote", "--install",
            "--site", str(FIXTURES / "sites" / "openart_like.json"),
        ],
    )
    assert result.exit_code == 0, result.output
    assert (data_dir / "models/checkpoints/ThinkDiffusionXL.safetensors").exists()


def test_merge_elements_command(runner, tmp_path):
    w_file = tmp_path / "w.json"
    o_file = tmp_path / "o.json"
    w_file.write_text(json.dumps(
        [{"bbox": [0, 0, 4, 4], "source": "W", "properties": {"caption": "x"}}]
    ))
    o_file.write_text(json.dumps(
        [{"bbox": [0, 0, 4, 4], "source": "O", "properties": {"role": "y"}}]
    ))
    result = runner.invoke(
        main, ["merge-elements", "--w", str(w_file), "--o", str(o_file), "--tau", "0.5"]
    )
    assert result.exit_code == 0, result.output
    combined = json.loads(result.output)
    assert len(combined) == 1
    assert combined[0]["source"] == "MERGED"


def test_explore_command(runner):
    result = runner.invoke(
        main,
        [
            "explore",
            "--site", str(FIXTURES / "sites" / "openart_like.json"),
            "--query", "generate neon city skyline night",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "success: neon_city_skyline" in result.output

    result = runner.invoke(
        main,
        [
            "explore",
            "--site", str(FIXTURES / "sites" / "openart_like.json"),
            "--query", "quantum chromodynamics lattice",
        ],
    )
    assert result.exit_code == 1
    assert "failure: not_found" in result.output
