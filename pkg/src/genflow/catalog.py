"""Node type catalog and the built-in desk-scale executors.

Each node type declares typed input/output ports and parameters, plus an
executor callable. Executors are pure functions of (params, inputs) apart
from workspace file I/O, which keeps execution deterministic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable

from .errors import MissingInputFile
from .images import (
    ImageBuffer,
    box_blur,
    decode_pnm,
    encode_pnm,
    invert,
    resize_nearest,
)


class DataKind(str, Enum):
    TEXT = "Text"
    IMAGE = "Image"
    NUMBER = "Number"


@dataclass(frozen=True)
class ParamSpec:
    kind: str  # "string" | "integer" | "real" | "boolean"
    default: Any = None
    required: bool = True


@dataclass(frozen=True)
class NodeSpec:
    type_name: str
    inputs: dict[str, DataKind]
    outputs: dict[str, DataKind]
    params: dict[str, ParamSpec]
    executor: Callable[["ExecutionContext", dict, dict], dict]


@dataclass
class ExecutionContext:
    workspace: Path
    written_files: list[str] = field(default_factory=list)


class NodeCatalog:
    def __init__(self, specs: list[NodeSpec] | None = None):
        self._entries: dict[str, NodeSpec] = {}
        for spec in specs or []:
            self.register(spec)

    def register(self, spec: NodeSpec) -> None:
        self._entries[spec.type_name] = spec

    def get(self, type_name: str) -> NodeSpec | None:
        return self._entries.get(type_name)

    def __contains__(self, type_name: str) -> bool:
        return type_name in self._entries

    def type_names(self) -> list[str]:
        return sorted(self._entries)

    def describe(self) -> list[dict]:
        """JSON-friendly catalog listing (serves the UI's Nodes tab)."""
        out = []
        for name in self.type_names():
            spec = self._entries[name]
            out.append(
                {
                    "type": name,
                    "inputs": {k: v.value for k, v in spec.inputs.items()},
                    "outputs": {k: v.value for k, v in spec.outputs.items()},
                    "params": {
                        k: {"kind": p.kind, "default": p.default, "required": p.required}
                        for k, p in spec.params.items()
                    },
                }
            )
        return out


def _resolve_workspace_path(ctx: ExecutionContext, rel: str) -> Path:
    path = (ctx.workspace / rel).resolve()
    if not str(path).startswith(str(ctx.workspace.resolve())):
        raise MissingInputFile(f"path {rel!r} escapes the workspace")
    return path


def _exec_load_image(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    path = _resolve_workspace_path(ctx, str(params["path"]))
    if not path.exists():
        raise MissingInputFile(str(path))
    return {"image": decode_pnm(path.read_bytes())}


def _exec_save_image(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    img: ImageBuffer = inputs["image"]
    rel = str(params["path"])
    path = _resolve_workspace_path(ctx, rel)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pnm(img))
    ctx.written_files.append(rel)
    return {"image": img}


def _exec_resize(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    return {
        "image": resize_nearest(
            inputs["image"], int(params["width"]), int(params["height"])
        )
    }


def _exec_box_blur(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    return {"image": box_blur(inputs["image"], int(params["radius"]))}


def _exec_invert(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    return {"image": invert(inputs["image"])}


def _exec_text_prompt(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    return {"text": str(params["text"])}


def _exec_concat_text(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    # Join order is the ascending input-port name, independent of the
    # order connections appear in the document.
    parts = [str(inputs[name]) for name in sorted(inputs)]
    return {"text": " ".join(parts)}


def _exec_mock_generate(ctx: ExecutionContext, params: dict, inputs: dict) -> dict:
    """Deterministic pseudo-image: a SHA-256 counter stream seeded by the
    prompt and seed fills an RGB buffer."""
    width = int(params["width"])
    height = int(params["height"])
    material = f"{params['prompt']}|{int(params['seed'])}|{width}|{height}"
    needed = width * height * 3
    chunks = []
    counter = 0
    while sum(len(c) for c in chunks) < needed:
        chunks.append(hashlib.sha256(f"{material}|{counter}".encode()).digest())
        counter += 1
    pixels = b"".join(chunks)[:needed]
    return {"image": ImageBuffer(width, height, 3, pixels)}


def builtin_catalog() -> NodeCatalog:
    text = DataKind.TEXT
    image = DataKind.IMAGE
    return NodeCatalog(
        [
            NodeSpec(
                "load_image",
                inputs={},
                outputs={"image": image},
                params={"path": ParamSpec("string")},
                executor=_exec_load_image,
            ),
            NodeSpec(
                "save_image",
                inputs={"image": image},
                outputs={"image": image},
                params={"path": ParamSpec("string")},
                executor=_exec_save_image,
            ),
            NodeSpec(
                "resize",
                inputs={"image": image},
                outputs={"image": image},
                params={
                    "width": ParamSpec("integer"),
                    "height": ParamSpec("integer"),
                },
                executor=_exec_resize,
            ),
            NodeSpec(
                "box_blur",
                inputs={"image": image},
                outputs={"image": image},
                params={"radius": ParamSpec("integer", default=1, required=False)},
                executor=_exec_box_blur,
            ),
            NodeSpec(
                "invert",
                inputs={"image": image},
                outputs={"image": image},
                params={},
                executor=_exec_invert,
            ),
            NodeSpec(
                "text_prompt",
                inputs={},
                outputs={"text": text},
                params={"text": ParamSpec("string")},
                executor=_exec_text_prompt,
            ),
            NodeSpec(
                "concat_text",
                inputs={"text_a": text, "text_b": text},
                outputs={"text": text},
                params={},
                executor=_exec_concat_text,
            ),
            NodeSpec(
                "mock_generate",
                inputs={},
                outputs={"image": image},
                params={
                    "prompt": ParamSpec("string"),
                    "seed": ParamSpec("integer", default=0, required=False),
                    "width": ParamSpec("integer", default=16, required=False),
                    "height": ParamSpec("integer", default=16, required=False),
                },
                executor=_exec_mock_generate,
            ),
        ]
    )
