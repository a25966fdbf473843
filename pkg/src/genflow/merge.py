"""Greedy IoU fusion of interactive-element detections from two sources.

One detector (source "W") contributes visual grounding, the other
(source "O") functional descriptions. For each W element in order, the
best still-unused O element by IoU is merged in when the overlap clears
the threshold; leftovers from both sides pass through unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError("box corners must satisfy x1<=x2, y1<=y2")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class DetectedElement:
    bbox: BBox
    source: str  # "W" | "O" | "MERGED"
    properties: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class MergeConfig:
    tau: float = 0.5

    def __post_init__(self):
        if self.tau < 0.0:
            raise ValueError("tau must be non-negative")


def iou(a: BBox, b: BBox) -> float:
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def merge_properties(w: DetectedElement, o: DetectedElement) -> DetectedElement:
    """Union of property maps; on conflict O wins and W's value is kept
    under a ``.w`` suffix. The merged box is W's (visual grounding)."""
    merged = dict(w.properties)
    for key, value in o.properties.items():
        if key in merged and merged[key] != value:
            merged[key + ".w"] = merged[key]
        merged[key] = value
    return DetectedElement(bbox=w.bbox, source="MERGED", properties=merged)


def combine_elements(
    w_elements: list[DetectedElement],
    o_elements: list[DetectedElement],
    cfg: MergeConfig,
) -> list[DetectedElement]:
    combined: list[DetectedElement] = []
    used: set[int] = set()
    for w in w_elements:
        best_index = -1
        best_iou = -1.0
        for index, o in enumerate(o_elements):
            if index in used:
                continue
            score = iou(w.bbox, o.bbox)
            if score > best_iou:  # strict: equal IoU keeps the lowest index
                best_iou = score
                best_index = index
        if best_index >= 0 and best_iou >= cfg.tau:
            combined.append(merge_properties(w, o_elements[best_index]))
            used.add(best_index)
        else:
            combined.append(w)
    for index, o in enumerate(o_elements):
        if index not in used:
            combined.append(o)
    return combined


# -- detection file format (fixtures and CLI) ------------------------------


def element_to_json(element: DetectedElement) -> dict:
    box = element.bbox
    return {
        "bbox": [box.x1, box.y1, box.x2, box.y2],
        "source": element.source,
        "properties": element.properties,
    }


def element_from_json(obj: dict) -> DetectedElement:
    x1, y1, x2, y2 = obj["bbox"]
    return DetectedElement(
        bbox=BBox(x1, y1, x2, y2),
        source=obj.get("source", "W"),
        properties={str(k): str(v) for k, v in obj.get("properties", {}).items()},
    )


def load_detections(path: str | Path) -> list[DetectedElement]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [element_from_json(obj) for obj in data]
