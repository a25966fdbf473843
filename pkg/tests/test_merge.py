from __future__ import annotations

import random

import pytest

from genflow.merge import (
    BBox,
    DetectedElement,
    MergeConfig,
    combine_elements,
    element_from_json,
    element_to_json,
    iou,
    merge_properties,
)


def element(x1, y1, x2, y2, source="W", **props):
    return DetectedElement(BBox(x1, y1, x2, y2), source, {k: str(v) for k, v in props.items()})


# -- IoU --------------------------------------------------------------------


def raster_iou(a: BBox, b: BBox, grid: int = 20) -> float:
    """Independent oracle: count unit cells covered on an integer grid."""
    inter = union = 0
    for y in range(grid):
        for x in range(grid):
            in_a = a.x1 <= x < a.x2 and a.y1 <= y < a.y2
            in_b = b.x1 <= x < b.x2 and b.y1 <= y < b.y2
            inter += in_a and in_b
            union += in_a or in_b
    return inter / union if union else 0.0


def test_iou_identity():
    box = BBox(1, 1, 9, 6)
    assert iou(box, box) == 1.0


def test_iou_disjoint():
    assert iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0


def test_iou_worked_example_25_over_175():
    a, b = BBox(0, 0, 10, 10), BBox(5, 5, 15, 15)
    assert iou(a, b) == pytest.approx(25 / 175, abs=1e-9)
    assert iou(a, b) == pytest.approx(raster_iou(a, b), abs=1e-9)


def test_iou_symmetry_and_bounds():
    rng = random.Random(5)
    for _ in range(200):
        a = sorted(rng.randrange(12) for _ in range(2))
        b = sorted(rng.randrange(12) for _ in range(2))
        c = sorted(rng.randrange(12) for _ in range(2))
        d = sorted(rng.randrange(12) for _ in range(2))
        box1, box2 = BBox(a[0], b[0], a[1], b[1]), BBox(c[0], d[0], c[1], d[1])
        assert iou(box1, box2) == iou(box2, box1)
        assert 0.0 <= iou(box1, box2) <= 1.0


def test_iou_monotone_under_shrinking_gap():
    fixed = BBox(0, 0, 10, 10)
    previous = -1.0
    for offset in range(15, -1, -1):  # slide the second box toward the first
        moving = BBox(offset, 0, offset + 10, 10)
        value = iou(fixed, moving)
        assert value >= previous
        previous = value


def test_iou_zero_area_boxes():
    caret = BBox(3, 3, 3, 8)
    assert iou(caret, caret) == 0.0  # union area 0 rule
    assert iou(caret, BBox(0, 0, 10, 10)) == 0.0


def test_bbox_invariant():
    with pytest.raises(ValueError):
        BBox(5, 0, 1, 1)


# -- merge_properties --------------------------------------------------------


def test_merge_disjoint_keys_plain_union():
    w = element(0, 0, 4, 4, "W", caption="ok")
    o = element(0, 0, 4, 4, "O", role="button")
    merged = merge_properties(w, o)
    assert merged.properties == {"caption": "ok", "role": "button"}
    assert merged.source == "MERGED"


def test_merge_conflict_o_wins_w_preserved():
    w = element(0, 0, 4, 4, "W", role="generic")
    o = element(1, 1, 5, 5, "O", role="submit-button")
    merged = merge_properties(w, o)
    assert merged.properties["role"] == "submit-button"
    assert merged.properties["role.w"] == "generic"


def test_merge_keeps_w_bbox():
    w = element(0, 0, 4, 4, "W")
    o = element(1, 1, 5, 5, "O")
    assert merge_properties(w, o).bbox == w.bbox


# -- combine_elements ---------------------------------------------------------


def naive_combine(w_elements, o_elements, tau):
    """Line-by-line transliteration of the greedy fusion procedure; the
    independent oracle the shipped implementation is checked against."""
    combined = []
    used = set()
    for w in w_elements:
        best, best_score = None, None
        for index, o in enumerate(o_elements):
            if index in used:
                continue
            score = iou(w.bbox, o.bbox)
            if best_score is None or score > best_score:
                best, best_score = index, score
        if best is not None and best_score >= tau:
            combined.append(merge_properties(w, o_elements[best]))
            used.add(best)
        else:
            combined.append(w)
    for index, o in enumerate(o_elements):
        if index not in used:
            combined.append(o)
    return combined


def random_elements(rng, n, source):
    out = []
    for i in range(n):
        x = sorted(rng.randrange(10) for _ in range(2))
        y = sorted(rng.randrange(10) for _ in range(2))
        out.append(element(x[0], y[0], x[1], y[1], source, idx=f"{source}{i}"))
    return out


def test_empty_w_passes_o_through():
    o = element(0, 0, 2, 2, "O")
    assert combine_elements([], [o], MergeConfig(0.5)) == [o]


def test_identical_boxes_merge():
    w = element(0, 0, 4, 4, "W", caption="x")
    o = element(0, 0, 4, 4, "O", role="y")
    combined = combine_elements([w], [o], MergeConfig(0.5))
    assert len(combined) == 1
    assert combined[0].source == "MERGED"


def test_tau_above_max_iou_concatenates_in_order():
    w = [element(0, 0, 4, 4, "W", i=1), element(5, 5, 9, 9, "W", i=2)]
    o = [element(0, 0, 4, 4, "O", i=3)]
    combined = combine_elements(w, o, MergeConfig(1.0))
    # identical boxes have IoU exactly 1.0 == tau, so they still merge;
    # push tau beyond any overlap via disjoint inputs instead
    o_disjoint = [element(20, 20, 24, 24, "O", i=3)]
    combined = combine_elements(w, o_disjoint, MergeConfig(0.9))
    assert combined == w + o_disjoint


def test_w_equals_o_everything_merges():
    boxes = [element(i, i, i + 4, i + 4, "W") for i in range(5)]
    o = [element(i, i, i + 4, i + 4, "O") for i in range(5)]
    combined = combine_elements(boxes, o, MergeConfig(1.0))
    assert len(combined) == len(boxes)
    assert all(e.source == "MERGED" for e in combined)


def test_argmax_tie_lowest_o_index():
    w = [element(0, 0, 4, 4, "W")]
    o = [element(0, 0, 4, 4, "O", which="first"), element(0, 0, 4, 4, "O", which="second")]
    combined = combine_elements(w, o, MergeConfig(0.5))
    assert combined[0].properties["which"] == "first"
    assert combined[1].properties["which"] == "second"


@pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
def test_combine_matches_naive_oracle(tau):
    rng = random.Random(int(tau * 10))
    for _ in range(300):
        w = random_elements(rng, rng.randrange(9), "W")
        o = random_elements(rng, rng.randrange(9), "O")
        assert combine_elements(w, o, MergeConfig(tau)) == naive_combine(w, o, tau)


def test_cardinality_and_conservation():
    rng = random.Random(77)
    for _ in range(200):
        w = random_elements(rng, rng.randrange(9), "W")
        o = random_elements(rng, rng.randrange(9), "O")
        combined = combine_elements(w, o, MergeConfig(0.5))
        merges = sum(1 for e in combined if e.source == "MERGED")
        assert len(combined) == len(w) + len(o) - merges
        assert max(len(w), len(o)) <= len(combined) <= len(w) + len(o)
        # every input represented exactly once
        w_repr = [e for e in combined if e.source in ("W", "MERGED")]
        o_repr = [e for e in combined if e.source in ("O", "MERGED")]
        assert len(w_repr) == len(w)
        assert len(o_repr) == len(o)


def test_detection_json_round_trip():
    el = element(1, 2, 3, 4, "O", role="link", target="next")
    assert element_from_json(element_to_json(el)) == el
