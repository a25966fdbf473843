from __future__ import annotations

import random

import pytest

from genflow.images import (
    ImageBuffer,
    box_blur,
    decode_pnm,
    encode_pnm,
    invert,
    resize_nearest,
)


def random_image(rng, w=16, h=16, channels=1):
    return ImageBuffer(w, h, channels, bytes(rng.randrange(256) for _ in range(w * h * channels)))


def test_buffer_invariant():
    with pytest.raises(ValueError):
        ImageBuffer(2, 2, 1, b"\x00" * 3)
    with pytest.raises(ValueError):
        ImageBuffer(2, 2, 2, b"\x00" * 8)


@pytest.mark.parametrize("channels", [1, 3])
def test_pnm_round_trip(channels):
    rng = random.Random(7)
    img = random_image(rng, 5, 3, channels)
    again = decode_pnm(encode_pnm(img))
    assert again == img


def test_pnm_header_with_comment():
    data = b"P5\n# a comment\n2 2\n255\n\x00\x01\x02\x03"
    img = decode_pnm(data)
    assert (img.width, img.height, img.pixels) == (2, 2, b"\x00\x01\x02\x03")


def test_invert_is_255_minus():
    img = ImageBuffer(2, 2, 1, bytes([0, 255, 10, 20]))
    assert invert(img).pixels == bytes([255, 0, 245, 235])


def test_invert_involution():
    rng = random.Random(1)
    img = random_image(rng)
    assert invert(invert(img)) == img


def test_resize_identity_and_upscale():
    rng = random.Random(2)
    img = random_image(rng, 4, 4)
    assert resize_nearest(img, 4, 4) == img
    up = resize_nearest(img, 8, 8)
    # nearest-neighbor: each source pixel becomes a 2x2 block
    src = img.as_array()
    dst = up.as_array()
    for y in range(8):
        for x in range(8):
            assert dst[y, x, 0] == src[y // 2, x // 2, 0]


def test_box_blur_zero_radius_is_identity():
    rng = random.Random(3)
    img = random_image(rng)
    assert box_blur(img, 0) == img


def test_box_blur_constant_image_fixed_point():
    img = ImageBuffer(4, 4, 1, bytes([100] * 16))
    assert box_blur(img, 2).pixels == img.pixels
