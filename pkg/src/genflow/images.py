"""Raster image buffers and binary PGM/PPM (P5/P6) I/O.

Images are 8-bit, maxval 255, grayscale (1 channel) or RGB (3 channels),
stored as row-major bytes. Pixel operations are pure functions over
buffers so workflow execution stays deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ImageBuffer:
    width: int
    height: int
    channels: int  # 1 (gray) or 3 (rgb)
    pixels: bytes  # row-major, 8 bits per channel

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        expected = self.width * self.height * self.channels
        if len(self.pixels) != expected:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != {expected}"
            )

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, self.channels
        )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        h, w, c = arr.shape
        return cls(w, h, c, np.ascontiguousarray(arr, dtype=np.uint8).tobytes())


def encode_pnm(img: ImageBuffer) -> bytes:
    magic = b"P5" if img.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
    return header + img.pixels


def decode_pnm(data: bytes) -> ImageBuffer:
    if not data.startswith((b"P5", b"P6")):
        raise ValueError("not a binary PGM/PPM file")
    channels = 1 if data[:2] == b"P5" else 3

    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed. Pixel data starts after the single
    # whitespace byte that terminates maxval.
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PNM header")
        fields.append(int(data[start:pos]))
    pos += 1  # the whitespace byte after maxval

    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    expected = width * height * channels
    pixels = data[pos : pos + expected]
    if len(pixels) != expected:
        raise ValueError("truncated PNM pixel data")
    return ImageBuffer(width, height, channels, pixels)


def invert(img: ImageBuffer) -> ImageBuffer:
    return ImageBuffer(
        img.width, img.height, img.channels, bytes(255 - b for b in img.pixels)
    )


def resize_nearest(img: ImageBuffer, width: int, height: int) -> ImageBuffer:
    if width <= 0 or height <= 0:
        raise ValueError("target dimensions must be positive")
    src = img.as_array()
    rows = (np.arange(height) * img.height) // height
    cols = (np.arange(width) * img.width) // width
    return ImageBuffer.from_array(src[rows][:, cols])


def box_blur(img: ImageBuffer, radius: int) -> ImageBuffer:
    """Mean filter over a clamped (2r+1)^2 window, floor division."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return img
    src = img.as_array().astype(np.int64)
    padded = np.pad(src, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
    out = np.zeros_like(src)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            out += padded[dy : dy + img.height, dx : dx + img.width]
    out //= (2 * radius + 1) ** 2
    return ImageBuffer.from_array(out.astype(np.uint8))
