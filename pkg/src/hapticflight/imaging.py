"""PNG encode/decode for frame rasters (8-bit RGB, non-interlaced)."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .core import FRAME_HEIGHT, FRAME_WIDTH, FrameRaster


class FrameFormatError(ValueError):
    """Encoded frame data is not a valid 640x320 RGB PNG."""


def frame_to_png_bytes(frame: FrameRaster, compress_level: int = 3) -> bytes:
    """Encode a raster as deterministic PNG bytes."""
    image = Image.fromarray(np.asarray(frame.pixels), mode="RGB")
    buf = io.BytesIO()
    image.save(buf, format="PNG", compress_level=compress_level)
    return buf.getvalue()


def png_bytes_to_frame(data: bytes) -> FrameRaster:
    """Decode PNG bytes back into a raster; rejects wrong size or mode."""
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
    except Exception as exc:
        raise FrameFormatError(f"cannot decode PNG data: {exc}") from exc
    if image.mode != "RGB":
        image = image.convert("RGB")
    if image.size != (FRAME_WIDTH, FRAME_HEIGHT):
        raise FrameFormatError(
            f"frame must be {FRAME_WIDTH}x{FRAME_HEIGHT}, got {image.size[0]}x{image.size[1]}")
    return FrameRaster(np.asarray(image, dtype=np.uint8))
