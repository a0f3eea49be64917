"""File formats for images: QIMG float grids and 8-bit grayscale PNG.

QIMG layout (little-endian): magic ``QIMG``, version u16, side u32, then
side*side float64 pixels in row-major order.  The float file is the canonical
training input; PNG is a quantized visualization artifact.  Both writers emit
byte-identical output for identical input.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import DataError
from .qubism import QubismImage

QIMG_MAGIC = b"QIMG"
QIMG_VERSION = 1


def write_qimg(img: QubismImage, path) -> None:
    pixels = np.ascontiguousarray(img.pixels, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(QIMG_MAGIC)
        fh.write(struct.pack("<HI", QIMG_VERSION, img.side))
        fh.write(pixels.tobytes())


def read_qimg(path) -> QubismImage:
    path = Path(path)
    if not path.exists():
        raise DataError(f"image file missing: {path}")
    raw = path.read_bytes()
    if raw[:4] != QIMG_MAGIC:
        raise DataError(f"{path}: bad magic, not a QIMG file")
    version, side = struct.unpack_from("<HI", raw, 4)
    if version != QIMG_VERSION:
        raise DataError(f"{path}: unsupported QIMG version {version}")
    expect = 10 + side * side * 8
    if len(raw) != expect:
        raise DataError(f"{path}: truncated QIMG ({len(raw)} of {expect} bytes)")
    pixels = np.frombuffer(raw, dtype="<f8", offset=10).reshape(side, side)
    return QubismImage(side, pixels.astype(np.float64))


def _png_chunk(kind: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + kind
        + data
        + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF)
    )


def write_png(img: QubismImage, path) -> None:
    """8-bit grayscale PNG of the normalized view, row x=1 at the top."""
    if img.normalized is None:
        raise DataError("normalize the image before rendering a PNG")
    gray = np.round(255.0 * img.normalized).astype(np.uint8)
    # filter byte 0 before each scanline
    raw = b"".join(b"\x00" + gray[r].tobytes() for r in range(img.side))
    ihdr = struct.pack(">IIBBBBB", img.side, img.side, 8, 0, 0, 0, 0)
    blob = (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(raw, 6))
        + _png_chunk(b"IEND", b"")
    )
    Path(path).write_bytes(blob)


def png_gray_values(path) -> np.ndarray:
    """Decode one of our grayscale PNGs back to its uint8 matrix (for tests)."""
    raw = Path(path).read_bytes()
    if raw[:8] != b"\x89PNG\r\n\x1a\n":
        raise DataError(f"{path}: not a PNG")
    pos, width, height, data = 8, None, None, b""
    while pos < len(raw):
        (length,) = struct.unpack_from(">I", raw, pos)
        kind = raw[pos + 4 : pos + 8]
        body = raw[pos + 8 : pos + 8 + length]
        if kind == b"IHDR":
            width, height, depth, color = struct.unpack_from(">IIBB", body)
            if depth != 8 or color != 0:
                raise DataError("only 8-bit grayscale supported")
        elif kind == b"IDAT":
            data += body
        pos += 12 + length
    scan = zlib.decompress(data)
    rows = []
    stride = width + 1
    for r in range(height):
        line = scan[r * stride : (r + 1) * stride]
        if line[0] != 0:
            raise DataError("unexpected PNG filter type")
        rows.append(np.frombuffer(line[1:], dtype=np.uint8))
    return np.stack(rows)
