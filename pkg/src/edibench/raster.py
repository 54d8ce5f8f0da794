"""Raster data model, PNM/PNG I/O and the dyadic corner downsampler.

Public coordinates are 1-indexed ``(row, col)``; storage is a plain numpy
array, ``(H, W)`` for gray or ``(H, W, 3)`` for RGB, float64.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "ImageFormatError",
    "RasterImage",
    "PixelRect",
    "load_image",
    "save_image",
    "to_luminance",
    "downsample_dyadic",
    "crop",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """Raised when a file cannot be decoded as a supported raster."""


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable real-valued raster with samples nominally in [0, 255].

    Values produced by interpolation may overshoot slightly; they stay
    unclamped in memory and are only clamped by :func:`save_image`.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
            raise ValueError(f"expected (H, W) or (H, W, 3) samples, got shape {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(f"image must be at least 2x2, got {arr.shape[1]}x{arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_samples(cls, width: int, height: int, channels: int, samples) -> "RasterImage":
        """Build from a flat row-major, channel-interleaved sample sequence."""
        flat = np.asarray(samples, dtype=np.float64).ravel()
        if flat.size != width * height * channels:
            raise ValueError(
                f"sample count {flat.size} != {width}x{height}x{channels}"
            )
        shape = (height, width) if channels == 1 else (height, width, channels)
        return cls(flat.reshape(shape))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    @property
    def samples(self) -> np.ndarray:
        return self.data.ravel()

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned rectangle; ``x0`` is the 1-indexed column, ``y0`` the row."""

    x0: int
    y0: int
    w: int
    h: int

    def check_inside(self, img: RasterImage) -> None:
        if self.w < 1 or self.h < 1:
            raise ValueError(f"empty rectangle {self}")
        if self.x0 < 1 or self.y0 < 1 or self.x0 + self.w - 1 > img.width or self.y0 + self.h - 1 > img.height:
            raise ValueError(f"{self} lies outside the {img.width}x{img.height} image")

    @classmethod
    def parse(cls, text: str) -> "PixelRect":
        """Parse ``"x0,y0,w,h"``."""
        parts = [int(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected x0,y0,w,h, got {text!r}")
        return cls(*parts)


# --------------------------------------------------------------------------- PNM

_PNM_MAGIC = {b"P2": (1, False), b"P3": (3, False), b"P5": (1, True), b"P6": (3, True)}
_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _read_pnm(raw: bytes, path) -> np.ndarray:
    magic = raw[:2]
    channels, binary = _PNM_MAGIC[magic]
    pos = 2
    header = []
    for _ in range(3):
        m = _TOKEN.match(raw, pos)
        if m is None:
            raise ImageFormatError(f"{path}: truncated PNM header")
        header.append(m.group(1))
        pos = m.end()
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError:
        raise ImageFormatError(f"{path}: malformed PNM header {header!r}") from None
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: unsupported PNM maxval {maxval}")
    count = width * height * channels
    if binary:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = raw[pos:pos + count * dtype.itemsize]
        if len(body) < count * dtype.itemsize:
            raise ImageFormatError(f"{path}: truncated PNM raster ({len(body)} bytes)")
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    else:
        tokens = re.sub(rb"#[^\n]*", b"", raw[pos:]).split()
        if len(tokens) < count:
            raise ImageFormatError(f"{path}: truncated PNM raster ({len(tokens)} of {count} samples)")
        values = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
    if maxval != 255:
        values = values * (255.0 / maxval)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return values.reshape(shape)


def _png_bit_depth(raw: bytes) -> int:
    # IHDR is always the first chunk: 8 signature + 8 chunk header + 8 (w, h)
    return raw[24] if len(raw) > 25 else 0


def _read_png(raw: bytes, path) -> np.ndarray:
    import io

    depth = _png_bit_depth(raw)
    try:
        with Image.open(io.BytesIO(raw)) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I"):
                return np.asarray(im, dtype=np.float64) * (255.0 / 65535.0)
            if depth == 16:
                raise ImageFormatError(f"{path}: 16-bit colour PNG is not supported")
            if mode in ("1", "L", "P", "LA", "RGB", "RGBA"):
                if mode == "P":
                    im = im.convert("RGB")
                elif mode == "LA":
                    im = im.convert("L")
                elif mode == "RGBA":
                    im = im.convert("RGB")
                elif mode == "1":
                    im = im.convert("L")
                return np.asarray(im, dtype=np.float64)
            raise ImageFormatError(f"{path}: unsupported PNG mode {mode}")
    except ImageFormatError:
        raise
    except Exception as exc:  # Pillow raises a zoo of types for corrupt streams
        raise ImageFormatError(f"{path}: cannot decode PNG ({exc})") from exc


def load_image(path) -> RasterImage:
    """Read a PGM/PPM (P2, P3, P5, P6) or 8-bit PNG file.

    16-bit samples are rescaled by 255/65535.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot read file ({exc.strerror or exc})") from exc
    if raw[:2] in _PNM_MAGIC:
        arr = _read_pnm(raw, path)
    elif raw[:8] == b"\x89PNG\r\n\x1a\n":
        arr = _read_png(raw, path)
    else:
        raise ImageFormatError(f"{path}: unrecognised format (expected PGM, PPM or PNG)")
    try:
        return RasterImage(arr)
    except ValueError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc


def _encode_u8(data: np.ndarray) -> np.ndarray:
    # round half away from zero, then clamp
    rounded = np.sign(data) * np.floor(np.abs(data) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def save_image(img: RasterImage, path) -> None:
    """Write ``img`` as PGM/PPM (by channel count) or PNG (by ``.png`` suffix).

    Samples are rounded half away from zero and clamped to [0, 255] here
    only; the in-memory image is untouched.
    """
    path = Path(path)
    u8 = _encode_u8(img.data)
    suffix = path.suffix.lower()
    try:
        if suffix == ".png":
            Image.fromarray(u8).save(path, format="PNG")
            return
        if img.channels == 1 and suffix == ".ppm":
            u8 = np.repeat(u8[:, :, None], 3, axis=2)
        magic = b"P5" if u8.ndim == 2 else b"P6"
        header = b"%s\n%d %d\n255\n" % (magic, img.width, img.height)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(u8).tobytes())
    except OSError as exc:
        raise OSError(f"{path}: cannot write image ({exc.strerror or exc})") from exc


# ------------------------------------------------------------------ operations

def to_luminance(img: RasterImage) -> RasterImage:
    """Y = 0.299 R + 0.587 G + 0.114 B; gray input is copied."""
    if img.channels == 1:
        return RasterImage(img.data)
    r, g, b = LUMA_WEIGHTS
    d = img.data
    return RasterImage(r * d[:, :, 0] + g * d[:, :, 1] + b * d[:, :, 2])


def downsample_dyadic(hr: RasterImage) -> RasterImage:
    """Keep the top-left pixel of every 2x2 block: ``out(i, j) = hr(2i-1, 2j-1)``."""
    if hr.width < 4 or hr.height < 4:
        raise ValueError(f"image too small to downsample: {hr.width}x{hr.height} (need >= 4x4)")
    return RasterImage(hr.data[::2, ::2])


def crop(img: RasterImage, roi: PixelRect) -> RasterImage:
    """Exact copy of the sub-image covered by ``roi``."""
    roi.check_inside(img)
    r0, c0 = roi.y0 - 1, roi.x0 - 1
    sub = img.data[r0:r0 + roi.h, c0:c0 + roi.w]
    if sub.shape[0] < 2 or sub.shape[1] < 2:
        # RasterImage needs >= 2x2; tiny crops are returned via a bypass
        return _small(sub)
    return RasterImage(sub)


def _small(arr: np.ndarray) -> RasterImage:
    obj = object.__new__(RasterImage)
    a = np.array(arr, dtype=np.float64, copy=True)
    a.setflags(write=False)
    object.__setattr__(obj, "data", a)
    return obj


def is_image_file(path) -> bool:
    return os.path.splitext(str(path))[1].lower() in (".pgm", ".ppm", ".pnm", ".png")
