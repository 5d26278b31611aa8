"""8-bit grayscale image I/O: binary PGM (P5) and PNG.

PGM is the canonical interchange format: the writer emits the fixed header
``P5\\n{width} {height}\\n255\\n`` so that write(read(f)) is byte-identical
for files in canonical form. PNG support is a convenience wrapper around
Pillow.
"""

from __future__ import annotations

import os

import numpy as np

from .image import Array, from_u8, to_u8


class ImageIOError(Exception):
    """Base class for image I/O failures."""


class MalformedImageError(ImageIOError):
    """The file exists but its header or payload cannot be parsed."""


class UnsupportedFormatError(ImageIOError):
    """Recognized container but an unsupported variant (bit depth, mode)."""


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    # PGM tokens are separated by whitespace; '#' starts a comment to EOL.
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise MalformedImageError("truncated PGM header")
    return buf[start:pos], pos


def read_pgm(path: str) -> Array:
    """Read a binary 8-bit P5 PGM into a [0, 1] float raster."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    try:
        magic, pos = _read_token(buf, 0)
    except MalformedImageError:
        raise MalformedImageError(f"{path}: empty or truncated file") from None
    if magic != b"P5":
        raise MalformedImageError(f"{path}: not a binary PGM (magic {magic!r})")
    try:
        w_tok, pos = _read_token(buf, pos)
        h_tok, pos = _read_token(buf, pos)
        maxval_tok, pos = _read_token(buf, pos)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except (MalformedImageError, ValueError):
        raise MalformedImageError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1:
        raise MalformedImageError(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    pos += 1  # single whitespace byte after maxval
    payload = buf[pos : pos + width * height]
    if len(payload) < width * height:
        raise MalformedImageError(
            f"{path}: truncated payload ({len(payload)} of {width * height} bytes)"
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return from_u8(raw)


def write_pgm(path: str, img: Array) -> None:
    """Write a [0, 1] raster as canonical binary 8-bit P5 PGM."""
    raw = to_u8(img)
    height, width = raw.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(raw.tobytes())


def read_png(path: str) -> Array:
    from PIL import Image

    if not os.path.exists(path):
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "I;16", "LA", "RGB", "RGBA", "P", "1"):
                raise UnsupportedFormatError(f"{path}: unsupported PNG mode {im.mode}")
            if im.mode == "I;16":
                raise UnsupportedFormatError(f"{path}: 16-bit PNG not supported")
            gray = im.convert("L")
            raw = np.asarray(gray, dtype=np.uint8)
    except UnsupportedFormatError:
        raise
    except Exception as exc:  # Pillow raises various decode errors
        raise MalformedImageError(f"{path}: {exc}") from exc
    return from_u8(raw)


def write_png(path: str, img: Array) -> None:
    from PIL import Image

    Image.fromarray(to_u8(img), mode="L").save(path, format="PNG")


def read_image(path: str) -> Array:
    """Dispatch by extension: .pgm or .png."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".png":
        return read_png(path)
    raise UnsupportedFormatError(f"{path}: unsupported extension {ext!r}")


def write_image(path: str, img: Array) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        write_pgm(path, img)
    elif ext == ".png":
        write_png(path, img)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported extension {ext!r}")
