"""Netpbm greyscale (PGM) image reading and writing, ASCII P2 and binary P5."""
from __future__ import annotations

import numpy as np


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode PGM bytes to a float array in [0, 1] of shape (rows, cols)."""
    (magic, w, h, maxval), pos = _tokens(data, 4)
    width, height, maxval = int(w), int(h), int(maxval)
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"bad PGM header: {width}x{height}, maxval {maxval}")
    if magic == b"P2":
        vals, _ = _tokens(data, width * height, pos)
        pix = np.array([int(v) for v in vals], dtype=np.float64)
    elif magic == b"P5":
        pos += 1  # exactly one whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        nbytes = width * height * dtype.itemsize
        if len(data) - pos < nbytes:
            raise ValueError("truncated PGM pixel data")
        pix = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos).astype(np.float64)
    else:
        raise ValueError(f"not a greyscale PGM (magic {magic!r})")
    if pix.max(initial=0) > maxval:
        raise ValueError("pixel value exceeds maxval")
    return pix.reshape(height, width) / maxval


def encode_pgm(image, binary: bool = True, maxval: int = 255) -> bytes:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("PGM images are 2-D")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.int64)
    header = f"{'P5' if binary else 'P2'}\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else np.uint8
        return header + q.astype(dtype).tobytes()
    lines = "\n".join(" ".join(str(v) for v in row) for row in q)
    return header + lines.encode() + b"\n"


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, image, binary: bool = True, maxval: int = 255) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(image, binary, maxval))
