"""On-disk formats for images and vectors.

Images go out as binary PGM (P5) with a 16-bit big-endian payload, row
major, encoding values in [0, 1].  Vectors use a little-endian float64
stream preceded by an 8-byte little-endian element count; a plain-text CSV
variant round-trips through repr-precision decimal.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_PGM_MAXVAL = 65535


def write_pgm(path, image) -> None:
    """Write a 2D array with values in [0, 1] as a 16-bit P5 PGM."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("image must be two-dimensional")
    quantized = np.rint(np.clip(image, 0.0, 1.0) * _PGM_MAXVAL).astype(">u2")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{_PGM_MAXVAL}\n".encode("ascii"))
        fh.write(quantized.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a 16-bit P5 PGM back into floats in [0, 1]."""
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != _PGM_MAXVAL:
        raise ValueError(f"expected 16-bit PGM, got maxval {maxval}")
    pos += 1  # single whitespace after the header
    raster = np.frombuffer(data, dtype=">u2", count=w * h, offset=pos)
    return raster.reshape(h, w).astype(float) / _PGM_MAXVAL


def write_vector(path, v) -> None:
    """Write a float vector: uint64-LE length header, float64-LE payload."""
    v = np.asarray(v, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(v)))
        fh.write(v.tobytes())


def read_vector(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise ValueError("vector file too short for its header")
    (count,) = struct.unpack("<Q", data[:8])
    if len(data) != 8 + 8 * count:
        raise ValueError("vector payload does not match the header count")
    return np.frombuffer(data, dtype="<f8", offset=8).copy()


def write_vector_csv(path, v) -> None:
    """One repr-precision decimal per line; exact float round trip."""
    v = np.asarray(v, dtype=float).ravel()
    with open(path, "w", encoding="ascii") as fh:
        for value in v:
            fh.write(repr(float(value)) + "\n")


def read_vector_csv(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=float)
