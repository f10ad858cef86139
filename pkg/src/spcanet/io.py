"""Matrix and label file formats.

CSV
    One matrix row per line, comma-separated decimal floats, no header.
    Floats are written with ``repr`` so they read back exactly.
Binary (``.spm`` / ``.bin``)
    The 4 magic bytes ``SPM1``, rows and cols as little-endian uint64,
    then ``rows * cols`` little-endian float64 values in row-major order.
Labels
    Integers separated by commas, whitespace or newlines.
"""
import os
import struct

import numpy as np

from .errors import ParseError

MAGIC = b"SPM1"
_HEADER = struct.Struct("<4sQQ")
BINARY_SUFFIXES = (".spm", ".bin")


def _is_binary(path):
    return os.path.splitext(str(path))[1].lower() in BINARY_SUFFIXES


def _check_finite(arr, path):
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        r, c = bad[0]
        raise ParseError(f"{path}: non-finite value at row {r + 1}, column {c + 1}")


def parse_csv(text, source="<csv>"):
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise ParseError(f"{source}: line {lineno}: {exc}") from exc
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(
                f"{source}: line {lineno}: expected {len(rows[0])} values, got {len(rows[-1])}"
            )
    if not rows:
        raise ParseError(f"{source}: no data")
    arr = np.array(rows, dtype=np.float64)
    _check_finite(arr, source)
    return arr


def parse_binary(blob, source="<binary>"):
    if len(blob) < _HEADER.size:
        raise ParseError(f"{source}: truncated header, expected {_HEADER.size} bytes, got {len(blob)}")
    magic, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ParseError(f"{source}: bad magic bytes {magic!r}, expected {MAGIC!r}")
    if rows < 1 or cols < 1:
        raise ParseError(f"{source}: empty matrix {rows}x{cols}")
    expected = _HEADER.size + 8 * rows * cols
    if len(blob) != expected:
        raise ParseError(f"{source}: expected {expected} bytes for a {rows}x{cols} matrix, got {len(blob)}")
    arr = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    arr = arr.astype(np.float64)
    _check_finite(arr, source)
    return arr


def load_matrix(path):
    if _is_binary(path):
        with open(path, "rb") as fh:
            return parse_binary(fh.read(), str(path))
    with open(path) as fh:
        return parse_csv(fh.read(), str(path))


def format_csv(matrix):
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in np.asarray(matrix))


def format_binary(matrix):
    arr = np.ascontiguousarray(matrix, dtype="<f8")
    rows, cols = arr.shape
    return _HEADER.pack(MAGIC, rows, cols) + arr.tobytes()


def save_matrix(matrix, path):
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"save_matrix expects a 2-D array, got {matrix.ndim}-D")
    if _is_binary(path):
        with open(path, "wb") as fh:
            fh.write(format_binary(matrix))
    else:
        with open(path, "w") as fh:
            fh.write(format_csv(matrix))


def parse_labels(text, source="<labels>"):
    tokens = text.replace(",", " ").split()
    try:
        labels = np.array([int(t) for t in tokens], dtype=np.intp)
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    if labels.size == 0:
        raise ParseError(f"{source}: no labels")
    if labels.min() < 0:
        raise ParseError(f"{source}: negative label {labels.min()}")
    return labels


def load_labels(path):
    with open(path) as fh:
        return parse_labels(fh.read(), str(path))


def format_labels(labels):
    return "".join(f"{int(v)}\n" for v in labels)


def save_labels(labels, path):
    with open(path, "w") as fh:
        fh.write(format_labels(labels))
