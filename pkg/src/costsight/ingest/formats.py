"""Readers and writers for the on-disk formats.

Binary rasters carry an 8-byte magic, little-endian uint32 dimensions and a
flat payload (row-major, class channel innermost for probability maps):

    PMAPv001  H W N  then H*W*N float32   probability maps
    LMAPv001  H W    then H*W   uint8     label maps (255 = ignore)
    IMAPv001  H W    then H*W   uint16    instance ids (0 = background)

Endianness is fixed little regardless of host, and write->read round-trips
are bitwise exact. JSON carries the metadata: cost matrices as single
documents, answers and instance records as JSON-lines.
"""

import json
import struct

import numpy as np
from PIL import Image

from ..costmatrix import AnswerRecord, CostMatrix, MeanLogCostMatrix
from ..consequence import InstanceRecord
from ..errors import (
    DimensionMismatch,
    MagicMismatch,
    SchemaViolation,
    TruncatedFile,
)

PMAP_MAGIC = b"PMAPv001"
LMAP_MAGIC = b"LMAPv001"
IMAP_MAGIC = b"IMAPv001"

_MAX_DIM = 1 << 20


def _check_dims(path, dims):
    for name, v in dims:
        if not 1 <= v <= _MAX_DIM:
            raise DimensionMismatch(
                f"{path}: dimension {name}={v} outside [1, {_MAX_DIM}]"
            )


def _read_header(f, path, magic, n_dims):
    got = f.read(len(magic))
    if got != magic:
        raise MagicMismatch(
            f"{path}: expected magic {magic.decode()} at offset 0, "
            f"got {got!r}"
        )
    raw = f.read(4 * n_dims)
    if len(raw) < 4 * n_dims:
        raise TruncatedFile(f"{path}: header ends inside the dimension block")
    return struct.unpack(f"<{n_dims}I", raw)


def _read_payload(f, path, count, dtype):
    expected = count * dtype.itemsize
    raw = f.read(expected + 1)
    if len(raw) < expected:
        raise TruncatedFile(
            f"{path}: payload needs {expected} bytes, file holds {len(raw)}"
        )
    if len(raw) > expected:
        raise DimensionMismatch(
            f"{path}: file is longer than the declared dimensions allow"
        )
    return np.frombuffer(raw, dtype=dtype)


def write_pmap(path, probs):
    """Write an (H, W, N) float32 probability map."""
    arr = np.ascontiguousarray(probs, dtype="<f4")
    if arr.ndim != 3:
        raise DimensionMismatch(f"{path}: probability map must be (H, W, N)")
    h, w, n = arr.shape
    _check_dims(path, (("H", h), ("W", w), ("N", n)))
    with open(path, "wb") as f:
        f.write(PMAP_MAGIC)
        f.write(struct.pack("<3I", h, w, n))
        f.write(arr.tobytes())


def read_pmap(path):
    with open(path, "rb") as f:
        h, w, n = _read_header(f, path, PMAP_MAGIC, 3)
        _check_dims(path, (("H", h), ("W", w), ("N", n)))
        flat = _read_payload(f, path, h * w * n, np.dtype("<f4"))
    return flat.reshape(h, w, n)


def write_lmap(path, labels):
    """Write an (H, W) uint8 label map (255 = ignore)."""
    arr = np.ascontiguousarray(labels, dtype=np.uint8)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{path}: label map must be (H, W)")
    h, w = arr.shape
    _check_dims(path, (("H", h), ("W", w)))
    with open(path, "wb") as f:
        f.write(LMAP_MAGIC)
        f.write(struct.pack("<2I", h, w))
        f.write(arr.tobytes())


def read_lmap(path):
    with open(path, "rb") as f:
        h, w = _read_header(f, path, LMAP_MAGIC, 2)
        _check_dims(path, (("H", h), ("W", w)))
        flat = _read_payload(f, path, h * w, np.dtype(np.uint8))
    return flat.reshape(h, w)


def write_imap(path, instances):
    """Write an (H, W) uint16 instance-id raster (0 = no instance)."""
    arr = np.ascontiguousarray(instances, dtype="<u2")
    if arr.ndim != 2:
        raise DimensionMismatch(f"{path}: instance raster must be (H, W)")
    h, w = arr.shape
    _check_dims(path, (("H", h), ("W", w)))
    with open(path, "wb") as f:
        f.write(IMAP_MAGIC)
        f.write(struct.pack("<2I", h, w))
        f.write(arr.tobytes())


def read_imap(path):
    with open(path, "rb") as f:
        h, w = _read_header(f, path, IMAP_MAGIC, 2)
        _check_dims(path, (("H", h), ("W", w)))
        flat = _read_payload(f, path, h * w, np.dtype("<u2"))
    return flat.reshape(h, w)


def write_label_png(path, labels):
    """Lossless PNG alternative for label maps."""
    arr = np.ascontiguousarray(labels, dtype=np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def read_label_png(path):
    with Image.open(path) as img:
        if img.mode != "L":
            raise SchemaViolation(
                f"{path}: label PNG must be single-channel 8-bit, "
                f"got mode {img.mode}"
            )
        return np.asarray(img, dtype=np.uint8)


def write_matrix(path, matrix):
    """Cost matrix JSON; log10 or linear space chosen by the object type."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(matrix.to_dict(), f, indent=2)
        f.write("\n")


def read_matrix(path):
    """Load a matrix JSON; returns CostMatrix or MeanLogCostMatrix."""
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: not valid JSON: {exc}") from None
    space = d.get("space")
    if space == "linear":
        return CostMatrix.from_dict(d)
    if space == "log10":
        return MeanLogCostMatrix.from_dict(d)
    raise SchemaViolation(
        f"{path}: field 'space': expected 'linear' or 'log10', got {space!r}"
    )


def _read_jsonl(path, parse):
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(
                    f"{path}:{lineno}: not valid JSON: {exc}"
                ) from None
            try:
                out.append(parse(d))
            except SchemaViolation as exc:
                raise SchemaViolation(f"{path}:{lineno}: {exc}") from None
    return out


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_dict(), separators=(",", ":")))
            f.write("\n")


def read_answers(path):
    """Load an answer corpus (JSON-lines, one record per line)."""
    return _read_jsonl(path, AnswerRecord.from_dict)


def write_answers(path, answers):
    _write_jsonl(path, answers)


def read_instance_records(path):
    return _read_jsonl(path, InstanceRecord.from_dict)


def write_instance_records(path, records):
    _write_jsonl(path, records)
