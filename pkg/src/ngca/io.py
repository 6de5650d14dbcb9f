"""Sample-set serialization: a small binary format and CSV."""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError
from .instance_model import SampleSet

MAGIC = b"NGCA"
VERSION = 1
HEADER = struct.Struct("<4sIQIQ")  # magic, version, N, n, seed


def write_binary(s: SampleSet, path) -> None:
    with Path(path).open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, s.N, s.ambient_dim, s.seed % 2**64))
        fh.write(np.ascontiguousarray(s.data, dtype="<f8").tobytes())


def read_binary(path) -> SampleSet:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ValueError("file too short for header")
    magic, version, N, n, seed = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported version {version}")
    body = raw[HEADER.size:]
    if len(body) != 8 * N * n:
        raise ValueError(f"expected {N}x{n} doubles, found {len(body) // 8} values")
    data = np.frombuffer(body, dtype="<f8").reshape(N, n)
    return SampleSet(data, seed=seed, lineage=({"op": "read", "path": str(path)},))


def write_csv(s: SampleSet, path) -> None:
    np.savetxt(path, s.data, fmt="%.17g", delimiter=",")


def write_matrix_csv(m: np.ndarray, path) -> None:
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    np.savetxt(path, m, fmt="%.17g", delimiter=",")


def ingest_csv(path, has_header: bool = False) -> SampleSet:
    """Read a rectangular numeric CSV; rows and columns in errors are 1-based file positions."""
    rows = []
    width = None
    with Path(path).open(newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not rec or all(not c.strip() for c in rec):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise ParseError(f"expected {width} columns, found {len(rec)}", lineno, min(len(rec), width) + 1)
            vals = []
            for col, cell in enumerate(rec, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", lineno, col) from None
            rows.append(vals)
    if not rows:
        raise ParseError("no data rows", 0, 0)
    return SampleSet(np.array(rows), seed=0, lineage=({"op": "external", "path": str(path)},))
