"""On-disk formats.

Matrix files are JSON ``{"dim": d, "entries": [[re, im], ...]}`` (row-major,
d*d pairs).  Sample batch files are a JSON header line followed by one CSV
record per sample: ``re, im`` interleaved for each coordinate, then the
weight for weighted batches.  Floats are written with 17 significant digits
so that reading back is exact.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError

MEASURES = ("G", "GAP", "GA-weighted")


def fmt(x):
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"refusing to write non-finite value {x}")
    return "%.17g" % x


def atomic_write(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_to_json(m):
    """Serialize a square complex matrix to the matrix file format (a dict)."""
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]),
            "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def dumps_matrix(m):
    m = np.asarray(m, dtype=complex)
    body = ",\n  ".join(f"[{fmt(z.real)}, {fmt(z.imag)}]" for z in m.reshape(-1))
    return f'{{"dim": {m.shape[0]}, "entries": [\n  {body}\n]}}\n'


def matrix_from_json(obj):
    try:
        dim = obj["dim"]
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"matrix object needs 'dim' and 'entries': {exc}") from None
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"bad dim {dim!r}")
    if len(entries) != dim * dim:
        raise FormatError(f"expected {dim * dim} entries for dim {dim}, got {len(entries)}")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"entries must be [re, im] pairs: {exc}") from None
    if arr.shape != (dim * dim, 2):
        raise FormatError("entries must be [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise FormatError("non-finite matrix entry")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def write_matrix(path, m):
    atomic_write(path, dumps_matrix(m))


def read_matrix(path):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return matrix_from_json(obj)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Sampled state vectors (rows) with optional importance weights."""

    vectors: np.ndarray
    measure: str
    seed: int
    weights: np.ndarray = None
    rho_file: str = None

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def weighted(self):
        return self.weights is not None


def dumps_batch(batch):
    header = {"dim": batch.dim, "n": batch.n, "measure": batch.measure,
              "seed": batch.seed, "rho_file": batch.rho_file}
    lines = [json.dumps(header)]
    cols = np.empty((batch.n, 2 * batch.dim))
    cols[:, 0::2] = batch.vectors.real
    cols[:, 1::2] = batch.vectors.imag
    if batch.weighted:
        cols = np.column_stack([cols, batch.weights])
    if not np.all(np.isfinite(cols)):
        raise FormatError("refusing to write non-finite sample values")
    lines.extend(",".join("%.17g" % x for x in row) for row in cols.tolist())
    return "\n".join(lines) + "\n"


def write_batch(path, batch):
    atomic_write(path, dumps_batch(batch))


def read_batch(path):
    with open(path) as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
            dim, n, measure = int(header["dim"]), int(header["n"]), header["measure"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad batch header: {exc}") from None
        if measure not in MEASURES:
            raise FormatError(f"{path}: unknown measure {measure!r}")
        width = 2 * dim + (measure == "GA-weighted")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = [float(x) for x in line.split(",")]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if len(row) != width:
                raise FormatError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
            rows.append(row)
    if len(rows) != n:
        raise FormatError(f"{path}: header announces {n} records, found {len(rows)}")
    data = np.array(rows, dtype=float).reshape(n, width)
    vectors = data[:, 0:2 * dim:2] + 1j * data[:, 1:2 * dim:2]
    weights = data[:, -1].copy() if measure == "GA-weighted" else None
    return SampleBatch(vectors, measure, header.get("seed"), weights, header.get("rho_file"))
