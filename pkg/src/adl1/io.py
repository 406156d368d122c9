"""File formats and canonical config serialization.

Vector files: 16-byte header (8-byte magic ``ADL1VEC1``, little-endian u32
length, 4 reserved zero bytes) followed by interleaved little-endian float64
(re, im) pairs. Matrix files use the magic ``ADL1MAT1`` with u32 rows and u32
cols in the header and column-major interleaved pairs. CSV alternatives exist
for both so other tools can produce inputs without writing binary.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import FileFormatError

VECTOR_MAGIC = b"ADL1VEC1"
MATRIX_MAGIC = b"ADL1MAT1"


def write_vector(path, x):
    x = np.ascontiguousarray(np.asarray(x, dtype=np.complex128))
    if x.ndim != 1:
        raise FileFormatError("vector files hold 1-D data, got shape %r" % (x.shape,))
    header = VECTOR_MAGIC + np.uint32(x.size).tobytes() + b"\x00" * 4
    pairs = np.empty(2 * x.size, dtype="<f8")
    pairs[0::2] = x.real
    pairs[1::2] = x.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pairs.tobytes())


def read_vector(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:8] != VECTOR_MAGIC:
        raise FileFormatError("%s: not a vector file (bad magic)" % path)
    n = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    body = raw[16:]
    if len(body) != 16 * n:
        raise FileFormatError(
            "%s: truncated payload (expected %d bytes for length %d, got %d)"
            % (path, 16 * n, n, len(body))
        )
    pairs = np.frombuffer(body, dtype="<f8")
    return (pairs[0::2] + 1j * pairs[1::2]).astype(np.complex128)


def write_vector_csv(path, x):
    x = np.asarray(x, dtype=np.complex128)
    with open(path, "w") as fh:
        fh.write("re,im\n")
        for v in x:
            fh.write("%.17g,%.17g\n" % (v.real, v.imag))


def read_vector_csv(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FileFormatError("%s: %s" % (path, exc)) from exc
    if data.shape[1] != 2:
        raise FileFormatError("%s: expected 2 columns (re,im), got %d" % (path, data.shape[1]))
    return (data[:, 0] + 1j * data[:, 1]).astype(np.complex128)


def write_matrix(path, a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise FileFormatError("matrix files hold 2-D data, got shape %r" % (a.shape,))
    m, n = a.shape
    header = MATRIX_MAGIC + np.uint32(m).tobytes() + np.uint32(n).tobytes()
    col_major = np.asfortranarray(a).ravel(order="F")
    pairs = np.empty(2 * col_major.size, dtype="<f8")
    pairs[0::2] = col_major.real
    pairs[1::2] = col_major.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pairs.tobytes())


def read_matrix(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:8] != MATRIX_MAGIC:
        raise FileFormatError("%s: not a matrix file (bad magic)" % path)
    m = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    n = int(np.frombuffer(raw[12:16], dtype="<u4")[0])
    body = raw[16:]
    if len(body) != 16 * m * n:
        raise FileFormatError("%s: truncated payload for %dx%d matrix" % (path, m, n))
    pairs = np.frombuffer(body, dtype="<f8")
    flat = pairs[0::2] + 1j * pairs[1::2]
    return flat.reshape((m, n), order="F").astype(np.complex128)


def read_matrix_csv(path):
    """CSV matrix: one row per matrix row, interleaved re,im,re,im,... columns."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise FileFormatError("%s: %s" % (path, exc)) from exc
    if data.shape[1] % 2 != 0:
        raise FileFormatError("%s: odd column count %d, need interleaved re/im" % (path, data.shape[1]))
    return (data[:, 0::2] + 1j * data[:, 1::2]).astype(np.complex128)


def canonical_json(obj) -> str:
    """Stable serialization used for hashing and round-trip checks."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def write_csv(path, header, rows, newline="\n"):
    """Write pre-formatted string cells; callers own all number formatting."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + newline)
        for row in rows:
            fh.write(",".join(row) + newline)
