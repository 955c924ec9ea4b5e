"""Matrix file formats.

``.rskm`` is a raw little-endian container: the 4-byte magic ``RSKM``, two
``u64`` values (rows, cols), then ``rows*cols`` float64 values in column-major
order. Matrix Market (``.mtx``) is supported for interchange.
"""
from __future__ import annotations

import os
import struct

import numpy as np
import scipy.io

from .core import ContractViolation, as_dense

MAGIC = b"RSKM"
_HEADER = struct.Struct("<4sQQ")


def write_rskm(path, M) -> None:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    M = as_dense(M)
    rows, cols = M.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(M.astype("<f8").tobytes(order="F"))


def read_rskm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ContractViolation(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ContractViolation(f"{path}: bad magic {magic!r}")
        payload = fh.read()
    if len(payload) != 8 * rows * cols:
        raise ContractViolation(
            f"{path}: payload has {len(payload)} bytes, expected {8 * rows * cols}"
        )
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return data.reshape((rows, cols), order="F")


def read_matrix(path) -> np.ndarray:
    """Read ``.rskm`` or Matrix Market by extension."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".mtx":
        M = scipy.io.mmread(str(path))
        if hasattr(M, "toarray"):
            M = M.toarray()
        return as_dense(M)
    return read_rskm(path)


def write_matrix_market(path, M) -> None:
    scipy.io.mmwrite(str(path), as_dense(M))


def read_vector(path) -> np.ndarray:
    M = read_matrix(path)
    if M.shape[1] != 1:
        raise ContractViolation(f"{path}: expected a single column, got {M.shape}")
    return M[:, 0].copy()
