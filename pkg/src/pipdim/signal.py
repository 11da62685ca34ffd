"""Dense signal matrices built from co-occurrence counts.

PMI-family matrices leave cells with a zero count at 0 instead of -inf so
the result is a finite matrix that can be factorized.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, PipdimError

__all__ = [
    "SignalMatrix",
    "KINDS",
    "pmi_matrix",
    "ppmi_matrix",
    "sppmi_matrix",
    "logcount_matrix",
    "build_signal",
    "counts_digest",
    "save_matrix",
    "load_matrix",
    "save_matrix_triplets",
]

KINDS = ("pmi", "ppmi", "sppmi", "logcount")
MAGIC = b"PIPDMAT1"


@dataclass(frozen=True)
class SignalMatrix:
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    digest: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("signal matrix must be 2-D")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal matrix has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n(self):
        return self.values.shape[0]


def counts_digest(counts):
    """SHA-256 over the canonical CSR arrays and window of ``counts``."""
    m = counts.matrix
    h = hashlib.sha256()
    h.update(np.int64(m.shape[0]).tobytes())
    h.update(np.int64(counts.window).tobytes())
    for arr in (m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data.astype(np.float64)):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def _provenance(counts, kind, params):
    payload = json.dumps({"counts": counts_digest(counts), "kind": kind, **params}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _pmi_values(counts):
    total = counts.total_pairs
    if total <= 0:
        raise PipdimError("no co-occurrence mass")
    coo = counts.matrix.tocoo()
    marg = counts.row_marginals
    keep = coo.data > 0
    r, c, v = coo.row[keep], coo.col[keep], coo.data[keep]
    lo, hi = np.minimum(r, c), np.maximum(r, c)
    out = np.zeros((counts.n, counts.n))
    # log(p(i,j) / (p(i) p(j))) with p(i,j) = C/N and p(i) = r_i/N; the
    # (lo, hi) term order makes (i, j) and (j, i) round identically
    out[r, c] = np.log(v) + np.log(total) - np.log(marg[lo]) - np.log(marg[hi])
    return out


def pmi_matrix(counts):
    """Pointwise mutual information; zero-count cells are 0."""
    return SignalMatrix(_pmi_values(counts), "pmi", {}, _provenance(counts, "pmi", {}))


def ppmi_matrix(counts):
    """Positive PMI: ``max(PMI, 0)``."""
    return SignalMatrix(np.maximum(_pmi_values(counts), 0.0), "ppmi", {},
                        _provenance(counts, "ppmi", {}))


def sppmi_matrix(counts, shift=1.0):
    """Shifted positive PMI: ``max(PMI - log(shift), 0)``.

    ``shift`` is the negative-sampling count; ``shift=1`` gives PPMI and
    ``shift=0`` gives an all-zero matrix.
    """
    if shift < 0:
        raise ValueError("shift must be non-negative")
    pmi = _pmi_values(counts)
    if shift == 0:
        values = np.zeros_like(pmi)
    else:
        values = np.maximum(pmi - np.log(shift), 0.0)
    params = {"shift": float(shift)}
    return SignalMatrix(values, "sppmi", params, _provenance(counts, "sppmi", params))


def logcount_matrix(counts, offset=True):
    """Log-count matrix, ``log(1 + C)``; with ``offset=False``, ``log C`` on nonzero cells."""
    if counts.total_pairs <= 0:
        raise PipdimError("no co-occurrence mass")
    coo = counts.matrix.tocoo()
    keep = coo.data > 0
    values = np.zeros((counts.n, counts.n))
    data = coo.data[keep]
    values[coo.row[keep], coo.col[keep]] = np.log1p(data) if offset else np.log(data)
    params = {"offset": bool(offset)}
    return SignalMatrix(values, "logcount", params, _provenance(counts, "logcount", params))


def build_signal(counts, kind, shift=1.0, offset=True):
    """Dispatch to the constructor for ``kind``."""
    if kind == "pmi":
        return pmi_matrix(counts)
    if kind == "ppmi":
        return ppmi_matrix(counts)
    if kind == "sppmi":
        return sppmi_matrix(counts, shift)
    if kind == "logcount":
        return logcount_matrix(counts, offset)
    raise ValueError(f"unknown signal kind {kind!r}; expected one of {KINDS}")


def save_matrix(signal, path):
    """Write the binary matrix format and a ``.json`` provenance sidecar.

    Layout: 8 magic bytes ``PIPDMAT1``, little-endian uint64 row and column
    counts, then row-major little-endian float64 entries.
    """
    m, n = signal.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", m, n))
        fh.write(np.ascontiguousarray(signal.values, dtype="<f8").tobytes())
    meta = {"kind": signal.kind, "params": signal.params, "digest": signal.digest, "shape": [m, n]}
    with open(f"{path}.json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)


def load_matrix(path):
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise FormatError(f"{path}: not a pipdim matrix file (bad magic)")
        header = fh.read(16)
        if len(header) != 16:
            raise FormatError(f"{path}: truncated header")
        m, n = struct.unpack("<QQ", header)
        raw = fh.read()
    if len(raw) != 8 * m * n:
        raise FormatError(f"{path}: expected {m}x{n} float64 entries, found {len(raw)} bytes")
    values = np.frombuffer(raw, dtype="<f8").reshape(m, n).astype(np.float64)
    try:
        with open(f"{path}.json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"{path}: missing provenance sidecar {path}.json") from None
    return SignalMatrix(values, meta["kind"], meta.get("params", {}), meta.get("digest", ""))


def save_matrix_triplets(signal, path):
    """Nonzero entries as ``i j value`` text lines."""
    r, c = np.nonzero(signal.values)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# pipdim-matrix kind={signal.kind} m={signal.shape[0]} n={signal.shape[1]}\n")
        for i, j in zip(r, c):
            fh.write(f"{i} {j} {float(signal.values[i, j])!r}\n")
