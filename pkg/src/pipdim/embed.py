"""Factorize a signal matrix into ``E = U_{:, :k} D_{:k}^alpha`` and persist it."""
from __future__ import annotations

import numpy as np

from .corpus import Vocabulary
from .errors import FormatError
from .perturbation import EmbeddingMatrix, svd
from .signal import SignalMatrix

__all__ = ["factorize_embedding", "export_embedding", "import_embedding"]


def _canonical_signs(U):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def factorize_embedding(M, k, alpha, factors=None):
    """Rank-``k`` embedding ``U~_{:, :k} diag(lambda~_{1..k})^alpha`` of ``M``.

    Parameters
    ----------
    M : SignalMatrix or ndarray
        Square signal matrix; rows follow vocabulary order.
    k : int
        Dimensionality, ``1 <= k <= n``.
    alpha : float
        Exponent in ``[0, 1]``; 0 gives orthonormal columns.
    factors : SvdFactors, optional
        Precomputed SVD of ``M``, to reuse across several ``k``.
    """
    values = M.values if isinstance(M, SignalMatrix) else np.asarray(M, dtype=np.float64)
    n = values.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    f = factors if factors is not None else svd(values)
    D = f.D[:k]
    info = {"k": k}
    tol = f.D[0] * n * np.finfo(float).eps if f.D.size else 0.0
    rank = int(np.count_nonzero(f.D > tol))
    if k > rank:
        info["warning"] = f"k={k} exceeds numerical rank {rank}"
    if isinstance(M, SignalMatrix):
        info.update(kind=M.kind, digest=M.digest)
    vectors = _canonical_signs(f.U[:, :k]) * D ** alpha
    return EmbeddingMatrix(vectors, alpha=float(alpha), provenance="trained", info=info)


def export_embedding(E, vocabulary, path):
    """Write the word2vec text format: ``n k`` header, then ``token v1 ... vk``.

    Values carry 9 significant digits.
    """
    vectors = E.vectors if isinstance(E, EmbeddingMatrix) else np.asarray(E, dtype=np.float64)
    tokens = vocabulary.tokens if isinstance(vocabulary, Vocabulary) else tuple(vocabulary)
    if len(tokens) == 0:
        raise FormatError("cannot export an embedding over an empty vocabulary")
    if len(tokens) != vectors.shape[0]:
        raise FormatError(f"{len(tokens)} tokens for {vectors.shape[0]} embedding rows")
    if len(set(tokens)) != len(tokens):
        raise FormatError("duplicate token in vocabulary")
    n, k = vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {k}\n")
        for tok, row in zip(tokens, vectors):
            if not tok or any(ch.isspace() for ch in tok):
                raise FormatError(f"token {tok!r} cannot be written in the text format")
            fh.write(tok + " " + " ".join(f"{v:.9g}" for v in row) + "\n")


def import_embedding(path):
    """Read a word2vec text file; returns ``(EmbeddingMatrix, tokens)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            n, k = (int(x) for x in header)
        except ValueError:
            raise FormatError(f"{path}:1: malformed header, expected 'n k'") from None
        if n < 1 or k < 1:
            raise FormatError(f"{path}:1: empty vocabulary or dimension in header")
        tokens, rows, seen = [], np.empty((n, k)), set()
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(tokens) == n:
                raise FormatError(f"{path}:{lineno}: more rows than the {n} declared")
            if len(parts) != k + 1:
                raise FormatError(
                    f"{path}:{lineno}: dimension mismatch, expected {k} values, got {len(parts) - 1}"
                )
            tok = parts[0]
            if tok in seen:
                raise FormatError(f"{path}:{lineno}: duplicate token {tok!r}")
            seen.add(tok)
            try:
                rows[len(tokens)] = [float(x) for x in parts[1:]]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric value") from None
            tokens.append(tok)
    if len(tokens) != n:
        raise FormatError(f"{path}: header declares {n} rows, found {len(tokens)}")
    return EmbeddingMatrix(rows, provenance="external"), tuple(tokens)
