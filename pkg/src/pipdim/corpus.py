"""Tokenization, vocabulary building and windowed co-occurrence counting.

Tokens are lowercased and split on whitespace. Words that do not make it
into the vocabulary are deleted from the stream, so a context window closes
over the gap they leave behind.
"""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CorpusError, FormatError

__all__ = [
    "TokenStream",
    "Vocabulary",
    "CooccurrenceCounts",
    "tokenize",
    "read_corpus",
    "count_cooccurrences",
    "split_corpus",
    "save_vocabulary",
    "load_vocabulary",
    "save_counts",
    "load_counts",
]

DEFAULT_WINDOW = 5
DEFAULT_MAX_VOCAB = 10000
DEFAULT_CHUNK_LENGTH = 1000


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple
    counts: np.ndarray

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise CorpusError("vocabulary must hold at least one token")
        if len(set(self.tokens)) != len(self.tokens):
            raise CorpusError("vocabulary contains duplicate tokens")
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.tokens),):
            raise CorpusError("one count per token is required")
        if np.any(np.diff(counts) > 0):
            raise CorpusError("vocabulary counts must be non-increasing")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "counts", counts)

    @property
    def size(self):
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def index(self):
        """Map token -> id."""
        return {tok: i for i, tok in enumerate(self.tokens)}


@dataclass(frozen=True)
class TokenStream:
    """Ordered token ids.

    ``segments`` optionally holds the start offsets of independent pieces
    of text (e.g. the chunks of one half of a split corpus); no window
    crosses a segment boundary.
    """

    ids: np.ndarray
    segments: np.ndarray | None = None

    def __post_init__(self):
        ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        if ids.ndim != 1:
            raise CorpusError("token ids must form a 1-D sequence")
        if ids.size and ids.min() < 0:
            raise CorpusError("token ids must be non-negative")
        object.__setattr__(self, "ids", ids)
        if self.segments is not None:
            seg = np.asarray(self.segments, dtype=np.int64)
            if seg.size == 0 or seg[0] != 0 or np.any(np.diff(seg) <= 0) or seg[-1] > max(ids.size - 1, 0):
                raise CorpusError("segment offsets must start at 0 and be strictly increasing")
            object.__setattr__(self, "segments", seg)

    @property
    def total_tokens(self):
        return int(self.ids.size)

    def __len__(self):
        return int(self.ids.size)


@dataclass(frozen=True)
class CooccurrenceCounts:
    """Symmetric window co-occurrence counts ``C`` over a vocabulary.

    ``C[i, j]`` is the number of ordered (center, context) pairs with
    center word ``i`` and context word ``j``.
    """

    matrix: sp.csr_matrix
    window: int
    row_marginals: np.ndarray = field(init=False)
    total_pairs: float = field(init=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise CorpusError("co-occurrence matrix must be square")
        if m.nnz and m.data.min() < 0:
            raise CorpusError("co-occurrence counts must be non-negative")
        if (m - m.T).count_nonzero():
            raise CorpusError("co-occurrence matrix must be symmetric")
        object.__setattr__(self, "matrix", m)
        marg = np.asarray(m.sum(axis=1)).ravel()
        object.__setattr__(self, "row_marginals", marg)
        object.__setattr__(self, "total_pairs", float(marg.sum()))

    @property
    def n(self):
        return self.matrix.shape[0]

    def toarray(self):
        return self.matrix.toarray()


def read_corpus(paths):
    """Read and concatenate raw corpus files as bytes."""
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    parts = []
    for p in paths:
        with open(p, "rb") as fh:
            parts.append(fh.read())
    return b"\n".join(parts)


def tokenize(data, max_vocab=DEFAULT_MAX_VOCAB, min_count=0):
    """Split UTF-8 text into lowercased whitespace tokens.

    Parameters
    ----------
    data : bytes or str
        Raw corpus text.
    max_vocab : int
        Keep at most this many of the most frequent words.
    min_count : int
        Drop words seen fewer than ``min_count`` times.

    Returns
    -------
    stream : TokenStream
        Ids of the retained tokens, in corpus order.
    vocab : Vocabulary
        Tokens by descending frequency, ties broken lexicographically.
    """
    if isinstance(data, (bytes, bytearray, memoryview)):
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"invalid UTF-8 at byte offset {exc.start}") from exc
    else:
        text = data
    if max_vocab < 1:
        raise CorpusError("max_vocab must be at least 1")
    words = text.lower().split()
    if not words:
        raise CorpusError("empty corpus")
    freq = Counter(words)
    ranked = sorted(
        ((w, c) for w, c in freq.items() if c >= min_count),
        key=lambda wc: (-wc[1], wc[0]),
    )[:max_vocab]
    if not ranked:
        raise CorpusError(f"no token reaches min_count={min_count}")
    vocab = Vocabulary(tuple(w for w, _ in ranked), np.array([c for _, c in ranked]))
    index = vocab.index()
    ids = np.fromiter((index[w] for w in words if w in index), dtype=np.int64)
    return TokenStream(ids), vocab


def _segment_labels(stream):
    labels = np.zeros(stream.total_tokens, dtype=np.int64)
    if stream.segments is not None and stream.segments.size > 1:
        labels[stream.segments[1:]] = 1
        labels = np.cumsum(labels)
    return labels


def count_cooccurrences(stream, n, window=DEFAULT_WINDOW):
    """Count ordered (center, context) pairs within ``window`` positions.

    Every position sees each neighbour at distance 1..window on both sides,
    so the result is symmetric and ``total_pairs`` equals the number of
    ordered in-window pairs.
    """
    if window < 1:
        raise CorpusError("window must be at least 1")
    ids = stream.ids
    if ids.size and ids.max() >= n:
        raise CorpusError(f"token id {ids.max()} outside vocabulary of size {n}")
    labels = _segment_labels(stream)
    forward = sp.csr_matrix((n, n), dtype=np.float64)
    for offset in range(1, min(window, max(ids.size - 1, 0)) + 1):
        centre, context = ids[:-offset], ids[offset:]
        same = labels[:-offset] == labels[offset:]
        centre, context = centre[same], context[same]
        ones = np.ones(centre.size, dtype=np.float64)
        forward = forward + sp.csr_matrix((ones, (centre, context)), shape=(n, n))
    return CooccurrenceCounts(forward + forward.T, window)


def split_corpus(stream, seed, chunk_length=DEFAULT_CHUNK_LENGTH):
    """Randomly deal fixed-length chunks of ``stream`` into two halves.

    A random permutation of chunk indices is drawn from ``seed``; the first
    half of the permutation goes to the first stream. With an odd number of
    chunks the last one goes to a half picked by a coin flip. Chunks keep their
    corpus order inside each half and are marked as separate segments.
    """
    if chunk_length < 1:
        raise CorpusError("chunk_length must be at least 1")
    total = stream.total_tokens
    n_chunks = -(-total // chunk_length)
    if n_chunks < 2:
        raise CorpusError(
            f"stream of {total} tokens yields fewer than 2 chunks of length "
            f"{chunk_length}; use a smaller chunk length"
        )
    rng = np.random.default_rng(seed)
    # with an odd count the trailing (possibly short) chunk is dealt last to
    # a random half, so the halves never differ by more than one chunk length
    paired = n_chunks - n_chunks % 2
    order = rng.permutation(paired)
    first, second = np.sort(order[:paired // 2]), np.sort(order[paired // 2:])
    if n_chunks % 2:
        if rng.random() < 0.5:
            first = np.append(first, n_chunks - 1)
        else:
            second = np.append(second, n_chunks - 1)
    return (
        _gather_chunks(stream.ids, first, chunk_length),
        _gather_chunks(stream.ids, second, chunk_length),
    )


def _gather_chunks(ids, chunk_ids, chunk_length):
    pieces = [ids[c * chunk_length:(c + 1) * chunk_length] for c in chunk_ids]
    lengths = np.array([len(p) for p in pieces])
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    return TokenStream(np.concatenate(pieces), segments=starts)


def save_vocabulary(vocab, path):
    with open(path, "w", encoding="utf-8") as fh:
        for tok, c in zip(vocab.tokens, vocab.counts):
            fh.write(f"{tok}\t{c}\n")


def load_vocabulary(path):
    tokens, counts = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'token<TAB>count'")
            try:
                counts.append(int(parts[1]))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: count is not an integer") from None
            tokens.append(parts[0])
    return Vocabulary(tuple(tokens), np.array(counts, dtype=np.int64))


def save_counts(counts, path):
    """Write counts as text triplets ``i j value`` after a ``# n window`` header.

    Values are written with ``repr`` precision so a reload is exact.
    """
    coo = counts.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# pipdim-counts n={counts.n} window={counts.window}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {float(v)!r}\n")


def load_counts(path):
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        try:
            if header[:2] != ["#", "pipdim-counts"]:
                raise ValueError
            fields = dict(item.split("=", 1) for item in header[2:])
            n, window = int(fields["n"]), int(fields["window"])
        except (ValueError, KeyError):
            raise FormatError(f"{path}:1: malformed counts header") from None
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 'i j value'")
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
    m = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.float64)
    return CooccurrenceCounts(m, window)
