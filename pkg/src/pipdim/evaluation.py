"""Word relatedness and analogy benchmarks for embeddings.

Both scores depend on the embedding only through inner products, so they
are unchanged when the embedding is multiplied on the right by a unitary
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import FormatError, PipdimError
from .perturbation import as_array

__all__ = [
    "RelatednessTestSet",
    "AnalogyTestSet",
    "RelatednessResult",
    "AnalogyResult",
    "load_relatedness",
    "load_analogy",
    "relatedness_correlation",
    "analogy_accuracy",
]


@dataclass(frozen=True)
class RelatednessTestSet:
    name: str
    records: tuple

    def __post_init__(self):
        if len(self.records) < 2:
            raise ValueError("a relatedness test set needs at least 2 records")
        clean = []
        for w1, w2, score in self.records:
            score = float(score)
            if not np.isfinite(score):
                raise ValueError(f"non-finite score for ({w1}, {w2})")
            clean.append((w1.lower(), w2.lower(), score))
        object.__setattr__(self, "records", tuple(clean))


@dataclass(frozen=True)
class AnalogyTestSet:
    name: str
    records: tuple

    def __post_init__(self):
        clean = []
        for rec in self.records:
            rec = tuple(w.lower() for w in rec)
            if len(rec) != 4 or not all(rec) or len(set(rec)) != 4:
                raise ValueError(f"analogy record needs four distinct words: {rec}")
            clean.append(rec)
        object.__setattr__(self, "records", tuple(clean))


@dataclass(frozen=True)
class RelatednessResult:
    correlation: float
    coverage: float
    pairs_used: int
    zero_norm_skipped: int


@dataclass(frozen=True)
class AnalogyResult:
    accuracy: float
    coverage: float
    questions_used: int


def load_relatedness(path, name=None):
    """Read ``word1<TAB>word2<TAB>score`` lines; ``#`` lines and headers are skipped."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise FormatError(f"{path}:{lineno}: expected 'word1<TAB>word2<TAB>score'")
            try:
                score = float(parts[2])
            except ValueError:
                if not records:
                    continue  # column header
                raise FormatError(f"{path}:{lineno}: score is not a number") from None
            records.append((parts[0], parts[1], score))
    return RelatednessTestSet(name or str(path), tuple(records))


def load_analogy(path, name=None):
    """Read the Google analogy format (``: section`` headers, 4 words per line)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith(":"):
                continue
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 words")
            lowered = [w.lower() for w in parts]
            if len(set(lowered)) != 4:
                raise FormatError(f"{path}:{lineno}: analogy words must be distinct")
            records.append(tuple(lowered))
    return AnalogyTestSet(name or str(path), tuple(records))


def _lookup(vocab):
    tokens = getattr(vocab, "tokens", vocab)
    return {tok: i for i, tok in enumerate(tokens)}


def relatedness_correlation(E, vocab, testset, method="spearman"):
    """Rank correlation between cosine similarity and human scores.

    Pairs with an out-of-vocabulary word are left out of the correlation
    and counted against ``coverage``; pairs touching a zero vector are also
    dropped and counted in ``zero_norm_skipped``.
    """
    A = as_array(E)
    index = _lookup(vocab)
    norms = np.linalg.norm(A, axis=1)
    model, human = [], []
    covered = zero = 0
    for w1, w2, score in testset.records:
        i, j = index.get(w1), index.get(w2)
        if i is None or j is None:
            continue
        covered += 1
        if norms[i] == 0 or norms[j] == 0:
            zero += 1
            continue
        model.append(A[i] @ A[j] / (norms[i] * norms[j]))
        human.append(score)
    if covered == 0:
        raise PipdimError(f"{testset.name}: no test pair is covered by the vocabulary")
    if len(model) < 2:
        raise PipdimError(f"{testset.name}: fewer than 2 usable pairs")
    if method == "spearman":
        corr = stats.spearmanr(model, human)[0]
    elif method == "pearson":
        corr = stats.pearsonr(model, human)[0]
    else:
        raise ValueError(f"unknown correlation {method!r}")
    return RelatednessResult(float(corr), covered / len(testset.records), len(model), zero)


def analogy_accuracy(E, vocab, testset, method="3cosadd", batch_size=256):
    """Fraction of ``a:b :: c:d`` questions answered with ``d``.

    ``3cosadd`` predicts ``argmax_v cos(v, b - a + c)`` over unit-normalized
    vectors; ``3cosmul`` predicts ``argmax_v cos'(v,b) cos'(v,c) / (cos'(v,a) + 1e-3)``
    with ``cos' = (cos + 1) / 2``. The question words are never predicted.
    Questions with an out-of-vocabulary word are excluded.
    """
    A = as_array(E)
    index = _lookup(vocab)
    norms = np.linalg.norm(A, axis=1, keepdims=True)
    W = np.divide(A, norms, out=np.zeros_like(A), where=norms > 0)
    rows = [tuple(index.get(w) for w in rec) for rec in testset.records]
    rows = np.array([r for r in rows if None not in r], dtype=np.int64).reshape(-1, 4)
    if rows.shape[0] == 0:
        raise PipdimError(f"{testset.name}: no analogy question is covered by the vocabulary")
    correct = 0
    for start in range(0, rows.shape[0], batch_size):
        q = rows[start:start + batch_size]
        a, b, c, d = q.T
        if method == "3cosadd":
            scores = (W[b] - W[a] + W[c]) @ W.T
        elif method == "3cosmul":
            sa, sb, sc = ((W[x] @ W.T + 1.0) / 2.0 for x in (a, b, c))
            scores = sb * sc / (sa + 1e-3)
        else:
            raise ValueError(f"unknown analogy method {method!r}")
        r = np.arange(q.shape[0])
        for col in (a, b, c):
            scores[r, col] = -np.inf
        correct += int(np.sum(np.argmax(scores, axis=1) == d))
    return AnalogyResult(correct / rows.shape[0], rows.shape[0] / len(testset.records), rows.shape[0])
