"""From a raw text corpus to a chosen dimension and a trained embedding.

Usage: ``python3 tutorials/corpus_walkthrough.py CORPUS [RELATEDNESS.tsv]``

Any whitespace-tokenised text works; the settings below finish in under a minute on about 50k tokens.
"""
import sys

from pipdim import corpus, estimate_noise, estimate_spectrum_usvt, svd
from pipdim.embed import factorize_embedding
from pipdim.evaluation import load_relatedness, relatedness_correlation
from pipdim.selection import monte_carlo_pip_curve, select_dimension, suboptimal_intervals
from pipdim.signal import build_signal

path = sys.argv[1]
stream, vocab = corpus.tokenize(corpus.read_corpus(path), max_vocab=2000)
n = vocab.size
print(f"{len(stream.ids)} tokens, vocabulary {n}")

# the vocabulary is fixed before splitting so both halves share rows
half1, half2 = corpus.split_corpus(stream, seed=0, chunk_length=200)
m1 = build_signal(corpus.count_cooccurrences(half1, n), "ppmi")
m2 = build_signal(corpus.count_cooccurrences(half2, n), "ppmi")
sigma_hat = estimate_noise(m1, m2).sigma_hat

full = build_signal(corpus.count_cooccurrences(stream, n), "ppmi")
factors = svd(full.values)
spec = estimate_spectrum_usvt(factors.D, sigma_hat, n)
print(f"sigma_hat {sigma_hat:.4f}, estimated rank {spec.effective_rank}")

curve = monte_carlo_pip_curve(spec.lambda_hat[:spec.effective_rank], sigma_hat, 0.5, n, seed=0)
k_star = select_dimension(curve)
iv = suboptimal_intervals(curve)[10]
print(f"k* = {k_star}, 10% interval [{iv.k_lo}, {iv.k_hi}]")

E = factorize_embedding(full, k_star, 0.5, factors=factors)
if len(sys.argv) > 2:
    r = relatedness_correlation(E, vocab, load_relatedness(sys.argv[2]))
    print(f"relatedness: Spearman {r.correlation:.3f} on {r.pairs_used} pairs (coverage {r.coverage:.2f})")
