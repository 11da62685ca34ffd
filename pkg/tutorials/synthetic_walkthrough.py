"""Pick an embedding dimension for a planted low-rank signal.

Run with ``python3 tutorials/synthetic_walkthrough.py``.
"""
import numpy as np

from pipdim import estimate_noise, estimate_spectrum_usvt, pip_loss, svd
from pipdim.embed import factorize_embedding
from pipdim.perturbation import haar_orthogonal
from pipdim.selection import monte_carlo_pip_curve, select_dimension, suboptimal_intervals, theorem3_curve

rng = np.random.default_rng(0)
n, sigma = 300, 0.3

# a signal matrix with a decaying spectrum
lam = 200.0 / np.arange(1, 41)
U = haar_orthogonal(n, lam.size, rng)
M = (U * lam) @ U.T


def noise(scale):
    Z = np.triu(rng.standard_normal((n, n)) * scale)
    return Z + np.triu(Z, 1).T


# two independent half-corpus matrices carry twice the noise variance
M1, M2 = M + noise(np.sqrt(2) * sigma), M + noise(np.sqrt(2) * sigma)
M_obs = M + noise(sigma)

sigma_hat = estimate_noise(M1, M2).sigma_hat
print(f"noise: true {sigma}, estimated {sigma_hat:.4f}")

# threshold the observed singular values to estimate the clean spectrum
spec = estimate_spectrum_usvt(svd(M_obs).D, sigma_hat, n)
print(f"estimated rank {spec.effective_rank}, threshold {spec.threshold:.2f}")

alpha = 0.5
curve = monte_carlo_pip_curve(spec.lambda_hat[:spec.effective_rank], sigma_hat, alpha, n, trials=10, seed=0)
k_star = select_dimension(curve)
print(f"Monte-Carlo k* = {k_star}")
for iv in suboptimal_intervals(curve).intervals:
    print(f"  within {iv.p:g}% of the minimum: k in [{iv.k_lo}, {iv.k_hi}]")

bound = theorem3_curve(spec.lambda_hat[:spec.effective_rank], sigma_hat, alpha, n)
print(f"closed-form bound argmin k = {select_dimension(bound)}")

# compare against the loss we could only compute knowing the clean matrix
oracle = factorize_embedding(M, lam.size, alpha)
true_loss = [pip_loss(oracle, factorize_embedding(M_obs, k, alpha)) for k in range(1, 41)]
print(f"argmin of the true PIP loss: k = {int(np.argmin(true_loss)) + 1}")

# thresholding drops the weak tail and shrinks the rest, which pulls k* down;
# the same simulation on the clean spectrum lands next to the true argmin
clean = monte_carlo_pip_curve(lam, sigma, alpha, n, trials=10, seed=0)
print(f"Monte-Carlo k* on the clean spectrum = {select_dimension(clean)}")
