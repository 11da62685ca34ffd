"""Noise and spectrum estimation from a pair of independent signal matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import SignalMatrix

__all__ = ["NoiseEstimate", "SpectrumEstimate", "estimate_noise", "estimate_spectrum_usvt"]


@dataclass(frozen=True)
class NoiseEstimate:
    sigma_hat: float
    m: int
    n: int


@dataclass(frozen=True)
class SpectrumEstimate:
    lambda_hat: np.ndarray
    effective_rank: int
    threshold: float

    @property
    def signal(self):
        """The strictly positive part ``lambda_hat[:effective_rank]``."""
        return self.lambda_hat[:self.effective_rank]


def estimate_noise(M1, M2):
    """Count-twice noise estimate ``||M1 - M2||_F / (2 sqrt(m n))``.

    ``M1`` and ``M2`` are built the same way from two disjoint halves of a
    corpus. Each half carries noise of variance ``2 sigma^2`` relative to the
    full corpus, so their difference has entry variance ``4 sigma^2`` and the
    estimate refers to the noise of the full-corpus matrix.
    """
    if isinstance(M1, SignalMatrix) and isinstance(M2, SignalMatrix):
        if M1.kind != M2.kind or M1.params != M2.params:
            raise ValueError(
                f"signal matrices differ in construction: {M1.kind}{M1.params} "
                f"vs {M2.kind}{M2.params}"
            )
    A = M1.values if isinstance(M1, SignalMatrix) else np.asarray(M1, dtype=np.float64)
    B = M2.values if isinstance(M2, SignalMatrix) else np.asarray(M2, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    m, n = A.shape
    sigma = float(np.linalg.norm(A - B) / (2.0 * np.sqrt(m * n)))
    return NoiseEstimate(sigma, m, n)


def estimate_spectrum_usvt(singular_values, sigma_hat, n):
    """Universal singular value thresholding ``(lambda~_i - 2 sigma sqrt(n))_+``."""
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be non-negative")
    lam = np.asarray(singular_values, dtype=np.float64)
    if lam.ndim != 1 or np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ValueError("singular values must be non-negative and non-increasing")
    threshold = 2.0 * sigma_hat * np.sqrt(n)
    lam_hat = np.maximum(lam - threshold, 0.0)
    return SpectrumEstimate(lam_hat, int(np.count_nonzero(lam_hat > 0)), float(threshold))
