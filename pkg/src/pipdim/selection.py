"""PIP-loss curves over the embedding dimensionality and their minimizers.

Given the spectrum ``lambda_1 >= ... >= lambda_d`` of a clean symmetric
signal matrix and the standard deviation ``sigma`` of additive noise, the
expected PIP loss between the oracle embedding ``U_{:, :d} D^alpha`` and
the trained embedding ``U~_{:, :k} D~^alpha`` is traded off between a bias
(signal dropped when ``k < d``) and two variance terms (noise in singular
values and in singular directions). This module computes that curve by
closed-form bounds or by Monte-Carlo simulation, and reads off the
minimizing ``k`` and the intervals of near-optimal ``k``.
"""
from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSpectrumError, IdentityViolation, NoSignalError
from .perturbation import (
    check_orthonormal,
    haar_orthogonal,
    orthogonal_complement,
    pip_loss,
    svd,
)

__all__ = [
    "PipLossCurve",
    "Interval",
    "SubOptimalIntervals",
    "BiasVarianceDecomposition",
    "Theorem2Terms",
    "Theorem3Terms",
    "VarianceGrowth",
    "theorem1_decomposition",
    "theorem2_bound",
    "theorem3_terms",
    "theorem3_bound",
    "theorem3_curve",
    "monte_carlo_pip_curve",
    "exact_pip_curve",
    "select_dimension",
    "suboptimal_intervals",
    "variance_growth_profile",
    "DEFAULT_P_LIST",
]

DEFAULT_P_LIST = (5, 10, 20, 50)
DEFAULT_TRIALS = 10


def _spectrum_digest(lam, sigma, alpha):
    h = hashlib.sha256(np.ascontiguousarray(lam, dtype=np.float64).tobytes())
    h.update(np.array([sigma, alpha], dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class PipLossCurve:
    """Loss values for ``k = 1..d``; ``losses[k - 1]`` belongs to dimensionality ``k``."""

    losses: np.ndarray
    method: str
    alpha: float
    sigma: float
    stderr: np.ndarray | None = None
    trials: int | None = None
    seed: int | None = None
    spectrum_digest: str = ""

    def __post_init__(self):
        losses = np.asarray(self.losses, dtype=np.float64)
        if losses.ndim != 1 or losses.size < 1:
            raise ValueError("a curve needs at least one value")
        if not np.all(np.isfinite(losses)) or np.any(losses < 0):
            raise ValueError("curve values must be finite and non-negative")
        if (self.stderr is not None) != (self.method == "monte_carlo"):
            raise ValueError("stderr is reported for Monte-Carlo curves only")
        object.__setattr__(self, "losses", losses)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=np.float64))

    @property
    def d(self):
        return self.losses.size

    @property
    def dims(self):
        return np.arange(1, self.d + 1)

    def to_dict(self):
        out = {
            "method": self.method,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "spectrum_digest": self.spectrum_digest,
            "losses": self.losses.tolist(),
        }
        if self.stderr is not None:
            out.update(stderr=self.stderr.tolist(), trials=self.trials, seed=self.seed)
        return out

    def to_csv(self, path):
        """Write ``k,loss,stderr`` rows (stderr empty for closed-form curves)."""
        with open(path, "w") as fh:
            fh.write("k,loss,stderr\n")
            for k, loss in zip(self.dims, self.losses):
                se = "" if self.stderr is None else repr(float(self.stderr[k - 1]))
                fh.write(f"{k},{float(loss)!r},{se}\n")


@dataclass(frozen=True)
class Interval:
    p: float
    k_lo: int
    k_hi: int
    contiguous: bool


@dataclass(frozen=True)
class SubOptimalIntervals:
    k_star: int
    reference: float
    intervals: tuple
    degenerate: bool = False

    def __getitem__(self, p):
        for iv in self.intervals:
            if iv.p == p:
                return iv
        raise KeyError(p)

    def to_dict(self):
        return {
            "k_star": self.k_star,
            "reference_suboptimality": self.reference,
            "degenerate": self.degenerate,
            "intervals": [
                {"p": iv.p, "k_lo": iv.k_lo, "k_hi": iv.k_hi, "contiguous": iv.contiguous}
                for iv in self.intervals
            ],
        }


class BiasVarianceDecomposition(NamedTuple):
    loss_sq: float
    bias: float
    variance: float
    residual: float


class Theorem2Terms(NamedTuple):
    lhs: float
    bias: float
    magnitude: float
    direction: float

    @property
    def rhs(self):
        return self.bias + self.magnitude + self.direction


class Theorem3Terms(NamedTuple):
    bias: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray
    total: np.ndarray


class VarianceGrowth(NamedTuple):
    delta_magnitude: np.ndarray
    delta_direction: np.ndarray
    rate: np.ndarray

    @property
    def delta_total(self):
        return self.delta_magnitude + self.delta_direction


def theorem1_decomposition(E, E_hat, tol=1e-8):
    """Both sides of ``||E E^T - E^ E^^T||^2 = (d - k) + 2 ||E^^T E_perp||^2``.

    ``E`` (``n x d``) and ``E_hat`` (``n x k``, ``k <= d``) must have
    orthonormal columns. ``residual`` is the absolute gap between the
    directly computed left side and the sum of the two terms.
    """
    E = check_orthonormal(E, tol, "E")
    E_hat = check_orthonormal(E_hat, tol, "E_hat")
    d, k = E.shape[1], E_hat.shape[1]
    if E.shape[0] != E_hat.shape[0]:
        raise ValueError("row counts differ")
    if k > d:
        raise ValueError(f"k={k} exceeds d={d}")
    loss_sq = float(np.linalg.norm(E @ E.T - E_hat @ E_hat.T) ** 2)
    bias = float(d - k)
    variance = 2.0 * float(np.linalg.norm(E_hat.T @ orthogonal_complement(E)) ** 2)
    return BiasVarianceDecomposition(loss_sq, bias, variance, abs(loss_sq - bias - variance))


def _telescope_weights(p, k, telescoping):
    """Weights ``w_i`` with ``diag(p_1..p_k) = sum_i w_i I_i`` (``I_i`` the leading block)."""
    nxt = np.append(p[1:], 0.0)
    w = p[:k] - nxt[:k]
    if telescoping == "exact":
        w[k - 1] = p[k - 1]
    elif telescoping != "printed":
        raise ValueError("telescoping must be 'exact' or 'printed'")
    return w


def _numerical_rank(D):
    if D.size == 0 or D[0] == 0:
        return 0
    return int(np.count_nonzero(D > D[0] * max(D.size, 1) * np.finfo(float).eps))


def theorem2_bound(M, M_tilde, alpha, k, d=None, telescoping="exact", check=True, factors=None):
    """Deterministic three-term bound on the PIP loss for one noisy draw.

    The oracle is ``U_{:, :d} D^alpha`` from ``M`` and the trained embedding
    is ``U~_{:, :k} D~^alpha`` from ``M_tilde``. Returns the actual loss and
    the bias, magnitude-variance and direction-variance terms.

    The direction term telescopes ``diag(lambda_1..lambda_k)^{2 alpha}`` into
    nested leading identity blocks, with the projector gap of block ``i``
    measured by ``||U~_{:, :i}^T U_{:, i:}||_F``. With
    ``telescoping="exact"`` the last block carries weight
    ``lambda_k^{2 alpha}``, which is what the decomposition requires;
    ``"printed"`` uses ``lambda_k^{2 alpha} - lambda_{k+1}^{2 alpha}``
    instead and is not a valid upper bound when ``k < d``.

    ``factors`` may hold precomputed ``(svd(M), svd(M_tilde))`` to reuse
    across several ``k`` and ``alpha``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if factors is None:
        factors = (svd(getattr(M, "values", M)), svd(getattr(M_tilde, "values", M_tilde)))
    f, g = factors
    if d is None:
        d = _numerical_rank(f.D)
    if not 1 <= k <= d <= f.D.size:
        raise ValueError(f"need 1 <= k <= d <= n, got k={k}, d={d}")
    lam, lam_t = f.D[:d], g.D[:k]
    E = f.U[:, :d] * lam ** alpha
    E_hat = g.U[:, :k] * lam_t ** alpha
    lhs = pip_loss(E, E_hat)

    p = lam ** (2 * alpha)
    bias = float(np.sqrt(np.sum(lam[k:] ** (4 * alpha))))
    magnitude = float(np.sqrt(np.sum((p[:k] - lam_t ** (2 * alpha)) ** 2)))
    cross = g.U[:, :k].T @ f.U
    gaps = np.array([np.linalg.norm(cross[:i, i:]) for i in range(1, k + 1)])
    direction = float(np.sqrt(2.0) * np.sum(_telescope_weights(p, k, telescoping) * gaps))
    terms = Theorem2Terms(lhs, bias, magnitude, direction)
    if check and telescoping == "exact" and lhs > terms.rhs + 1e-8:
        raise IdentityViolation(f"PIP loss {lhs!r} exceeds bound {terms.rhs!r} at k={k}")
    return terms


def _as_spectrum(spectrum, n):
    lam = np.asarray(spectrum, dtype=np.float64)
    if lam.ndim != 1 or lam.size < 1:
        raise ValueError("spectrum must be a non-empty 1-D array")
    if np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ValueError("spectrum must be non-negative and non-increasing")
    if lam.size > n:
        raise ValueError(f"spectrum has {lam.size} entries but n={n}")
    return lam


def _cross_gap_sums(lam, n, kmax):
    """``S(i) = sum_{r <= i < s <= n} (lambda_r - lambda_s)^-2`` for ``i = 1..kmax``.

    ``lambda_s = 0`` for ``s > d``. Accumulates column-wise so that only
    positive numbers are ever added.
    """
    d = lam.size
    acc = np.zeros(d)
    tail = 0.0
    out = np.empty(kmax)
    for i in range(kmax):
        gaps = lam[i] - lam[i + 1:]
        if gaps.size and gaps.min() <= 0:
            raise DegenerateSpectrumError("repeated singular values: bound undefined")
        acc[i + 1:] += gaps ** -2.0
        if n > d:
            if lam[i] <= 0:
                raise DegenerateSpectrumError("repeated singular values: bound undefined")
            tail += (n - d) / lam[i] ** 2
        out[i] = acc[i + 1:].sum() + tail
    return out


def theorem3_terms(spectrum, sigma, alpha, n, kmax=None, telescoping="printed",
                   alpha0_range="printed", mirsky=False):
    """Per-``k`` terms of the expected-PIP-loss bound for ``k = 1..kmax``.

    ``spectrum`` holds ``lambda_1..lambda_d`` and is zero-padded to length
    ``n``. For ``alpha > 0`` the three terms are the bias, the magnitude
    variance ``2 sqrt(2n) alpha sigma sqrt(sum_{i<=k} lambda_i^{4 alpha - 2})``
    and the direction variance built from
    ``sigma sqrt(sum_{r<=i<s} (lambda_r - lambda_s)^-2)``. The default
    ``telescoping="printed"`` weights block ``i`` by
    ``lambda_i^{2 alpha} - lambda_{i+1}^{2 alpha}`` for every ``i <= k``, the
    published closed form; ``"exact"`` gives the last block
    ``lambda_k^{2 alpha}`` as in :func:`theorem2_bound` and is never smaller. ``mirsky=True`` replaces the
    magnitude term by ``k sigma`` at ``alpha = 0.5``.

    For ``alpha = 0`` the bound is
    ``sqrt(d - k + 2 sigma^2 sum_{r<=k, s>d} (lambda_r - lambda_s)^-2)``;
    ``bias`` then holds ``sqrt(d - k)``, ``direction`` the square root of the
    noise part, ``magnitude`` zeros and ``total`` the bound itself.
    ``alpha0_range="k"`` lets ``s`` run over ``s > k`` instead of ``s > d``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    lam = _as_spectrum(spectrum, n)
    d = lam.size
    kmax = d if kmax is None else kmax
    if not 1 <= kmax <= d:
        raise ValueError(f"k must satisfy 1 <= k <= d={d}")
    ks = np.arange(1, kmax + 1)

    if alpha == 0:
        if alpha0_range == "printed":
            top = lam[:kmax]
            if n > d and np.any(top <= 0):
                raise DegenerateSpectrumError("repeated singular values: bound undefined")
            noise = (n - d) * np.cumsum(top ** -2.0) if n > d else np.zeros(kmax)
        elif alpha0_range == "k":
            noise = _cross_gap_sums(lam, n, kmax)
        else:
            raise ValueError("alpha0_range must be 'printed' or 'k'")
        bias = np.sqrt(d - ks.astype(float))
        direction = np.sqrt(2.0 * sigma ** 2 * noise)
        total = np.sqrt(bias ** 2 + direction ** 2)
        return Theorem3Terms(bias, np.zeros(kmax), direction, total)

    p4 = lam ** (4 * alpha)
    tail = np.append(np.cumsum(p4[::-1])[::-1], 0.0)
    bias = np.sqrt(tail[1:kmax + 1])
    if mirsky and alpha == 0.5:
        magnitude = ks * float(sigma)
    else:
        if np.any(lam[:kmax] <= 0) and 4 * alpha - 2 < 0:
            raise DegenerateSpectrumError("zero singular value inside the retained block")
        magnitude = 2 * np.sqrt(2 * n) * alpha * sigma * np.sqrt(np.cumsum(lam[:kmax] ** (4 * alpha - 2)))
    if sigma == 0:
        direction = np.zeros(kmax)
    else:
        root_s = np.sqrt(_cross_gap_sums(lam, n, kmax))
        p = lam ** (2 * alpha)
        nxt = np.append(p[1:], 0.0)[:kmax]
        steps = (p[:kmax] - nxt) * root_s
        if telescoping == "exact":
            # weights p_i - p_{i+1} for i < k and p_k for the last block
            direction = np.concatenate([[0.0], np.cumsum(steps)[:-1]]) + p[:kmax] * root_s
        elif telescoping == "printed":
            direction = np.cumsum(steps)
        else:
            raise ValueError("telescoping must be 'exact' or 'printed'")
        direction = np.sqrt(2.0) * sigma * direction
    return Theorem3Terms(bias, magnitude, direction, bias + magnitude + direction)


def theorem3_bound(spectrum, sigma, alpha, k, n, **kwargs):
    """Closed-form bound on ``E||E E^T - E^ E^^T||`` at a single ``k``."""
    return float(theorem3_terms(spectrum, sigma, alpha, n, kmax=k, **kwargs).total[k - 1])


def theorem3_curve(spectrum, sigma, alpha, n, **kwargs):
    """The closed-form bound for every ``k = 1..d`` as a :class:`PipLossCurve`."""
    lam = _as_spectrum(spectrum, n)
    terms = theorem3_terms(lam, sigma, alpha, n, **kwargs)
    return PipLossCurve(terms.total, "theorem3", float(alpha), float(sigma),
                        spectrum_digest=_spectrum_digest(lam, sigma, alpha))


def _signal_part(spectrum):
    lam = np.asarray(spectrum, dtype=np.float64)
    if lam.ndim != 1 or np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ValueError("spectrum must be non-negative and non-increasing")
    return lam[lam > 0]


def _loss_curve_from_factors(U, lam, U_t, lam_t, alpha):
    """PIP loss between ``U diag(lam)^a`` and ``U_t[:, :k] diag(lam_t)^a`` for all ``k``.

    Uses ``||E E^T||^2 + ||E^ E^^T||^2 - 2 ||E^T E^||^2`` with orthonormal
    ``U`` and ``U_t`` so every term is a running sum over columns.
    """
    proj = (U.T @ U_t) ** 2
    captured = (lam ** (2 * alpha)) @ proj
    wt = lam_t ** (2 * alpha)
    sq = np.sum(lam ** (4 * alpha)) + np.cumsum(wt ** 2) - 2.0 * np.cumsum(wt * captured)
    return np.sqrt(np.maximum(sq, 0.0))


def exact_pip_curve(M, M_tilde, alpha, d=None):
    """Actual PIP loss of ``k``-dim embeddings of ``M_tilde`` against the oracle of ``M``."""
    f = svd(getattr(M, "values", M))
    g = svd(getattr(M_tilde, "values", M_tilde))
    if d is None:
        d = _numerical_rank(f.D)
    if d < 1:
        raise NoSignalError("no signal detected")
    losses = _loss_curve_from_factors(f.U[:, :d], f.D[:d], g.U[:, :d], g.D[:d], alpha)
    return PipLossCurve(losses, "exact_oracle", float(alpha), float("nan"))


def _symmetric_noise(n, sigma, rng):
    Z = np.triu(rng.standard_normal((n, n)) * sigma)
    return Z + np.triu(Z, 1).T


def _mc_trial(lam, sigma, alpha, n, seed_seq):
    rng = np.random.default_rng(seed_seq)
    d = lam.size
    U = haar_orthogonal(n, d, rng)
    M_tilde = (U * lam) @ U.T + _symmetric_noise(n, sigma, rng)
    w, Q = np.linalg.eigh(M_tilde)
    top = np.argsort(-np.abs(w), kind="stable")[:d]
    return _loss_curve_from_factors(U, lam, Q[:, top], np.abs(w[top]), alpha)


def _default_workers():
    try:
        return max(1, int(os.environ.get("PIPDIM_THREADS", "1")))
    except ValueError:
        return 1


def monte_carlo_pip_curve(spectrum, sigma, alpha, n, trials=DEFAULT_TRIALS, seed=None, workers=None):
    """Simulated expected PIP loss for ``k = 1..d``.

    Each trial draws a Haar-random ``U``, forms ``M = U diag(lambda) U^T``,
    adds symmetric noise whose upper triangle and diagonal are iid
    ``N(0, sigma^2)``, and compares the oracle ``U diag(lambda)^alpha`` with
    the top-``k`` factors of ``M + Z`` (singular values are absolute
    eigenvalues). Trial ``t`` draws from the ``t``-th child of
    ``SeedSequence(seed)``, so the curve does not depend on ``workers``.

    Parameters
    ----------
    spectrum : array_like
        Estimated signal spectrum; only its strictly positive entries count.
    sigma : float
        Noise standard deviation.
    alpha : float
        Exponent in ``[0, 1]``.
    n : int
        Matrix dimension (vocabulary size).
    trials : int
        Number of simulated draws.
    seed : int, optional
        Master seed. When omitted a fresh one is drawn and recorded on the
        returned curve.
    workers : int, optional
        Threads running trials concurrently; defaults to ``PIPDIM_THREADS``
        or 1.
    """
    lam = _signal_part(spectrum)
    if lam.size == 0:
        raise NoSignalError("no signal detected")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if lam.size > n:
        raise ValueError(f"effective rank {lam.size} exceeds n={n}")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2 ** 63))
    children = np.random.SeedSequence(seed).spawn(trials)
    workers = workers or _default_workers()

    def run(t):
        return _mc_trial(lam, sigma, alpha, n, children[t])

    if workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(trials)))
    else:
        rows = [run(t) for t in range(trials)]
    samples = np.vstack(rows)
    mean = samples.mean(axis=0)
    if trials > 1:
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    else:
        stderr = np.zeros_like(mean)
    return PipLossCurve(mean, "monte_carlo", float(alpha), float(sigma), stderr=stderr,
                        trials=trials, seed=seed,
                        spectrum_digest=_spectrum_digest(lam, sigma, alpha))


def _losses(curve):
    return curve.losses if isinstance(curve, PipLossCurve) else np.asarray(curve, dtype=np.float64)


def select_dimension(curve):
    """``argmin_k loss(k)`` with ties going to the smaller ``k``."""
    losses = _losses(curve)
    if losses.size == 0:
        raise ValueError("empty curve")
    return int(np.argmin(losses)) + 1


def suboptimal_intervals(curve, p_list=DEFAULT_P_LIST):
    """Dimensionalities whose extra loss is within ``p%`` of a 1-D embedding's.

    The sub-optimality of ``k`` is ``loss(k) - loss(k*)``. For each ``p``
    the interval spans every ``k`` whose sub-optimality is at most
    ``p/100`` times that of ``k = 1``; ``contiguous`` is False when that
    set has holes. A flat start (``loss(1) == loss(k*)``) gives ``[1, d]``
    everywhere and sets ``degenerate``.
    """
    losses = _losses(curve)
    if losses.size == 0:
        raise ValueError("empty curve")
    k_star = select_dimension(losses)
    excess = losses - losses[k_star - 1]
    reference = float(excess[0])
    d = losses.size
    intervals = []
    for p in sorted(p_list):
        if reference <= 0:
            intervals.append(Interval(p, 1, d, True))
            continue
        ks = np.flatnonzero(excess <= p / 100.0 * reference) + 1
        lo, hi = int(ks[0]), int(ks[-1])
        intervals.append(Interval(p, lo, hi, bool(ks.size == hi - lo + 1)))
    return SubOptimalIntervals(k_star, reference, tuple(intervals), degenerate=reference <= 0)


def variance_growth_profile(spectrum, sigma, alpha, n, **kwargs):
    """Per-``k`` growth of the two variance terms of the closed-form bound.

    Returns the increments ``term(k) - term(k - 1)`` (with ``term(0) = 0``)
    of the magnitude and direction variance terms, and the reference rate
    ``lambda_k^{2 alpha - 1}``. At ``alpha = 0`` the magnitude term vanishes
    and the direction entry tracks the noise part of that branch.
    """
    lam = _as_spectrum(spectrum, n)
    terms = theorem3_terms(lam, sigma, alpha, n, **kwargs)
    with np.errstate(divide="ignore"):
        rate = lam ** (2 * alpha - 1)
    return VarianceGrowth(np.diff(terms.magnitude, prepend=0.0),
                          np.diff(terms.direction, prepend=0.0), rate)
