"""Matrix perturbation primitives: SVD, PIP loss, principal angles and bounds.

The PIP (pairwise inner product) matrix of an embedding ``E`` is ``E E^T``.
Two embeddings that differ by a right unitary factor have the same PIP
matrix, so the PIP loss ``||E1 E1^T - E2 E2^T||_F`` compares embeddings
without caring about the coordinate system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, IdentityViolation

__all__ = [
    "SvdFactors",
    "EmbeddingMatrix",
    "svd",
    "as_array",
    "pip_matrix",
    "pip_loss",
    "check_orthonormal",
    "orthogonal_complement",
    "principal_angles",
    "projector_difference_norm",
    "sylvester_direction_bound",
    "sin_theta_bound",
    "procrustes_align",
    "haar_orthogonal",
]

ORTHONORMAL_TOL = 1e-8
DIRECT_PIP_MAX_N = 2048


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.D) @ self.V.T


@dataclass(frozen=True)
class EmbeddingMatrix:
    """An ``n x k`` embedding with its exponent and origin.

    ``provenance`` is one of ``"oracle"``, ``"trained"`` or ``"external"``;
    ``info`` carries free-form notes such as numerical-rank warnings.
    """

    vectors: np.ndarray
    alpha: float | None = None
    provenance: str = "external"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError("embedding must be an n x k array with k >= 1")
        if np.isnan(v).any():
            raise ValueError("embedding contains NaN entries")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        object.__setattr__(self, "vectors", v)

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def k(self):
        return self.vectors.shape[1]


def as_array(E):
    """Return the raw array behind an embedding or array-like."""
    if isinstance(E, EmbeddingMatrix):
        return E.vectors
    return np.asarray(E, dtype=np.float64)


def svd(M, symmetric=None):
    """Full SVD ``M = U diag(D) V^T`` with non-increasing ``D``.

    For symmetric input the factors come from an eigendecomposition:
    singular values are the absolute eigenvalues and ``V`` is ``U`` with the
    columns of negative eigenvalues flipped. ``symmetric=None`` detects
    exact symmetry.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if symmetric is None:
        symmetric = M.shape[0] == M.shape[1] and np.array_equal(M, M.T)
    if symmetric:
        w, Q = np.linalg.eigh(M)
        order = np.argsort(-np.abs(w), kind="stable")
        w, Q = w[order], Q[:, order]
        signs = np.where(w < 0, -1.0, 1.0)
        return SvdFactors(Q, np.abs(w), Q * signs)
    U, D, Vt = np.linalg.svd(M)
    return SvdFactors(U, D, Vt.T)


def pip_matrix(E):
    """``E E^T``."""
    A = as_array(E)
    return A @ A.T


def pip_loss(E1, E2, method="auto"):
    """Frobenius norm of ``PIP(E1) - PIP(E2)``.

    ``method="gram"`` uses ``||A^T A||^2 + ||B^T B||^2 - 2 ||A^T B||^2`` and
    never forms an ``n x n`` matrix; it carries a cancellation floor of about
    ``1e-8 * ||A A^T||_F``. ``"auto"`` uses the direct form up to
    ``n = 2048`` and the Gram form beyond.
    """
    A, B = as_array(E1), as_array(E2)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row counts differ: {A.shape[0]} vs {B.shape[0]}")
    if method == "auto":
        method = "direct" if A.shape[0] <= DIRECT_PIP_MAX_N else "gram"
    if method == "direct":
        return float(np.linalg.norm(A @ A.T - B @ B.T))
    if method == "gram":
        sq = (np.linalg.norm(A.T @ A) ** 2 + np.linalg.norm(B.T @ B) ** 2
              - 2 * np.linalg.norm(A.T @ B) ** 2)
        return float(np.sqrt(max(sq, 0.0)))
    raise ValueError(f"unknown method {method!r}")


def check_orthonormal(X, tol=ORTHONORMAL_TOL, name="input"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] > X.shape[0]:
        raise ValueError(f"{name} must be a tall n x k matrix")
    err = np.abs(X.T @ X - np.eye(X.shape[1])).max() if X.shape[1] else 0.0
    if err > tol:
        raise ValueError(f"{name} columns are not orthonormal (max deviation {err:.2e})")
    return X


def orthogonal_complement(Y0):
    """Orthonormal basis ``Y1`` of the complement of ``span(Y0)``."""
    Y0 = np.asarray(Y0, dtype=np.float64)
    n, k = Y0.shape
    Q, _ = np.linalg.qr(Y0, mode="complete")
    return Q[:, k:]


def principal_angles(X0, Y0):
    """Principal angles between ``span(X0)`` and ``span(Y0)``, ascending.

    Cosines are the singular values of ``X0^T Y0``. Angles near zero are
    taken from the sines (singular values of ``Y0 - X0 X0^T Y0``) instead,
    where the arccos of a cosine close to 1 loses all precision.
    """
    X0 = check_orthonormal(X0, name="X0")
    Y0 = check_orthonormal(Y0, name="Y0")
    if X0.shape != Y0.shape:
        raise ValueError(f"shapes differ: {X0.shape} vs {Y0.shape}")
    C = X0.T @ Y0
    cos = np.clip(np.linalg.svd(C, compute_uv=False), 0.0, 1.0)
    sin = np.clip(np.linalg.svd(Y0 - X0 @ C, compute_uv=False), 0.0, 1.0)[::-1]
    return np.where(cos ** 2 < 0.5, np.arccos(cos), np.arcsin(sin))


def projector_difference_norm(X0, Y0, check=True, rtol=1e-8):
    """``||X0 X0^T - Y0 Y0^T||_F`` for orthonormal ``X0``, ``Y0``.

    With ``check`` the value is compared against ``sqrt(2) ||sin(Theta)||``,
    the Frobenius form of the projector-difference identity, and an
    :class:`IdentityViolation` is raised on mismatch.
    """
    X0 = check_orthonormal(X0, name="X0")
    Y0 = check_orthonormal(Y0, name="Y0")
    direct = float(np.linalg.norm(X0 @ X0.T - Y0 @ Y0.T))
    if check:
        via_angles = np.sqrt(2.0) * float(np.linalg.norm(np.sin(principal_angles(X0, Y0))))
        if abs(direct - via_angles) > rtol * max(direct, via_angles) + 1e-12:
            raise IdentityViolation(
                f"projector difference {direct!r} != sqrt(2)*||sin Theta|| {via_angles!r}"
            )
    return direct


def _split_spectrum(spectrum, k, n):
    lam = np.asarray(spectrum, dtype=np.float64)
    if n is None:
        n = lam.size
    if lam.ndim != 1 or lam.size > n:
        raise ValueError("spectrum must be a 1-D array of length at most n")
    if np.any(np.diff(lam) > 0) or np.any(lam < 0):
        raise ValueError("spectrum must be non-negative and non-increasing")
    if not 1 <= k < n:
        raise ValueError(f"split k={k} must satisfy 1 <= k < n={n}")
    full = np.zeros(n)
    full[:lam.size] = lam
    if full[k - 1] - full[k] <= 0:
        raise DegenerateSpectrumError("degenerate spectral gap")
    return full


def sylvester_direction_bound(spectrum, k, sigma, n=None):
    """First-order estimate of ``E||U~_1^T U_0||`` under iid noise of std ``sigma``.

    Returns ``sigma * sqrt(sum_{r<=k<s} (lambda_r - lambda_s)^-2)``; the
    spectrum is zero-padded to length ``n``.
    """
    full = _split_spectrum(spectrum, k, n)
    gaps = full[:k, None] - full[None, k:]
    return float(sigma * np.sqrt(np.sum(gaps ** -2.0)))


def sin_theta_bound(spectrum, k, sigma, n=None):
    """``sigma * sqrt(k (n - k)) / delta_k`` with ``delta_k = lambda_k - lambda_{k+1}``."""
    full = _split_spectrum(spectrum, k, n)
    n = full.size
    return float(sigma * np.sqrt(k * (n - k)) / (full[k - 1] - full[k]))


def procrustes_align(E, F, method="svd"):
    """Find a unitary ``T`` with ``E T ~ F``; return ``(T, ||E T - F||_F)``.

    ``method="svd"`` pairs the singular vectors of ``E = U D V^T`` and
    ``F = X L Y^T`` and returns ``T = V Y^T`` (sign-matching each pair of
    left singular vectors first); it assumes simple singular values.
    ``method="orthogonal"`` solves the orthogonal Procrustes problem from the
    SVD of ``E^T F`` and is optimal for any input.
    """
    A, B = as_array(E), as_array(F)
    if A.shape != B.shape:
        raise ValueError(f"shapes differ: {A.shape} vs {B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ValueError("inputs must be finite")
    if method == "svd":
        U, _, Vt = np.linalg.svd(A, full_matrices=False)
        X, _, Yt = np.linalg.svd(B, full_matrices=False)
        signs = np.sign(np.einsum("ij,ij->j", U, X))
        signs[signs == 0] = 1.0
        T = Vt.T @ (Yt * signs[:, None])
    elif method == "orthogonal":
        W, _, Zt = np.linalg.svd(A.T @ B)
        T = W @ Zt
    else:
        raise ValueError(f"unknown method {method!r}")
    return T, float(np.linalg.norm(A @ T - B))


def haar_orthogonal(n, k=None, rng=None):
    """First ``k`` columns of a Haar-distributed ``n x n`` orthogonal matrix.

    QR of a standard Gaussian matrix with the signs of ``diag(R)`` folded
    into ``Q``; the leading ``k`` columns of a Haar matrix have the same law
    as the ``Q`` factor of an ``n x k`` Gaussian, so only that is drawn.
    """
    rng = np.random.default_rng(rng)
    k = n if k is None else k
    Q, R = np.linalg.qr(rng.standard_normal((n, k)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d
