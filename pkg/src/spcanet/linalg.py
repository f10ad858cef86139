"""Dense matrix helpers: validation, norms, thin SVD and the sparse PCA objective.

Matrices are plain float64 numpy arrays. Functions never modify their
inputs.
"""
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, NumericalFailure


class ThinSVD(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray


def as_matrix(x, name="matrix", finite=True):
    """Return ``x`` as a 2-D float64 array, checking shape and finiteness."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractViolation(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if finite and not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ContractViolation(f"{name} has a non-finite entry at ({bad[0]}, {bad[1]})")
    return arr


def _fix_signs(u, vt):
    # largest-|.| entry of each column of u made non-negative; argmax picks the lowest row on ties
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs, vt * signs[:, None]


def thin_svd(b):
    """Thin SVD of a tall ``d x m`` matrix with a fixed sign convention.

    The entry of largest magnitude in every column of ``u`` is made
    non-negative (lowest row index wins ties) and the matching row of
    ``vt`` is flipped with it, so the factorisation is reproducible.

    Raises
    ------
    ContractViolation
        If ``b`` is wide (``d < m``).
    NumericalFailure
        If LAPACK does not converge.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2:
        raise ContractViolation(f"thin_svd expects a 2-D array, got {b.ndim}-D")
    d, m = b.shape
    if d < m:
        raise ContractViolation(f"thin_svd requires rows >= cols, got {d}x{m}")
    try:
        u, s, vt = np.linalg.svd(b, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}", shape=(d, m)) from exc
    u, vt = _fix_signs(u, vt)
    return ThinSVD(u, s, vt)


def leading_left_singular_vectors(a, m):
    """Top ``m`` left singular vectors of ``a`` under the ``thin_svd`` sign rule."""
    a = np.asarray(a, dtype=np.float64)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}", shape=a.shape) from exc
    u, _ = _fix_signs(u[:, :m], vt[:m])
    return u


def spectral_norm(a):
    return float(np.linalg.norm(a, 2))


def norm_fro(x):
    return float(np.sqrt(np.sum(np.square(x))))


def norm_l1(x):
    """Sum of absolute values of all entries."""
    return float(np.sum(np.abs(x)))


def norm_l21(x):
    """Sum over rows of each row's Euclidean norm."""
    return float(np.sum(np.sqrt(np.sum(np.square(x), axis=1))))


def row_norms(x):
    return np.sqrt(np.sum(np.square(x), axis=1))


def reconstruction_error(a, x):
    """``0.5 * ||A - X X^T A||_F^2`` evaluated directly (no orthogonality assumed)."""
    r = a - x @ (x.T @ a)
    return 0.5 * float(np.sum(r * r))


def objective(a, x, lam, mu):
    """Structured sparse PCA objective.

    ``0.5 * ||A - X X^T A||_F^2 + lam * ||X||_{2,1} + mu * ||X||_1``.
    With ``lam = mu = 0`` this is the plain PCA reconstruction loss.
    """
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or x.ndim != 2 or a.shape[0] != x.shape[0]:
        raise ContractViolation(
            f"objective: data {np.shape(a)} and projection {np.shape(x)} are incompatible"
        )
    if lam < 0 or mu < 0:
        raise ContractViolation("objective: regularisation weights must be >= 0")
    return reconstruction_error(a, x) + lam * norm_l21(x) + mu * norm_l1(x)


def orthogonality_error(x):
    """``||X^T X - I||_F``."""
    g = x.T @ x
    g[np.diag_indices_from(g)] -= 1.0
    return norm_fro(g)


def subspace_angle(x, w):
    """Largest principal angle (radians) between the column spaces of two orthonormal bases."""
    # sine form stays accurate for tiny angles, unlike arccos of the cosines
    resid = w - x @ (x.T @ w)
    return float(np.arcsin(min(1.0, np.linalg.norm(resid, 2))))


def center_rows(a):
    """Subtract each feature's (row's) mean across samples."""
    return a - a.mean(axis=1, keepdims=True)
