"""Closed-form proximal maps used by the ADMM subproblems."""
import numpy as np

from ._backend import kernels
from .errors import ContractViolation
from .linalg import thin_svd


def _check_tau(tau):
    if not tau >= 0:
        raise ContractViolation(f"threshold must be >= 0, got {tau}")


def soft_threshold(b, tau):
    """Elementwise shrinkage ``sign(b) * max(|b| - tau, 0)``.

    This is the minimiser of ``tau * ||Z||_1 + 0.5 * ||Z - b||_F^2``.
    Entries with ``|b| <= tau`` (including exact zeros) map to zero.
    """
    _check_tau(tau)
    return kernels.soft_threshold(np.ascontiguousarray(b, dtype=np.float64), float(tau))


def group_soft_threshold(b, tau):
    """Row-wise shrinkage: each row ``r`` becomes ``r * max(||r|| - tau, 0) / ||r||``.

    Minimiser of ``tau * ||Y||_{2,1} + 0.5 * ||Y - b||_F^2``. Zero rows stay zero.
    """
    _check_tau(tau)
    return kernels.group_soft_threshold(np.ascontiguousarray(b, dtype=np.float64), float(tau))


def stiefel_project(b):
    """Nearest matrix with orthonormal columns (orthogonal Procrustes), ``U V^T``."""
    svd = thin_svd(b)
    return svd.u @ svd.vt
