"""Linearized ADMM for orthogonality-constrained sparse PCA.

Solves::

    min_X  0.5 ||A - X X^T A||_F^2 + lam ||X||_{2,1} + mu ||X||_1
    s.t.   X^T X = I

by splitting ``X = Y`` and ``X = Z``. Each iteration takes a linearized
step on X followed by projection onto the Stiefel manifold, a row-group
shrinkage for Y, an elementwise shrinkage for Z and a dual ascent on
both multipliers. The unrolled network in :mod:`spcanet.unfolding`
calls :func:`admm_step` directly, so both paths share one arithmetic.
"""
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional

import numpy as np

from ._backend import kernels
from .errors import ContractViolation, NumericalFailure
from .linalg import (
    as_matrix,
    leading_left_singular_vectors,
    objective,
    orthogonality_error,
    spectral_norm,
    thin_svd,
)
from .prox import group_soft_threshold, soft_threshold, stiefel_project

GRADIENT_MODES = ("exact", "paper_literal")
ORTHO_TOL = 1e-8


def default_eta(a, alpha, beta):
    """Step ``1 / (2 ||A||_2^2 + alpha + beta)``, below the inverse Lipschitz bound."""
    return 1.0 / (2.0 * spectral_norm(a) ** 2 + alpha + beta)


@dataclass(frozen=True)
class SolverParams:
    """Parameters of one fixed-parameter ADMM run.

    ``eta=None`` means "use :func:`default_eta` for the data at hand";
    call :meth:`resolve` to fill it in.
    """

    lam: float = 0.1
    mu: float = 0.1
    alpha: float = 1.0
    beta: float = 1.0
    eta: Optional[float] = None
    max_iters: int = 500
    tol: float = 1e-6
    gradient_mode: str = "exact"

    def __post_init__(self):
        for name in ("lam", "mu"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ContractViolation(f"{name} must be finite and >= 0, got {v}")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ContractViolation(f"{name} must be finite and > 0, got {v}")
        if self.eta is not None and not (np.isfinite(self.eta) and self.eta > 0):
            raise ContractViolation(f"eta must be finite and > 0, got {self.eta}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ContractViolation(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.tol >= 0:
            raise ContractViolation(f"tol must be >= 0, got {self.tol}")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ContractViolation(
                f"gradient_mode must be one of {GRADIENT_MODES}, got {self.gradient_mode!r}"
            )

    def resolve(self, a):
        if self.eta is not None:
            return self
        return replace(self, eta=default_eta(a, self.alpha, self.beta))


@dataclass(frozen=True)
class SolverState:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    dual_y: np.ndarray
    dual_z: np.ndarray
    iter: int = 0
    residual_y: float = 0.0
    residual_z: float = 0.0


class IterRecord(NamedTuple):
    iter: int
    objective: float
    residual_y: float
    residual_z: float


class SolveResult(NamedTuple):
    x: np.ndarray
    state: SolverState
    history: List[IterRecord]
    converged: bool


def init_state(a, m):
    """Start from the top-``m`` left singular vectors of ``a``; Y = Z = X, zero duals."""
    a = as_matrix(a, "data")
    d, n = a.shape
    if int(m) != m or not 1 <= m <= min(d, n):
        raise ContractViolation(f"component count m={m} must lie in [1, {min(d, n)}]")
    x = leading_left_singular_vectors(a, int(m))
    zeros = np.zeros_like(x)
    return SolverState(x=x, y=x.copy(), z=x.copy(), dual_y=zeros, dual_z=zeros.copy())


def _check_dims(a, state):
    if a.shape[0] != state.x.shape[0]:
        raise ContractViolation(
            f"data has {a.shape[0]} features but the state has {state.x.shape[0]} rows"
        )


def grad_f(a, state, p, gram=None):
    """Gradient used by the linearized X step.

    ``exact`` differentiates the X-subproblem objective:
    ``(X X^T - I) A A^T X + alpha (X - Y + L/alpha) + beta (X - Z + P/beta)``.
    ``paper_literal`` replaces the first term with ``A A^T X``.
    ``gram`` is an optional precomputed ``A A^T``.
    """
    _check_dims(a, state)
    x = state.x
    g = gram @ x if gram is not None else a @ (a.T @ x)
    if p.gradient_mode == "exact":
        data_term = x @ (x.T @ g) - g
    else:
        data_term = g
    penalty = p.alpha * (x - state.y + state.dual_y / p.alpha) + p.beta * (
        x - state.z + state.dual_z / p.beta
    )
    return data_term + penalty


def update_x(a, state, p, gram=None, mixing=None):
    """Linearized step then Stiefel projection.

    ``mixing=(w_u, w_v)`` applies the learnable variant used by the
    unrolled network: ``X = proj(w_u U V^T w_v^T)``.
    """
    b = state.x - p.eta * grad_f(a, state, p, gram)
    if not np.all(np.isfinite(b)):
        raise NumericalFailure("non-finite X step", shape=b.shape)
    if mixing is None:
        x = stiefel_project(b)
    else:
        w_u, w_v = mixing
        svd = thin_svd(b)
        x = stiefel_project(w_u @ svd.u @ svd.vt @ w_v.T)
    return replace(state, x=x)


def update_y(state, p):
    return replace(state, y=group_soft_threshold(state.x + state.dual_y / p.alpha, p.lam / p.alpha))


def update_z(state, p):
    return replace(state, z=soft_threshold(state.x + state.dual_z / p.beta, p.mu / p.beta))


def update_duals(state, p):
    dual_y, ry = kernels.dual_ascent(state.dual_y, state.x, state.y, p.alpha)
    dual_z, rz = kernels.dual_ascent(state.dual_z, state.x, state.z, p.beta)
    return replace(state, dual_y=dual_y, dual_z=dual_z, residual_y=ry, residual_z=rz)


def admm_step(a, state, p, gram=None, mixing=None):
    """One full iteration in the fixed order X, Y, Z, multipliers."""
    state = update_x(a, state, p, gram, mixing)
    if __debug__:
        err = orthogonality_error(state.x)
        if not err <= ORTHO_TOL:
            raise NumericalFailure(f"X lost orthogonality: ||X^T X - I||_F = {err:.3e}")
    state = update_y(state, p)
    state = update_z(state, p)
    state = update_duals(state, p)
    return replace(state, iter=state.iter + 1)


def scaled_residual(state):
    d, m = state.x.shape
    return max(state.residual_y, state.residual_z) / np.sqrt(d * m)


def solve(a, m, p=None, x0=None, callback=None):
    """Run ADMM until the scaled primal residual drops to ``p.tol`` or
    ``p.max_iters`` iterations have run. ``tol=0`` turns the residual test
    off, so exactly ``max_iters`` iterations run.

    Starts from the SVD initialisation unless ``x0`` (orthonormal, d x m)
    is given. ``callback(state)`` is called after every iteration.
    Hitting ``max_iters`` is not an error; ``converged`` reports it.
    """
    a = as_matrix(a, "data")
    p = (p or SolverParams()).resolve(a)
    state = init_state(a, m)
    if x0 is not None:
        x0 = as_matrix(x0, "x0")
        if x0.shape != state.x.shape:
            raise ContractViolation(f"x0 has shape {x0.shape}, expected {state.x.shape}")
        state = replace(state, x=x0.copy(), y=x0.copy(), z=x0.copy())
    gram = a @ a.T
    history = []
    converged = False
    while state.iter < p.max_iters:
        state = admm_step(a, state, p, gram)
        history.append(
            IterRecord(
                state.iter,
                objective(a, state.x, p.lam, p.mu),
                state.residual_y,
                state.residual_z,
            )
        )
        if callback is not None:
            callback(state)
        if p.tol > 0 and scaled_residual(state) <= p.tol:
            converged = True
            break
    return SolveResult(state.x, state, history, converged)
