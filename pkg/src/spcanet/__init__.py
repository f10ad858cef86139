"""Structured sparse PCA with learned parameters, for unsupervised feature selection."""
from ._backend import BACKEND
from .admm import SolverParams, SolverState, solve
from .errors import ContractViolation, NumericalFailure, ParseError
from .linalg import norm_fro, norm_l1, norm_l21, objective, thin_svd
from .prox import group_soft_threshold, soft_threshold, stiefel_project

__version__ = "0.1.0"
