"""
Gauss-Hermite quadrature against the standard normal law.

Nodes and weights come from numpy's probabilists' Hermite module
(weight exp(-x^2/2)); weights are renormalised to sum to one so that
``sum(w * f(x))`` approximates E[f(X)] for X ~ N(0, 1).
"""
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from models.errors import NumericError, ShapeError


@lru_cache(maxsize=16)
def normal_nodes(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and probability weights for E[f(X)], X ~ N(0,1)."""
    nodes, weights = hermite_e.hermegauss(n_nodes)
    weights = weights / np.sqrt(2.0 * np.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def expect_1d(func: Callable[[np.ndarray], np.ndarray], n_nodes: int = 64) -> float:
    """E[func(X)] for standard normal X."""
    nodes, weights = normal_nodes(n_nodes)
    with np.errstate(over='ignore', invalid='ignore'):
        values = np.asarray(func(nodes), dtype=float)
        total = float(np.sum(weights * values))
    return total


def factor_covariance(cov: np.ndarray) -> np.ndarray:
    """
    Square-root factor L with L @ L.T == cov for a PSD matrix.

    Uses the symmetric eigendecomposition so singular matrices (repeated
    indices, degenerate ACFs) are accepted.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ShapeError(f"Covariance must be square, got shape {cov.shape}")
    eigvals, eigvecs = np.linalg.eigh(0.5 * (cov + cov.T))
    if eigvals.min() < -1e-8 * max(eigvals.max(), 1.0):
        raise NumericError(f"Covariance is not nonnegative-definite (min eigenvalue {eigvals.min():.3e})")
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def tensor_grid(dim: int, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Standard-normal tensor grid.

    Returns:
        Tuple of (points with shape (n_nodes**dim, dim), weights summing to 1)
    """
    nodes, weights = normal_nodes(n_nodes)
    mesh = np.meshgrid(*([nodes] * dim), indexing='ij')
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*([weights] * dim), indexing='ij')
    w = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return points, w


def expect_gaussian(func: Callable[[np.ndarray], np.ndarray], cov: np.ndarray,
                    n_nodes: int = 64) -> np.ndarray:
    """
    E[func(X)] for X ~ N(0, cov) by tensor Gauss-Hermite quadrature.

    ``func`` receives an array of shape (n_points, dim) and returns either
    shape (n_points,) or (n_points, k); the result has shape () or (k,).
    """
    factor = factor_covariance(cov)
    dim = factor.shape[0]
    if dim > 3:
        raise ShapeError(f"Tensor quadrature is capped at dimension 3, got {dim}")
    points, weights = tensor_grid(dim, n_nodes)
    x = points @ factor.T
    values = np.asarray(func(x), dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))
