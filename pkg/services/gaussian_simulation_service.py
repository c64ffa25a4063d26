"""
Gaussian Simulation Service.

Exact simulation of stationary, centered, unit-variance Gaussian sequences
by circulant embedding, plus the joint covariance matrices the limit
computations sample from.

Circulant embedding:
- Embed gamma_0..gamma_{n-1} in a circulant of size M = 2^ceil(log2(2(n-1)))
- Eigenvalues by FFT; values in [-tol * max, 0) are clipped to 0 with a warning
- Anything more negative is a SpectralError
"""
import math
from typing import Sequence, Tuple

import numpy as np

from models.errors import ConfigError, SpectralError
from models.processes import AcfModel, GaussianPath
from utils.logger import get_logger
from utils.seeding import make_rng

logger = get_logger(__name__)


class GaussianSimulationService:
    """
    Simulation of the latent process X.
    """

    EIGEN_CLIP_TOL = 1e-10
    CHOLESKY_MAX_N = 512

    @classmethod
    def acf_eval(cls, model: AcfModel, lag: int) -> float:
        """
        Autocovariance gamma_lag of the model.

        Args:
            model: ACF model
            lag: Nonnegative integer lag

        Returns:
            gamma_lag (gamma_0 = 1)
        """
        return model.acf(int(lag))

    @classmethod
    def circulant_eigenvalues(cls, model: AcfModel, n: int) -> Tuple[np.ndarray, int]:
        """
        Eigenvalues of the minimal power-of-two circulant embedding.

        Returns:
            Tuple of (clipped eigenvalues, embedding size M)
        """
        size = 1 if n <= 1 else 2 ** int(math.ceil(math.log2(2 * (n - 1))))
        half = size // 2
        lags = np.concatenate([np.arange(0, half + 1), np.arange(half - 1, 0, -1)])[:size]
        row = model.covariances(lags)
        eigenvalues = np.fft.fft(row).real

        lam_max = float(eigenvalues.max())
        lam_min = float(eigenvalues.min())
        if lam_min < -cls.EIGEN_CLIP_TOL * lam_max:
            raise SpectralError(
                f"ACF {model.describe()} is not embeddable for n={n}: eigenvalue {lam_min:.3e}",
                eigenvalue=lam_min,
            )
        if lam_min < 0:
            logger.warning(f"Clipping circulant eigenvalue {lam_min:.3e} to 0 for {model.describe()}")
            eigenvalues = np.clip(eigenvalues, 0.0, None)
        return eigenvalues, size

    @classmethod
    def simulate_path(cls, model: AcfModel, n: int, seed: int) -> GaussianPath:
        """
        Draw X_1..X_n by circulant embedding.

        Args:
            model: ACF model
            n: Path length (>= 1)
            seed: Generator seed

        Returns:
            GaussianPath, deterministic given (model, n, seed)
        """
        if n < 1:
            raise ConfigError(f"Path length must be >= 1, got {n}")
        rng = make_rng(seed)
        if n == 1:
            return GaussianPath(rng.standard_normal(1), int(seed), model)

        eigenvalues, size = cls.circulant_eigenvalues(model, n)
        noise = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        spectrum = np.sqrt(eigenvalues / size) * noise
        values = np.fft.fft(spectrum).real[:n]
        return GaussianPath(values, int(seed), model)

    @classmethod
    def joint_cov_matrix(cls, model: AcfModel, index_set: Sequence[int]) -> np.ndarray:
        """
        Covariance matrix of (X_i) for i in index_set.

        Args:
            model: ACF model
            index_set: Distinct nonnegative integers

        Returns:
            Matrix M with M[a, b] = gamma_|i_a - i_b|
        """
        idx = np.asarray(list(index_set), dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise ConfigError("Index set must be a nonempty sequence")
        if np.any(idx < 0):
            raise ConfigError(f"Indices must be nonnegative, got {idx.tolist()}")
        if np.unique(idx).size != idx.size:
            raise ConfigError(f"Indices must be distinct, got {idx.tolist()}")

        matrix = model.covariances(idx[:, None] - idx[None, :])
        matrix = 0.5 * (matrix + matrix.T)
        if idx.size > 1:
            eigenvalues = np.linalg.eigvalsh(matrix)
            if eigenvalues.min() < -cls.EIGEN_CLIP_TOL * max(eigenvalues.max(), 1.0):
                raise SpectralError(
                    f"Covariance of {model.describe()} on {idx.tolist()} is not nonnegative-definite",
                    eigenvalue=float(eigenvalues.min()),
                )
        return matrix

    @classmethod
    def simulate_path_cholesky(cls, model: AcfModel, n: int, seed: int) -> GaussianPath:
        """
        Reference sampler X = L xi with L the Cholesky factor of the Toeplitz
        covariance; only for n <= 512.
        """
        if not 1 <= n <= cls.CHOLESKY_MAX_N:
            raise ConfigError(f"Cholesky sampler supports 1 <= n <= {cls.CHOLESKY_MAX_N}, got {n}")
        cov = cls.joint_cov_matrix(model, range(n))
        try:
            factor = np.linalg.cholesky(cov + 1e-12 * np.eye(n))
        except np.linalg.LinAlgError as e:
            raise SpectralError(f"Cholesky factorisation failed for {model.describe()}: {e}")
        rng = make_rng(seed)
        return GaussianPath(factor @ rng.standard_normal(n), int(seed), model)

    @classmethod
    def sample_vectors(cls, model: AcfModel, index_set: Sequence[int], n_draws: int,
                       rng: np.random.Generator) -> np.ndarray:
        """
        n_draws i.i.d. copies of (X_i)_{i in index_set}.

        Returns:
            Array of shape (n_draws, len(index_set))
        """
        cov = cls.joint_cov_matrix(model, index_set)
        eigvals, eigvecs = np.linalg.eigh(cov)
        factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        return rng.standard_normal((n_draws, cov.shape[0])) @ factor.T

    @classmethod
    def sample_autocovariance(cls, values: np.ndarray, max_lag: int) -> np.ndarray:
        """Biased sample autocovariances gamma_hat_0..gamma_hat_max_lag (mean removed)."""
        x = np.asarray(values, dtype=float)
        x = x - x.mean()
        n = x.size
        size = 2 ** int(math.ceil(math.log2(2 * n)))
        spectrum = np.fft.rfft(x, size)
        acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:max_lag + 1] / n
        return acov
