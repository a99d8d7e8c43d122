"""Matrix-level samplers and statistics.

The two-HCIZ ensemble is sampled through its conditional structure: given
unitaries ``(U, V)`` the matrix is Gaussian around
``mu(U, V) = (1-t) U^+ A U + t V^+ B V`` with GUE(sigma^2) fluctuations, and
the pair ``(U, V)`` carries the weight ``exp(Tr(U^+ A U V^+ B V))``. Writing
``W = U V^+`` that weight is ``exp(Tr(A W B W^+))``, so ``W`` comes from the
tilted unitary chain, ``U`` is Haar, and ``V = W^+ U``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import as_boundary
from .config import ChainConfig
from .hciz import sample_weighted_unitary
from .km import as_time
from .linalg import sample_gue, sample_haar_unitary

__all__ = [
    "MatrixDraws",
    "MomentSet",
    "StatisticsError",
    "conditional_mean",
    "sample_two_hciz_matrix",
    "sample_external_field_matrix",
    "closed_form_moments",
    "eigenvector_overlap_stats",
    "spectral_moment_estimate",
    "batch_means",
    "N_BATCHES",
]

N_BATCHES = 20


class StatisticsError(ValueError):
    """Too few draws for the requested estimate."""


def _dagger(X):
    return np.conj(np.swapaxes(X, -1, -2))


@dataclass(frozen=True)
class MatrixDraws:
    """A stack of Hermitian draws with their ordered eigen-decompositions.

    ``eigenvalues[k]`` is ascending; column ``j`` of ``eigenvectors[k]`` is the
    eigenvector of the ``j``-th eigenvalue, with its largest-magnitude
    component made real and positive.
    """

    matrices: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrices(cls, matrices) -> "MatrixDraws":
        M = np.asarray(matrices)
        if M.ndim == 2:
            M = M[None]
        w, V = np.linalg.eigh(M)
        idx = np.argmax(np.abs(V), axis=-2)
        pivot = np.take_along_axis(V, idx[..., None, :], axis=-2)
        V = V * (np.conj(pivot) / np.abs(pivot))
        return cls(M, w, V)

    def __len__(self):
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[-1]

    def overlaps(self) -> np.ndarray:
        """``|<e_i, psi_j>|^2`` per draw, shape ``(N, n, n)``."""
        return np.abs(self.eigenvectors) ** 2


@dataclass(frozen=True)
class MomentSet:
    e_tr_m: float
    e_tr_m2_closed: float
    e_m_scalar: float


def conditional_mean(U, V, A, B, t) -> np.ndarray:
    """``(1-t) U^+ A U + t V^+ B V`` (broadcasts over stacks of unitaries)."""
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    U, V = np.asarray(U), np.asarray(V)
    if U.shape[-1] != A.n or V.shape[-1] != B.n or A.n != B.n:
        raise ValueError("dimension mismatch between unitaries and boundary data")
    Ua = _dagger(U) @ (A.points[:, None] * U)
    Vb = _dagger(V) @ (B.points[:, None] * V)
    return (1.0 - tp.t) * Ua + tp.t * Vb


def sample_two_hciz_matrix(A, B, t, chain: ChainConfig, rng: np.random.Generator) -> MatrixDraws:
    """Draws from the two-HCIZ dressed Gaussian ensemble.

    The draw count and ordering follow ``chain`` (chain-major over the
    ``W``-chains); ``U`` and the Gaussian part are independent per draw.
    """
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    W = sample_weighted_unitary(A, B, chain, rng)
    N, n = W.shape[0], A.n
    U = sample_haar_unitary(n, rng, size=N)
    V = _dagger(W) @ U
    M = conditional_mean(U, V, A, B, tp) + sample_gue(n, tp.sigma2, rng, size=N)
    return MatrixDraws.from_matrices(M)


def sample_external_field_matrix(A, t, size: int, rng: np.random.Generator, shift: float = 0.0) -> MatrixDraws:
    """Draws from ``exp(-Tr M^2 / (2 sigma^2) + Tr(A M) / t)``, plus ``shift * I``.

    That weight is exactly Gaussian with mean ``(1-t) A``. For comparisons with
    a scalar end matrix ``B = b I`` pass ``shift = t * b``.
    """
    A, tp = as_boundary(A), as_time(t)
    n = A.n
    M = (1.0 - tp.t) * np.diag(A.points) + sample_gue(n, tp.sigma2, rng, size=size)
    if shift:
        M = M + shift * np.eye(n)
    return MatrixDraws.from_matrices(M)


def closed_form_moments(A, B, t) -> MomentSet:
    """First and second moments as the closed-form expressions give them."""
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    t_, n = tp.t, A.n
    tra, trb = A.trace(), B.trace()
    e1 = (1.0 - t_) * tra + t_ * trb
    e2 = n * n * tp.sigma2 + (1 - t_) ** 2 * A.trace(2) + t_**2 * B.trace(2) + 2 * t_ * (1 - t_) * tra * trb / n
    return MomentSet(e_tr_m=e1, e_tr_m2_closed=e2, e_m_scalar=e1 / n)


def batch_means(values, n_batches: int = N_BATCHES):
    """Mean and batch-means standard error along the first axis."""
    x = np.asarray(values, dtype=float)
    if x.shape[0] < n_batches:
        raise StatisticsError(f"need at least {n_batches} values, got {x.shape[0]}")
    usable = (x.shape[0] // n_batches) * n_batches
    b = x[:usable].reshape((n_batches, -1) + x.shape[1:]).mean(axis=1)
    return x.mean(axis=0), b.std(axis=0, ddof=1) / math.sqrt(n_batches)


def _eigenvalues(draws) -> np.ndarray:
    if isinstance(draws, MatrixDraws):
        return draws.eigenvalues
    return np.atleast_2d(np.asarray(draws, dtype=float))


def spectral_moment_estimate(draws, k: int):
    """``E[sum lambda^k]`` with a 20-batch standard error."""
    lam = _eigenvalues(draws)
    if lam.shape[0] < 100:
        raise StatisticsError("need at least 100 draws")
    if k == 0:
        return float(lam.shape[1]), 0.0
    mean, se = batch_means(np.sum(lam**k, axis=1))
    return float(mean), float(se)


def eigenvector_overlap_stats(draws: MatrixDraws):
    """Mean squared overlaps ``|<e_i, psi_j>|^2`` and their standard errors."""
    if len(draws) < 1000:
        raise StatisticsError("need at least 1000 draws")
    mean, se = batch_means(draws.overlaps())
    return mean, se
