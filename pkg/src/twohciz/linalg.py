"""Log-domain determinants, Vandermonde products, random-matrix samplers and
finite-difference helpers shared by the rest of the package.

All randomness comes from an explicit :class:`numpy.random.Generator`; there is
no module-level generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SignedLogValue",
    "make_rng",
    "signed_log_det",
    "log_vandermonde",
    "log_confluent_vandermonde",
    "log_superfactorial",
    "sample_haar_unitary",
    "sample_gue",
    "default_step",
    "central_difference",
    "mixed_central_difference",
]


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``log_magnitude`` is meaningless when ``sign == 0``.
    """

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if not math.isfinite(x):
            raise ValueError(f"cannot represent non-finite value {x!r}")
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    @property
    def value(self) -> float:
        return float(self)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        sign = self.sign * other.sign
        if sign == 0:
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(sign, self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def shift(self, log_factor: float) -> "SignedLogValue":
        """Multiply by ``exp(log_factor)``."""
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign, self.log_magnitude + log_factor)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for ``(seed, stream)``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def signed_log_det(matrix, *, log_entries: bool = False, prefactor=None) -> SignedLogValue:
    """Sign and ``log|det|`` of a square real matrix.

    With ``log_entries=True`` the input holds exponents ``E`` and the matrix is
    ``prefactor * exp(E)`` (prefactor defaults to ones). Per-row and then
    per-column maxima of ``E`` are factored out before the LU factorization,
    so exponents far beyond the double range are fine.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.shape[0] == 0:
        return SignedLogValue(1, 0.0)

    offset = 0.0
    if log_entries:
        row = m.max(axis=1, keepdims=True)
        col = (m - row).max(axis=0, keepdims=True)
        m = np.exp(m - row - col)
        offset = float(row.sum() + col.sum())
        if prefactor is not None:
            p = np.asarray(prefactor, dtype=float)
            if p.shape != m.shape:
                raise ValueError("prefactor shape does not match exponents")
            m = m * p
    elif prefactor is not None:
        raise ValueError("prefactor is only meaningful with log_entries=True")

    sign, logabs = np.linalg.slogdet(m)
    if sign == 0 or not np.isfinite(logabs):
        return SignedLogValue(0, -math.inf)
    return SignedLogValue(int(np.sign(sign)), float(logabs) + offset)


def log_vandermonde(values) -> SignedLogValue:
    """``prod_{i<j} (x_j - x_i)`` in signed-log form; zero for repeated values."""
    x = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    iu, ju = np.triu_indices(x.size, k=1)
    diffs = x[ju] - x[iu]
    if np.any(diffs == 0):
        return SignedLogValue(0, -math.inf)
    sign = -1 if np.count_nonzero(diffs < 0) % 2 else 1
    return SignedLogValue(sign, float(np.sum(np.log(np.abs(diffs)))))


def log_superfactorial(n: int) -> float:
    """``log prod_{k=1}^{n-1} k!``, summed in log space so large ``n`` is fine."""
    return float(sum(math.lgamma(k + 1) for k in range(1, n)))


def log_confluent_vandermonde(data) -> SignedLogValue:
    """Confluent Vandermonde factor of clustered data.

    ``prod_i prod_{r<m_i} r!  *  prod_{i<k} (a_k - a_i)^{m_i m_k}``, where
    ``data`` exposes ``values`` (strictly increasing) and ``mults``.
    """
    values = np.asarray(data.values, dtype=float)
    mults = np.asarray(data.mults, dtype=int)
    if values.size > 1 and np.any(np.diff(values) <= 0):
        raise ValueError("cluster values must be strictly increasing")
    logmag = sum(log_superfactorial(int(m)) for m in mults)
    for i in range(values.size):
        for k in range(i + 1, values.size):
            logmag += mults[i] * mults[k] * math.log(values[k] - values[i])
    return SignedLogValue(1, float(logmag))


def sample_haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary matrix (or a stack of ``size`` of them).

    QR of a complex Ginibre matrix, with the columns re-phased so that the
    triangular factor has a positive diagonal (Mezzadri's correction).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_gue(n: int, sigma2: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Hermitian Gaussian matrix with density ``~ exp(-Tr X^2 / (2 sigma2))``.

    Diagonal entries have variance ``sigma2``; real and imaginary parts of
    off-diagonal entries have variance ``sigma2 / 2`` each, so
    ``E[Tr X^2] = n^2 sigma2``.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    shape = (n, n) if size is None else (size, n, n)
    s = math.sqrt(sigma2 / 2.0)
    g = s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return (g + np.conj(np.swapaxes(g, -1, -2))) / math.sqrt(2.0)


def default_step(x0: float, order: int = 1) -> float:
    """Step balancing truncation and roundoff: ``eps^(1/(order+2)) * max(1, |x0|)``."""
    return np.finfo(float).eps ** (1.0 / (order + 2)) * max(1.0, abs(x0))


def central_difference(f, x0: float, h: float | None = None) -> float:
    """Symmetric difference quotient ``(f(x0+h) - f(x0-h)) / 2h``."""
    if h is None:
        h = default_step(x0)
    if not h > 0:
        raise ValueError("step h must be positive")
    fp, fm = f(x0 + h), f(x0 - h)
    if not (math.isfinite(fp) and math.isfinite(fm)):
        raise ArithmeticError(f"non-finite evaluation near x0={x0}")
    return (fp - fm) / (2.0 * h)


def mixed_central_difference(f, x0: float, y0: float, h: float | None = None, k: float | None = None) -> float:
    """Four-point stencil for ``d^2 f / dx dy`` at ``(x0, y0)``."""
    if h is None:
        h = default_step(x0, order=2)
    if k is None:
        k = default_step(y0, order=2)
    if not (h > 0 and k > 0):
        raise ValueError("steps must be positive")
    vals = [f(x0 + h, y0 + k), f(x0 + h, y0 - k), f(x0 - h, y0 + k), f(x0 - h, y0 - k)]
    if not all(math.isfinite(v) for v in vals):
        raise ArithmeticError(f"non-finite evaluation near ({x0}, {y0})")
    return (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * h * k)
