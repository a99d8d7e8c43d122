"""Karlin-McGregor law of non-intersecting Brownian bridges at time ``t``.

The eigenvalue density is a biorthogonal ensemble

    det[f_u(lambda_j)] det[g_v(lambda_j)] exp(-sum lambda^2 / (2 sigma^2))

with ``f_(i,r)(x) = (x/t)^r e^{a_i x/t}`` and
``g_(j,s)(x) = (x/(1-t))^s e^{b_j x/(1-t)}``; the powers are the confluent
limits for repeated boundary points. Linear statistics reduce to traces of
Gram matrices built from tilted Gaussian moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .boundary import BoundaryData, as_boundary
from .config import ChainConfig
from .linalg import SignedLogValue, signed_log_det

__all__ = [
    "TimeParameter",
    "as_time",
    "DegeneracyError",
    "heat_kernel",
    "km_log_density",
    "km_log_density_batch",
    "km_normalization_log",
    "gram_entries_log",
    "tilted_gaussian_moment",
    "tilted_moment_ratios",
    "exact_linear_statistic",
    "sample_km_mcmc",
    "km_normalization_quadrature",
]


class DegeneracyError(ArithmeticError):
    """A Gram or moment system is numerically singular."""

    def __init__(self, message, condition=math.inf):
        super().__init__(f"{message} (condition number ~ {condition:.3g})")
        self.condition = condition


@dataclass(frozen=True)
class TimeParameter:
    t: float

    def __post_init__(self):
        if not 0.0 < float(self.t) < 1.0:
            raise ValueError(f"t must lie in (0, 1), got {self.t!r}")
        object.__setattr__(self, "t", float(self.t))

    @property
    def sigma2(self) -> float:
        return self.t * (1.0 - self.t)


def as_time(t) -> TimeParameter:
    return t if isinstance(t, TimeParameter) else TimeParameter(t)


def heat_kernel(s: float, x, y):
    """Transition density of standard Brownian motion over time ``s``."""
    if not s > 0:
        raise ValueError("time increment s must be positive")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = np.exp(-((x - y) ** 2) / (2.0 * s)) / math.sqrt(2.0 * math.pi * s)
    return float(out) if out.ndim == 0 else out


def _family(data: BoundaryData, scale: float, lam: np.ndarray):
    """Exponents and prefactors of the row family at points ``lam`` (..., n)."""
    rows = data.rows()
    vals = np.array([data.values[i] for i, _ in rows])
    pows = np.array([r for _, r in rows])
    x = lam[..., None, :] / scale
    expo = vals[:, None] * x
    pref = x ** pows[:, None]
    return expo, pref


def km_log_density(lam, A, B, t) -> float:
    """Unnormalized log density of the eigenvalue configuration ``lam``.

    Returns ``-inf`` where the determinant product vanishes (coincident
    points). Symmetric under permutations of ``lam``.
    """
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    lam = np.asarray(lam, dtype=float).ravel()
    if not (lam.size == A.n == B.n):
        raise ValueError(f"size mismatch: lambda has {lam.size}, A has {A.n}, B has {B.n}")
    ea, pa = _family(A, tp.t, lam)
    eb, pb = _family(B, 1.0 - tp.t, lam)
    da = signed_log_det(ea, log_entries=True, prefactor=pa)
    db = signed_log_det(eb, log_entries=True, prefactor=pb)
    prod = da * db
    if prod.sign <= 0:
        return -math.inf
    return prod.log_magnitude - float(lam @ lam) / (2.0 * tp.sigma2)


def _batch_logdet(expo, pref):
    off = expo.max(axis=-2, keepdims=True)
    sign, logabs = np.linalg.slogdet(np.exp(expo - off) * pref)
    return sign, logabs + off.sum(axis=(-2, -1))


def km_log_density_batch(lam, A: BoundaryData, B: BoundaryData, t) -> np.ndarray:
    """Vectorized :func:`km_log_density` over the leading axis of ``lam``."""
    tp = as_time(t)
    lam = np.asarray(lam, dtype=float)
    sa, la = _batch_logdet(*_family(A, tp.t, lam))
    sb, lb = _batch_logdet(*_family(B, 1.0 - tp.t, lam))
    out = la + lb - np.sum(lam * lam, axis=-1) / (2.0 * tp.sigma2)
    return np.where(sa * sb > 0, out, -np.inf)


def _derivative_prefactors(rmax: int, smax: int, alpha: float, beta: float):
    """Polynomials ``P_{r,s}(a, b)`` with
    ``d_a^r d_b^s exp(alpha a^2 + beta b^2 + a b) = P_{r,s} exp(...)``.

    Coefficient arrays are indexed ``[deg_a, deg_b]``.
    """
    size = rmax + smax + 2
    base = np.zeros((size, size))
    base[0, 0] = 1.0
    grid = [[None] * (smax + 1) for _ in range(rmax + 1)]
    grid[0][0] = base
    mul_a = np.zeros((2, 2))
    mul_a[1, 0], mul_a[0, 1] = 2.0 * alpha, 1.0  # 2 alpha a + b
    mul_b = np.zeros((2, 2))
    mul_b[0, 1], mul_b[1, 0] = 2.0 * beta, 1.0  # 2 beta b + a

    def times(c, m):
        out = np.zeros_like(c)
        out[1:, :] += m[1, 0] * c[:-1, :]
        out[:, 1:] += m[0, 1] * c[:, :-1]
        return out

    def d_a(c):
        out = np.zeros_like(c)
        out[:-1, :] = c[1:, :] * np.arange(1, size)[:, None]
        return out

    def d_b(c):
        out = np.zeros_like(c)
        out[:, :-1] = c[:, 1:] * np.arange(1, size)[None, :]
        return out

    for r in range(rmax + 1):
        if r > 0:
            prev = grid[r - 1][0]
            grid[r][0] = times(prev, mul_a) + d_a(prev)
        for s in range(1, smax + 1):
            prev = grid[r][s - 1]
            grid[r][s] = times(prev, mul_b) + d_b(prev)
    return grid


def km_normalization_log(A, B, t) -> SignedLogValue:
    """``log`` of the integral of the unnormalized density over ``R^n``.

    Andreief turns the ``n``-fold integral into ``n!`` times the determinant of
    one-dimensional integrals; for clustered data each entry is
    ``sqrt(2 pi sigma^2) d_a^r d_b^s exp(alpha a^2 + beta b^2 + a b)`` with
    ``alpha = (1-t)/(2t)``, ``beta = t/(2(1-t))``, the derivatives taken
    exactly through a polynomial-prefactor recurrence. The ordered-chamber
    normalizer is this value divided by ``n!``.
    """
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    if A.n != B.n:
        raise ValueError("size mismatch")
    t_ = tp.t
    alpha, beta = (1.0 - t_) / (2.0 * t_), t_ / (2.0 * (1.0 - t_))
    grid = _derivative_prefactors(max(A.mults) - 1, max(B.mults) - 1, alpha, beta)
    rows, cols = A.rows(), B.rows()
    expo = np.empty((A.n, B.n))
    pref = np.empty((A.n, B.n))
    for u, (i, r) in enumerate(rows):
        a = A.values[i]
        for v, (j, s) in enumerate(cols):
            b = B.values[j]
            expo[u, v] = alpha * a * a + beta * b * b + a * b
            pref[u, v] = P.polyval2d(a, b, grid[r][s])
    det = signed_log_det(expo, log_entries=True, prefactor=pref)
    n = A.n
    return det.shift(math.lgamma(n + 1) + 0.5 * n * math.log(2.0 * math.pi * tp.sigma2))


def tilted_moment_ratios(kmax: int, gamma: float, sigma2: float) -> np.ndarray:
    """``mu_0 .. mu_kmax``: moments of the normal law N(sigma2*gamma, sigma2)."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    mu = np.empty(kmax + 1)
    mu[0] = 1.0
    if kmax >= 1:
        mu[1] = sigma2 * gamma
    for k in range(2, kmax + 1):
        mu[k] = sigma2 * gamma * mu[k - 1] + (k - 1) * sigma2 * mu[k - 2]
    return mu


def tilted_gaussian_moment(k: int, gamma: float, sigma2: float) -> float:
    """``int x^k exp(gamma x - x^2 / (2 sigma2)) dx``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    mu = tilted_moment_ratios(k, gamma, sigma2)[k]
    return math.sqrt(2.0 * math.pi * sigma2) * math.exp(0.5 * sigma2 * gamma * gamma) * mu


def gram_entries_log(A: BoundaryData, B: BoundaryData, t, k: int = 0):
    """Log-offsets and ratios of ``int f_u(x) x^k g_v(x) w(x) dx``.

    Entry ``(u, v)`` equals ``exp(offset[u, v]) * ratio[u, v]``.
    """
    tp = as_time(t)
    t_, s2 = tp.t, tp.sigma2
    rows, cols = A.rows(), B.rows()
    kmax = max(A.mults) + max(B.mults) + k
    offset = np.empty((A.n, B.n))
    ratio = np.empty((A.n, B.n))
    for u, (i, r) in enumerate(rows):
        a = A.values[i]
        for v, (j, s) in enumerate(cols):
            b = B.values[j]
            gamma = a / t_ + b / (1.0 - t_)
            mu = tilted_moment_ratios(kmax, gamma, s2)
            offset[u, v] = 0.5 * s2 * gamma * gamma + 0.5 * math.log(2.0 * math.pi * s2)
            ratio[u, v] = mu[r + s + k] / (t_**r * (1.0 - t_) ** s)
    return offset, ratio


def exact_linear_statistic(k: int, A, B, t, max_condition: float = 1e12) -> float:
    """``E[sum_j lambda_j^k]`` under the normalized law, as ``Tr(G^{-1} H)``.

    ``G`` and ``H`` are the Gram matrices of the two row families against
    ``w(x)`` and ``x^k w(x)``. Row and column scalings cancel in the trace, so
    per-row and per-column exponent maxima are removed before solving.
    """
    if not 0 <= k <= 8:
        raise ValueError("k must be between 0 and 8")
    A, B = as_boundary(A), as_boundary(B)
    if A.n != B.n:
        raise ValueError("size mismatch")
    if k == 0:
        return float(A.n)
    off, g_ratio = gram_entries_log(A, B, t, 0)
    _, h_ratio = gram_entries_log(A, B, t, k)
    row = off.max(axis=1, keepdims=True)
    col = (off - row).max(axis=0, keepdims=True)
    scale = np.exp(off - row - col)
    G, H = scale * g_ratio, scale * h_ratio
    # row-equilibrate: prefactors (1/t)^r grow quickly with multiplicity
    norm = np.abs(G).max(axis=1, keepdims=True)
    G, H = G / norm, H / norm
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > max_condition:
        raise DegeneracyError("Gram matrix is numerically singular", cond)
    return float(np.trace(np.linalg.solve(G, H)))


def sample_km_mcmc(A, B, t, chain: ChainConfig, rng: np.random.Generator, return_info: bool = False):
    """Random-walk Metropolis chains on ``R^n`` targeting the KM density.

    Each coordinate receives an independent Gaussian increment of scale
    ``proposal_scale * sigma``; the scale is tuned toward 25-45% acceptance
    during the first half of burn-in. Chains start from a Gaussian cloud
    around the midpoint configuration ``(1-t) a + t b`` and are re-drawn while
    they sit on a zero-density point. Returns sorted samples of shape
    ``(n_chains * per_chain, n)`` in chain-major order.
    """
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    if A.n != B.n:
        raise ValueError("size mismatch")
    n, C = A.n, chain.n_chains
    sigma = math.sqrt(tp.sigma2)
    mid = np.sort((1.0 - tp.t) * A.points + tp.t * np.sort(B.points))
    x = mid + sigma * rng.standard_normal((C, n))
    logp = km_log_density_batch(x, A, B, tp)
    for _ in range(1000):
        bad = ~np.isfinite(logp)
        if not bad.any():
            break
        x[bad] = mid + sigma * rng.standard_normal((int(bad.sum()), n))
        logp[bad] = km_log_density_batch(x[bad], A, B, tp)
    else:
        raise RuntimeError("could not initialize chains at a positive-density point")

    scale = chain.proposal_scale * sigma
    per_chain = chain.per_chain
    out = np.empty((C, per_chain, n))
    total = chain.burn_in + per_chain * chain.thin
    window_acc = window_n = acc = prop = kept = 0
    for step in range(total):
        y = x + scale * rng.standard_normal((C, n))
        logq = km_log_density_batch(y, A, B, tp)
        ok = np.log(rng.random(C)) < logq - logp
        x = np.where(ok[:, None], y, x)
        logp = np.where(ok, logq, logp)
        if step < chain.burn_in:
            window_acc += int(ok.sum())
            window_n += C
            if chain.tune and step < chain.burn_in // 2 and window_n >= 50 * C:
                rate = window_acc / window_n
                if rate < 0.25:
                    scale *= 0.8
                elif rate > 0.45:
                    scale *= 1.25
                window_acc = window_n = 0
            continue
        acc += int(ok.sum())
        prop += C
        if (step - chain.burn_in) % chain.thin == chain.thin - 1:
            out[:, kept] = x
            kept += 1
    samples = np.sort(out.reshape(C * per_chain, n), axis=1)
    if return_info:
        return samples, {"acceptance": acc / max(prop, 1), "scale": scale}
    return samples


def km_normalization_quadrature(A, B, t, nodes: int = 60) -> SignedLogValue:
    """Tensor Gauss-Hermite estimate of the same integral as
    :func:`km_normalization_log`, taken directly over ``R^n``.

    Nodes are centred on the mean configuration ``(1-t) mean(a) + t mean(b)``
    and scaled by ``sqrt(2 sigma^2)``; cost grows as ``nodes**n``.
    """
    A, B, tp = as_boundary(A), as_boundary(B), as_time(t)
    n = A.n
    if nodes**n > 5_000_000:
        raise ValueError("tensor grid too large; reduce n or nodes")
    y, w = np.polynomial.hermite.hermgauss(nodes)
    s = math.sqrt(2.0 * tp.sigma2)
    c = (1.0 - tp.t) * A.trace() / n + tp.t * B.trace() / n
    grids = np.meshgrid(*([y] * n), indexing="ij")
    Y = np.stack([g.ravel() for g in grids], axis=1)
    logw = sum(np.log(m.ravel()) for m in np.meshgrid(*([w] * n), indexing="ij"))
    lam = c + s * Y
    logf = km_log_density_batch(lam, A, B, tp) + np.sum(Y * Y, axis=1) + logw
    # det product is non-negative everywhere; zero-density nodes drop out
    finite = np.isfinite(logf)
    top = logf[finite].max()
    total = np.exp(logf[finite] - top).sum()
    return SignedLogValue(1, float(top + math.log(total) + n * math.log(s)))
