"""Harish-Chandra-Itzykson-Zuber integral.

The Haar average ``int exp(Tr(A U B U^+)) dU`` over ``U(n)`` is evaluated as a
determinant ratio in log space, for distinct and for clustered (confluent)
spectra. A Monte Carlo estimator over Haar draws serves as an independent
oracle, and a Metropolis chain samples the tilted measure
``exp(Tr(A W B W^+)) dW``.
"""
from __future__ import annotations

import math

import numpy as np

from .boundary import BoundaryData, as_boundary, cluster_points
from .config import ChainConfig, ConfigError
from .linalg import (
    SignedLogValue,
    log_confluent_vandermonde,
    log_superfactorial,
    log_vandermonde,
    sample_gue,
    sample_haar_unitary,
    signed_log_det,
)

__all__ = [
    "BoundaryData",
    "ConfluenceError",
    "cluster_points",
    "h_poly",
    "confluent_matrix",
    "hciz_log",
    "hciz_confluent_log",
    "hciz",
    "hciz_log_gradients",
    "hciz_mc_estimate",
    "hciz_exponent",
    "sample_weighted_unitary",
]


class ConfluenceError(ValueError):
    """Repeated eigenvalues where the distinct-spectrum formula was requested."""


def h_poly(r: int, s: int, a: float, b: float) -> float:
    """Polynomial ``H_{r,s}`` with ``d_a^r d_b^s e^{ab} = e^{ab} H_{r,s}(a, b)``."""
    if r < 0 or s < 0:
        raise ValueError("derivative orders must be non-negative")
    return sum(
        math.comb(r, k) * math.comb(s, k) * math.factorial(k) * a ** (s - k) * b ** (r - k)
        for k in range(min(r, s) + 1)
    )


def confluent_matrix(A: BoundaryData, B: BoundaryData, dr: int = 0, ds: int = 0):
    """Exponents and polynomial prefactors of the confluent block matrix.

    Entry ``((i, r), (j, s))`` equals ``exp(a_i b_j) * H_{r+dr, s+ds}(a_i, b_j)``;
    ``dr``/``ds`` shift the derivative orders, which is what parameter
    derivatives of the matrix need.
    """
    if A.n != B.n:
        raise ValueError(f"size mismatch: A has n={A.n}, B has n={B.n}")
    rows, cols = A.rows(), B.rows()
    expo = np.empty((A.n, B.n))
    pref = np.empty((A.n, B.n))
    for u, (i, r) in enumerate(rows):
        a = A.values[i]
        for v, (j, s) in enumerate(cols):
            b = B.values[j]
            expo[u, v] = a * b
            pref[u, v] = h_poly(r + dr, s + ds, a, b)
    return expo, pref


def hciz_log(a, b) -> SignedLogValue:
    """HCIZ integral for distinct eigenvalues ``a`` and ``b``.

    ``prod_{k<n} k! * det[e^{a_i b_j}] / (Delta(a) Delta(b))``; the result is
    positive, so only the sign convention of the ratio is carried through.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise ValueError(f"size mismatch: {a.size} vs {b.size}")
    va, vb = log_vandermonde(a), log_vandermonde(b)
    if va.sign == 0 or vb.sign == 0:
        raise ConfluenceError("repeated eigenvalues; use hciz_confluent_log on clustered data")
    det = signed_log_det(np.outer(a, b), log_entries=True)
    return (det / (va * vb)).shift(log_superfactorial(a.size))


def hciz_confluent_log(A: BoundaryData, B: BoundaryData) -> SignedLogValue:
    """HCIZ integral for clustered spectra via the derivative block matrix.

    The (B, A) matrix is the transpose of the (A, B) one, so the arguments are
    put in a canonical order first; this makes the symmetry exact in floating
    point.
    """
    if A.n != B.n:
        raise ValueError(f"size mismatch: A has n={A.n}, B has n={B.n}")
    if (B.values, B.mults) < (A.values, A.mults):
        A, B = B, A
    expo, pref = confluent_matrix(A, B)
    det = signed_log_det(expo, log_entries=True, prefactor=pref)
    denom = log_confluent_vandermonde(A) * log_confluent_vandermonde(B)
    return (det / denom).shift(log_superfactorial(A.n))


def hciz(a, b, tol: float = 1e-8) -> SignedLogValue:
    """Cluster near-coincident eigenvalues, then evaluate the confluent formula."""
    return hciz_confluent_log(as_boundary(a, tol), as_boundary(b, tol))


def _scaled(expo, pref, row_off, col_off):
    return np.exp(expo - row_off[:, None] - col_off[None, :]) * pref


def hciz_log_gradients(A: BoundaryData, B: BoundaryData):
    """Gradient of ``log HCIZ`` with respect to the cluster locations.

    Returns ``(grad_a, grad_b)`` with one entry per cluster; moving cluster
    ``i`` moves all ``m_i`` copies together. Uses
    ``d log det E = Tr(E^{-1} dE)``, where the derivative of the rows of
    cluster ``i`` raises their derivative order by one, minus the
    logarithmic derivative of the confluent Vandermonde factor.
    """
    expo, pref = confluent_matrix(A, B)
    _, pref_a = confluent_matrix(A, B, dr=1)
    _, pref_b = confluent_matrix(A, B, ds=1)
    row_off = expo.max(axis=1)
    col_off = (expo - row_off[:, None]).max(axis=0)
    E = _scaled(expo, pref, row_off, col_off)
    dEa = _scaled(expo, pref_a, row_off, col_off)
    dEb = _scaled(expo, pref_b, row_off, col_off)
    # diag(dEa E^{-1}) and diag(E^{-1} dEb)
    ya = np.diag(np.linalg.solve(E.T, dEa.T).T)
    yb = np.diag(np.linalg.solve(E, dEb))

    def collect(diag, data):
        out = np.zeros(data.p)
        for u, (i, _) in enumerate(data.rows()):
            out[i] += diag[u]
        vals, m = np.asarray(data.values), np.asarray(data.mults)
        for i in range(data.p):
            for k in range(data.p):
                if k != i:
                    out[i] -= m[i] * m[k] / (vals[i] - vals[k])
        return out

    return collect(ya, A), collect(yb, B)


def hciz_exponent(a: np.ndarray, b: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``Tr(A U B U^+)`` for diagonal ``A``, ``B`` and a stack of unitaries."""
    return np.einsum("i,...ij,j->...", a, np.abs(U) ** 2, b)


def hciz_mc_estimate(A, B, num_samples: int, rng: np.random.Generator, chunk: int = 10000):
    """Plain Monte Carlo over Haar unitaries: ``(mean, standard error)``.

    Exponentials are accumulated with a running maximum shift, so large
    exponents do not overflow until the final rescaling.
    """
    if num_samples < 100:
        raise ValueError("num_samples must be >= 100")
    A, B = as_boundary(A), as_boundary(B)
    if A.n != B.n:
        raise ValueError("size mismatch")
    a, b = A.points, B.points
    n = A.n
    if n == 1:
        return math.exp(a[0] * b[0]), 0.0

    shift = -math.inf
    s1 = s2 = 0.0
    done = 0
    while done < num_samples:
        m = min(chunk, num_samples - done)
        x = hciz_exponent(a, b, sample_haar_unitary(n, rng, size=m))
        new_shift = max(shift, float(x.max()))
        if shift > -math.inf:
            s1 *= math.exp(shift - new_shift)
            s2 *= math.exp(2 * (shift - new_shift))
        shift = new_shift
        e = np.exp(x - shift)
        s1 += float(e.sum())
        s2 += float((e * e).sum())
        done += m
    mean_s = s1 / num_samples
    var_s = max(s2 / num_samples - mean_s**2, 0.0) * num_samples / (num_samples - 1)
    scale = math.exp(shift)
    return scale * mean_s, scale * math.sqrt(var_s / num_samples)


def _unitary_step(W, eps, rng):
    n = W.shape[-1]
    H = sample_gue(n, 1.0, rng, size=W.shape[0])
    w, Q = np.linalg.eigh(H)
    R = (Q * np.exp(1j * eps * w)[:, None, :]) @ np.conj(np.swapaxes(Q, -1, -2))
    return R @ W


def _polar(W):
    u, _, vh = np.linalg.svd(W)
    return u @ vh


def sample_weighted_unitary(A, B, chain: ChainConfig, rng: np.random.Generator, return_info: bool = False):
    """Metropolis chains on ``U(n)`` targeting ``exp(Tr(A W B W^+)) dW``.

    The proposal ``W' = exp(i eps H) W`` with ``H`` a unit-variance GUE draw is
    symmetric with respect to Haar measure. During the first half of burn-in
    ``eps`` is adjusted every 50 steps toward an acceptance rate in
    ``[0.2, 0.5]``; it is frozen afterwards.

    Returns an array of shape ``(n_chains * per_chain, n, n)`` in chain-major
    order, plus ``{"acceptance", "step"}`` when ``return_info`` is set.
    """
    if not chain.proposal_scale > 0:
        raise ConfigError("proposal scale must be positive")
    A, B = as_boundary(A), as_boundary(B)
    if A.n != B.n:
        raise ValueError("size mismatch")
    a, b = A.points, B.points
    n, C = A.n, chain.n_chains
    eps = chain.proposal_scale
    W = sample_haar_unitary(n, rng, size=C)
    logw = hciz_exponent(a, b, W)

    per_chain = chain.per_chain
    out = np.empty((C, per_chain, n, n), dtype=complex)
    total = chain.burn_in + per_chain * chain.thin
    window_acc = window_n = 0
    acc = prop = 0
    kept = 0
    for step in range(total):
        Wp = _unitary_step(W, eps, rng)
        logwp = hciz_exponent(a, b, Wp)
        ok = np.log(rng.random(C)) < logwp - logw
        W = np.where(ok[:, None, None], Wp, W)
        logw = np.where(ok, logwp, logw)
        if step % 200 == 199:
            W = _polar(W)
        if step < chain.burn_in:
            window_acc += int(ok.sum())
            window_n += C
            if chain.tune and step < chain.burn_in // 2 and window_n >= 50 * C:
                rate = window_acc / window_n
                if rate < 0.2:
                    eps *= 0.8
                elif rate > 0.5:
                    eps = min(eps * 1.25, math.pi)
                window_acc = window_n = 0
            continue
        acc += int(ok.sum())
        prop += C
        if (step - chain.burn_in) % chain.thin == chain.thin - 1:
            out[:, kept] = W
            kept += 1
    samples = out.reshape(C * per_chain, n, n)
    if return_info:
        return samples, {"acceptance": acc / max(prop, 1), "step": eps}
    return samples
