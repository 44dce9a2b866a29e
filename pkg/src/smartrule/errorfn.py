"""Majority-vote error polynomial and the numerical objects built on it.

``L(p, n)`` is the probability that the majority of ``n`` i.i.d. Bernoulli(p)
labels disagrees with a fresh Bernoulli(p) label (``n`` odd). Everything here
accepts scalar or array ``p`` and returns the matching shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import bdtrc, gammaln

__all__ = [
    "FindNError",
    "KeyLemmaCertificate",
    "PiecewiseLinearEnvelope",
    "bayes_binary",
    "binomial_inside",
    "binomial_inside_exact",
    "binomial_pmf",
    "concave_envelope",
    "find_N",
    "find_domination_N",
    "key_lemma_margin",
    "majority_error",
    "majority_error_exact",
    "monotone_gap",
    "taylor_coeff",
    "upper_hull",
]

# cap on len(p) * (N + 1) per pmf block, keeps memory flat for large N
_BLOCK = 1 << 21


def _check_odd(n) -> int:
    if int(n) != n or n < 1 or int(n) % 2 == 0:
        raise ValueError(f"n must be an odd positive integer (majority vote avoids ties), got {n!r}")
    return int(n)


def _as_prob(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("p must lie in [0, 1]")
    return arr


def _out(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def binomial_pmf(p, N: int) -> np.ndarray:
    """``P[Bin(N, p) = i]`` for ``i = 0..N`` as a ``(len(p), N + 1)`` array.

    Terms are formed in log space, so large ``N`` does not under/overflow.
    """
    p = np.atleast_1d(_as_prob(p)).ravel()
    N = int(N)
    i = np.arange(N + 1)
    log_comb = gammaln(N + 1) - gammaln(i + 1) - gammaln(N - i + 1)
    interior = (p > 0.0) & (p < 1.0)
    out = np.zeros((p.size, N + 1))
    if interior.any():
        q = p[interior]
        logs = log_comb + i * np.log(q)[:, None] + (N - i) * np.log1p(-q)[:, None]
        out[interior] = np.exp(logs)
    out[p == 0.0, 0] = 1.0
    out[p == 1.0, N] = 1.0
    return out


def _pmf_blocks(p: np.ndarray, N: int):
    step = max(1, _BLOCK // (N + 1))
    for lo in range(0, p.size, step):
        yield lo, binomial_pmf(p[lo:lo + step], N)


def majority_error(p, n: int):
    n = _check_odd(n)
    parr = _as_prob(p)
    k = (n - 1) // 2
    # L = s + (1 - 2s) P[Bin(n, s) > k] with s = min(p, 1 - p): exactly symmetric,
    # exact at 1/2, and rounding shrinks with |1 - 2p| so L(., n + 2) <= L(., n) survives
    s = np.minimum(parr, 1.0 - parr)
    res = s + (1.0 - 2.0 * s) * bdtrc(k, n, s)
    return _out(np.asarray(res, dtype=float), p)


def majority_error_exact(p, n: int) -> Fraction:
    """Exact rational ``L(p, n)``; ``p`` is converted with :class:`Fraction`."""
    n = _check_odd(n)
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    q = 1 - p
    k = (n - 1) // 2
    total = Fraction(0)
    for i in range(k + 1):
        c = math.comb(n, i)
        total += c * p ** (i + 1) * q ** (n - i) + c * p ** (n - i) * q ** (i + 1)
    return total


def bayes_binary(p):
    parr = _as_prob(p)
    return _out(np.minimum(parr, 1.0 - parr), p)


def monotone_gap(p, n: int):
    """Closed form of ``L(p, n) - L(p, n + 2)``, which is never negative."""
    n = _check_odd(n)
    parr = _as_prob(p)
    k = (n - 1) // 2
    with np.errstate(divide="ignore"):
        log_pq = np.log(parr) + np.log1p(-parr)
    log_comb = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    res = (2.0 * parr - 1.0) ** 2 * np.exp(log_comb + (k + 1) * log_pq)
    return _out(np.asarray(res, dtype=float), p)


def taylor_coeff(n: int) -> int:
    """Coefficient of ``p**(k+1)`` in the expansion of ``L(p, 2k+1)`` at zero.

    The expansion ``L = p + C(2k+1, k) p**(k+1) + ...`` only holds for
    ``k >= 1``; for ``n = 1`` the polynomial is ``2p - 2p**2``.
    """
    n = _check_odd(n)
    if n == 1:
        raise ValueError("no such expansion for n = 1: L(p, 1) = 2p - 2p^2 has no p^(k+1) correction")
    k = (n - 1) // 2
    return math.comb(n, k)


def _inside_mask(N: int, t: float) -> np.ndarray:
    # tN < i < (1 - t)N, written symmetrically so i and N - i are treated alike
    i = np.arange(N + 1)
    return np.minimum(i, N - i) > t * N


def _check_t(t) -> float:
    t = float(t)
    if not 0.0 < t < 0.5:
        raise ValueError(f"t must lie in (0, 1/2), got {t!r}")
    return t


def binomial_inside(p, N: int, t: float):
    """``P[tN < Bin(N, p) < (1 - t)N]`` (both inequalities strict)."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    t = _check_t(t)
    parr = _as_prob(p)
    flat = np.atleast_1d(parr).ravel()
    mask = _inside_mask(N, t)
    res = np.empty(flat.size)
    for lo, pmf in _pmf_blocks(flat, N):
        res[lo:lo + pmf.shape[0]] = pmf[:, mask].sum(axis=1)
    return _out(res.reshape(parr.shape), p)


def binomial_inside_exact(p, N: int, t) -> Fraction:
    p, t = Fraction(p), Fraction(t)
    q = 1 - p
    return sum(
        (math.comb(N, i) * p ** i * q ** (N - i) for i in range(N + 1) if t * N < i < (1 - t) * N),
        Fraction(0),
    )


def upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the upper convex hull of points sorted by strictly increasing ``x``.

    Monotone chain; collinear middle points are dropped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hull: list[int] = []
    for j in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b unless it lies strictly above the chord a -> j
            if (x[b] - x[a]) * (y[j] - y[a]) - (y[b] - y[a]) * (x[j] - x[a]) >= 0.0:
                hull.pop()
            else:
                break
        hull.append(j)
    return np.asarray(hull, dtype=np.intp)


@dataclass(frozen=True)
class PiecewiseLinearEnvelope:
    knots_p: np.ndarray
    knots_v: np.ndarray

    def __call__(self, p):
        parr = _as_prob(p)
        return _out(np.interp(parr, self.knots_p, self.knots_v), p)

    def second_differences(self) -> np.ndarray:
        slopes = np.diff(self.knots_v) / np.diff(self.knots_p)
        return np.diff(slopes)

    def is_concave(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.second_differences() <= tol))


def _grid(grid_size: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, int(grid_size))


def concave_envelope(n: int, grid_size: int = 4097) -> PiecewiseLinearEnvelope:
    """Smallest concave majorant of ``L(., n)`` sampled on a uniform grid."""
    n = _check_odd(n)
    if grid_size < 2 ** 10 + 1:
        raise ValueError("grid_size must be at least 2**10 + 1")
    p = _grid(grid_size)
    values = majority_error(p, n)
    idx = upper_hull(p, values)
    return PiecewiseLinearEnvelope(p[idx].copy(), values[idx].copy())


def _envelope_on_grid(p: np.ndarray, values: np.ndarray) -> np.ndarray:
    idx = upper_hull(p, values)
    return np.interp(p, p[idx], values[idx])


def key_lemma_margin(n: int, t: float, N: int, grid_size: int = 4097):
    """Pointwise ``LHS - L(p, n)`` of the refinement inequality on the grid.

    LHS is ``B * env(p, N) + (1 - B) * L(p, N)`` with
    ``B = P[tN < Bin(N, p) < (1 - t)N]``. Returns ``(p, margin)``; the
    inequality holds where ``margin <= 0``.
    """
    n = _check_odd(n)
    N = _check_odd(N)
    t = _check_t(t)
    p = _grid(grid_size)
    big = majority_error(p, N)
    env = _envelope_on_grid(p, big)
    inside = binomial_inside(p, N, t)
    lhs = inside * env + (1.0 - inside) * big
    return p, lhs - majority_error(p, n)


@dataclass(frozen=True)
class KeyLemmaCertificate:
    n: int
    t: float
    N: int
    grid_size: int
    slack: float
    max_slack_used: float
    worst_p: float
    lipschitz_constant: float
    between_grid_bound: float


class FindNError(RuntimeError):
    """The search cap was reached; ``best`` holds the least-violating candidate."""

    def __init__(self, message: str, best: KeyLemmaCertificate | None):
        super().__init__(message)
        self.best = best


def _certificate(n, t, N, grid_size, slack, p, margin) -> KeyLemmaCertificate:
    j = int(np.argmax(margin))
    h = 1.0 / (grid_size - 1)
    # |d/dp B| <= N, envelope and L(., N) slopes <= 2N, L(., n) slope <= 2n
    lip = 5.0 * N + 2.0 * n
    return KeyLemmaCertificate(
        n=n, t=t, N=N, grid_size=int(grid_size), slack=slack,
        max_slack_used=max(float(margin[j]), 0.0), worst_p=float(p[j]),
        lipschitz_constant=lip, between_grid_bound=lip * h / 2.0,
    )


def find_N(n: int, t: float, grid_size: int = 4097, slack: float = 1e-9,
           cap: int = 10 ** 5) -> KeyLemmaCertificate:
    """Smallest odd ``N >= n + 2`` satisfying the refinement inequality on the grid.

    Odd candidates are scanned upward one by one; the predicate is only known
    to hold eventually, so no bisection. Raises :class:`FindNError` when no
    candidate up to ``cap`` passes.
    """
    n = _check_odd(n)
    t = _check_t(t)
    if grid_size < 2 ** 12 + 1:
        raise ValueError("grid_size must be at least 2**12 + 1")
    best = None
    best_excess = math.inf
    for N in range(n + 2, int(cap) + 1, 2):
        p, margin = key_lemma_margin(n, t, N, grid_size)
        cert = _certificate(n, t, N, grid_size, slack, p, margin)
        excess = float(margin.max())
        if excess <= slack:
            return cert
        if excess < best_excess:
            best, best_excess = cert, excess
    raise FindNError(f"no odd N in [{n + 2}, {cap}] certifies (n={n}, t={t})", best)


def find_domination_N(n: int, eps: float, grid_size: int = 4097, cap: int = 10 ** 4,
                      tol: float = 1e-12) -> int:
    """Smallest odd ``N > n`` whose concave envelope stays below ``L(., n)`` on ``[eps, 1 - eps]``."""
    n = _check_odd(n)
    p = _grid(grid_size)
    band = (p >= eps) & (p <= 1.0 - eps)
    target = majority_error(p[band], n)
    for N in range(n + 2, int(cap) + 1, 2):
        env = _envelope_on_grid(p, majority_error(p, N))
        if np.all(env[band] <= target + tol):
            return N
    raise FindNError(f"no odd N in [{n + 2}, {cap}] dominates L(., {n}) on [{eps}, {1 - eps}]", None)
