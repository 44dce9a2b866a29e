"""Block schedule of the smart rule.

Stage ``k`` owns the sample indices ``(n_{k-1}, n_k]``: one candidate cut
point at ``n_{k-1} + 1``, then a testing block ``A_k`` of length ``a_k`` and
a labelling block ``B_k`` of length ``b_k``. Stage 1 is the single index 1.

Two modes:

* ``exact`` follows the theory: ``N_k`` certified by :func:`find_N`,
  ``a_k`` and ``b_k`` from the VC coverage bound. Sizes explode after ``k = 2``.
* ``practical`` takes explicit sequences. It keeps the block structure but
  carries none of the guarantees; every output built on it says so.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errorfn import FindNError, find_N

__all__ = [
    "PRACTICAL_NOTICE",
    "Schedule",
    "ScheduleError",
    "default_sequences",
    "exact_schedule",
    "practical_schedule",
    "vc_sample_size",
]

PRACTICAL_NOTICE = (
    "practical schedule: block sizes are desk-scale surrogates, not the sizes "
    "required for the monotonicity guarantee"
)


def vc_sample_size(k: int, N: int, delta: float) -> int:
    """Points needed so that, with confidence ``1 - delta``, every arc cut by
    ``k`` random points receives at least ``N`` of them (any distribution).
    """
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2 (stage 1 has fixed blocks)")
    if N < 1:
        raise ValueError("N must be at least 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    eps = delta / (2.0 * k * (k - 1))
    vc_term = 48.0 / eps * math.log(16.0 * math.e / eps)
    conf_term = 8.0 / eps * math.log(4.0 / delta)
    # 2N/eps written with a single division
    fill_term = 4.0 * N * k * (k - 1) / delta
    return int(math.ceil(max(vc_term, conf_term, fill_term)))


def default_sequences(K: int):
    """``eps_k = min(0.49, 1/(k+1))`` and ``delta_k = 2**-k`` for ``k = 1..K``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    eps = [min(0.49, 1.0 / (k + 1)) for k in range(1, K + 1)]
    delta = [2.0 ** -k for k in range(1, K + 1)]
    return eps, delta


class ScheduleError(RuntimeError):
    """Exact construction stopped early; ``partial`` holds the stages built so far."""

    def __init__(self, message: str, partial: "Schedule"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Schedule:
    eps: tuple
    delta: tuple
    N: tuple  # N[0] is None: stage 1 runs no test
    a: tuple
    b: tuple
    mode: str = "practical"
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        K = len(self.a)
        if not (len(self.eps) == len(self.delta) == len(self.N) == len(self.b) == K):
            raise ValueError("schedule sequences must share one length")
        if K < 1:
            raise ValueError("a schedule has at least one stage")
        if self.a[0] != 0 or self.b[0] != 1:
            raise ValueError("stage 1 must have a = 0, b = 1")
        if any(int(v) != v or v < 1 for v in self.a[1:]) or any(int(v) != v or v < 1 for v in self.b[1:]):
            raise ValueError("a_k and b_k must be positive integers for k >= 2")
        if any(not 0.0 < e < 0.5 for e in self.eps):
            raise ValueError("eps_k must lie in (0, 1/2)")
        if self.mode not in ("exact", "practical"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        n = [1]
        for k in range(1, K):
            n.append(n[-1] + self.a[k] + self.b[k] + 1)
        object.__setattr__(self, "_n", tuple(n))

    @property
    def K(self) -> int:
        return len(self.a)

    @property
    def n(self) -> tuple:
        """``n_1, ..., n_K`` (1-based stage k is ``n[k - 1]``)."""
        return self._n

    def n_at(self, k: int) -> int:
        return self._n[k - 1]

    def blocks(self, k: int):
        """``(cut_index, A_k, B_k)`` with ``A_k``, ``B_k`` as inclusive ranges.

        Empty ranges come back as ``range`` objects of length zero. For
        ``k = 1`` there is no cut index (``None``).
        """
        if not 1 <= k <= self.K:
            raise IndexError(f"stage {k} outside 1..{self.K}")
        if k == 1:
            return None, range(1, 1), range(1, 2)
        prev = self._n[k - 2]
        a, b = self.a[k - 1], self.b[k - 1]
        return prev + 1, range(prev + 2, prev + a + 2), range(prev + a + 2, prev + a + b + 2)

    def stage_for(self, n: int) -> int:
        """Largest ``k`` with ``n_k <= n`` (0 if ``n < 1``)."""
        k = 0
        for i, nk in enumerate(self._n, start=1):
            if nk <= n:
                k = i
            else:
                break
        return k

    def rows(self):
        for k in range(1, self.K + 1):
            lo = 1 if k == 1 else self._n[k - 2] + 1
            yield {
                "k": k, "eps": self.eps[k - 1], "delta": self.delta[k - 1],
                "N": self.N[k - 1], "a": self.a[k - 1], "b": self.b[k - 1],
                "n_start": lo, "n_end": self._n[k - 1],
            }

    def truncated(self, K: int) -> "Schedule":
        return Schedule(self.eps[:K], self.delta[:K], self.N[:K], self.a[:K], self.b[:K],
                        self.mode, self.notes)


def _odd_floor(m: int) -> int:
    """Votes are cast over an odd count; an even block loses one point."""
    return m if m % 2 else m - 1


def exact_schedule(K: int, eps_rule: Callable[[int], float] | Sequence[float] | None = None,
                   delta_rule: Callable[[int], float] | Sequence[float] | None = None,
                   grid_size: int = 4097, cap: int = 10 ** 5) -> Schedule:
    """Schedule with every stage sized as the theory prescribes.

    ``eps_rule`` and ``delta_rule`` are callables ``k -> value`` or sequences
    indexed from ``k = 1``; both default to :func:`default_sequences`.
    Raises :class:`ScheduleError` carrying the stages that could be built
    once ``find_N`` exceeds ``cap``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    d_eps, d_delta = default_sequences(K)
    eps = [_rule_value(eps_rule, k, d_eps) for k in range(1, K + 1)]
    delta = [_rule_value(delta_rule, k, d_delta) for k in range(1, K + 1)]
    if eps[0] >= 0.5 or any(e <= 0 for e in eps) or any(e2 > e1 for e1, e2 in zip(eps, eps[1:])):
        raise ValueError("eps must be positive, non-increasing and start below 1/2")
    if delta[0] >= 1.0 or any(d <= 0 for d in delta):
        raise ValueError("delta must be positive with delta_1 < 1")

    N, a, b = [None], [0], [1]
    notes = []
    for k in range(2, K + 1):
        prev_votes = _odd_floor(b[-1])
        try:
            cert = find_N(prev_votes, eps[k - 1], grid_size=grid_size, cap=cap)
        except FindNError as exc:
            partial = Schedule(tuple(eps[:k - 1]), tuple(delta[:k - 1]), tuple(N), tuple(a), tuple(b),
                               "exact", tuple(notes))
            raise ScheduleError(f"stage {k}: {exc}", partial) from exc
        notes.append(f"k={k}: N certified with max slack {cert.max_slack_used:.3e} "
                     f"(between-grid bound {cert.between_grid_bound:.3e})")
        N.append(cert.N)
        a.append(vc_sample_size(k, cert.N, delta[k - 1]))
        b.append(vc_sample_size(k, a[-1], delta[k - 1]))
    return Schedule(tuple(eps), tuple(delta), tuple(N), tuple(a), tuple(b), "exact", tuple(notes))


def _rule_value(rule, k, default):
    if rule is None:
        return float(default[k - 1])
    if callable(rule):
        return float(rule(k))
    return float(rule[k - 1])


def practical_schedule(K: int, A: float = 4.0, B: float = 9.0, r: float = 2.0,
                       N: int | Sequence[int] | Callable[[int], int] = 3,
                       a: Sequence[int] | Callable[[int], int] | None = None,
                       b: Sequence[int] | Callable[[int], int] | None = None,
                       eps: Sequence[float] | None = None,
                       delta: Sequence[float] | None = None) -> Schedule:
    """Desk-scale schedule.

    By default ``a_k = ceil(A r^k)`` and ``b_k`` is the smallest odd integer
    ``>= B r^k``. Explicit ``a`` and ``b`` (sequences indexed from ``k = 1``
    with the first entry ignored, or callables ``k -> size``) override the
    geometric growth. Stage 1 is always ``a_1 = 0``, ``b_1 = 1``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if a is None or b is None:
        if A <= 0 or B <= 0 or r <= 0:
            raise ValueError("growth parameters A, B, r must be positive")
    a_seq, b_seq = [0], [1]
    for k in range(2, K + 1):
        if a is not None:
            ak = int(a(k) if callable(a) else a[k - 1])
        else:
            ak = int(math.ceil(A * r ** k))
        if b is not None:
            bk = int(b(k) if callable(b) else b[k - 1])
        else:
            bk = int(math.ceil(B * r ** k))
            bk += 1 - bk % 2
        if ak < 1 or bk < 1:
            raise ValueError("a_k and b_k must be positive")
        a_seq.append(ak)
        b_seq.append(bk)
    d_eps, d_delta = default_sequences(K)
    eps_seq = tuple(float(e) for e in (eps if eps is not None else d_eps))[:K]
    delta_seq = tuple(float(d) for d in (delta if delta is not None else d_delta))[:K]
    N_seq = [None]
    for k in range(2, K + 1):
        if callable(N):
            N_seq.append(int(N(k)))
        elif isinstance(N, (int, float)):
            N_seq.append(int(N))
        else:
            N_seq.append(int(N[k - 1]))
    if any(v < 1 for v in N_seq[1:]):
        raise ValueError("N_k must be positive")
    return Schedule(eps_seq, delta_seq, tuple(N_seq), tuple(a_seq), tuple(b_seq),
                    "practical", (PRACTICAL_NOTICE,))
