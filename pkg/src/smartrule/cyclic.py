"""Cyclic order on the circle, identified with ``[0, 1)``.

Points are plain floats in ``[0, 1)``. Arcs are half-open ``[start, end)``
and wrap through zero when ``end <= start``; ``start == end`` is the whole
circle. A finite point set cuts the circle into consecutive arcs, each
starting at a point and ending at its cyclic successor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "HalfOpenArc",
    "ArcPartition",
    "check_position",
    "cyclic_between",
    "successor",
    "partition_from",
    "locate",
    "transport_from_uniform",
]


def check_position(t) -> float:
    """Return ``t`` as a float, raising unless ``0 <= t < 1``."""
    t = float(t)
    if not (0.0 <= t < 1.0):
        raise ValueError(f"circle position must lie in [0, 1), got {t!r}")
    return t


def cyclic_between(x, y, z) -> bool:
    """True iff ``y`` lies strictly inside the arc travelled from ``x`` to ``z``.

    This is the ternary relation ``[x, y, z]``, i.e.
    ``0 < (y - x) mod 1 < (z - x) mod 1``; arguments must be distinct.
    """
    x, y, z = check_position(x), check_position(y), check_position(z)
    if x == y or y == z or x == z:
        raise ValueError("cyclic_between needs three distinct points")
    # the mod-1 form rounds for tiny gaps; the rotations of x < y < z are exact
    return (x < y < z) or (y < z < x) or (z < x < y)


@dataclass(frozen=True)
class HalfOpenArc:
    start: float
    end: float

    def __post_init__(self):
        object.__setattr__(self, "start", check_position(self.start))
        object.__setattr__(self, "end", check_position(self.end))

    @property
    def is_full(self) -> bool:
        return self.start == self.end

    @property
    def length(self) -> float:
        if self.is_full:
            return 1.0
        return (self.end - self.start) % 1.0

    def contains(self, t) -> bool:
        t = check_position(t)
        if self.is_full:
            return True
        if self.start < self.end:
            return self.start <= t < self.end
        return t >= self.start or t < self.end

    def contains_many(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_full:
            return np.ones(t.shape, dtype=bool)
        if self.start < self.end:
            return (t >= self.start) & (t < self.end)
        return (t >= self.start) | (t < self.end)

    def pieces(self) -> list[tuple[float, float]]:
        """Split into linear intervals ``[lo, hi)`` of ``[0, 1)`` (at most two)."""
        if self.is_full:
            return [(0.0, 1.0)]
        if self.start < self.end:
            return [(self.start, self.end)]
        out = [(self.start, 1.0)]
        if self.end > 0.0:
            out.append((0.0, self.end))
        return out


@dataclass(frozen=True)
class ArcPartition:
    """Partition of the circle generated by a finite set of cut points.

    ``points`` is stored sorted and deduplicated. With fewer than two points
    the partition is trivial: a single arc covering the circle (it starts at
    the lone point if there is one, otherwise at 0).
    """

    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pts = sorted({check_position(p) for p in self.points})
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "_starts", np.asarray(pts, dtype=float))

    @property
    def is_trivial(self) -> bool:
        return len(self.points) <= 1

    def __len__(self) -> int:
        return max(len(self.points), 1)

    @property
    def arcs(self) -> list[HalfOpenArc]:
        pts = self.points
        if len(pts) == 0:
            return [HalfOpenArc(0.0, 0.0)]
        if len(pts) == 1:
            return [HalfOpenArc(pts[0], pts[0])]
        return [HalfOpenArc(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]

    def locate(self, t: np.ndarray) -> np.ndarray:
        """Vectorised :func:`locate`: index of the arc holding each position."""
        t = np.asarray(t, dtype=float)
        if self.is_trivial:
            return np.zeros(t.shape, dtype=np.intp)
        # arc i = [s_i, s_{i+1}); positions before s_0 sit in the last, wrapping arc
        idx = np.searchsorted(self._starts, t, side="right") - 1
        idx[idx < 0] = len(self._starts) - 1
        return idx

    def refines(self, other: "ArcPartition") -> bool:
        """True iff every arc of ``self`` lies inside a single arc of ``other``."""
        return set(other.points) <= set(self.points) or other.is_trivial


def successor(points: Iterable[float], x: float) -> float:
    """The cyclic successor of ``x`` within the finite set ``points``."""
    pts = sorted({check_position(p) for p in points})
    x = check_position(x)
    if len(pts) < 2:
        raise ValueError("successor needs at least two distinct points")
    if x not in pts:
        raise ValueError(f"{x!r} is not one of the points")
    i = pts.index(x)
    return pts[(i + 1) % len(pts)]


def partition_from(points: Iterable[float]) -> ArcPartition:
    return ArcPartition(tuple(points))


def locate(partition: ArcPartition, x: float) -> int:
    return int(partition.locate(np.array([check_position(x)]))[0])


def transport_from_uniform(problem, u):
    """Monotone map pushing the uniform law on the circle forward to ``problem``'s
    point distribution.

    This is the generalised inverse ``u -> inf{t : F(t) >= u}`` of the
    distribution function ``F(t) = mu[0, t]``, taken as a right limit at
    ``u = 0`` so that the image always lies in the support. Accepts a scalar
    or an array.
    """
    return problem.quantile(u)
