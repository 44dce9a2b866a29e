"""Labelled distributions on the circle with closed-form measures and risks.

A :class:`LearningProblem` is a finite mixture of atoms and uniform arcs, each
carrying its own constant regression value ``eta = P[Y = 1 | X]``. That
restriction is what makes every risk below exact rather than estimated.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from .cyclic import ArcPartition, HalfOpenArc, check_position

__all__ = [
    "Atom",
    "UniformArc",
    "LearningProblem",
    "LabeledSample",
    "Hypothesis",
    "as_generator",
    "sample",
    "measure",
    "conditional_eta",
    "bayes_error",
    "risk",
]


def _check_eta(eta) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    return eta


def _check_mass(mass) -> float:
    mass = float(mass)
    if not mass > 0.0:
        raise ValueError(f"component mass must be positive, got {mass!r}")
    return mass


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "location", check_position(self.location))
        object.__setattr__(self, "mass", _check_mass(self.mass))
        object.__setattr__(self, "eta", _check_eta(self.eta))


@dataclass(frozen=True)
class UniformArc:
    arc: HalfOpenArc
    mass: float
    eta: float

    def __post_init__(self):
        if not isinstance(self.arc, HalfOpenArc):
            raise TypeError("arc must be a HalfOpenArc")
        object.__setattr__(self, "mass", _check_mass(self.mass))
        object.__setattr__(self, "eta", _check_eta(self.eta))

    @property
    def density(self) -> float:
        return self.mass / self.arc.length


Component = Union[Atom, UniformArc]


def _overlap_len(lo: float, hi: float, t: np.ndarray) -> np.ndarray:
    """Length of ``[lo, hi) ∩ [0, t)`` for each ``t``."""
    return np.clip(t, lo, hi) - lo


class LearningProblem:
    """Distribution ``(mu, eta)`` on the circle.

    Parameters
    ----------
    components : sequence of Atom or UniformArc
        Masses must sum to one. Arcs must be pairwise disjoint and may not
        contain an atom, so that ``eta`` is single-valued.
    name : str, optional
        Label carried into reports.
    """

    def __init__(self, components: Sequence[Component], name: str = "problem"):
        comps = tuple(components)
        if not comps:
            raise ValueError("a problem needs at least one component")
        total = math.fsum(c.mass for c in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component masses sum to {total!r}, not 1")
        self.components = comps
        self.name = name
        self.atoms = tuple(c for c in comps if isinstance(c, Atom))
        self.arcs = tuple(c for c in comps if isinstance(c, UniformArc))
        self._validate_layout()
        self._build_tables()

    def _validate_layout(self):
        locs = [a.location for a in self.atoms]
        if len(set(locs)) != len(locs):
            raise ValueError("two atoms share a location")
        for a, b in combinations(self.arcs, 2):
            for lo1, hi1 in a.arc.pieces():
                for lo2, hi2 in b.arc.pieces():
                    if max(lo1, lo2) < min(hi1, hi2):
                        raise ValueError(f"arcs {a.arc} and {b.arc} overlap")
        for atom in self.atoms:
            for comp in self.arcs:
                if comp.arc.contains(atom.location):
                    raise ValueError(f"atom at {atom.location} lies inside arc {comp.arc}")

    def _build_tables(self):
        self._atom_loc = np.array([a.location for a in self.atoms])
        self._atom_mass = np.array([a.mass for a in self.atoms])
        self._atom_eta = np.array([a.eta for a in self.atoms])
        pieces = [(lo, hi, c.density, c.eta) for c in self.arcs for lo, hi in c.arc.pieces()]
        self._pieces = np.array(pieces, dtype=float).reshape(-1, 4)
        self._masses = np.array([c.mass for c in self.components])
        self._etas = np.array([c.eta for c in self.components])

        # Staircase of the distribution function for the monotone transport:
        # at each breakpoint b, (b, mu[0, b)) then (b, mu[0, b]).
        knots = {0.0, 1.0}
        knots.update(self._atom_loc.tolist())
        for lo, hi, _, _ in pieces:
            knots.update((lo, hi))
        b = np.array(sorted(knots))
        below = self.mass_below(b)
        at = below + self.atom_mass_at(b)
        self._stair_x = np.repeat(b, 2)
        self._stair_y = np.column_stack([below, at]).ravel()

    # -- cumulative functions over [0, 1) -------------------------------------------

    def atom_mass_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self._atom_loc.size == 0:
            return np.zeros(t.shape)
        hits = t[..., None] == self._atom_loc
        return hits @ self._atom_mass

    def mass_below(self, t, *, atoms: bool = True) -> np.ndarray:
        """``mu[0, t)`` evaluated at each ``t`` in ``[0, 1]``."""
        return self._cumulative(t, weight_by_eta=False, atoms=atoms)

    def eta_mass_below(self, t, *, atoms: bool = True) -> np.ndarray:
        """Integral of ``eta`` against ``mu`` over ``[0, t)``."""
        return self._cumulative(t, weight_by_eta=True, atoms=atoms)

    def _cumulative(self, t, weight_by_eta: bool, atoms: bool) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for lo, hi, dens, eta in self._pieces:
            w = dens * eta if weight_by_eta else dens
            out = out + w * _overlap_len(lo, hi, t)
        if atoms and self._atom_loc.size:
            w = self._atom_mass * self._atom_eta if weight_by_eta else self._atom_mass
            out = out + (t[..., None] > self._atom_loc) @ w
        return out

    def _over_arcs(self, starts, ends, fn) -> np.ndarray:
        """Apply a cumulative function to arcs ``[start, end)`` with wraparound."""
        starts = np.asarray(starts, dtype=float)
        ends = np.asarray(ends, dtype=float)
        total = fn(np.ones(1))[0]
        diff = fn(ends) - fn(starts)
        return np.where(ends > starts, diff, total + diff)

    def measure(self, arc: HalfOpenArc, *, atoms: bool = True) -> float:
        fn = lambda t: self.mass_below(t, atoms=atoms)  # noqa: E731
        return float(self._over_arcs([arc.start], [arc.end], fn)[0])

    def eta_measure(self, arc: HalfOpenArc, *, atoms: bool = True) -> float:
        fn = lambda t: self.eta_mass_below(t, atoms=atoms)  # noqa: E731
        return float(self._over_arcs([arc.start], [arc.end], fn)[0])

    def partition_masses(self, partition: ArcPartition, *, atoms: bool = True):
        """``(mu(J), integral of eta over J)`` for every arc ``J`` of ``partition``."""
        if partition.is_trivial:
            one = np.ones(1)
            return (self.mass_below(one, atoms=atoms), self.eta_mass_below(one, atoms=atoms))
        s = np.asarray(partition.points)
        e = np.roll(s, -1)
        mu = self._over_arcs(s, e, lambda t: self.mass_below(t, atoms=atoms))
        eta = self._over_arcs(s, e, lambda t: self.eta_mass_below(t, atoms=atoms))
        return mu, eta

    # -- derived quantities ---------------------------------------------------

    def quantile(self, u):
        """Generalised inverse of ``F(t) = mu[0, t]``; right limit at ``u = 0``."""
        uarr = np.asarray(u, dtype=float)
        if np.any(uarr < 0.0) or np.any(uarr >= 1.0):
            raise ValueError("u must lie in [0, 1)")
        xs, ys = self._stair_x, self._stair_y
        idx = np.searchsorted(ys, uarr, side="left")
        zero = uarr == 0.0
        idx = np.where(zero, np.searchsorted(ys, 0.0, side="right"), idx)
        idx = np.clip(idx, 1, ys.size - 1)
        x0, x1 = xs[idx - 1], xs[idx]
        y0, y1 = ys[idx - 1], ys[idx]
        rise = y1 - y0
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(rise > 0, (uarr - y0) / rise, 1.0)
        t = x0 + np.clip(frac, 0.0, 1.0) * (x1 - x0)
        t = np.minimum(t, np.nextafter(1.0, 0.0))
        return float(t) if np.ndim(u) == 0 else t

    def bayes_error(self) -> float:
        return math.fsum(c.mass * min(c.eta, 1.0 - c.eta) for c in self.components)

    def mean_eta(self) -> float:
        return math.fsum(c.mass * c.eta for c in self.components)

    def bayes_hypothesis(self) -> "Hypothesis":
        """A Bayes-optimal classifier expressed on an arc partition."""
        cuts = set(self._atom_loc.tolist())
        for comp in self.arcs:
            if not comp.arc.is_full:
                cuts.update((comp.arc.start, comp.arc.end))
            else:
                cuts.add(comp.arc.start)
        part = ArcPartition(tuple(cuts))
        labels = []
        for arc in part.arcs:
            mu = self.measure(arc)
            eta = self.eta_measure(arc)
            labels.append(int(eta > mu - eta))
        return Hypothesis(part, tuple(labels))

    def draw(self, rng: np.random.Generator, size):
        """Vectorised i.i.d. draws: returns ``(points, labels)`` of shape ``size``."""
        comp = rng.choice(len(self.components), size=size, p=self._masses)
        x = np.empty(comp.shape)
        for j, c in enumerate(self.components):
            sel = comp == j
            m = int(sel.sum())
            if not m:
                continue
            if isinstance(c, Atom):
                x[sel] = c.location
            else:
                L = c.arc.length
                pts = np.mod(c.arc.start + rng.random(m) * L, 1.0)
                # rounding can land exactly on the excluded end point
                pts[np.mod(pts - c.arc.start, 1.0) >= L] = c.arc.start
                x[sel] = pts
        y = (rng.random(comp.shape) < self._etas[comp]).astype(np.int8)
        return x, y

    # -- serialisation --------------------------------------------------------

    def to_dict(self) -> dict:
        comps = []
        for c in self.components:
            if isinstance(c, Atom):
                comps.append({"type": "atom", "mass": c.mass, "eta": c.eta, "location": c.location})
            else:
                comps.append({"type": "arc", "mass": c.mass, "eta": c.eta,
                              "start": c.arc.start, "end": c.arc.end})
        return {"name": self.name, "components": comps}

    @classmethod
    def from_dict(cls, data: dict) -> "LearningProblem":
        if not isinstance(data, dict) or "components" not in data:
            raise ValueError("problem must be an object with a 'components' list")
        if not isinstance(data["components"], list) or not data["components"]:
            raise ValueError("/components: expected a non-empty list")
        comps: list[Component] = []
        for i, raw in enumerate(data["components"]):
            if not isinstance(raw, dict):
                raise ValueError(f"/components/{i}: expected an object")
            kind = raw.get("type")
            try:
                if kind == "atom":
                    comps.append(Atom(raw["location"], raw["mass"], raw["eta"]))
                elif kind == "arc":
                    comps.append(UniformArc(HalfOpenArc(raw["start"], raw["end"]), raw["mass"], raw["eta"]))
                else:
                    raise ValueError(f"unknown component type {kind!r}")
            except KeyError as exc:
                raise ValueError(f"/components/{i}: missing field {exc.args[0]!r}") from None
            except ValueError as exc:
                raise ValueError(f"/components/{i}: {exc}") from None
        return cls(comps, name=data.get("name", "problem"))

    @classmethod
    def from_json(cls, text: str) -> "LearningProblem":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"LearningProblem(name={self.name!r}, components={list(self.components)!r})"

    # -- convenience constructors ---------------------------------------------

    @classmethod
    def uniform(cls, eta: float = 0.5, name: str = "uniform") -> "LearningProblem":
        return cls([UniformArc(HalfOpenArc(0.0, 0.0), 1.0, eta)], name=name)

    @classmethod
    def atomic(cls, locations, masses, etas, name: str = "atomic") -> "LearningProblem":
        return cls([Atom(t, m, e) for t, m, e in zip(locations, masses, etas)], name=name)

    @classmethod
    def piecewise(cls, cuts, etas, masses=None, name: str = "piecewise") -> "LearningProblem":
        """Arcs between consecutive ``cuts`` (cyclically), uniform mass unless given."""
        cuts = sorted(cuts)
        arcs = [HalfOpenArc(cuts[i], cuts[(i + 1) % len(cuts)]) for i in range(len(cuts))]
        if masses is None:
            masses = [a.length for a in arcs]
        return cls([UniformArc(a, m, e) for a, m, e in zip(arcs, masses, etas)], name=name)


@dataclass(frozen=True)
class LabeledSample:
    """Ordered labelled points; ``index`` holds the original 1-based positions."""

    x: np.ndarray
    y: np.ndarray
    index: np.ndarray = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y).ravel().astype(np.int8)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        idx = np.arange(1, x.size + 1) if self.index is None else np.asarray(self.index, dtype=np.int64)
        if idx.shape != x.shape or (idx.size > 1 and np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be strictly increasing and match the points")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "index", idx)

    def __len__(self) -> int:
        return int(self.x.size)

    def block(self, first: int, last: int) -> "LabeledSample":
        """Entries whose original index lies in ``[first, last]``."""
        sel = (self.index >= first) & (self.index <= last)
        return LabeledSample(self.x[sel], self.y[sel], self.index[sel])

    def prefix(self, n: int) -> "LabeledSample":
        return self.block(1, n)


@dataclass(frozen=True)
class Hypothesis:
    partition: ArcPartition
    labels: tuple

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if len(labels) != len(self.partition):
            raise ValueError("need exactly one label per arc")
        if any(v not in (0, 1) for v in labels):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def constant(cls, label: int) -> "Hypothesis":
        return cls(ArcPartition(()), (label,))

    def predict(self, x) -> np.ndarray:
        lab = np.asarray(self.labels, dtype=np.int8)
        return lab[self.partition.locate(np.asarray(x, dtype=float))]


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.default_rng(seed)


def sample(problem: LearningProblem, seed, n: int) -> LabeledSample:
    if n < 1:
        raise ValueError("n must be at least 1")
    x, y = problem.draw(as_generator(seed), n)
    return LabeledSample(x, y)


def measure(problem: LearningProblem, arc: HalfOpenArc) -> float:
    return problem.measure(arc)


def conditional_eta(problem: LearningProblem, arc: HalfOpenArc) -> float:
    mu = problem.measure(arc)
    if mu <= 0.0:
        raise ValueError(f"arc {arc} has zero measure")
    return problem.eta_measure(arc) / mu


def bayes_error(problem: LearningProblem) -> float:
    return problem.bayes_error()


def risk(problem: LearningProblem, hypothesis: Hypothesis, atom_predict=None) -> float:
    """Exact misclassification probability of ``hypothesis`` under ``problem``.

    ``atom_predict``, if given, maps atom locations to labels and overrides
    the partition there (used by rules whose decision at a measure-zero tie
    point differs from the half-open convention).
    """
    split_atoms = atom_predict is not None
    mu, eta = problem.partition_masses(hypothesis.partition, atoms=not split_atoms)
    lab = np.asarray(hypothesis.labels, dtype=float)
    total = float(np.sum(lab * (mu - eta) + (1.0 - lab) * eta))
    if split_atoms and problem.atoms:
        pred = np.asarray(atom_predict(problem._atom_loc), dtype=float)
        total += float(np.sum(problem._atom_mass * (pred * (1.0 - problem._atom_eta)
                                                     + (1.0 - pred) * problem._atom_eta)))
    return max(total, 0.0)
