"""The smart partitioning rule and the baseline rules it is compared with.

The smart rule walks through the schedule's stages. At stage ``i`` it

1. adds the candidate point ``x_{n_{i-1}+1}`` to ``P``;
2. checks occupancy: every arc cut by ``P`` must hold ``>= a_i`` labelling
   points and every arc cut by ``Q`` must hold ``>= N_i`` testing points;
3. if both hold, adds ``P ∩ I`` to ``Q`` for each arc ``I`` of ``Q`` whose
   testing-block label frequency lies strictly inside ``(eps_i, 1 - eps_i)``,
   then relabels by majority vote over the labelling block.

A failed check leaves ``Q`` and the hypothesis untouched. ``Q`` never loses
points, so partitions are only ever refined.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cyclic import ArcPartition, HalfOpenArc, partition_from
from .problems import Hypothesis, LabeledSample
from .schedule import Schedule

__all__ = [
    "RuleState",
    "StageRecord",
    "empirical_conditional",
    "histogram_fit",
    "histogram_labels",
    "initial_state",
    "nn1_hypothesis",
    "nn1_predict",
    "run_smart_rule",
    "smart_rule_advance",
    "smart_rule_literal",
    "smart_rule_predict",
]


def histogram_labels(partition: ArcPartition, x: np.ndarray, y: np.ndarray) -> tuple:
    """Majority label per arc; ``x``/``y`` must be in increasing index order.

    An even, non-empty vote drops its highest-index point. Empty arcs get 1.
    """
    m = len(partition)
    if x.size == 0:
        return (1,) * m
    cells = partition.locate(x)
    counts = np.bincount(cells, minlength=m)
    ones = np.bincount(cells, weights=y, minlength=m)
    rev_cells, rev_first = np.unique(cells[::-1], return_index=True)
    last = np.full(m, -1)
    last[rev_cells] = x.size - 1 - rev_first
    even = (counts > 0) & (counts % 2 == 0)
    ones[even] -= y[last[even]]
    counts[even] -= 1
    labels = np.where(counts > 0, 2 * ones > counts, True)
    return tuple(int(v) for v in labels)


def histogram_fit(partition: ArcPartition, sample: LabeledSample) -> Hypothesis:
    return Hypothesis(partition, histogram_labels(partition, sample.x, sample.y))


def empirical_conditional(sample_slice: LabeledSample, arc: HalfOpenArc):
    """Fraction of label-1 points among the slice's points in ``arc``; ``None`` if there are none."""
    inside = arc.contains_many(sample_slice.x)
    count = int(inside.sum())
    if count == 0:
        return None
    return float(sample_slice.y[inside].sum()) / count


def _strictly_mixed(ones: np.ndarray, counts: np.ndarray, eps: float) -> np.ndarray:
    # eps < ones/count < 1 - eps, symmetric in the two labels
    with np.errstate(divide="ignore", invalid="ignore"):
        minority = np.minimum(ones, counts - ones) / counts
    return (counts > 0) & (minority > eps)


@dataclass(frozen=True)
class StageRecord:
    stage: int
    n_end: int
    labelling_gate: bool
    testing_gate: bool
    updated: bool
    arcs_diversified: tuple = ()
    arcs_frozen: tuple = ()
    q_size: int = 0
    labels: tuple = ()

    def to_dict(self) -> dict:
        return {
            "stage": self.stage, "n_end": self.n_end,
            "labelling_gate": self.labelling_gate, "testing_gate": self.testing_gate,
            "updated": self.updated,
            "arcs_diversified": [list(a) for a in self.arcs_diversified],
            "arcs_frozen": [list(a) for a in self.arcs_frozen],
            "q_size": self.q_size, "labels": list(self.labels),
        }


@dataclass(frozen=True)
class RuleState:
    k: int = 0
    Q: tuple = ()
    P: tuple = ()
    hypothesis: Hypothesis | None = None
    last_update_stage: int = 0
    log: tuple = field(default_factory=tuple)

    @property
    def partition(self) -> ArcPartition:
        return partition_from(self.Q)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "last_update_stage": self.last_update_stage,
            "Q": list(self.Q), "P": list(self.P),
            "labels": list(self.hypothesis.labels) if self.hypothesis else None,
            "log": [r.to_dict() for r in self.log],
        }


def initial_state() -> RuleState:
    return RuleState()


def _block_arrays(sigma: LabeledSample, block: range):
    if len(block) == 0:
        return np.empty(0), np.empty(0, dtype=np.int8)
    if sigma.index[0] == 1 and sigma.index[-1] == len(sigma):
        lo, hi = block.start - 1, block.stop - 1
        return sigma.x[lo:hi], sigma.y[lo:hi]
    sub = sigma.block(block.start, block.stop - 1)
    return sub.x, sub.y


def _arc_bounds(part: ArcPartition) -> list[tuple[float, float]]:
    return [(a.start, a.end) for a in part.arcs]


def smart_rule_advance(state: RuleState, sigma_prefix: LabeledSample, schedule: Schedule,
                       i: int) -> RuleState:
    """Run stage ``i`` on top of ``state`` (the result of stages ``1..i-1``)."""
    if i != state.k + 1:
        raise ValueError(f"stage {i} cannot follow stage {state.k}")
    if i > schedule.K:
        raise ValueError(f"schedule has only {schedule.K} stages")
    n_i = schedule.n_at(i)
    if len(sigma_prefix) < n_i:
        raise ValueError(f"stage {i} needs {n_i} points, prefix has {len(sigma_prefix)}")

    cut, A, B = schedule.blocks(i)
    xb, yb = _block_arrays(sigma_prefix, B)
    if i == 1:
        hyp = Hypothesis(ArcPartition(()), histogram_labels(ArcPartition(()), xb, yb))
        rec = StageRecord(1, n_i, True, True, True, q_size=0, labels=hyp.labels)
        return RuleState(1, (), (), hyp, 1, state.log + (rec,))

    xc, _ = _block_arrays(sigma_prefix, range(cut, cut + 1))
    P = state.P + (float(xc[0]),)
    p_part = partition_from(P)
    q_part = partition_from(state.Q)

    b_counts = np.bincount(p_part.locate(xb), minlength=len(p_part)) if xb.size else np.zeros(len(p_part))
    labelling_ok = bool(np.all(b_counts >= schedule.a[i - 1]))
    xa, ya = _block_arrays(sigma_prefix, A)
    a_cells = q_part.locate(xa) if xa.size else np.empty(0, dtype=np.intp)
    a_counts = np.bincount(a_cells, minlength=len(q_part))
    testing_ok = bool(np.all(a_counts >= schedule.N[i - 1]))

    if not (labelling_ok and testing_ok):
        rec = StageRecord(i, n_i, labelling_ok, testing_ok, False, q_size=len(state.Q),
                          labels=state.hypothesis.labels)
        return replace(state, k=i, P=P, log=state.log + (rec,))

    a_ones = np.bincount(a_cells, weights=ya, minlength=len(q_part))
    mixed = _strictly_mixed(a_ones, a_counts, schedule.eps[i - 1])
    bounds = _arc_bounds(q_part)
    P_arr = np.asarray(P)
    new_points = P_arr[mixed[q_part.locate(P_arr)]]
    Q = tuple(sorted(set(state.Q) | set(new_points.tolist())))
    part = partition_from(Q)
    hyp = Hypothesis(part, histogram_labels(part, xb, yb))
    rec = StageRecord(
        i, n_i, True, True, True,
        arcs_diversified=tuple(bounds[j] for j in np.flatnonzero(mixed)),
        arcs_frozen=tuple(bounds[j] for j in np.flatnonzero(~mixed)),
        q_size=len(Q), labels=hyp.labels,
    )
    return RuleState(i, Q, P, hyp, i, state.log + (rec,))


def run_smart_rule(sample: LabeledSample, schedule: Schedule, n: int | None = None) -> list[RuleState]:
    """States after every stage that fits in the first ``n`` points (default: all)."""
    n = len(sample) if n is None else n
    k = min(schedule.stage_for(n), schedule.K)
    states, state = [], initial_state()
    for i in range(1, k + 1):
        state = smart_rule_advance(state, sample, schedule, i)
        states.append(state)
    return states


def smart_rule_predict(state: RuleState, x) -> np.ndarray:
    if state.hypothesis is None:
        raise ValueError("state has not run stage 1")
    return state.hypothesis.predict(x)


def smart_rule_literal(sample: LabeledSample, schedule: Schedule) -> Hypothesis:
    """Recompute the hypothesis from scratch, following the stage loop line by line.

    Plain loops and per-arc scans; slow, kept as an independent cross-check
    of :func:`smart_rule_advance`.
    """
    n = len(sample)
    k = schedule.stage_for(n)
    x = [float(v) for v in sample.x]
    y = [int(v) for v in sample.y]
    Q: set = set()
    R: set = set()
    H = None
    for i in range(1, k + 1):
        _, A, B = schedule.blocks(i)
        P_i = [x[schedule.n_at(j) + 1 - 1] for j in range(1, i)]
        arcs_P = partition_from(P_i).arcs
        arcs_Q = partition_from(Q).arcs
        gate = all(sum(1 for j in B if arc.contains(x[j - 1])) >= schedule.a[i - 1] for arc in arcs_P)
        if gate and i > 1:
            gate = all(sum(1 for j in A if arc.contains(x[j - 1])) >= schedule.N[i - 1] for arc in arcs_Q)
        if not gate:
            continue
        if k > 1:
            eps = schedule.eps[i - 1]
            for arc in arcs_Q:
                hits = [j for j in A if arc.contains(x[j - 1])]
                if not hits:
                    continue
                ones = sum(y[j - 1] for j in hits)
                if min(ones, len(hits) - ones) / len(hits) > eps:
                    R |= {p for p in P_i if arc.contains(p)}
        Q = set(R)
        part = partition_from(Q)
        labels = []
        for arc in part.arcs:
            votes = [y[j - 1] for j in B if arc.contains(x[j - 1])]
            if len(votes) % 2 == 0 and votes:
                votes = votes[:-1]
            labels.append(1 if not votes else int(2 * sum(votes) > len(votes)))
        H = Hypothesis(part, tuple(labels))
    return H


def _circle_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def nn1_predict(sample: LabeledSample, x) -> np.ndarray | int:
    """Label of the circularly nearest sample point; ties go to the smallest index."""
    if len(sample) == 0:
        raise ValueError("1-NN needs a non-empty sample")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.size, dtype=np.int8)
    step = max(1, (1 << 20) // len(sample))
    for lo in range(0, xs.size, step):
        d = _circle_dist(xs[lo:lo + step, None], sample.x[None, :])
        # argmin returns the first minimum, i.e. the smallest index
        out[lo:lo + step] = sample.y[np.argmin(d, axis=1)]
    return int(out[0]) if np.ndim(x) == 0 else out


def nn1_hypothesis(sample: LabeledSample) -> Hypothesis:
    """1-NN as an arc partition: cells cut at midpoints between neighbouring points.

    Agrees with :func:`nn1_predict` except possibly at the cut points
    themselves (exact ties), which carry no mass unless an atom sits there.
    """
    if len(sample) == 0:
        raise ValueError("1-NN needs a non-empty sample")
    pos, first = np.unique(sample.x, return_index=True)  # first = smallest index per position
    lab = sample.y[first]
    if pos.size == 1:
        return Hypothesis.constant(int(lab[0]))
    nxt = np.roll(pos, -1)
    nxt[-1] += 1.0
    mids = np.mod((pos + nxt) / 2.0, 1.0)
    # cell starting at mids[j] belongs to point j + 1
    part = partition_from(mids)
    order = np.argsort(mids)
    owner = (order + 1) % pos.size
    return Hypothesis(part, tuple(int(v) for v in lab[owner]))
