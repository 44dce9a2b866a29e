"""Monte Carlo error curves and verification suites.

Every randomised routine takes an explicit integer ``seed``. Trial ``j``
draws from ``numpy.random.default_rng(SeedSequence(entropy=seed,
spawn_key=(j,)))`` (see :func:`trial_rng`), so a trial's randomness does not
depend on how many other trials run or in which order.

Reports are plain dicts that serialise to stable JSON via :func:`dump_report`.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata as _metadata

import numpy as np

from .cyclic import HalfOpenArc, partition_from
from .errorfn import (
    FindNError,
    binomial_inside,
    binomial_pmf,
    find_N,
    key_lemma_margin,
    majority_error,
    monotone_gap,
)
from .problems import (
    Atom,
    Hypothesis,
    LabeledSample,
    LearningProblem,
    UniformArc,
    risk,
    sample,
)
from .rules import histogram_labels, nn1_predict
from .schedule import PRACTICAL_NOTICE, Schedule, practical_schedule, vc_sample_size

__all__ = [
    "CurvePoint",
    "ErrorCurve",
    "benchmark_problems",
    "benchmark_schedule",
    "consistency_schedule",
    "dump_report",
    "expected_error_curve",
    "monotonicity_audit",
    "nn_counterexample_search",
    "nn_expected_errors",
    "report_header",
    "trial_rng",
    "verify_coverage",
    "verify_key_lemma",
    "verify_key_piece",
    "verify_monotone_identity",
]


def library_version() -> str:
    try:
        return _metadata.version("artifact")
    except _metadata.PackageNotFoundError:
        return "0+unknown"


def _check_seed(seed) -> int:
    if seed is None or isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for trial ``trial`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=(int(trial),)))


def report_header(mode: str, seed, **extra) -> dict:
    head = {"mode": mode, "seed": seed, "version": library_version()}
    if mode == "practical":
        head["notice"] = PRACTICAL_NOTICE
    head.update(extra)
    return head


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _mean_se(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = math.fsum(arr) / arr.size
    if arr.size < 2:
        return mean, 0.0
    var = math.fsum((arr - mean) ** 2) / (arr.size - 1)
    return mean, math.sqrt(var / arr.size)


# ---------------------------------------------------------------- error curves

@dataclass(frozen=True)
class CurvePoint:
    n: int
    mean_risk: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class ErrorCurve:
    points: tuple
    bayes: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bayes > 0.5 + 1e-12:
            raise ValueError("Bayes error cannot exceed 1/2")
        for pt in self.points:
            if not -1e-12 <= pt.mean_risk <= 1.0 + 1e-12 or pt.stderr < 0:
                raise ValueError(f"invalid curve point {pt}")
            if self.bayes > pt.mean_risk + 6.0 * pt.stderr + 1e-12:
                raise ValueError(f"mean risk {pt.mean_risk} at n={pt.n} is below the Bayes error {self.bayes}")

    @property
    def ns(self) -> list[int]:
        return [p.n for p in self.points]

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean_risk for p in self.points])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])

    def rows(self):
        for p in self.points:
            yield {"n": p.n, "mean_risk": p.mean_risk, "stderr": p.stderr, "trials": p.trials,
                   "bayes": self.bayes}

    def to_dict(self) -> dict:
        return {"bayes": self.bayes, "metadata": self.metadata, "points": list(self.rows())}


def expected_error_curve(problem: LearningProblem, rule, ns, trials: int, seed: int,
                         metadata: dict | None = None) -> ErrorCurve:
    """Average exact risk of ``rule`` fitted on prefixes of ``trials`` samples.

    ``rule`` is an estimator from :mod:`smartrule.estimators`. Each trial
    draws one sample of size ``max(ns)``; the curve at ``n`` uses its first
    ``n`` points.
    """
    ns = [int(n) for n in ns]
    if not ns or any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be a non-empty increasing list of positive integers")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed = _check_seed(seed)
    risks = np.empty((trials, len(ns)))
    for j in range(trials):
        s = sample(problem, trial_rng(seed, j), ns[-1])
        risks[j] = rule.prefix_risks(problem, s, ns)
    points = []
    for i, n in enumerate(ns):
        m, se = _mean_se(risks[:, i])
        points.append(CurvePoint(n, m, se, trials))
    meta = {"problem": problem.name, "rule": type(rule).__name__, "seed": seed}
    meta.update(metadata or {})
    return ErrorCurve(tuple(points), problem.bayes_error(), meta)


def monotonicity_audit(curve: ErrorCurve, sigmas: float = 3.0) -> dict:
    """Flag consecutive points whose mean risk rises by more than ``sigmas`` combined standard errors."""
    steps = []
    for a, b in zip(curve.points, curve.points[1:]):
        se = math.hypot(a.stderr, b.stderr)
        rise = b.mean_risk - a.mean_risk
        steps.append({"n_from": a.n, "n_to": b.n, "rise": rise, "combined_se": se,
                      "violation": bool(rise > sigmas * se + 1e-15)})
    return {"sigmas": sigmas, "steps": steps, "passed": not any(s["violation"] for s in steps)}


def benchmark_problems() -> list[LearningProblem]:
    """Five test distributions used for the monotonicity audit."""
    return [
        LearningProblem.uniform(0.3, name="uniform-0.3"),
        LearningProblem.piecewise([0.2, 0.7], [0.1, 0.9], name="two-arcs-0.1-0.9"),
        LearningProblem.piecewise([0.0, 0.5], [0.2, 0.0], name="halves-0.2-0"),
        LearningProblem([
            Atom(0.1, 0.2, 0.7),
            UniformArc(HalfOpenArc(0.3, 0.6), 0.5, 0.15),
            UniformArc(HalfOpenArc(0.6, 0.05), 0.3, 0.8),
        ], name="atom-and-arcs"),
        LearningProblem.piecewise([0.0, 0.25, 0.5, 0.75], [0.2, 0.8, 0.2, 0.8], name="four-arcs-alternating"),
    ]


def benchmark_schedule(K: int = 6, ca: float = 2.0, cb: float = 4.0, N: int = 1) -> Schedule:
    """Practical schedule with ``a_k = ceil(ca k^2)`` and ``b_k`` the smallest odd integer ``>= cb k^4``.

    Polynomial growth keeps both occupancy checks passing with moderate
    probability: ``k - 1`` random cut points leave a smallest arc of order
    ``1/k^2``.
    """
    def a(k):
        return math.ceil(ca * k * k)

    def b(k):
        v = math.ceil(cb * k ** 4)
        return v + 1 - v % 2

    return practical_schedule(K, a=a, b=b, N=N)


def consistency_schedule() -> Schedule:
    """The largest schedule used for the desk-scale consistency check (``n`` about 1.5e7)."""
    return benchmark_schedule(K=28)


# ------------------------------------------------------------ identity / key

def verify_monotone_identity(n_max: int = 41, grid: int = 1001, tol: float = 1e-12) -> dict:
    if n_max < 1 or n_max % 2 == 0:
        raise ValueError("n_max must be odd")
    p = np.linspace(0.0, 1.0, int(grid))
    worst, worst_at, min_gap, max_rise = 0.0, None, math.inf, -math.inf
    for n in range(1, n_max + 1, 2):
        lo, hi = majority_error(p, n), majority_error(p, n + 2)
        gap = monotone_gap(p, n)
        dev = np.abs(lo - hi - gap)
        j = int(np.argmax(dev))
        if dev[j] > worst or worst_at is None:
            worst, worst_at = float(dev[j]), {"n": n, "p": float(p[j])}
        min_gap = min(min_gap, float(gap.min()))
        max_rise = max(max_rise, float((hi - lo).max()))
    return {
        "suite": "identity", "n_max": n_max, "grid": int(grid), "tolerance": tol,
        "max_deviation": worst, "worst": worst_at, "min_gap": min_gap,
        "max_increase_n_to_n_plus_2": max_rise,
        "passed": bool(worst <= tol and min_gap >= 0.0 and max_rise <= tol),
    }


def verify_key_lemma(n: int, t: float, N: int, grid_size: int = 4097, slack: float = 1e-9) -> dict:
    p, margin = key_lemma_margin(n, t, N, grid_size)
    j = int(np.argmax(margin))
    lip = 5.0 * N + 2.0 * n
    return {
        "suite": "key", "n": n, "t": t, "N": N, "grid_size": int(grid_size), "slack": slack,
        "worst_margin": float(margin[j]), "worst_p": float(p[j]),
        "margin_at_0": float(margin[0]), "margin_at_1": float(margin[-1]),
        "between_grid_bound": lip / (grid_size - 1) / 2.0,
        "passed": bool(margin[j] <= slack),
    }


# ------------------------------------------------------------------ key piece

def verify_key_piece(n: int, N: int, eps: float, trials: int, seed: int, etas=(0.2, 0.0),
                     tau_size: int | None = None, cap: int = 1000, sigmas: float = 3.0,
                     grid_size: int = 4097) -> dict:
    """Simulate the split-or-keep protocol on two half-circle cells.

    Per trial: ``sigma`` (size ``n``) labels the one-cell classifier;
    ``varsigma`` (size ``N``) decides whether to split, by checking whether its
    label frequency lies in ``(eps, 1 - eps)``; ``tau`` (size ``tau_size``,
    default ``2N``) labels the chosen partition and is redrawn until each cell
    holds at least ``N`` of its points. Trials whose ``tau`` exceeds ``cap``
    redraws are counted and left out of both means.
    """
    if trials < 10 ** 4:
        raise ValueError("the protocol needs at least 10^4 trials")
    if n % 2 == 0 or N % 2 == 0:
        raise ValueError("n and N must be odd")
    seed = _check_seed(seed)
    tau_size = 2 * N if tau_size is None else int(tau_size)
    problem = LearningProblem.piecewise([0.0, 0.5], list(etas), name="two-cells")
    split = partition_from([0.0, 0.5])
    trivial = partition_from([])
    try:
        required = find_N(n, eps, grid_size=grid_size).N
    except FindNError:
        required = None
    # exact risk of a labelling, cached: at most four distinct hypotheses
    risk_split = {lab: risk(problem, Hypothesis(split, lab)) for lab in itertools.product((0, 1), repeat=2)}
    risk_trivial = {(lab,): risk(problem, Hypothesis(trivial, (lab,))) for lab in (0, 1)}

    q_risk, t_risk = [], []
    cap_hits, splits, redraws = 0, 0, 0
    for j in range(trials):
        rng = trial_rng(seed, j)
        xs, ys = problem.draw(rng, n)
        t_risk_j = risk_trivial[histogram_labels(trivial, xs, ys)]
        _, yv = problem.draw(rng, N)
        freq = float(yv.sum()) / N
        do_split = min(freq, 1.0 - freq) > eps
        for attempt in range(cap):
            xt, yt = problem.draw(rng, tau_size)
            counts = np.bincount(split.locate(xt), minlength=2)
            if counts.min() >= N:
                break
        else:
            cap_hits += 1
            continue
        redraws += attempt
        splits += do_split
        if do_split:
            q_risk.append(risk_split[histogram_labels(split, xt, yt)])
        else:
            q_risk.append(risk_trivial[histogram_labels(trivial, xt, yt)])
        t_risk.append(t_risk_j)

    mq, sq = _mean_se(q_risk)
    mt, st = _mean_se(t_risk)
    se = math.hypot(sq, st)
    diff = mq - mt
    p_mean = problem.mean_eta()
    exact_split = _key_piece_exact(etas, N, eps) if tau_size == 2 * N else None
    return {
        "suite": "key_piece", "n": n, "N": N, "eps": eps, "etas": list(etas), "tau_size": tau_size,
        "trials": trials, "seed": seed, "cap": cap, "cap_hits": cap_hits, "tau_redraws": redraws,
        "split_fraction": splits / max(len(q_risk), 1),
        "N_required": required, "N_meets_requirement": required is not None and N >= required,
        "mean_risk_split_rule": mq, "stderr_split_rule": sq,
        "mean_risk_one_cell": mt, "stderr_one_cell": st,
        "exact_risk_one_cell": float(majority_error(p_mean, n)),
        "exact_risk_split_rule": exact_split,
        "difference": diff, "combined_se": se, "z": diff / se if se > 0 else 0.0,
        "no_increase": bool(diff <= sigmas * se), "increase_detected": bool(diff >= sigmas * se),
        "passed": bool(diff <= sigmas * se),
    }


def _key_piece_exact(etas, N: int, eps: float) -> float:
    """Exact mean risk of the split-or-keep classifier when ``tau`` has ``2N`` points.

    Conditioning leaves exactly ``N`` points per half. Kept as one cell, the
    vote drops the last point, which sits in either half with probability 1/2.
    """
    e1, e2 = (float(e) for e in etas)
    p_mean = 0.5 * (e1 + e2)
    b = float(binomial_inside(p_mean, N, eps))
    split = 0.5 * (float(majority_error(e1, N)) + float(majority_error(e2, N)))
    ones_one_cell = 0.0
    for short, full in ((e1, e2), (e2, e1)):
        dist = np.convolve(binomial_pmf(short, N - 1)[0], binomial_pmf(full, N)[0])
        ones_one_cell += 0.5 * float(dist[N:].sum())  # 2N - 1 votes, label 1 needs >= N ones
    keep = ones_one_cell * (1.0 - p_mean) + (1.0 - ones_one_cell) * p_mean
    return b * split + (1.0 - b) * keep


# ------------------------------------------------------------------- coverage

def verify_coverage(k: int, N: int, delta: float, trials: int, problem: LearningProblem, seed: int,
                    sigmas: float = 3.0) -> dict:
    """Fraction of trials in which ``k`` random cut points leave an arc with fewer than ``N`` of ``M`` further points."""
    seed = _check_seed(seed)
    M = vc_sample_size(k, N, delta)
    failures = 0
    for j in range(trials):
        rng = trial_rng(seed, j)
        cuts, _ = problem.draw(rng, k)
        part = partition_from(cuts)
        pts, _ = problem.draw(rng, M)
        counts = np.bincount(part.locate(pts), minlength=len(part))
        failures += bool(counts.min() < N)
    rate = failures / trials
    sigma = math.sqrt(delta * (1.0 - delta) / trials)
    return {
        "suite": "coverage", "problem": problem.name, "k": k, "N": N, "delta": delta, "M": M,
        "trials": trials, "seed": seed, "failures": failures, "failure_rate": rate,
        "bound": delta + sigmas * sigma, "passed": bool(rate <= delta + sigmas * sigma),
    }


# ---------------------------------------------------------- 1-NN counterexample

def _nn_risk_exact(locs, masses, etas, xs, ys) -> Fraction:
    sample_ = LabeledSample(np.asarray(xs, dtype=float), np.asarray(ys))
    pred = nn1_predict(sample_, np.asarray(locs, dtype=float))
    total = Fraction(0)
    for m, e, lab in zip(masses, etas, pred):
        total += m * ((1 - e) if lab == 1 else e)
    return total


def nn_expected_errors(locs, masses, etas, ns=(1, 2)) -> dict:
    """Exact expected 1-NN risk for samples of each size in ``ns`` from an atomic problem.

    Sums over every placement of the sample on the atoms and every labelling.
    ``masses`` and ``etas`` may be :class:`Fraction` for exact arithmetic.
    """
    masses = [Fraction(m) for m in masses]
    etas = [Fraction(e) for e in etas]
    if sum(masses) != 1:
        raise ValueError("masses must sum to 1")
    out = {}
    for n in ns:
        total = Fraction(0)
        for where in itertools.product(range(len(locs)), repeat=n):
            w_pos = math.prod((masses[i] for i in where), start=Fraction(1))
            for labels in itertools.product((0, 1), repeat=n):
                w = w_pos * math.prod((etas[i] if y else 1 - etas[i] for i, y in zip(where, labels)),
                                      start=Fraction(1))
                if w == 0:
                    continue
                total += w * _nn_risk_exact(locs, masses, etas, [locs[i] for i in where], labels)
        out[n] = total
    return out


def nn_counterexample_search(seed: int, locs=(0.25, 0.75), grid: int = 10, widen_draws: int = 2000) -> dict:
    """Find a two-atom problem on which 1-NN errs more with two points than with one.

    Scans masses ``q in {1/grid, ..., 1 - 1/grid}`` and etas on ``{0, 1/grid, ..., 1}``
    with exact rational arithmetic and returns the problem with the largest
    ``EL2 - EL1``. If the grid has no witness, random rational parameters
    drawn from ``seed`` widen the search.
    """
    seed = _check_seed(seed)
    step = Fraction(1, grid)
    best = None
    candidates = [(q * step, a * step, b * step)
                  for q in range(1, grid) for a in range(grid + 1) for b in range(grid + 1)]
    rng = np.random.default_rng(seed)
    for phase in ("grid", "widened"):
        if phase == "widened":
            if best is not None:
                break
            den = 10 ** 4
            draws = rng.integers(1, den, size=(widen_draws, 3))
            candidates = [(Fraction(int(q), den), Fraction(int(a), den), Fraction(int(b), den)) for q, a, b in draws]
        for q, e1, e2 in candidates:
            el = nn_expected_errors(locs, (q, 1 - q), (e1, e2))
            gap = el[2] - el[1]
            if gap > 0 and (best is None or gap > best[0]):
                best = (gap, q, e1, e2, el, phase)
    if best is None:
        return {"suite": "counterexample", "seed": seed, "found": False, "passed": False}
    gap, q, e1, e2, el, phase = best
    problem = LearningProblem.atomic(list(locs), [float(q), float(1 - q)], [float(e1), float(e2)],
                                     name="nn-witness")
    return {
        "suite": "counterexample", "seed": seed, "found": True, "phase": phase,
        "problem": problem.to_dict(),
        "q": str(q), "eta": [str(e1), str(e2)],
        "EL1": float(el[1]), "EL2": float(el[2]),
        "EL1_exact": str(el[1]), "EL2_exact": str(el[2]),
        "passed": bool(el[1] < el[2]),
    }
