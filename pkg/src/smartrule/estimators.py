"""scikit-learn style classifiers on the circle.

``X`` is a vector of positions in ``[0, 1)`` (or a single-column matrix) and
``y`` holds 0/1 labels. Sample order matters for the staged rule: row ``j``
is the point with index ``j + 1``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.utils.validation import check_is_fitted

from .cyclic import partition_from
from .problems import Hypothesis, LabeledSample, LearningProblem, risk
from .rules import (
    histogram_fit,
    initial_state,
    nn1_hypothesis,
    nn1_predict,
    smart_rule_advance,
)
from .schedule import Schedule, practical_schedule
from .validation import check_labeled, check_positions

__all__ = [
    "CircleNearestNeighbor",
    "ConstantClassifier",
    "PartitionHistogramClassifier",
    "SmartRuleClassifier",
    "make_rule",
]


class _CircleClassifier(ClassifierMixin, BaseEstimator):
    """Shared plumbing: prediction through ``hypothesis_`` and exact risk."""

    def _fit_sample(self, sample: LabeledSample):
        raise NotImplementedError

    def fit(self, X, y):
        x, labels = check_labeled(X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 1
        self._fit_sample(LabeledSample(x, labels))
        return self

    def predict(self, X):
        check_is_fitted(self, "hypothesis_")
        return self.hypothesis_.predict(check_positions(X))

    def atom_predictor(self):
        """Override for exact risk at atoms, or ``None`` to use the partition."""
        return None

    def risk(self, problem: LearningProblem) -> float:
        """Exact misclassification probability of the fitted classifier."""
        check_is_fitted(self, "hypothesis_")
        return risk(problem, self.hypothesis_, self.atom_predictor())

    def prefix_risks(self, problem: LearningProblem, sample: LabeledSample, ns) -> list[float]:
        """Exact risk after fitting on each prefix ``sample[:n]``, ``n`` in ``ns``."""
        out = []
        for n in ns:
            est = clone(self)
            est._fit_sample(sample.prefix(n))
            out.append(est.risk(problem))
        return out


class ConstantClassifier(_CircleClassifier):
    def __init__(self, label: int = 0):
        self.label = label

    def _fit_sample(self, sample):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        self.hypothesis_ = Hypothesis.constant(self.label)

    def prefix_risks(self, problem, sample, ns):
        r = risk(problem, Hypothesis.constant(self.label))
        return [r] * len(ns)


class PartitionHistogramClassifier(_CircleClassifier):
    """Majority vote per arc of the partition cut at ``cuts``."""

    def __init__(self, cuts=()):
        self.cuts = cuts

    def _fit_sample(self, sample):
        self.partition_ = partition_from(check_positions(np.asarray(self.cuts, dtype=float), "cuts"))
        self.hypothesis_ = histogram_fit(self.partition_, sample)


class CircleNearestNeighbor(_CircleClassifier):
    """1-NN under arc-length distance; ties go to the earliest sample point."""

    def _fit_sample(self, sample):
        self.sample_ = sample
        self.hypothesis_ = nn1_hypothesis(sample)

    def predict(self, X):
        check_is_fitted(self, "hypothesis_")
        return nn1_predict(self.sample_, check_positions(X))

    def atom_predictor(self):
        # midpoints between sample points may coincide with atoms; ask 1-NN directly there
        return lambda loc: nn1_predict(self.sample_, np.asarray(loc, dtype=float))


class SmartRuleClassifier(_CircleClassifier):
    """The staged partitioning rule.

    Parameters
    ----------
    schedule : Schedule or None
        Block schedule. ``None`` builds ``practical_schedule(K)``.
    K : int
        Number of stages when no schedule is given.

    Attributes
    ----------
    states_ : list of RuleState
        State after each completed stage.
    hypothesis_ : Hypothesis
        Hypothesis of the last completed stage; points past ``n_k`` are unused.
    """

    def __init__(self, schedule: Schedule | None = None, K: int = 8):
        self.schedule = schedule
        self.K = K

    def _schedule(self) -> Schedule:
        return self.schedule if self.schedule is not None else practical_schedule(self.K)

    def _run(self, sample: LabeledSample, n: int):
        sch = self._schedule()
        states, state = [], initial_state()
        for i in range(1, min(sch.stage_for(n), sch.K) + 1):
            state = smart_rule_advance(state, sample, sch, i)
            states.append(state)
        return states

    def _fit_sample(self, sample):
        self.states_ = self._run(sample, len(sample))
        self.schedule_ = self._schedule()
        self.hypothesis_ = self.states_[-1].hypothesis

    def prefix_risks(self, problem, sample, ns):
        sch = self._schedule()
        states = self._run(sample, max(ns))
        # one risk per stage; every n reuses the stage it falls in
        stage_risk = [risk(problem, st.hypothesis) for st in states]
        return [stage_risk[min(sch.stage_for(n), len(states)) - 1] for n in ns]


def make_rule(name: str, **params) -> _CircleClassifier:
    rules = {
        "smart": SmartRuleClassifier,
        "histogram_fixed": PartitionHistogramClassifier,
        "nn1": CircleNearestNeighbor,
        "constant": ConstantClassifier,
    }
    if name not in rules:
        raise ValueError(f"unknown rule {name!r}; expected one of {sorted(rules)}")
    return rules[name](**params)
