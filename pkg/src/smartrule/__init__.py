"""Monotone partitioning classifier on the circle, with its numerical toolkit."""
from .cyclic import ArcPartition, HalfOpenArc, cyclic_between, locate, partition_from, successor, transport_from_uniform
from .errorfn import (
    bayes_binary,
    binomial_inside,
    concave_envelope,
    find_N,
    majority_error,
    monotone_gap,
    taylor_coeff,
)
from .estimators import (
    CircleNearestNeighbor,
    ConstantClassifier,
    PartitionHistogramClassifier,
    SmartRuleClassifier,
)
from .problems import Hypothesis, LabeledSample, LearningProblem, bayes_error, conditional_eta, measure, risk, sample
from .rules import histogram_fit, nn1_predict, smart_rule_advance, smart_rule_predict
from .schedule import Schedule, default_sequences, exact_schedule, practical_schedule, vc_sample_size

__all__ = [
    "ArcPartition", "CircleNearestNeighbor", "ConstantClassifier", "HalfOpenArc", "Hypothesis",
    "LabeledSample", "LearningProblem", "PartitionHistogramClassifier", "Schedule", "SmartRuleClassifier",
    "bayes_binary", "bayes_error", "binomial_inside", "concave_envelope", "conditional_eta",
    "cyclic_between", "default_sequences", "exact_schedule", "find_N", "histogram_fit", "locate",
    "majority_error", "measure", "monotone_gap", "nn1_predict", "partition_from", "practical_schedule",
    "risk", "sample", "smart_rule_advance", "smart_rule_predict", "successor", "taylor_coeff",
    "transport_from_uniform", "vc_sample_size",
]
