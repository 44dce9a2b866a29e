import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smartrule.cyclic import (
    ArcPartition,
    HalfOpenArc,
    check_position,
    cyclic_between,
    locate,
    partition_from,
    successor,
    transport_from_uniform,
)
from smartrule.problems import LearningProblem

from conftest import problem_zoo

positions = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)


def test_check_position_bounds():
    assert check_position(0.0) == 0.0
    for bad in (-1e-9, 1.0, float("nan"), 2.5):
        with pytest.raises(ValueError):
            check_position(bad)


@pytest.mark.parametrize("x, y, z, expected", [
    (0.1, 0.2, 0.3, True),
    (0.3, 0.2, 0.1, False),
    (0.8, 0.1, 0.4, True),  # wraps: 0.8 -> 0.1 is 0.3, 0.8 -> 0.4 is 0.6
])
def test_cyclic_between_examples(x, y, z, expected):
    assert cyclic_between(x, y, z) is expected


def test_cyclic_between_rejects_repeats():
    with pytest.raises(ValueError):
        cyclic_between(0.1, 0.1, 0.3)


def _distinct(xs):
    return len(set(xs)) == len(xs)


@settings(max_examples=300)
@given(st.lists(positions, min_size=3, max_size=3).filter(_distinct))
def test_axiom_exactly_one_orientation(t):
    x, y, z = t
    assert cyclic_between(x, y, z) != cyclic_between(z, y, x)


@settings(max_examples=300)
@given(st.lists(positions, min_size=3, max_size=3).filter(_distinct))
def test_axiom_rotation(t):
    x, y, z = t
    if cyclic_between(x, y, z):
        assert cyclic_between(y, z, x)


@settings(max_examples=300)
@given(st.lists(positions, min_size=4, max_size=4).filter(_distinct))
def test_axiom_transitivity(t):
    x, y, z, u = t
    if cyclic_between(x, y, z) and cyclic_between(x, z, u):
        assert cyclic_between(x, y, u)


def test_axioms_on_random_triples():
    rng = np.random.default_rng(0)
    for x, y, z in rng.random((10 ** 4, 3)):
        assert cyclic_between(x, y, z) != cyclic_between(z, y, x)
        if cyclic_between(x, y, z):
            assert cyclic_between(y, z, x)


@pytest.mark.parametrize("points, x, expected", [
    ({0.2, 0.7}, 0.2, 0.7),
    ({0.2, 0.7}, 0.7, 0.2),
    ({0.1, 0.4, 0.9}, 0.9, 0.1),
])
def test_successor_examples(points, x, expected):
    assert successor(points, x) == expected


@given(st.sets(positions, min_size=2, max_size=30), st.data())
def test_successor_matches_definition(points, data):
    x = data.draw(st.sampled_from(sorted(points)))
    y = successor(points, x)
    # brute force: y is the candidate with nothing of the set strictly between x and it
    for z in points - {x, y}:
        assert cyclic_between(x, y, z)


def test_successor_errors():
    with pytest.raises(ValueError):
        successor({0.3}, 0.3)
    with pytest.raises(ValueError):
        successor({0.3, 0.4}, 0.5)


def test_partition_examples():
    full = partition_from([])
    assert len(full) == 1 and full.arcs[0].is_full and full.is_trivial
    single = partition_from([0.5])
    assert single.arcs == [HalfOpenArc(0.5, 0.5)] and single.arcs[0].length == 1.0
    two = partition_from([0.7, 0.2])
    assert two.arcs == [HalfOpenArc(0.2, 0.7), HalfOpenArc(0.7, 0.2)]


def test_partition_deduplicates():
    assert partition_from([0.3, 0.3, 0.1]).points == (0.1, 0.3)


def test_arc_conventions():
    arc = HalfOpenArc(0.7, 0.2)
    assert arc.contains(0.7) and not arc.contains(0.2)
    assert arc.contains(0.95) and arc.contains(0.0) and not arc.contains(0.5)
    assert arc.length == pytest.approx(0.5)
    assert arc.pieces() == [(0.7, 1.0), (0.0, 0.2)]
    assert HalfOpenArc(0.3, 0.3).contains(0.9)


def test_locate_examples():
    part = partition_from([0.2, 0.7])
    assert part.arcs[locate(part, 0.2)] == HalfOpenArc(0.2, 0.7)
    assert part.arcs[locate(part, 0.9)] == HalfOpenArc(0.7, 0.2)
    assert part.arcs[locate(part, 0.1)] == HalfOpenArc(0.7, 0.2)
    assert locate(partition_from([]), 0.42) == 0


@settings(max_examples=60)
@given(st.lists(positions, min_size=2, max_size=50), st.integers(0, 2 ** 32 - 1))
def test_partition_covers_exactly_once(points, seed):
    part = partition_from(points)
    arcs = part.arcs
    assert len(arcs) == max(len(set(points)), 1)
    assert sum(a.length for a in arcs) == pytest.approx(1.0, abs=1e-12)
    queries = np.random.default_rng(seed).random(1000)
    hits = np.stack([a.contains_many(queries) for a in arcs])
    assert np.all(hits.sum(axis=0) == 1)
    assert np.array_equal(np.argmax(hits, axis=0), part.locate(queries))


def test_refines():
    coarse = partition_from([0.1, 0.6])
    assert partition_from([0.1, 0.3, 0.6]).refines(coarse)
    assert not partition_from([0.1, 0.3]).refines(coarse)
    assert coarse.refines(ArcPartition(()))


def test_transport_examples():
    u = np.array([0.0, 0.1, 0.5, 0.999])
    assert np.allclose(transport_from_uniform(LearningProblem.uniform(0.5), u), u)
    atom = LearningProblem.atomic([0.5], [1.0], [0.0])
    assert np.all(transport_from_uniform(atom, u) == 0.5)
    two = LearningProblem.atomic([0.25, 0.75], [0.5, 0.5], [0.5, 0.5])
    assert transport_from_uniform(two, 0.3) == 0.25
    assert transport_from_uniform(two, 0.6) == 0.75
    # u = 0 maps into the support, not to 0
    assert transport_from_uniform(two, 0.0) == 0.25


@pytest.mark.parametrize("problem", problem_zoo())
def test_transport_pushes_uniform_to_mu(problem):
    n = 10 ** 5
    pts = transport_from_uniform(problem, np.random.default_rng(1).random(n))
    part = partition_from([0.0, 0.15, 0.3, 0.45, 0.55, 0.75, 0.9])
    expected, _ = problem.partition_masses(part)
    counts = np.bincount(part.locate(pts), minlength=len(part))
    se = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(counts / n - expected) <= 3 * se + 1e-12)


@pytest.mark.parametrize("problem", problem_zoo())
def test_transport_is_monotone(problem):
    u, v = np.sort(np.random.default_rng(2).random((2, 10 ** 4)), axis=0)
    assert np.all(transport_from_uniform(problem, u) <= transport_from_uniform(problem, v))
    assert np.all(transport_from_uniform(problem, u) < 1.0)
