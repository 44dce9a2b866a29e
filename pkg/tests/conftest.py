import pytest

from smartrule.problems import LearningProblem

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def halves():
    return LearningProblem.piecewise([0.0, 0.5], [0.1, 0.9], name="halves")


@pytest.fixture
def two_atoms():
    return LearningProblem.atomic([0.25, 0.75], [0.5, 0.5], [0.5, 0.5], name="two-atoms")


def problem_zoo():
    """Problems exercising atoms, wrapping arcs and gaps in the support."""
    return [
        LearningProblem.uniform(0.3),
        LearningProblem.piecewise([0.0, 0.5], [0.1, 0.9]),
        LearningProblem.atomic([0.25, 0.75], [0.5, 0.5], [0.5, 0.5]),
        LearningProblem.atomic([0.5], [1.0], [1.0]),
        LearningProblem.from_dict({"components": [
            {"type": "atom", "location": 0.1, "mass": 0.2, "eta": 0.7},
            {"type": "arc", "start": 0.3, "end": 0.6, "mass": 0.5, "eta": 0.15},
            {"type": "arc", "start": 0.8, "end": 0.05, "mass": 0.3, "eta": 0.8},
        ]}),
    ]
