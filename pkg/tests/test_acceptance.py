"""One test per acceptance criterion; each prints a PASS/FAIL line.

Lines are also collected in ``conftest.ACCEPTANCE_LINES`` and repeated in the
terminal summary. Failures are reported as they are; nothing is relaxed to
make a criterion pass.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from smartrule.errorfn import find_N, key_lemma_margin, majority_error, taylor_coeff
from smartrule.estimators import SmartRuleClassifier
from smartrule.harness import (
    benchmark_problems,
    benchmark_schedule,
    consistency_schedule,
    expected_error_curve,
    monotonicity_audit,
    nn_counterexample_search,
    nn_expected_errors,
    verify_coverage,
    verify_key_piece,
    verify_monotone_identity,
)
from smartrule.problems import LearningProblem
from smartrule.schedule import exact_schedule, vc_sample_size
from test_schedule import decimal_vc


def record(number: int, ok: bool, detail: str):
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_error_identity():
    t0 = time.perf_counter()
    rep = verify_monotone_identity(n_max=41, grid=1001)
    dt = time.perf_counter() - t0
    ok = rep["max_deviation"] <= 1e-12 and dt < 1.0
    record(1, ok, f"max |gap identity deviation| = {rep['max_deviation']:.2e} over odd n <= 41, {dt:.2f}s")
    assert ok


def test_criterion_02_nonconcavity_n3():
    t0 = time.perf_counter()
    chord = 0.5 * majority_error(0.2, 3)
    value = majority_error(0.1, 3)
    dt = time.perf_counter() - t0
    ok = chord - value >= 0.008 and dt < 1.0
    record(2, ok, f"chord {chord:.4f} vs L(0.1,3) {value:.4f}, excess {chord - value:.4f}")
    assert ok


def test_criterion_03_expansion_at_zero():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (3, 5, 7):
        k = n // 2
        ratio = (majority_error(1e-3, n) - 1e-3) / 1e-3 ** (k + 1)
        target = math.comb(2 * k + 1, k)
        rel = abs(ratio - target) / target
        ok &= rel <= 0.05 and taylor_coeff(n) == target
        parts.append(f"n={n}: {ratio:.3f} vs {target} ({100 * rel:.2f}%)")
    ok &= time.perf_counter() - t0 < 1.0
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_04_find_N_certification():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n, t in ((1, 0.3), (3, 0.25), (5, 0.2)):
        cert = find_N(n, t)
        _, below = key_lemma_margin(n, t, cert.N - 2)
        passes = cert.max_slack_used <= 1e-9
        minimal = bool(below.max() > 1e-9)
        ok &= passes and minimal
        parts.append(f"(n={n}, t={t}): N={cert.N} slack {cert.max_slack_used:.1e}, "
                     f"N-2={cert.N - 2} worst margin {below.max():.2e} ({'fails' if minimal else 'also passes'})")
    ok &= time.perf_counter() - t0 < 120
    record(4, ok, "; ".join(parts))
    assert ok


def test_criterion_05_key_piece_protocol():
    t0 = time.perf_counter()
    n, eps, p0 = 5, 0.2, 0.1
    N = find_N(n, eps).N
    good = verify_key_piece(n, N, eps, 10 ** 5, seed=1, etas=(2 * p0, 0.0))
    bad = verify_key_piece(n, 3, eps, 10 ** 5, seed=2, etas=(2 * p0, 0.0))
    dt = time.perf_counter() - t0
    ok = good["no_increase"] and good["cap_hits"] == 0 and bad["increase_detected"] and dt < 600
    record(5, ok, f"N=find_N={N}: diff {good['difference']:+.5f} (z={good['z']:+.1f}); "
                  f"N=3: diff {bad['difference']:+.5f} (z={bad['z']:+.1f}); 1e5 trials each, {dt:.0f}s")
    assert ok


def test_criterion_06_coverage():
    t0 = time.perf_counter()
    problems = [
        LearningProblem.uniform(0.5, name="uniform"),
        LearningProblem.atomic([0.1, 0.35, 0.6, 0.85], [0.25] * 4, [0.5] * 4, name="atomic"),
        LearningProblem([*LearningProblem.piecewise([0.0, 0.05], [0.5, 0.5], masses=[0.9, 0.1]).components],
                        name="skewed"),
    ]
    worst, ok, runs = None, True, 0
    for k in (2, 3):
        for delta in (0.1, 0.25):
            for N in (11, 101):
                for i, pb in enumerate(problems):
                    rep = verify_coverage(k, N, delta, 1000, pb, seed=100 + i)
                    runs += 1
                    ok &= rep["passed"]
                    slack = rep["failure_rate"] - rep["bound"]
                    if worst is None or slack > worst[0]:
                        worst = (slack, rep)
    dt = time.perf_counter() - t0
    ok &= dt < 600
    w = worst[1]
    record(6, ok, f"{runs} configurations; closest: {w['problem']} k={w['k']} N={w['N']} delta={w['delta']} "
                  f"rate {w['failure_rate']:.3f} <= {w['bound']:.3f}; {dt:.0f}s")
    assert ok


def test_criterion_07_nn_counterexample():
    t0 = time.perf_counter()
    rep = nn_counterexample_search(seed=7)
    q = Fraction(rep["q"])
    etas = [Fraction(e) for e in rep["eta"]]
    check = nn_expected_errors((0.25, 0.75), (q, 1 - q), etas)
    dt = time.perf_counter() - t0
    ok = rep["found"] and check[1] < check[2] and str(check[1]) == rep["EL1_exact"] and dt < 60
    record(7, ok, f"q={rep['q']}, eta={rep['eta']}: E L1 = {rep['EL1_exact']} < E L2 = {rep['EL2_exact']}")
    assert ok


def test_criterion_08_smart_rule_monotone():
    t0 = time.perf_counter()
    sch = benchmark_schedule(K=6)
    parts, ok = [], sch.n[-1] >= 5000
    for i, pb in enumerate(benchmark_problems()):
        curve = expected_error_curve(pb, SmartRuleClassifier(sch), list(sch.n), 2000, seed=11 + i)
        audit = monotonicity_audit(curve, sigmas=3.0)
        worst = max(s["rise"] / s["combined_se"] if s["combined_se"] > 0 else 0.0 for s in audit["steps"])
        ok &= audit["passed"]
        parts.append(f"{pb.name} max z {worst:+.2f}")
    dt = time.perf_counter() - t0
    ok &= dt < 1800
    record(8, ok, f"practical schedule n_K={sch.n[-1]}, 2000 trials: " + ", ".join(parts) + f"; {dt:.0f}s")
    assert ok


def test_criterion_09_consistency():
    t0 = time.perf_counter()
    sch = consistency_schedule()
    problems = [benchmark_problems()[1],
                LearningProblem.piecewise([0.05, 0.35], [0.9, 0.1], name="short-and-long-arcs")]
    parts, ok = [], True
    for pb in problems:
        curve = expected_error_curve(pb, SmartRuleClassifier(sch), [sch.n[-1]], 40, seed=5)
        gap = curve.means[-1] - pb.bayes_error()
        ok &= gap <= 0.05
        parts.append(f"{pb.name}: {curve.means[-1]:.4f} +- {curve.stderrs[-1]:.4f} (Bayes {pb.bayes_error():.2f})")
    zero = LearningProblem.uniform(0.0, name="eta-zero")
    small = benchmark_schedule(K=6)
    zc = expected_error_curve(zero, SmartRuleClassifier(small), [1] + list(small.n[1:]), 200, seed=6)
    ok &= bool(np.all(zc.means == 0.0))
    dt = time.perf_counter() - t0
    ok &= dt < 1800
    record(9, ok, f"n={sch.n[-1]}: " + "; ".join(parts) + f"; eta=0 risk exactly 0 at every n: "
                  f"{bool(np.all(zc.means == 0.0))}; {dt:.0f}s")
    assert ok


def test_criterion_10_exact_schedule_audit():
    t0 = time.perf_counter()
    s = exact_schedule(2)
    N2 = find_N(1, s.eps[1]).N
    a2 = decimal_vc(2, N2, s.delta[1])
    b2 = decimal_vc(2, a2, s.delta[1])
    reproduced = (s.N[1], s.a[1], s.b[1]) == (N2, a2, b2)
    value = vc_sample_size(2, 101, 0.1)
    literal = value == 14326
    dt = time.perf_counter() - t0
    ok = reproduced and literal and dt < 300
    record(10, ok, f"exact K=2: N2={s.N[1]}, a2={s.a[1]}, b2={s.b[1]} reproduced={reproduced}; "
                   f"vc_sample_size(2,101,0.1)={value} (expected 14326; high-precision value "
                   f"{decimal_vc(2, 101, 0.1)})")
    assert ok
