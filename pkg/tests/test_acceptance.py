"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines go straight to the
terminal) or ``python3 tests/test_acceptance.py``.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from oracles import random_per_decade, sieve_profiles_at, trial_division
from smirnov_primes import asymptotics as asy
from smirnov_primes.harness import (
    ExperimentConfig,
    heuristic_lhs,
    heuristic_rhs,
    run_envelope_scan,
    run_experiments,
)
from smirnov_primes.montecarlo import McConfig, q_mc
from smirnov_primes.partitions import audit_E, audit_lambda, build_E, build_lambda
from smirnov_primes.prime_engine import count_constrained_many, count_corollary_many, pi_k_table
from smirnov_primes.smirnov_core import BoundaryQuery, q_exact, q_reflect_upper, q_steck

X_BIG = [10**6, 10**7, 10**8]


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_01_lambda_ground_truth(verdict):
    t0 = time.perf_counter()
    table = build_lambda(2)
    audit_ok = True
    try:
        audit_lambda(table)
    except AssertionError:
        audit_ok = False
    dt = time.perf_counter() - t0
    l1, l2 = table.lambdas[1], table.lambdas[2]
    ok = l1 == 3 and l2 == 109 and audit_ok and dt < 1
    verdict(1, ok, f"lambda_1={l1} (want 3), lambda_2={l2} (want 109), maximality audit "
            f"{'ok' if audit_ok else 'failed'}, {dt:.2f}s")


def _grid(rng, n, rational):
    pts = []
    while len(pts) < n:
        m = rng.randint(1, 200)
        if rational:
            u = Fraction(rng.randint(0, 4 * (m + 2)), 4)
            w = Fraction(rng.randint(-4, 4 * m), 4)
        else:
            u = rng.uniform(0, m + 2)
            w = rng.uniform(-1, m)
        v = m + w - u
        if v > 0:
            pts.append(BoundaryQuery(m, u, v))
    return pts


def test_02_oracle_triangle(verdict):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    worst = 0.0
    for q in _grid(rng, 50, rational=False):
        a = float(q_exact(q).value)
        worst = max(worst, abs(a - float(q_steck(q).value)), abs(a - float(q_reflect_upper(q).value)))
    exact_equal = all(
        q_exact(q).value == q_steck(q).value == q_reflect_upper(q).value
        for q in _grid(rng, 50, rational=True)
    )
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and exact_equal and dt < 30
    verdict(2, ok, f"float grid max |diff| = {worst:.2e}, rational grid exact equality "
            f"{exact_equal}, {dt:.1f}s")


def test_03_monte_carlo(verdict):
    t0 = time.perf_counter()
    grid = [
        (1, 0.5, 1.0), (2, 1, 2), (3, 1, 2.5), (5, 0.5, 5.0), (5, 2, 4),
        (8, 1.5, 8.0), (10, 1, 10.5), (10, 3, 9), (20, 2.5, 21.3), (20, 0.7, 20.0),
        (30, 4, 28), (40, 2, 41), (50, 5, 52), (60, 1.2, 60.0), (80, 6, 76),
        (100, 10, 100), (100, 3, 101), (150, 8, 145), (200, 12, 190), (200, 4, 200),
    ]
    within = 0
    worst = 0.0
    for i, (m, u, v) in enumerate(grid):
        q = BoundaryQuery(m, u, v)
        exact = float(q_exact(q).value)
        est = q_mc(q, McConfig(10**6, 7000 + i, m))
        z = abs(est.p_hat - exact) / est.stderr if est.stderr > 0 else (0.0 if est.p_hat == exact else math.inf)
        worst = max(worst, z)
        within += z <= 4
    dt = time.perf_counter() - t0
    ok = within >= 19 and dt < 60
    verdict(3, ok, f"{within}/20 within 4 stderr (max z = {worst:.2f}), {dt:.1f}s")


def test_04_smirnov_limit(verdict):
    t0 = time.perf_counter()
    ok = True
    parts = []
    for lam in (0.5, 1.0, 1.5):
        diffs = []
        for m in (100, 400, 1600):
            u = lam * math.sqrt(m)
            q = BoundaryQuery(m, u, float(m))
            d = abs(float(q_exact(q).value) - asy.smirnov_limit(lam))
            ok &= d <= 5 * (u + q.w) / m
            diffs.append(d)
        ok &= all(b <= a for a, b in zip(diffs, diffs[1:]))
        parts.append(f"lam={lam}: " + ", ".join(f"{d:.2e}" for d in diffs))
    dt = time.perf_counter() - t0
    ok &= dt < 120
    verdict(4, ok, "; ".join(parts) + f"; {dt:.1f}s")


def test_05_envelope(verdict):
    rep = run_envelope_scan(ExperimentConfig("envelope-scan", m_list=[1, 2, 5, 10, 20, 50, 100, 200, 500]))
    lo, hi = rep.summary["min_ratio"], rep.summary["max_ratio"]
    arg_lo = min(rep.records, key=lambda r: r["ratio"])
    arg_hi = max(rep.records, key=lambda r: r["ratio"])
    ok = 0.01 <= lo and hi <= 100
    verdict(5, ok, f"{len(rep.records)} cells, ratio in [{lo:.4f}, {hi:.4f}] "
            f"(min at m={arg_lo['m']},u={arg_lo['u']},w={arg_lo['w']}; "
            f"max at m={arg_hi['m']},u={arg_hi['u']},w={arg_hi['w']})")


def test_06_counting_identities(verdict):
    t0 = time.perf_counter()
    notes = []
    ok = True
    for x in (10**3, 10**6):
        total = pi_k_table(x).total
        ok &= total == x - 1
        notes.append(f"sum pi_k({x})={total}")
    for x in (10**4, 10**6):
        betas = [0.0, 1.0, 2.0]
        up = count_corollary_many(x, betas, "upper")
        sums = [t.total for t in count_constrained_many(x, 1.0, betas, "lower")]
        ok &= up == sums
        notes.append(f"corollary=sum N_k at {x}: {up == sums}")
    ns = random_per_decade(10**4, 8, seed=1)
    got = sieve_profiles_at(ns, width=1 << 16)
    bad = sum(got[n] != trial_division(n) for n in ns)
    ok &= bad == 0
    notes.append(f"{len(ns)} random profiles, {bad} mismatches")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    verdict(6, ok, "; ".join(notes) + f"; {dt:.1f}s")


@pytest.fixture(scope="module")
def big_reports():
    t0 = time.perf_counter()
    cfgs = [
        ExperimentConfig("theorem-N", x_list=X_BIG, alpha=1.0, beta_list=[0.0, 1.0, 2.0]),
        ExperimentConfig("theorem-M", x_list=X_BIG, alpha=1.0, beta_list=[0.0, 1.0, 2.0]),
        ExperimentConfig("corollary", x_list=X_BIG, beta_list=[0.0, 1.0, 2.0, 3.0]),
    ]
    reports = run_experiments(cfgs)
    return reports, time.perf_counter() - t0


def _theorem_check(rep):
    cells = [r for r in rep.records if r.get("all_hold")]
    in_band = all(r["ratio"] is not None and 0.05 <= r["ratio"] <= 20 for r in cells)
    groups = {}
    for r in cells:
        off = r["k"] - round(asy.loglog(r["x"]))
        groups.setdefault((r["beta"], off), []).append(r["ratio"])
    drift = max((max(v) / min(v) for v in groups.values() if len(v) > 1 and min(v) > 0), default=1.0)
    lo = min(r["ratio"] for r in cells)
    hi = max(r["ratio"] for r in cells)
    return bool(cells) and in_band and drift <= 10, f"{len(cells)} cells, ratio in [{lo:.3f}, {hi:.3f}], max drift x{drift:.2f}"


def test_07_theorem_diagnostics(verdict, big_reports):
    (rep_n, rep_m, _), dt = big_reports
    ok_n, note_n = _theorem_check(rep_n)
    ok_m, note_m = _theorem_check(rep_m)
    ok = ok_n and ok_m and dt < 300
    verdict(7, ok, f"N: {note_n}; M: {note_m}; shared sieve pass {dt:.0f}s")


def test_08_corollary_diagnostics(verdict, big_reports):
    (_, _, rep), dt = big_reports
    recs = rep.records
    in_band = all(0.05 <= r["ratio"] <= 20 for r in recs)
    drift = 1.0
    for side in ("upper", "lower"):
        for beta in (0.0, 1.0, 2.0, 3.0):
            v = [r["ratio"] for r in recs if r["side"] == side and r["beta"] == beta]
            drift = max(drift, max(v) / min(v))
    cap = math.sqrt(1e6) * math.log(1e6) ** 2
    disc = max(r["discrepancy"] for r in recs if r["side"] == "lower" and r["x"] == 10**6)
    ids = all(r["identity_holds"] for r in recs)
    ok = in_band and drift <= 2 and disc <= cap and ids and dt < 600
    lo = min(r["ratio"] for r in recs)
    hi = max(r["ratio"] for r in recs)
    verdict(8, ok, f"ratios in [{lo:.3f}, {hi:.3f}], max drift x{drift:.3f}, "
            f"lower discrepancy at 1e6 = {disc} (cap {cap:.0f}), identities {ids}, {dt:.0f}s")


def test_09_heuristic(verdict):
    t0 = time.perf_counter()
    lhs = heuristic_lhs(10**6, 1.0, 1.0, 2)
    rhs = heuristic_rhs(10**6, 1.0, 1.0, 2)
    dt = time.perf_counter() - t0
    ratio = lhs / rhs
    ok = 0.3 <= ratio <= 3 and dt < 30
    verdict(9, ok, f"LHS={lhs:.5f}, RHS={rhs:.5f}, ratio={ratio:.4f}, {dt:.2f}s")


def test_10_e_partition(verdict):
    t0 = time.perf_counter()
    try:
        info = audit_E(build_E(math.exp(10)))
        ok, note = True, (f"{info['sets']} sets (bound {info['set_bound']:.2f}), max budget "
                          f"{info['max_budget']:.4f}, K'={info['Kprime']:.3f}")
    except AssertionError as exc:
        ok, note = False, str(exc)
    dt = time.perf_counter() - t0
    verdict(10, ok and dt < 60, f"{note}, {dt:.2f}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
