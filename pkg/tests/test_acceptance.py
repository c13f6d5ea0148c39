"""End-to-end acceptance checks.

Each check prints one PASS/FAIL line (also collected into the pytest
terminal summary).  Run directly with ``python tests/test_acceptance.py``
to get just the lines.
"""
from __future__ import annotations

import io
import math
import os
import time
from collections import Counter

import numpy as np
import pytest
import sympy

from zaremba import deviations as dev
from zaremba.cf import expand
from zaremba.cli import build_parser, dispatch
from zaremba.folding import audit
from zaremba.korobov import bound_table, growth_slope, hyperbola_sweep, smallest_guided
from zaremba.sl2 import action_trials, girth, stabilizer_sweep
from zaremba.zm import decompose_ZM, default_t, enumerate_QM_bar

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

pytestmark = pytest.mark.slow

SEED = 20240601
WORKERS = max(1, os.cpu_count() or 1)


def record(name: str, ok: bool, detail: str, elapsed: float, budget: float | None = None) -> bool:
    in_time = budget is None or elapsed <= budget
    status = "PASS" if ok and in_time else "FAIL"
    limit = f" / {budget:.0f}s" if budget else ""
    line = f"{status}  {name}: {detail} [{elapsed:.1f}s{limit}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and in_time


def spread_primes(lo: int, hi: int, k: int) -> list[int]:
    """k primes, the first at or after each of k log-spaced points in [lo, hi)."""
    pts = np.geomspace(lo, hi, k, endpoint=False)
    return [int(sympy.nextprime(int(x) - 1)) for x in pts]


def check_hyperbola():
    t0 = time.time()
    rep = hyperbola_sweep(2000, workers=WORKERS)
    dt = time.time() - t0
    ok = rep.ok
    return record("hyperbola criterion both directions, every coprime a/q with q <= 2000", ok,
                  f"{rep.pairs} pairs, forward failures {len(rep.forward_failures)}, "
                  f"backward failures {len(rep.backward_failures)}, worst q/(M min x|y|) = "
                  f"{float(rep.worst_ratio):.4f} at (q, a) = {rep.worst_at}", dt, 120)


def check_intervals():
    t0 = time.time()
    primes = spread_primes(10 ** 4, 10 ** 6, 20)
    bad = []
    for q in primes:
        t = default_t(q)
        for M in (2, 3, 4):
            d = decompose_ZM(q, M, t)
            if d.T != len(enumerate_QM_bar(M, t)) or d.min_length < q // (t * t):
                bad.append((q, M))
    dt = time.time() - t0
    return record("interval decomposition of Z_M(t), 20 primes in [1e4, 1e6], M in {2,3,4}, "
                  "t = floor(q^0.4)", not bad,
                  f"{3 * len(primes)} cases, exceptions {bad}", dt, 300)


def check_table():
    t0 = time.time()
    rows = bound_table(2, 10 ** 5, "primes", workers=WORKERS)
    dt = time.time() - t0
    m = max(r.m_min for r in rows)
    slope = growth_slope(rows)
    return record("exhaustive search over primes q <= 1e5", m <= 5 and slope < 0.2,
                  f"{len(rows)} primes, max m_min {m}, growth slope vs log2 q {slope:.4f}",
                  dt, 600)


def check_guided():
    t0 = time.time()
    primes = spread_primes(10 ** 3, 10 ** 5, 50)
    bad, Ms, missing = [], [], []
    for q in primes:
        hit = smallest_guided(q)
        if hit is None:
            missing.append(q)
            continue
        M, r = hit
        Ms.append(M)
        if max(expand(r.a, q)) > 4 * M:
            bad.append((q, M, r.a))
    dt = time.time() - t0
    return record("inverse-pair search returns quotients <= 4M, 50 primes in [1e3, 1e5]",
                  not bad and not missing,
                  f"smallest M counts {dict(sorted(Counter(Ms).items()))}"
                  f", exceptions {bad}, no pair found {missing}", dt)


def check_folding():
    t0 = time.time()
    bad = [(b, n) for b in (2, 3, 5, 10) for n in range(1, 41) if not audit(b, n)["ok"]]
    dt = time.time() - t0
    return record("folded fractions a/b^n with quotients <= b^2 - 1, b in {2,3,5,10}, n <= 40",
                  not bad, f"160 constructions, exceptions {bad}", dt, 10)


def check_plain_deviations():
    t0 = time.time()
    rep = dev.run_deviation(100, 2000, 2000, 0.2, SEED, "plain", workers=WORKERS)
    ref = dev.reference_mean(100, "plain")
    t1 = dev.run_deviation(200, 1000, 1000, 0.15, SEED, workers=WORKERS).empirical_tail
    t4 = dev.run_deviation(200, 4000, 1000, 0.15, SEED, workers=WORKERS).empirical_tail
    dt = time.time() - t0
    ok = rep.empirical_tail <= 0.05 and abs(rep.sample_mean - ref) <= 0.05 and t4 <= t1
    return record("plain large deviations, N=100 n=2000 delta=0.2", ok,
                  f"tail {rep.empirical_tail:.4f}, mean {rep.sample_mean:.5f} vs "
                  f"log2(100!)/100 = {ref:.5f}; N=200 delta=0.15 tail n=1000 {t1:.4f}, "
                  f"n=4000 {t4:.4f}", dt, 180)


def check_signed_lyapunov():
    t0 = time.time()
    est = dev.lyapunov_estimate(100, 2000, 500, SEED, workers=WORKERS)
    ref = dev.reference_mean(100, "signed")
    dt = time.time() - t0
    return record("signed doubled words, N=100 n=2000, mean (1/n) log2 q_n within 0.1 of "
                  "2 log2(100!)/100", abs(est - ref) <= 0.1,
                  f"estimate {est:.4f}, target {ref:.4f}, gap {est - ref:+.4f}; "
                  f"2 + 2 log2(100!)/100 = {dev.signed_step_mean(100):.4f}", dt, 180)


def check_stabilizers():
    t0 = time.time()
    parts, bad = [], 0
    for p, n in ((3, 1), (3, 2), (5, 1), (5, 2), (3, 3)):
        rep = stabilizer_sweep(p, n)
        bad += len(rep.violations)
        parts.append(f"({p},{n}) {rep.elements} elts")
    dt = time.time() - t0
    return record("centralizer <= 8 p^(n+2r) and normalizer <= 300 p^(n+3r) for all of "
                  "SL2(Z/p^n)", bad == 0, f"{', '.join(parts)}; violations {bad}", dt, 300)


def check_girth():
    t0 = time.time()
    free = [girth(None, N, 8) for N in (1, 2, 3)]
    mod = [girth(p, 2) for p in (11, 101, 1009)]
    dt = time.time() - t0
    ok = all(not g.exact for g in free) and all(g.exact for g in mod) and \
        [g.value for g in mod] == sorted(g.value for g in mod)
    return record("no relation of length <= 8 over Z for N <= 3; girth mod p nondecreasing",
                  ok, f"over Z {[str(g) for g in free]}, N=2 mod 11/101/1009 "
                  f"{[str(g) for g in mod]}", dt, 60)


def check_action():
    t0 = time.time()
    d40 = float(np.mean(action_trials(401, 40, 100, 50, SEED)))
    d80 = float(np.mean(action_trials(401, 80, 100, 50, SEED)))
    dt = time.time() - t0
    return record("(a+c)(b+c) = 1 counts at p=401, 50 random A, B of size 100",
                  d40 < 0.5 and d80 < d40,
                  f"mean normalized deviation N=40 {d40:.5f}, N=80 {d80:.5f}", dt, 120)


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(build_parser().parse_args(argv), out, err)
    return code, out.getvalue()


def check_determinism():
    t0 = time.time()
    runs = {
        "plain": ["deviate", "--N", "100", "--n", "2000", "--trials", "2000", "--delta", "0.2",
                  "--seed", str(SEED)],
        "signed": ["deviate", "--N", "100", "--n", "2000", "--trials", "500", "--mode",
                   "signed", "--seed", str(SEED)],
        "action": ["sl2", "action", "--p", "401", "--N", "40", "--size", "100", "--sets", "50",
                   "--seed", str(SEED)],
    }
    same = {}
    for name, argv in runs.items():
        a = _cli(argv + ["--workers", "1"])
        b = _cli(argv + ["--workers", "8"])
        same[name] = a[0] == b[0] == 0 and a[1] == b[1]
    dt = time.time() - t0
    return record("seeded JSON identical under --workers 1 and --workers 8", all(same.values()),
                  ", ".join(f"{k} {'same' if v else 'DIFFERENT'}" for k, v in same.items()), dt)


def test_hyperbola_criterion():
    assert check_hyperbola()


def test_interval_decomposition():
    assert check_intervals()


def test_exhaustive_table():
    assert check_table()


def test_guided_search():
    assert check_guided()


def test_folding():
    assert check_folding()


def test_plain_deviations():
    assert check_plain_deviations()


def test_signed_lyapunov():
    assert check_signed_lyapunov()


def test_stabilizer_bounds():
    assert check_stabilizers()


def test_girth():
    assert check_girth()


def test_action_counts():
    assert check_action()


def test_determinism():
    assert check_determinism()


if __name__ == "__main__":
    for check in (check_hyperbola, check_intervals, check_table, check_guided, check_folding,
                  check_plain_deviations, check_signed_lyapunov, check_stabilizers,
                  check_girth, check_action, check_determinism):
        check()
