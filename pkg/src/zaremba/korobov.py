"""Hyperbola criterion and the search for numerators with small quotients.

For a/q, every solution of a*x = y (mod q) with 1 <= x < q stays off the
hyperbola x*|y| < q/M as soon as the quotients of a/q are bounded by M/4,
and conversely quotients are bounded by M once x*|y| >= q/M throughout.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
import sympy

from . import _kernels as K
from ._parallel import chunks, pmap
from .cf import max_quotient, partial_quotients
from .errors import InvariantViolation
from .zm import CLOSED, build_ZM, guided_t

EXHAUSTIVE = "exhaustive"
GUIDED = "guided"
FILTERS = ("primes", "all", "square_free")


@dataclass(frozen=True)
class HyperbolaWitness:
    x: int
    y: int
    product: int


@dataclass(frozen=True)
class SearchResult:
    q: int
    a: int
    m_min: int
    strategy: str
    elapsed_ms: int = 0

    @property
    def log_ratio(self) -> float:
        return self.m_min / math.log2(self.q)

    @property
    def loglog_ratio(self) -> float:
        lq = math.log2(self.q)
        return self.m_min * math.log2(lq) / lq if lq > 0 else 0.0

    def as_dict(self) -> dict:
        return {"q": self.q, "a": self.a, "m_min": self.m_min,
                "strategy": self.strategy, "elapsed_ms": self.elapsed_ms,
                "m_over_log": round(self.log_ratio, 6),
                "m_loglog_over_log": round(self.loglog_ratio, 6)}


def _check(a: int, q: int) -> None:
    if q < 2 or not 1 <= a < q:
        raise ValueError(f"need 1 <= a < q, got a={a}, q={q}")
    if gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")


def min_hyperbola_product(a: int, q: int, x_max: int | None = None) -> HyperbolaWitness:
    """Minimize x*|y| over 1 <= x <= x_max with a*x = y (mod q).

    Of the two representatives of a*x mod q, the one of least absolute value
    always gives the smaller product, so only that one is kept.  Ties go to
    the smallest x.
    """
    _check(a, q)
    x_max = q - 1 if x_max is None else x_max
    if not 1 <= x_max < q:
        raise ValueError("x_max must lie in [1, q)")
    x, y, p = K.min_product(a, q, x_max)
    return HyperbolaWitness(int(x), int(y), int(p))


def korobov_forward(a: int, q: int, M: int) -> bool:
    """True iff min x*|y| >= q/M; then every quotient of a/q is at most M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    w = min_hyperbola_product(a, q)
    ok = w.product * M >= q
    if ok and max_quotient(a, q) > M:
        raise InvariantViolation(
            f"{a}/{q}: x|y| >= q/M holds but a quotient exceeds M",
            {"a": a, "q": q, "M": M, "witness": w.__dict__,
             "max_quotient": max_quotient(a, q)})
    return ok


def korobov_backward(a: int, q: int) -> Fraction:
    """Return q / (M * min x|y|) with M the largest quotient of a/q.

    The ratio never exceeds 4; a larger value raises :class:`InvariantViolation`.
    """
    w = min_hyperbola_product(a, q)
    m = max_quotient(a, q)
    if 4 * m * w.product < q:
        raise InvariantViolation(
            f"{a}/{q}: min x|y| = {w.product} < q/(4M) with M = {m}",
            {"a": a, "q": q, "M": m, "witness": w.__dict__})
    return Fraction(q, m * w.product)


@dataclass
class HyperbolaReport:
    q_min: int
    q_max: int
    pairs: int = 0
    forward_failures: list = field(default_factory=list)
    backward_failures: list = field(default_factory=list)
    worst_ratio: Fraction = Fraction(0)
    worst_at: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.forward_failures and not self.backward_failures

    def as_dict(self) -> dict:
        return {"q_min": self.q_min, "q_max": self.q_max, "pairs": self.pairs,
                "forward_failures": len(self.forward_failures),
                "backward_failures": len(self.backward_failures),
                "worst_ratio": str(self.worst_ratio),
                "worst_ratio_float": float(self.worst_ratio),
                "worst_at": list(self.worst_at)}


def _hyperbola_block(span: tuple[int, int]) -> tuple:
    pairs, fwd, bwd = 0, [], []
    worst, at = Fraction(0), ()
    for q in range(*span):
        rows = K.hyperbola_rows(q)
        a, m, p = rows[:, 0], rows[:, 1], rows[:, 2]
        pairs += len(a)
        # forward: the smallest M with p >= q/M is ceil(q/p); quotients must obey it
        bad = m > (q + p - 1) // p
        fwd += [(q, int(x)) for x in a[bad]]
        bad = 4 * m * p < q
        bwd += [(q, int(x)) for x in a[bad]]
        # exact argmax of q/(m*p): smallest m*p
        mp = m * p
        i = int(np.argmin(mp))
        r = Fraction(q, int(mp[i]))
        if r > worst:
            worst, at = r, (q, int(a[i]))
    return pairs, fwd, bwd, worst, at


def hyperbola_sweep(q_max: int, q_min: int = 2, workers: int = 1,
                 chunk: int = 100) -> HyperbolaReport:
    """Check both directions of the hyperbola criterion for every coprime a/q."""
    if q_min < 2 or q_max < q_min:
        raise ValueError("need 2 <= q_min <= q_max")
    rep = HyperbolaReport(q_min, q_max)
    for pairs, fwd, bwd, worst, at in pmap(
            _hyperbola_block, chunks(q_min, q_max + 1, chunk), workers):
        rep.pairs += pairs
        rep.forward_failures += fwd
        rep.backward_failures += bwd
        if worst > rep.worst_ratio:
            rep.worst_ratio, rep.worst_at = worst, at
    return rep


def search_exhaustive(q: int) -> SearchResult:
    """Smallest a coprime to q minimizing the largest quotient of a/q."""
    if q < 2:
        raise ValueError("q must be >= 2")
    t0 = time.perf_counter_ns()
    a, m = K.best_numerator(q)
    ms = (time.perf_counter_ns() - t0) // 1_000_000
    return SearchResult(q, int(a), int(m), EXHAUSTIVE, int(ms))


def search_reference(q: int) -> tuple[int, int]:
    """Plain scan without early exit; the slow twin of :func:`search_exhaustive`."""
    best = None
    for a in range(1, q):
        if gcd(a, q) == 1:
            m = max(partial_quotients(a, q))
            if best is None or m < best[1]:
                best = (a, m)
    return best


def search_guided(q: int, M: int, rounding: str = "ceil") -> SearchResult | None:
    """Look for z1 * z2 = 1 (mod q) with z1, z2 in Z_M(t), t = sqrt(q/4M).

    Z_M(t) here bounds c_{k+1} whenever q_k < t.  Then every quotient of z1/q
    is at most 4M: a solution of z1*x = y with x, |y| >= t has x|y| >= t^2 =
    q/4M, and a small x or |y| is handled by the bound on z1 or on z2.  The
    argument needs t^2 >= q/4M, which ``rounding="floor"`` gives up.
    Returns the smallest z1, or None when t < 1 or no pair exists.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    if not sympy.isprime(q):
        raise ValueError(f"guided search needs a prime q, got {q}")
    t = guided_t(q, M, rounding)
    if t < 1:
        return None
    t0 = time.perf_counter_ns()
    z = build_ZM(q, M, t, convention=CLOSED)
    members = set(z.tolist())
    hit = next((int(z1) for z1 in z.tolist() if pow(z1, -1, q) in members), None)
    if hit is None:
        return None
    m = max_quotient(hit, q)
    ms = (time.perf_counter_ns() - t0) // 1_000_000
    if m > 4 * M:
        raise InvariantViolation(
            f"guided numerator {hit}/{q} has quotient {m} > 4M = {4 * M}",
            {"q": q, "M": M, "t": t, "a": hit, "inverse": pow(hit, -1, q),
             "quotients": partial_quotients(hit, q)})
    return SearchResult(q, hit, m, GUIDED, int(ms))


def smallest_guided(q: int, M_max: int = 64,
                    rounding: str = "ceil") -> tuple[int, SearchResult] | None:
    """The least M >= 2 for which :func:`search_guided` succeeds."""
    for M in range(2, M_max + 1):
        if guided_t(q, M, rounding) < 1:
            return None
        r = search_guided(q, M, rounding)
        if r is not None:
            return M, r
    return None


def admissible(q_min: int, q_max: int, filter: str = "primes") -> list[int]:
    if filter not in FILTERS:
        raise ValueError(f"filter must be one of {FILTERS}")
    if q_min < 2 or q_max < q_min:
        raise ValueError("need 2 <= q_min <= q_max")
    if filter == "primes":
        return list(sympy.primerange(q_min, q_max + 1))
    qs = np.arange(q_min, q_max + 1)
    if filter == "square_free":
        keep = np.ones(qs.size, dtype=bool)
        for p in sympy.primerange(2, math.isqrt(q_max) + 1):
            keep &= qs % (p * p) != 0
        qs = qs[keep]
    return qs.tolist()


def _search_many(qs: list[int]) -> list[SearchResult]:
    return [search_exhaustive(q) for q in qs]


def bound_table(q_min: int, q_max: int, filter: str = "primes", workers: int = 1,
                skip: set[int] | None = None, chunk: int = 256) -> list[SearchResult]:
    """One exhaustive-search row per admissible q, ordered by q."""
    qs = [q for q in admissible(q_min, q_max, filter) if not skip or q not in skip]
    parts = [qs[i:i + chunk] for i in range(0, len(qs), chunk)]
    return [r for part in pmap(_search_many, parts, workers) for r in part]


def growth_slope(rows: list[SearchResult]) -> float:
    """Least-squares slope of the running max of m_min against log2 q."""
    rows = sorted(rows, key=lambda r: r.q)
    x = np.log2([r.q for r in rows])
    y = np.maximum.accumulate([r.m_min for r in rows])
    return float(np.polyfit(x, y, 1)[0])
