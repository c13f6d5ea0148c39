"""Rationals with bounded partial quotients and the numerator sets Z_M(t).

Q_M(t) holds the fractions u/v in (0, 1) whose canonical expansion has every
quotient <= M and v < t.  Its subset Q̄_M(t) keeps the members with
K(c_1, ..., c_s, 1) >= t, i.e. the leaves of the Stern-Brocot tree cut at t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .cf import CFWord
from .errors import InvariantViolation

PREFIX = "prefix"
CLOSED = "closed"
CONVENTIONS = (PREFIX, CLOSED)


@dataclass(frozen=True)
class BoundedFractionSet:
    M: int
    t: int
    members: tuple[tuple[CFWord, Fraction], ...]

    def __len__(self):
        return len(self.members)

    @property
    def values(self) -> list[Fraction]:
        return [f for _, f in self.members]


@dataclass(frozen=True)
class IntervalDecomposition:
    q: int
    M: int
    t: int
    intervals: tuple[tuple[int, int], ...]
    anchors: tuple[Fraction, ...]
    leftover: int
    leftover_runs: tuple[tuple[int, int], ...]
    block: int
    z_size: int
    convention: str = PREFIX

    @property
    def T(self) -> int:
        return len(self.intervals)

    @property
    def min_length(self) -> int:
        return min((hi - lo + 1 for lo, hi in self.intervals), default=0)

    @property
    def leftover_within_bound(self) -> bool:
        return self.leftover <= self.block * self.T

    def as_dict(self) -> dict:
        return {
            "q": self.q, "M": self.M, "t": self.t, "convention": self.convention,
            "T": self.T, "min_length": self.min_length,
            "floor_q_over_t2": self.q // (self.t * self.t),
            "z_size": self.z_size, "block": self.block,
            "leftover": self.leftover, "leftover_runs": len(self.leftover_runs),
            "leftover_within_bound": self.leftover_within_bound,
        }


def _walk(M: int, t: int):
    # DFS over all positive words with entries <= M and continuant < t;
    # yields (word, p, q, q_prev) in preorder, children in increasing order
    stack = [((), 0, 1, 1, 0)]  # word, p, q, p_prev, q_prev
    while stack:
        word, p, q, pp, qp = stack.pop()
        children = []
        for c in range(1, M + 1):
            qn = c * q + qp
            if qn >= t:
                break
            children.append((word + (c,), c * p + pp, qn, p, q))
        for child in reversed(children):
            yield child[0], child[1], child[2], child[4]
            stack.append(child)


def _is_canonical_tail(word: tuple[int, ...]) -> bool:
    return word[-1] >= 2


def enumerate_QM(M: int, t: int) -> BoundedFractionSet:
    if M < 1 or t < 2:
        raise ValueError("need M >= 1 and t >= 2")
    members = [(CFWord(w), Fraction(p, q)) for w, p, q, _ in _walk(M, t)
               if _is_canonical_tail(w)]
    members.sort(key=lambda m: m[1])
    return BoundedFractionSet(M, t, tuple(members))


def enumerate_QM_bar(M: int, t: int) -> BoundedFractionSet:
    """Members of Q_M(t) with K(word, 1) = q_s + q_{s-1} >= t."""
    if M < 1 or t < 2:
        raise ValueError("need M >= 1 and t >= 2")
    members = [(CFWord(w), Fraction(p, q)) for w, p, q, qp in _walk(M, t)
               if _is_canonical_tail(w) and q + qp >= t]
    members.sort(key=lambda m: m[1])
    return BoundedFractionSet(M, t, tuple(members))


def count_QM(M: int, t: int) -> int:
    """|Q_M(t)| without building the words."""
    n = 0
    stack = [(1, 0)]
    while stack:
        q, qp = stack.pop()
        for c in range(1, M + 1):
            qn = c * q + qp
            if qn >= t:
                break
            if c >= 2:
                n += 1
            stack.append((qn, q))
    return n


def count_fibonacci_words(M: int, t: int) -> int:
    """Number of all-ones words (1, ..., 1) with continuant below t.

    Q_1(t) itself is empty in canonical form, so the M = 1 dimension fit
    counts these words instead.
    """
    n, a, b = 0, 1, 1
    while b < t:
        n += 1
        a, b = b, a + b
    return n


def build_ZM(q: int, M: int, t: int, convention: str = PREFIX) -> np.ndarray:
    """Numerators a in [1, q), gcd(a, q) = 1, whose expansion of a/q keeps
    every quotient <= M up to the threshold t, as a sorted array.

    ``prefix``: c_j <= M whenever q_j < t (j up to the largest nu with q_nu < t).
    ``closed``: c_j <= M whenever q_{j-1} < t, which also bounds c_{nu+1}.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if t < 1 or t * t > q:
        raise ValueError(f"need 1 <= t <= sqrt(q); got t={t}, q={q}")
    a = np.arange(1, q, dtype=np.int64)
    num = a.copy()
    den = np.full_like(a, q)
    qp = np.zeros_like(a)
    qc = np.ones_like(a)
    ok = np.ones(a.shape, dtype=bool)
    live = np.arange(a.size)
    while live.size:
        n, d = num[live], den[live]
        c = d // n
        r = d - c * n
        qn = c * qc[live] + qp[live]
        guarded = (qn < t) if convention == PREFIX else (qc[live] < t)
        bad = guarded & (c > M)
        ok[live[bad]] = False
        done = ~guarded | bad | (r == 0)
        qp[live], qc[live] = qc[live], qn
        num[live], den[live] = r, n
        live = live[~done]
    ok &= np.gcd(a, q) == 1
    return a[ok]


def runs(z: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers in a sorted array."""
    if z.size == 0:
        return []
    br = np.flatnonzero(np.diff(z) != 1)
    starts = np.concatenate(([z[0]], z[br + 1]))
    ends = np.concatenate((z[br], [z[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def decompose_ZM(q: int, M: int, t: int, block_const: float = 1.0,
                 convention: str = PREFIX) -> IntervalDecomposition:
    """Split Z_M(t) into disjoint integer intervals indexed by Q̄_M(t).

    Each run of Z_M(t) is cut between consecutive Q̄ fractions at the
    midpoint of their images u*q/v, so every interval holds exactly one
    fraction of Q̄_M(t).  Runs that hold none are returned as leftover.
    Raises :class:`InvariantViolation` when a Q̄ fraction falls outside Z_M(t)
    or an interval is shorter than floor(q/t^2).
    """
    if q < 4:
        raise ValueError("q too small")
    z = build_ZM(q, M, t, convention)
    anchors = enumerate_QM_bar(M, t).values if t >= 2 else []
    floor_len = q // (t * t)
    intervals: list[tuple[int, int]] = []
    left_runs: list[tuple[int, int]] = []
    placed = 0
    k = 0
    for lo, hi in runs(z):
        inside = []
        while k < len(anchors) and anchors[k] * q <= hi:
            if anchors[k] * q < lo:
                raise InvariantViolation(
                    f"Q̄ fraction {anchors[k]} lies outside Z_M(t)",
                    {"q": q, "M": M, "t": t, "fraction": str(anchors[k]),
                     "image": float(anchors[k] * q)})
            inside.append(anchors[k])
            k += 1
        if not inside:
            left_runs.append((lo, hi))
            continue
        start = lo
        for f, g in zip(inside, inside[1:]):
            cut = math.floor((f + g) * q / 2)
            intervals.append((start, cut))
            start = cut + 1
        intervals.append((start, hi))
        placed += len(inside)
    if k < len(anchors):
        raise InvariantViolation(
            f"Q̄ fraction {anchors[k]} lies outside Z_M(t)",
            {"q": q, "M": M, "t": t, "fraction": str(anchors[k])})
    block = math.floor(block_const * q / (t * t))
    dec = IntervalDecomposition(
        q=q, M=M, t=t, intervals=tuple(intervals), anchors=tuple(anchors),
        leftover=sum(hi - lo + 1 for lo, hi in left_runs),
        leftover_runs=tuple(left_runs), block=block, z_size=int(z.size),
        convention=convention)
    short = [(lo, hi) for lo, hi in intervals if hi - lo + 1 < floor_len]
    if dec.T != len(anchors) or short:
        raise InvariantViolation(
            f"decomposition of Z_{M}({t}) mod {q} breaks the interval claim",
            {**dec.as_dict(), "Qbar": len(anchors), "short": short[:10]})
    return dec


def tile_blocks(dec: IntervalDecomposition) -> tuple[list[int], int]:
    """Cover each interval by translates of {0, ..., block-1}.

    Returns the shifts and the count of numerators left over in the
    interval tails (at most block - 1 per interval).
    """
    b = dec.block
    if b < 1:
        return [], sum(hi - lo + 1 for lo, hi in dec.intervals)
    shifts, rest = [], 0
    for lo, hi in dec.intervals:
        n = (hi - lo + 1) // b
        shifts.extend(lo + i * b for i in range(n))
        rest += (hi - lo + 1) - n * b
    return shifts, rest


def estimate_wM(M: int, t_max: int, k_min: int = 4) -> tuple[float, list[tuple[float, float]]]:
    """Fit log2 |Q_M(t)| against log2 t over t = 2^k; returns (slope/2, points).

    The slope of the count is 2*w_M, so half of it estimates the dimension.
    """
    if t_max < 64:
        raise ValueError("t_max must be >= 64")
    if M < 1:
        raise ValueError("M must be >= 1")
    count = count_QM if M > 1 else count_fibonacci_words
    ks = range(k_min, int(math.log2(t_max)) + 1)
    pts = [(float(k), math.log2(count(M, 2 ** k))) for k in ks]
    x, y = np.array(pts).T
    slope = np.polyfit(x, y, 1)[0]
    return float(slope / 2), pts


def default_t(q: int) -> int:
    """floor(q^0.4), computed exactly."""
    t = int(round(q ** 0.4))
    while t ** 5 > q * q:
        t -= 1
    while (t + 1) ** 5 <= q * q:
        t += 1
    return t


def guided_t(q: int, M: int, rounding: str = "ceil") -> int:
    """Integer threshold for the real cut-off sqrt(q / (4M)).

    Denominators are integers, so q_nu < sqrt(q/4M) is the same test as
    q_nu < ceil(sqrt(q/4M)); ``rounding="floor"`` gives the smaller cut.
    """
    if rounding == "floor":
        return isqrt(q // (4 * M))
    if rounding != "ceil":
        raise ValueError("rounding must be 'ceil' or 'floor'")
    n = -(-q // (4 * M))
    t = isqrt(n)
    return t if t * t == n else t + 1
