"""Exact continued fractions and continuants.

Words store the partial quotients c_1, ..., c_s of [0; c_1, ..., c_s]; the
leading zero is implicit.  Everything is plain Python ``int`` so there is no
size limit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class DegenerateWord(ArithmeticError):
    """A signed word hits a zero denominator during evaluation."""


@dataclass(frozen=True)
class CFWord:
    quotients: tuple[int, ...]

    def __post_init__(self):
        q = tuple(int(c) for c in self.quotients)
        if any(c == 0 for c in q):
            raise ValueError(f"partial quotients must be nonzero: {q}")
        object.__setattr__(self, "quotients", q)

    @property
    def canonical(self) -> bool:
        q = self.quotients
        if len(q) <= 1:
            return all(c > 0 for c in q)
        return all(c >= 1 for c in q) and q[-1] >= 2

    @property
    def positive(self) -> bool:
        return all(c > 0 for c in self.quotients)

    def __len__(self):
        return len(self.quotients)

    def __iter__(self):
        return iter(self.quotients)

    def __str__(self):
        return "[0;" + ",".join(map(str, self.quotients)) + "]"


@dataclass(frozen=True)
class ConvergentTable:
    pq: tuple[tuple[int, int], ...]

    @property
    def denominators(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.pq)

    @property
    def numerators(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pq)


def partial_quotients(num: int, den: int) -> list[int]:
    """Euclid on num/den with 0 <= num < den; no validation."""
    out = []
    while num:
        c, r = divmod(den, num)
        out.append(c)
        den, num = num, r
    return out


def cf_expand(f: Fraction) -> CFWord:
    f = Fraction(f)
    if not 0 < f < 1:
        raise ValueError(f"expected 0 < num < den, got {f}")
    return CFWord(tuple(partial_quotients(f.numerator, f.denominator)))


def expand(num: int, den: int) -> CFWord:
    """Like :func:`cf_expand` but insists on an already reduced pair."""
    if not 0 < num < den:
        raise ValueError(f"expected 0 < num < den, got {num}/{den}")
    if gcd(num, den) != 1:
        raise ValueError(f"{num}/{den} is not reduced")
    return CFWord(tuple(partial_quotients(num, den)))


def continuant(d: Iterable[int]) -> int:
    """K(d_1, ..., d_k) with K() = 1 and K(d_1) = d_1."""
    k0, k1 = 0, 1
    for c in d:
        k0, k1 = k1, c * k1 + k0
    return k1


def cf_eval(w: CFWord | Sequence[int]) -> Fraction:
    """Value of [0; c_1, ..., c_s]; the empty word is 0.

    Signed words are evaluated from the tail; a zero tail raises
    :class:`DegenerateWord` since the nested fraction is then undefined.
    """
    cs = w.quotients if isinstance(w, CFWord) else tuple(w)
    if not cs:
        return Fraction(0, 1)
    # tail value [c_k; c_{k+1}, ..., c_s] kept as num/den
    num, den = cs[-1], 1
    for k in range(len(cs) - 2, -1, -1):
        if num == 0:
            raise DegenerateWord(f"zero tail at position {k + 2} of {list(cs)}")
        num, den = cs[k] * num + den, num
    if num == 0:
        raise DegenerateWord(f"word {list(cs)} evaluates to 1/0")
    return Fraction(den, num)


def convergents(w: CFWord | Sequence[int]) -> ConvergentTable:
    cs = w.quotients if isinstance(w, CFWord) else tuple(w)
    p0, q0, p1, q1 = 1, 0, 0, 1
    pq = [(0, 1)]
    for c in cs:
        p0, p1 = p1, c * p1 + p0
        q0, q1 = q1, c * q1 + q0
        pq.append((p1, q1))
    return ConvergentTable(tuple(pq))


def normalize(w: CFWord | Sequence[int]) -> CFWord:
    """Canonical form of a positive word: a trailing ``x, 1`` becomes ``x+1``."""
    cs = list(w.quotients if isinstance(w, CFWord) else w)
    if any(c <= 0 for c in cs):
        raise ValueError("normalize expects a positive word")
    if len(cs) >= 2 and cs[-1] == 1:
        cs[-2] += 1
        cs.pop()
    return CFWord(tuple(cs))


def cf_reverse(w: CFWord) -> tuple[CFWord, Fraction]:
    """Reverse a canonical word; returns (normalized reversal, q_{s-1}/q_s).

    With a the numerator of w, a * q_{s-1} = (-1)^(s-1) (mod q_s).
    """
    if not isinstance(w, CFWord):
        w = CFWord(tuple(w))
    if not w.canonical or len(w) == 0:
        raise ValueError("cf_reverse expects a nonempty canonical word")
    rev = normalize(w.quotients[::-1])
    qs = convergents(w).denominators
    return rev, Fraction(qs[-2], qs[-1])


def max_quotient(num: int, den: int) -> int:
    return max(partial_quotients(num, den))
