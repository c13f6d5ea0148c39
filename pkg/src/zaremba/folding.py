"""Fractions with denominator b**n and all partial quotients below b**2.

One fold turns a word with continuant Q into

    (c_1, ..., c_t, X, 1, c_t - 1, c_{t-1}, ..., c_1)

whose continuant is Q**2 * (X + 1).  Starting from b or b**2 and folding
with X = b - 1 (n -> 2n + 1) or X = b**2 - 1 (n -> 2n + 2) reaches every
exponent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .cf import CFWord, cf_expand, continuant, partial_quotients
from .errors import InvariantViolation

BASE_SEARCH_LIMIT = 10 ** 7


@dataclass(frozen=True)
class FoldWord:
    word: tuple[int, ...]
    value: int

    def __post_init__(self):
        if not self.word or any(c < 1 for c in self.word):
            raise ValueError("fold words are nonempty and positive")
        if continuant(self.word) != self.value:
            raise ValueError("value does not match the continuant")

    @classmethod
    def of(cls, word) -> "FoldWord":
        word = tuple(int(c) for c in word)
        return cls(word, continuant(word))

    @property
    def first(self) -> int:
        return self.word[0]

    @property
    def last(self) -> int:
        return self.word[-1]


def fold_step(w: FoldWord, X: int) -> FoldWord:
    if X < 1:
        raise ValueError("X must be >= 1")
    if w.last < 2:
        raise ValueError(f"cannot fold a word ending in {w.last}")
    c = w.word
    out = c + (X, 1, c[-1] - 1) + c[-2::-1]
    return FoldWord(out, w.value * w.value * (X + 1))


def exponent_chain(n: int) -> list[tuple[int, int]]:
    """Exponents from a base in {1, 2} up to n, each tagged with its fold kind.

    Entries are (exponent, kind) with kind 1 for n -> 2n+1, 2 for n -> 2n+2
    and 0 for the base.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    chain = []
    while n > 2:
        kind = 1 if n % 2 else 2
        chain.append((n, kind))
        n = (n - 1) // 2 if kind == 1 else (n - 2) // 2
    chain.append((n, 0))
    return chain[::-1]


def base_word(b: int, n: int) -> tuple[int, ...]:
    """Expansion of the smallest a/b**n with every quotient <= b**2 - 1."""
    q = b ** n
    if q > BASE_SEARCH_LIMIT:
        raise ValueError(f"base search over {q} numerators exceeds budget")
    bound = b * b - 1
    for a in range(1, q):
        if gcd(a, q) == 1:
            w = partial_quotients(a, q)
            if max(w) <= bound:
                return tuple(w)
    raise InvariantViolation(f"no numerator for {q} with quotients <= {bound}",
                         {"base": b, "n": n})


def _prepare(w: FoldWord, bound: int) -> FoldWord | None:
    # make the last entry >= 2 without changing the continuant or the bound
    if w.last >= 2:
        return w
    c = w.word
    if len(c) >= 2 and c[-2] + 1 <= bound:
        return FoldWord.of(c[:-2] + (c[-2] + 1,))
    if c[0] >= 2:
        return FoldWord(c[::-1], w.value)
    return None


@dataclass
class FoldRecord:
    base: int
    n: int
    word: FoldWord
    steps: list = field(default_factory=list)
    base_exponent: int = 0
    raw: FoldWord | None = None

    @property
    def fraction(self) -> Fraction:
        return Fraction(continuant(self.word.word[1:]), self.word.value)

    @property
    def canonical(self) -> CFWord:
        return cf_expand(self.fraction)

    @property
    def max_quotient(self) -> int:
        return max(self.canonical)


def _build(b: int, chain: list[tuple[int, int]], start: int) -> FoldRecord | None:
    bound = b * b - 1
    e0 = chain[start][0]
    w = FoldWord.of(base_word(b, e0))
    rec = FoldRecord(b, e0, w, base_exponent=e0)
    for e, kind in chain[start + 1:]:
        X = b - 1 if kind == 1 else bound
        w = _prepare(w, bound)
        if w is None:
            return None
        out = fold_step(w, X)
        expected = w.value * w.value * (X + 1)
        rec.steps.append({"n": e, "X": X, "in_len": len(w.word),
                          "out_len": len(out.word),
                          "continuant_ok": continuant(out.word) == expected})
        w = out
    rec.raw = w
    # a canonical tail keeps the normalized expansion inside the bound too
    w = _prepare(w, bound)
    if w is None:
        return None
    rec.word, rec.n = w, chain[-1][0]
    return rec


def fold_construct(b: int, n: int) -> tuple[CFWord, Fraction]:
    """a/b**n with all quotients <= b**2 - 1, as (canonical word, fraction)."""
    rec = fold_record(b, n)
    return rec.canonical, rec.fraction


def fold_record(b: int, n: int) -> FoldRecord:
    """Like :func:`fold_construct` but keeps the raw word and every fold."""
    if b < 2:
        raise ValueError("base must be >= 2")
    chain = exponent_chain(n)
    for start in range(len(chain)):
        # a base word of b or b**2 may start with 1s on both ends for b = 2;
        # in that case start from a searched word further up the chain
        if b ** chain[start][0] > BASE_SEARCH_LIMIT:
            break
        rec = _build(b, chain, start)
        if rec is not None:
            return rec
    raise InvariantViolation(f"no fold chain reaches {b}^{n}", {"base": b, "n": n})


def audit(b: int, n: int) -> dict:
    """Recheck every claim about the construction of a/b**n."""
    rec = fold_record(b, n)
    f = rec.fraction
    q = b ** n
    bound = b * b - 1
    raw_max = max(max(rec.word.word), max(rec.raw.word))
    report = {
        "base": b, "n": n, "numerator": f.numerator, "denominator": f.denominator,
        "denominator_exact": f.denominator == q,
        "coprime": gcd(f.numerator, q) == 1,
        "raw_max": raw_max, "max_quotient": rec.max_quotient, "bound": bound,
        "within_bound": rec.max_quotient <= bound and raw_max <= bound,
        "base_exponent": rec.base_exponent,
        "folds": len(rec.steps),
        "continuants_ok": all(s["continuant_ok"] for s in rec.steps),
        "lengths_ok": all(s["out_len"] == 2 * s["in_len"] + 2 for s in rec.steps),
    }
    report["ok"] = all(report[k] for k in (
        "denominator_exact", "coprime", "within_bound", "continuants_ok", "lengths_ok"))
    return report
