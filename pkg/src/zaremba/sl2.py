"""Small experiments in SL2 over Z, F_p and Z/p^n.

Matrices are (a, b | c, d).  Vectorized code packs a batch of matrices as an
int64 array of shape (k, 4) and keys each one by ((a*m + b)*m + c)*m + d.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

WALK_BUDGET = 10 ** 8
ENUM_BUDGET = 3 ** 5


@dataclass(frozen=True)
class GroupElement:
    a: int
    b: int
    c: int
    d: int
    modulus: int | None = None

    def __post_init__(self):
        m = self.modulus
        if m is not None:
            if m < 2:
                raise ValueError("modulus must be >= 2")
            for k in "abcd":
                object.__setattr__(self, k, getattr(self, k) % m)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    @property
    def det(self) -> int:
        v = self.a * self.d - self.b * self.c
        return v % self.modulus if self.modulus else v

    @property
    def det_mod(self) -> int:
        """Determinant as +-1 when it is one, else the raw residue."""
        v = self.det
        if self.modulus and v == self.modulus - 1:
            return -1
        return v

    def __matmul__(self, o: "GroupElement") -> "GroupElement":
        return GroupElement(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
                            self.modulus)

    def inverse(self) -> "GroupElement":
        e = self.det_mod
        if e not in (1, -1):
            raise ValueError("only determinant +-1 elements are inverted")
        return GroupElement(e * self.d, -e * self.b, -e * self.c, e * self.a, self.modulus)

    def reduce(self, m: int) -> "GroupElement":
        return GroupElement(self.a, self.b, self.c, self.d, m)

    def norm(self) -> int:
        return max(abs(x) for x in self.entries)

    def __str__(self):
        return f"({self.a} {self.b} | {self.c} {self.d})"


IDENTITY = (1, 0, 0, 1)


def generator_family(N: int, m: int | None = None, det: int = 1) -> list[GroupElement]:
    """v^j u^-j = (1, -2j | 2j, 1 - 4j^2) for j = 1..N; det = -1 gives
    (-2j, 1 - 4j^2 | 1, 2j) instead."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if det == 1:
        return [GroupElement(1, -2 * j, 2 * j, 1 - 4 * j * j, m) for j in range(1, N + 1)]
    if det == -1:
        return [GroupElement(-2 * j, 1 - 4 * j * j, 1, 2 * j, m) for j in range(1, N + 1)]
    raise ValueError("det must be 1 or -1")


# ---------------------------------------------------------------- girth

@dataclass(frozen=True)
class Girth:
    value: int
    exact: bool
    levels: int = 0
    nodes: int = 0

    def __str__(self):
        return str(self.value) if self.exact else f">={self.value}"

    def as_dict(self) -> dict:
        return {"girth": self.value if self.exact else None,
                "lower_bound": self.value, "exact": self.exact,
                "levels": self.levels, "nodes": self.nodes}


def girth(p: int | None, N: int, L_max: int = 40, max_nodes: int = 5_000_000) -> Girth:
    """Shortest nontrivial reduced word in G and G^-1 equal to the identity.

    BFS from the identity over reduced words; the first level that revisits
    an element gives the girth since the Cayley graph is vertex-transitive.
    ``p=None`` works over Z with exact integers.
    """
    if p is not None and (p > 2000 or not sympy.isprime(p)):
        raise ValueError("p must be a prime <= 2000")
    if N > 16:
        raise ValueError("N must be <= 16")
    gens = generator_family(N, p)
    letters = [g.entries for g in gens] + [g.inverse().entries for g in gens]
    inv = [(i + N) % (2 * N) for i in range(2 * N)]

    def mul(x, y):
        a, b, c, d = x
        e, f, g, h = y
        r = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return tuple(v % p for v in r) if p else r

    seen = {IDENTITY: 0}
    frontier = [(IDENTITY, -1)]
    depth = 0
    levels_needed = (L_max + 1) // 2  # levels 0..levels_needed-1 find every L <= L_max
    while depth < levels_needed:
        best = None
        nxt = []
        for x, last in frontier:
            for i, s in enumerate(letters):
                if last >= 0 and i == inv[last]:
                    continue
                y = mul(x, s)
                dy = seen.get(y)
                if dy is None:
                    seen[y] = depth + 1
                    nxt.append((y, i))
                else:
                    L = depth + dy + 1
                    best = L if best is None else min(best, L)
            if len(seen) > max_nodes:
                return Girth(2 * depth + 1, False, depth, len(seen))
        if best is not None and best <= L_max:
            return Girth(best, True, depth + 1, len(seen))
        frontier = nxt
        depth += 1
    return Girth(L_max + 1, False, depth, len(seen))


# ---------------------------------------------------------- walk counts

def _arr(elems, m) -> np.ndarray:
    return np.array([[e % m for e in g.entries] for g in elems], dtype=np.int64)


def _mul(X: np.ndarray, Y: np.ndarray, m: int) -> np.ndarray:
    a, b, c, d = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    e, f, g, h = Y[..., 0], Y[..., 1], Y[..., 2], Y[..., 3]
    return np.stack([(a * e + b * g) % m, (a * f + b * h) % m,
                     (c * e + d * g) % m, (c * f + d * h) % m], axis=-1)


def _keys(X: np.ndarray, m: int) -> np.ndarray:
    return ((X[:, 0] * m + X[:, 1]) * m + X[:, 2]) * m + X[:, 3]


def _unkey(k: np.ndarray, m: int) -> np.ndarray:
    d = k % m
    k = k // m
    c = k % m
    k = k // m
    return np.stack([k // m, k % m, c, d], axis=-1)


def _step(keys, counts, S, m):
    # convolve the distribution with the uniform measure on S (right action)
    X = _unkey(keys, m)
    prods = np.concatenate([_keys(_mul(X, s[None, :], m), m) for s in S])
    cnt = np.tile(counts, len(S))
    u, inv = np.unique(prods, return_inverse=True)
    return u, _agg(inv, cnt, u.size)


def _agg(inv, cnt, size):
    out = np.zeros(size, dtype=np.int64)
    np.add.at(out, inv, cnt)
    return out


@dataclass
class WalkStats:
    p: int
    N: int
    m: int
    keys: np.ndarray
    counts: np.ndarray
    energy: int
    max_coset_mass: Fraction
    worst_subgroup: str
    subgroups_checked: int
    girth: Girth | None = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def r_counts(self) -> dict[GroupElement, int]:
        X = _unkey(self.keys, self.p)
        return {GroupElement(*map(int, x), self.p): int(c) for x, c in zip(X, self.counts)}

    def r_at(self, g: GroupElement) -> int:
        k = int(_keys(_arr([g], self.p), self.p)[0])
        i = np.searchsorted(self.keys, k)
        return int(self.counts[i]) if i < self.keys.size and self.keys[i] == k else 0

    @property
    def group_order(self) -> int:
        return self.p * (self.p * self.p - 1)

    @property
    def energy_ratio(self) -> float:
        return self.energy / self.N ** (4 * self.m)

    @property
    def cauchy_schwarz_floor(self) -> Fraction:
        return Fraction(self.N ** (4 * self.m), self.group_order)

    @property
    def K_estimate(self) -> float:
        return float(1 / self.max_coset_mass)

    def as_dict(self) -> dict:
        return {"p": self.p, "N": self.N, "m": self.m, "support": int(self.keys.size),
                "total": self.total, "walks": self.N ** (2 * self.m),
                "r_identity": self.r_at(GroupElement(1, 0, 0, 1, self.p)),
                "energy": self.energy, "energy_ratio": self.energy_ratio,
                "cauchy_schwarz_floor": float(self.cauchy_schwarz_floor),
                "max_coset_mass": str(self.max_coset_mass),
                "max_coset_mass_float": float(self.max_coset_mass),
                "K_estimate": self.K_estimate, "worst_subgroup": self.worst_subgroup,
                "subgroups_checked": self.subgroups_checked,
                "girth": str(self.girth) if self.girth else None}


def walk_counts(p: int, N: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """r(x) = #{s_1 s_2^-1 ... s_{2m-1} s_{2m}^-1 = x}, as sorted keys and counts."""
    if not sympy.isprime(p) or p > 211:
        raise ValueError("p must be a prime <= 211")
    if N < 1 or m < 1 or N ** (2 * m) > WALK_BUDGET:
        raise ValueError(f"|G|^(2m) = {N}^{2 * m} exceeds the work budget")
    gens = generator_family(N, p)
    S = _arr(gens, p)
    Sinv = _arr([g.inverse() for g in gens], p)
    keys = _keys(np.array([IDENTITY], dtype=np.int64), p)
    counts = np.ones(1, dtype=np.int64)
    for _ in range(m):
        keys, counts = _step(keys, counts, S, p)
        keys, counts = _step(keys, counts, Sinv, p)
    return keys, counts


def _p1_index(u, v, p, inv):
    # point (u : v) of P^1(F_p) as an index in [0, p]
    return np.where(v % p != 0, (u * inv[v % p]) % p, p)


def _borel_labels(X, p, inv, ell):
    # left cosets of the stabilizer of ell <-> images X * ell
    u, v = (1, 0) if ell == p else (ell, 1)
    return _p1_index(X[:, 0] * u + X[:, 1] * v, X[:, 2] * u + X[:, 3] * v, p, inv)


def _coset_max(labels, counts) -> int:
    _, inv = np.unique(labels, return_inverse=True)
    return int(_agg(inv, counts, inv.max() + 1).max())


def _nonresidue(p: int) -> int:
    return next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)


def coset_catalog_max(p: int, keys: np.ndarray, counts: np.ndarray,
                      samples: int = 64, cyclic: int = 4,
                      seed: int = 0) -> tuple[int, str, int]:
    """Largest mass of a left coset of a catalog subgroup.

    The catalog holds all p + 1 Borel subgroups, sampled normalizers of
    split and non-split tori, and sampled cyclic subgroups.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, p])))
    X = _unkey(keys, p)
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(int(x), -1, p) for x in range(1, p)]
    best, name, checked = 0, "", 0

    def consider(mass, label):
        nonlocal best, name, checked
        checked += 1
        if mass > best:
            best, name = mass, label

    for ell in range(p + 1):
        consider(_coset_max(_borel_labels(X, p, inv, ell), counts), f"borel:{ell}")

    # split torus normalizer = stabilizer of an unordered pair of points
    pts = np.arange(p + 1)
    for _ in range(samples):
        l1, l2 = sorted(rng.choice(pts, size=2, replace=False).tolist())
        x1, x2 = _borel_labels(X, p, inv, l1), _borel_labels(X, p, inv, l2)
        lab = np.minimum(x1, x2) * (p + 1) + np.maximum(x1, x2)
        consider(_coset_max(lab, counts), f"split:{l1},{l2}")

    # non-split torus normalizer = stabilizer of a conjugate pair in F_{p^2}
    nu = _nonresidue(p)
    for _ in range(samples):
        z0, z1 = int(rng.integers(0, p)), int(rng.integers(1, p))
        a, b, c, d = (X[:, i] for i in range(4))
        n0, n1 = (a * z0 + b) % p, (a * z1) % p
        d0, d1 = (c * z0 + d) % p, (c * z1) % p
        nrm = (d0 * d0 - nu * d1 * d1) % p
        ninv = inv[nrm]
        w0 = ((n0 * d0 - nu * n1 * d1) % p) * ninv % p
        w1 = ((n1 * d0 - n0 * d1) % p) * ninv % p
        lab = w0 * p + np.minimum(w1, (p - w1) % p)
        consider(_coset_max(lab, counts), f"nonsplit:{z0}+{z1}i")

    # cyclic subgroups generated by random elements
    for _ in range(cyclic):
        h = _random_sl2(p, rng)
        powers = [np.array(IDENTITY, dtype=np.int64)]
        while True:
            nxt = _mul(powers[-1], h, p)
            if tuple(nxt) == IDENTITY:
                break
            powers.append(nxt)
        lab = _keys(X, p)
        for P in powers[1:]:
            lab = np.minimum(lab, _keys(_mul(X, P[None, :], p), p))
        consider(_coset_max(lab, counts), f"cyclic:order{len(powers)}")
    return best, name, checked


def _random_sl2(p, rng) -> np.ndarray:
    while True:
        a, b, c = (int(v) for v in rng.integers(0, p, size=3))
        if a:
            return np.array([a, b, c, (1 + b * c) * pow(a, -1, p) % p], dtype=np.int64)


def walk_stats(p: int, N: int, m: int, samples: int = 64, cyclic: int = 4,
               seed: int = 0, girth_L: int | None = None) -> WalkStats:
    keys, counts = walk_counts(p, N, m)
    energy = int(np.sum(counts * counts))
    mass, name, checked = coset_catalog_max(p, keys, counts, samples, cyclic, seed)
    g = girth(p, N, girth_L) if girth_L else None
    return WalkStats(p, N, m, keys, counts, energy,
                     Fraction(mass, N ** (2 * m)), name, checked, g)


def r_histogram(ws: WalkStats) -> list[tuple[int, int]]:
    """(r value, number of elements with that r), ascending."""
    return sorted(Counter(ws.counts.tolist()).items())


# ------------------------------------------------------- action counts

def action_count(p: int, A, B, N: int) -> tuple[int, Fraction, float]:
    """#{(a, b, c): a in A, b in B, c in 2*[N] mod p, (a+c)(b+c) = 1}.

    Returns (count, N|A||B|/p, |count - main| / (sqrt(|A||B|) N)).
    """
    if not sympy.isprime(p):
        raise ValueError("p must be prime")
    A = np.unique(np.asarray(list(A), dtype=np.int64) % p)
    B = np.unique(np.asarray(list(B), dtype=np.int64) % p)
    inb = np.zeros(p, dtype=bool)
    inb[B] = True
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(x, -1, p) for x in range(1, p)]
    count = 0
    for j in range(1, N + 1):
        c = 2 * j % p
        u = (A + c) % p
        u = u[u != 0]
        count += int(np.count_nonzero(inb[(inv[u] - c) % p]))
    main = Fraction(N * A.size * B.size, p)
    dev = abs(count - main) / (math.sqrt(A.size * B.size) * N) if A.size and B.size else 0.0
    return count, main, float(dev)


def action_trials(p: int, N: int, size: int, sets: int, seed: int) -> list[float]:
    """Deviations of :func:`action_count` over random (A, B) of the given size."""
    out = []
    for i in range(sets):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, i])))
        A = rng.choice(p, size=size, replace=False)
        B = rng.choice(p, size=size, replace=False)
        out.append(action_count(p, A, B, N)[2])
    return out


# ------------------------------------------------------- p-adic pieces

@dataclass(frozen=True)
class PAdicDecomposition:
    g: GroupElement
    p: int
    n: int
    half_trace: int
    r: int
    gprime: tuple[int, int, int, int]
    central: bool

    def reconstruct(self) -> GroupElement:
        q, s = self.p ** self.n, self.p ** self.r
        a, b, c, d = self.gprime
        return GroupElement(self.half_trace + s * a, s * b, s * c, self.half_trace + s * d, q)

    @property
    def trace_ok(self) -> bool:
        """Tr g = +-2 modulo p^min(n, 2r)."""
        k = self.p ** min(self.n, 2 * self.r)
        tr = (self.g.a + self.g.d) % k
        return tr == 2 % k or tr == (-2) % k


def _val(x: int, p: int, n: int) -> int:
    if x == 0:
        return n
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def padic_decompose(g: GroupElement, p: int, n: int) -> PAdicDecomposition:
    """g = (Tr g / 2) I + p^r g' with g' traceless and nonzero mod p."""
    if p % 2 == 0:
        raise ValueError("p must be odd")
    q = p ** n
    g = g.reduce(q)
    if g.det != 1:
        raise ValueError("g must have determinant 1")
    ht = (g.a + g.d) * pow(2, -1, q) % q
    h = ((g.a - ht) % q, g.b, g.c, (g.d - ht) % q)
    r = min(_val(x, p, n) for x in h)
    if r == n:
        return PAdicDecomposition(g, p, n, ht, n, (0, 0, 0, 0), True)
    s = p ** r
    return PAdicDecomposition(g, p, n, ht, r, tuple(x // s for x in h), False)


def sl2_elements(q: int) -> np.ndarray:
    """All of SL2(Z/q) as a (k, 4) array, sorted by key."""
    a, c = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    a, c = a.ravel(), c.ravel()
    unit = np.array([math.gcd(int(x), q) == 1 for x in range(q)])
    inv = np.array([pow(x, -1, q) if unit[x] else 0 for x in range(q)], dtype=np.int64)
    prim = unit[a] | unit[c]
    a, c = a[prim], c[prim]
    t = np.arange(q)
    A, T = np.repeat(a, q), np.tile(t, a.size)
    C = np.repeat(c, q)
    ua = unit[A]
    # a a unit: b free, d = (1 + bc)/a; otherwise c a unit: d free, b = (ad - 1)/c
    b = np.where(ua, T, ((A * T - 1) % q) * inv[C] % q)
    d = np.where(ua, ((1 + T * C) % q) * inv[A] % q, T)
    X = np.stack([A, b, C, d], axis=-1).astype(np.int64)
    return X[np.argsort(_keys(X, q))]


@dataclass
class StabilizerReport:
    p: int
    n: int
    group_order: int
    elements: int = 0
    classes: int = 0
    violations: list = field(default_factory=list)
    worst_centralizer_ratio: float = 0.0
    worst_normalizer_ratio: float = 0.0

    def as_dict(self) -> dict:
        return {"p": self.p, "n": self.n, "group_order": self.group_order,
                "elements": self.elements, "classes": self.classes,
                "violations": len(self.violations),
                "worst_centralizer_ratio": self.worst_centralizer_ratio,
                "worst_normalizer_ratio": self.worst_normalizer_ratio}


class _SL2Table:
    def __init__(self, p: int, n: int):
        if p % 2 == 0 or not sympy.isprime(p):
            raise ValueError("p must be an odd prime")
        q = p ** n
        if q > ENUM_BUDGET:
            raise ValueError(f"p^n = {q} exceeds the enumeration budget {ENUM_BUDGET}")
        self.p, self.n, self.q = p, n, q
        self.X = sl2_elements(q)
        self.keys = _keys(self.X, q)
        self.Xinv = np.stack([self.X[:, 3], -self.X[:, 1] % q,
                              -self.X[:, 2] % q, self.X[:, 0]], axis=-1)

    def index(self, Y: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.keys, _keys(Y, self.q))

    def centralizer(self, g: np.ndarray) -> np.ndarray:
        gx = _mul(g[None, :], self.X, self.q)
        xg = _mul(self.X, g[None, :], self.q)
        return np.flatnonzero(np.all(gx == xg, axis=1))

    def conjugates(self, g: np.ndarray) -> np.ndarray:
        return self.index(_mul(_mul(self.X, g[None, :], self.q), self.Xinv, self.q))

    def _closure(self, gens: list[int]) -> np.ndarray:
        H = np.array([self.index(np.array([IDENTITY]))[0]])
        while True:
            new = [H] + [self.index(_mul(self.X[H], self.X[s][None, :], self.q)) for s in gens]
            H2 = np.unique(np.concatenate(new))
            if H2.size == H.size:
                return H
            H = H2

    def generators(self, C: np.ndarray) -> list[int]:
        gens: list[int] = []
        H = self._closure(gens)
        while H.size < C.size:
            missing = C[~np.isin(C, H)]
            gens.append(int(missing[0]))
            H = self._closure(gens)
        return gens

    def normalizer_size(self, C: np.ndarray) -> int:
        if C.size == self.X.shape[0]:
            return C.size
        inC = np.zeros(self.X.shape[0], dtype=bool)
        inC[C] = True
        ok = np.ones(self.X.shape[0], dtype=bool)
        for s in self.generators(C):
            conj = _mul(_mul(self.X, self.X[s][None, :], self.q), self.Xinv, self.q)
            ok &= inC[self.index(conj)]
        return int(np.count_nonzero(ok))


def stab_sizes(g: GroupElement, p: int, n: int) -> tuple[int, int]:
    """(|C(g)|, |N(C(g))|) by exhaustive search over SL2(Z/p^n)."""
    T = _SL2Table(p, n)
    v = np.array(g.reduce(T.q).entries, dtype=np.int64)
    C = T.centralizer(v)
    return int(C.size), T.normalizer_size(C)


def stabilizer_bounds(p: int, n: int, r: int) -> tuple[int, int]:
    return 8 * p ** (n + 2 * r), 300 * p ** (n + 3 * r)


def stabilizer_sweep(p: int, n: int) -> StabilizerReport:
    """Check both stabilizer bounds for every element, one conjugacy class at a time.

    Centralizer and normalizer orders, like r, are constant on classes.
    """
    T = _SL2Table(p, n)
    size = T.X.shape[0]
    rep = StabilizerReport(p, n, size)
    done = np.zeros(size, dtype=bool)
    for i in range(size):
        if done[i]:
            continue
        g = T.X[i]
        cls = np.unique(T.conjugates(g))
        done[cls] = True
        C = T.centralizer(g)
        Nsz = T.normalizer_size(C)
        rep.classes += 1
        for j in cls:
            dec = padic_decompose(GroupElement(*map(int, T.X[j]), T.q), p, n)
            bc, bn = stabilizer_bounds(p, n, dec.r)
            rep.elements += 1
            rep.worst_centralizer_ratio = max(rep.worst_centralizer_ratio, C.size / bc)
            rep.worst_normalizer_ratio = max(rep.worst_normalizer_ratio, Nsz / bn)
            if C.size > bc or Nsz > bn or not dec.trace_ok:
                rep.violations.append({"g": T.X[j].tolist(), "r": dec.r,
                                       "centralizer": int(C.size), "normalizer": Nsz,
                                       "trace_ok": dec.trace_ok})
    return rep
