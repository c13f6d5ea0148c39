"""Large deviations of (1/n) log2 q_n for random partial quotients.

Quotients are drawn uniformly from [N] ("plain") or from 2*[N] and then
doubled into the alternating word (c_1, -c_1, ..., c_n, -c_n) ("signed").
All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from ._parallel import chunks, pmap

PLAIN = "plain"
SIGNED = "signed"
MODES = (PLAIN, SIGNED)
EXACT_SIGNED_MAX = 5000
CHUNK = 128


@njit(cache=True)
def _log_q_rows(words, sign_flip):
    # (1/n) log2 |q_n| per row; with sign_flip each c is followed by -c
    out = np.empty(words.shape[0])
    n = words.shape[1]
    for i in range(words.shape[0]):
        acc = 0.0
        rho = 0.0  # q_{j-2} / q_{j-1}
        for j in range(n):
            x = words[i, j] + rho
            acc += math.log2(abs(x))
            rho = 1.0 / x
            if sign_flip:
                x = -words[i, j] + rho
                acc += math.log2(abs(x))
                rho = 1.0 / x
        out[i] = acc / n
    return out


def log_qn_plain(word) -> float:
    """log2 q_n through log q_j - log q_{j-1} = log(c_j + q_{j-2}/q_{j-1})."""
    w = np.asarray(word, dtype=np.float64)
    if w.size == 0:
        return 0.0
    if np.any(w < 1):
        raise ValueError("plain quotients must be >= 1")
    return float(_log_q_rows(w[None, :], False)[0] * w.size)


def signed_continuant(word) -> int:
    """Exact q of [0; c_1, -c_1, ..., c_n, -c_n]."""
    k0, k1 = 0, 1
    for c in word:
        c = int(c)
        k0, k1 = k1, c * k1 + k0
        k0, k1 = k1, -c * k1 + k0
        if k1 == 0:
            raise ArithmeticError("vanishing denominator in signed word")
    return k1


def log_qn_signed(word) -> float:
    """log2 |q| of the doubled signed word; exact up to 5000 letters."""
    w = [int(c) for c in word]
    if any(c < 2 or c % 2 for c in w):
        raise ValueError("signed quotients must be even and >= 2")
    if len(w) <= EXACT_SIGNED_MAX:
        q = abs(signed_continuant(w))
        return math.log2(q) if q else float("-inf")
    return float(_log_q_rows(np.asarray(w, dtype=np.float64)[None, :], True)[0] * len(w))


def log2_factorial(N: int) -> float:
    """log2 N! by direct summation of log2 k."""
    return math.fsum(math.log2(k) for k in range(2, N + 1))


def reference_mean(N: int, mode: str) -> float:
    """log2(N!)/N, doubled in signed mode."""
    base = log2_factorial(N) / N
    return base if mode == PLAIN else 2 * base


def signed_step_mean(N: int) -> float:
    """2 E log2 c for c uniform on 2*[N], i.e. 2 + 2 log2(N!)/N."""
    return 2.0 + 2 * log2_factorial(N) / N


def deviation_bound(delta: float, n: int, kappa: float) -> float:
    return 2 * math.exp(-kappa * delta * delta * n / math.log2(1 / delta))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def _draw(N: int, n: int, seed: int, trial: int, mode: str) -> np.ndarray:
    c = trial_rng(seed, trial).integers(1, N + 1, size=n)
    return 2 * c if mode == SIGNED else c


def _sample_block(args) -> np.ndarray:
    N, n, seed, mode, lo, hi = args
    words = np.stack([_draw(N, n, seed, i, mode) for i in range(lo, hi)])
    if mode == PLAIN:
        return _log_q_rows(words.astype(np.float64), False)
    if n <= EXACT_SIGNED_MAX:
        return np.array([log_qn_signed(w) / n for w in words])
    return _log_q_rows(words.astype(np.float64), True)


def sample_log_qn(N: int, n: int, trials: int, seed: int, mode: str = PLAIN,
                  workers: int = 1) -> np.ndarray:
    """(1/n) log2 q_n for each trial, in trial order.

    Trials are keyed by (seed, index) and grouped in fixed blocks, so the
    array does not depend on ``workers``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if N < 1 or n < 1 or trials < 1:
        raise ValueError("N, n and trials must be positive")
    jobs = [(N, n, seed, mode, lo, hi) for lo, hi in chunks(0, trials, CHUNK)]
    return np.concatenate(pmap(_sample_block, jobs, workers))


@dataclass(frozen=True)
class DeviationReport:
    N: int
    n: int
    trials: int
    delta: float
    seed: int
    mode: str
    empirical_tail: float
    reference_mean: float
    bound: float
    kappa: float
    sample_mean: float
    sample_sd: float
    hypothesis_met: bool
    signed_step_mean: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def run_deviation(N: int, n: int, trials: int, delta: float, seed: int,
                  mode: str = PLAIN, kappa: float = 0.01, workers: int = 1,
                  hyp_const: float = 1.0, values: np.ndarray | None = None) -> DeviationReport:
    """Fraction of trials with |(1/n) log2 q_n - reference| >= delta."""
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if values is None:
        values = sample_log_qn(N, n, trials, seed, mode, workers)
    ref = reference_mean(N, mode)
    tail = float(np.count_nonzero(np.abs(values - ref) >= delta)) / trials
    return DeviationReport(
        N=N, n=n, trials=trials, delta=delta, seed=seed, mode=mode,
        empirical_tail=tail, reference_mean=ref,
        bound=deviation_bound(delta, n, kappa), kappa=kappa,
        sample_mean=float(values.mean()), sample_sd=float(values.std(ddof=1)),
        hypothesis_met=N >= hyp_const * math.log2(1 / delta) / delta ** 2,
        signed_step_mean=signed_step_mean(N) if mode == SIGNED else None)


def lyapunov_estimate(N: int, n: int, trials: int, seed: int, workers: int = 1) -> float:
    """Mean of (1/n) log2 |q| over signed doubled words; n counts pairs."""
    return float(sample_log_qn(N, n, trials, seed, SIGNED, workers).mean())


def lyapunov_report(N: int, n: int, trials: int, seed: int, workers: int = 1) -> dict:
    est = lyapunov_estimate(N, n, trials, seed, workers)
    return {"N": N, "n": n, "trials": trials, "seed": seed, "estimate": est,
            "per_letter": est / 2, "over_log2_N": est / math.log2(N),
            "reference_2logNfact_over_N": reference_mean(N, SIGNED),
            "reference_even_alphabet": signed_step_mean(N)}


def fit_kappa(N: int, delta: float, ns, trials: int, seed: int, workers: int = 1) -> float | None:
    """kappa from the decay of the plain tail in n, or None if too few nonzero tails."""
    pts = []
    for n in ns:
        tail = run_deviation(N, n, trials, delta, seed, PLAIN, workers=workers).empirical_tail
        if tail > 0:
            pts.append((n, math.log(tail / 2)))
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope * math.log2(1 / delta) / delta ** 2)


def expectation_envelope(N: int) -> tuple[float, float]:
    """N^-2 sum_{a,b} log2(a + theta/b) at theta = 0 and theta = 1."""
    a = np.arange(1, N + 1, dtype=np.float64)
    lo = float(np.log2(a).mean())
    hi = float(np.log2(a[:, None] + 1.0 / a[None, :]).mean())
    return lo, hi


def stirling_constant(N: int) -> float:
    """Least C with |log2(N!)/N - (log2 N - log2 e)| <= log2(C N)/N."""
    gap = abs(log2_factorial(N) / N - (math.log2(N) - math.log2(math.e)))
    return 2 ** (gap * N) / N


def histogram(values: np.ndarray, bins: int = 40) -> list[tuple[float, float, int]]:
    counts, edges = np.histogram(values, bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(counts)]
