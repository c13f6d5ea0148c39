"""Compiled inner loops for the exhaustive modular scans."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def min_product(a, q, x_max):
    # returns (x, y, x*|y|) minimizing x*|y| over 1 <= x <= x_max; y = a*x mod q
    # taken with least absolute value, positive on a tie at q/2
    best = q * q
    bx = 0
    by = 0
    r = 0
    for x in range(1, x_max + 1):
        r += a
        if r >= q:
            r -= q
        if r == 0:
            continue
        if r <= q - r:
            y = r
            ay = r
        else:
            y = r - q
            ay = q - r
        p = x * ay
        if p < best:
            best = p
            bx = x
            by = y
    return bx, by, best


@njit(cache=True)
def max_quotient(a, q):
    m = 0
    num = a
    den = q
    while num != 0:
        c = den // num
        r = den - c * num
        if c > m:
            m = c
        den = num
        num = r
    return m


@njit(cache=True)
def max_quotient_capped(a, q, cap):
    # max partial quotient of a/q, or cap as soon as it reaches cap
    m = 0
    num = a
    den = q
    while num != 0:
        c = den // num
        if c >= cap:
            return cap
        if c > m:
            m = c
        r = den - c * num
        den = num
        num = r
    return m


@njit(cache=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def best_numerator(q):
    # smallest a with gcd(a, q) = 1 minimizing the max partial quotient of a/q
    best_a = 0
    best_m = q + 1
    for a in range(1, q):
        if _gcd(a, q) != 1:
            continue
        m = max_quotient_capped(a, q, best_m)
        if m < best_m:
            best_m = m
            best_a = a
    return best_a, best_m


@njit(cache=True)
def hyperbola_rows(q):
    # per coprime a: (a, max quotient, min x|y|)
    out = np.zeros((q, 3), dtype=np.int64)
    k = 0
    for a in range(1, q):
        if _gcd(a, q) != 1:
            continue
        out[k, 0] = a
        out[k, 1] = max_quotient(a, q)
        out[k, 2] = min_product(a, q, q - 1)[2]
        k += 1
    return out[:k]
