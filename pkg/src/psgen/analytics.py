"""Closed-form performance curves for the neverending-color family.

These are the desk-scale oracles the Monte Carlo harness is checked against:
asymptotic efficiencies for 2 and K categories, the expected learning curve,
the expected learning time, and the majority-vote amplification.
"""

from __future__ import annotations

import math


def asymptotic_efficiency(n: int) -> float:
    """t->inf success probability with generalization, K=2: (1+2n)/(n(n+2))."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return (1 + 2 * n) / (n * (n + 2))


def p_learn(n: int, t: int) -> float:
    """Probability that the critical wildcard->action edge was rewarded
    before step t: 1 - (1 - 1/(n(n+1)(n+2)))^(t-1)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if t < 1:
        raise ValueError("t must be >= 1")
    eps = 1.0 / (n * (n + 1) * (n + 2))
    # expm1/log1p form stays accurate when (1-eps)^(t-1) underflows
    return -math.expm1((t - 1) * math.log1p(-eps))


def expected_efficiency(n: int, t: int) -> float:
    """Expected success probability at step t (learning curve)."""
    p = p_learn(n, t)
    return p * asymptotic_efficiency(n) + (1.0 - p) / n


def expected_learning_time(n: int) -> float:
    """Expected first step at which the critical edge gets rewarded."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return float(n * (n + 1) * (n + 2))


def asymptotic_efficiency_k(n: int, k: int) -> float:
    """K-category asymptote: (n + (1+n) 2^(K-2)) / (n (n + 2^(K-1)))."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 2:
        raise ValueError("K must be >= 2 (color plus at least one category)")
    half = 2.0 ** (k - 2)
    return (n + (1 + n) * half) / (n * (n + 2 * half))


def asymptotic_efficiency_all_irrelevant(n: int, k: int) -> float:
    """Asymptote when no category matters: (1 + 2^(K-1)) / (n + 2^(K-1))."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 2:
        raise ValueError("K must be >= 2")
    full = 2.0 ** (k - 1)
    return (1 + full) / (n + full)


def majority_vote_success(p_single: float, n: int, votes: int) -> float:
    """Probability that `votes` independent walks elect the correct action.

    Exact for n=2 (binomial majority).  For n>2 the n-1 wrong actions are
    pooled into a single alternative, i.e. the returned value is the
    probability the correct action wins an absolute majority; this
    understates the true mode probability and is documented as approximate.
    """
    if not 0.0 < p_single <= 1.0:
        raise ValueError("p_single must lie in (0, 1]")
    if n < 2:
        raise ValueError("n must be >= 2")
    if votes < 1 or votes % 2 == 0:
        raise ValueError("vote count must be a positive odd integer")
    if p_single == 1.0:
        return 1.0
    need = (votes + 1) // 2
    q = 1.0 - p_single
    return sum(
        math.comb(votes, k) * p_single**k * q ** (votes - k)
        for k in range(need, votes + 1)
    )
