"""Independent small-N oracles for the collection-time distribution.

These evaluate moments and tail probabilities by exact dynamic programming
over the chain of per-type counts capped at m, or by inclusion-exclusion for
m = 1.  They share no code with the quadrature path and exist to validate it.
"""

from __future__ import annotations

import math

import numpy as np

from .families import CouponDistribution

MARKOV_STATE_LIMIT = 10**7
CCDF_STATE_LIMIT = 10**6
CCDF_STEP_LIMIT = 10**5
SUBSET_LIMIT = 25


class StateSpaceTooLarge(ValueError):
    """The capped count-vector chain exceeds the state-space guard."""


class SubsetSpaceTooLarge(ValueError):
    """Inclusion-exclusion over 2^N subsets exceeds the guard."""


def _check_state_space(n_types: int, m: int, limit: int) -> int:
    n_states = (m + 1) ** n_types
    if n_states > limit:
        raise StateSpaceTooLarge(
            f"(m+1)^N = {n_states} states exceeds the limit {limit}"
        )
    return n_states


def _digit_sums(n_states: int, n_types: int, base: int) -> np.ndarray:
    sums = np.zeros(n_states, dtype=np.int64)
    tmp = np.arange(n_states, dtype=np.int64)
    for _ in range(n_types):
        sums += tmp % base
        tmp //= base
    return sums


def markov_first_two_moments(dist: CouponDistribution, m: int) -> tuple[float, float]:
    """(E[T], E[T^2]) by backward recursion over capped count vectors.

    States are mixed-radix integers in base m+1; a draw of a still-incomplete
    type moves to a strictly larger integer, so sweeping total counts downward
    resolves every state without a linear solve.  Self-loops on already
    complete types are folded in analytically.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    n = dist.n_types
    base = m + 1
    n_states = _check_state_space(n, m, MARKOV_STATE_LIMIT)
    probs = dist.probs
    sums = _digit_sums(n_states, n, base)

    h1 = np.zeros(n_states)  # E[T | state]
    h2 = np.zeros(n_states)  # E[T^2 | state]
    powers = [base**j for j in range(n)]

    for total in range(n * m - 1, -1, -1):
        idx = np.flatnonzero(sums == total)
        stay = np.zeros(len(idx))
        succ1 = np.zeros(len(idx))
        succ2 = np.zeros(len(idx))
        for j in range(n):
            digit = (idx // powers[j]) % base
            incomplete = digit < m
            succ = idx[incomplete] + powers[j]
            succ1[incomplete] += probs[j] * h1[succ]
            succ2[incomplete] += probs[j] * h2[succ]
            stay[~incomplete] += probs[j]
        move = 1.0 - stay
        h1[idx] = (1.0 + succ1) / move
        h2[idx] = (1.0 + 2.0 * (stay * h1[idx] + succ1) + succ2) / move
    return float(h1[0]), float(h2[0])


def expectation_oracle_markov(dist: CouponDistribution, m: int) -> float:
    return markov_first_two_moments(dist, m)[0]


def rising_moment_oracle_markov(dist: CouponDistribution, m: int) -> float:
    """E[T(T+1)] = E[T^2] + E[T] from the count-vector recursion."""
    e1, e2 = markov_first_two_moments(dist, m)
    return e2 + e1


def variance_oracle_markov(dist: CouponDistribution, m: int) -> float:
    e1, e2 = markov_first_two_moments(dist, m)
    return e2 - e1 * e1


def expectation_oracle_inclusion_exclusion(dist: CouponDistribution) -> float:
    """E[T] for m = 1: sum over nonempty J of (-1)^{|J|+1} / sum_{j in J} p_j."""
    n = dist.n_types
    if n > SUBSET_LIMIT:
        raise SubsetSpaceTooLarge(f"2^{n} subsets exceed the 2^{SUBSET_LIMIT} guard")
    probs = dist.probs

    # Subset sums and parities over the low half, doubling one element at a time.
    lo_bits = min(n, 13)
    sums = np.zeros(1)
    parity = np.ones(1)  # (-1)^{|J|}
    for j in range(lo_bits):
        sums = np.concatenate([sums, sums + probs[j]])
        parity = np.concatenate([parity, -parity])

    total = 0.0
    hi_bits = n - lo_bits
    for hi_mask in range(1 << hi_bits):
        hi_sum = 0.0
        hi_parity = 1.0
        for j in range(hi_bits):
            if hi_mask >> j & 1:
                hi_sum += probs[lo_bits + j]
                hi_parity = -hi_parity
        s = sums + hi_sum
        contrib = hi_parity * parity / np.where(s > 0, s, np.inf)
        # (-1)^{|J|+1} = -parity; the empty set maps to 1/inf = 0.
        total += -float(np.sum(contrib))
    return total


def ccdf_exact(dist: CouponDistribution, m: int, n_draws: int) -> float:
    """P(T > n_draws) by forward iteration of the capped count-vector chain."""
    if n_draws < 0:
        raise ValueError("n_draws must be nonnegative")
    if n_draws > CCDF_STEP_LIMIT:
        raise ValueError(f"n_draws exceeds the step limit {CCDF_STEP_LIMIT}")
    n = dist.n_types
    base = m + 1
    n_states = _check_state_space(n, m, CCDF_STATE_LIMIT)
    probs = dist.probs
    powers = [base**j for j in range(n)]
    states = np.arange(n_states, dtype=np.int64)

    successors = []
    for j in range(n):
        digit = (states // powers[j]) % base
        succ = np.where(digit < m, states + powers[j], states)
        successors.append(succ)

    pi = np.zeros(n_states)
    pi[0] = 1.0
    full = n_states - 1
    for _ in range(n_draws):
        if pi[full] >= 1.0:
            break
        new_pi = np.zeros(n_states)
        for j in range(n):
            new_pi += np.bincount(successors[j], weights=probs[j] * pi, minlength=n_states)
        pi = new_pi
    return float(max(0.0, 1.0 - pi[full]))


def harmonic_number(n: int) -> float:
    """H_n by direct summation (classical E[T] = N H_N for the equal case, m=1)."""
    return math.fsum(1.0 / k for k in range(1, n + 1))
