"""Bound on an adversary's knowledge of the net twirl parity across rounds.

Per-round guessing probabilities p_k in [1/2, 1] compose through a two-state
Markov chain; the net-parity guessing probability over a window is
1/2 * prod(2 p_k - 1) + 1/2. Converting conditional-entropy bounds into the
p_k (Fano) is left to the caller; a binary-entropy inverse helper is
provided for convenience.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ParityProfile:
    """Per-round parity-guess bounds, optionally tagged with window/qubit."""

    probs: tuple[float, ...]
    rounds: tuple[int, int] | None = None
    qubit: int | None = None

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        for k, p in enumerate(probs):
            if not 0.5 <= p <= 1.0:
                raise ValueError(f"p_{k} = {p} outside [1/2, 1]")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, p: float, rounds: int) -> "ParityProfile":
        return cls((p,) * rounds)


def net_parity_bound(profile: ParityProfile) -> float:
    """Closed-form bound 1/2 * prod(2 p_k - 1) + 1/2; in [1/2, 1]."""
    product = 1.0
    for p in profile.probs:
        product *= 2.0 * p - 1.0
    return 0.5 * product + 0.5


def markov_oracle(profile: ParityProfile, samples: int, rng: np.random.Generator) -> float:
    """Empirical net-parity probability from simulating the two-state chain.

    Starts from certainty x = (1, 0) and flips the prediction with
    probability 1 - p_k each round; returns the fraction still correct.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    correct = np.ones(samples, dtype=bool)
    for p in profile.probs:
        correct ^= rng.random(samples) >= p
    return float(np.mean(correct))


def decay_length(p_max: float, threshold: float) -> int:
    """Smallest M with 1/2 * (2 p_max - 1)^M < threshold.

    Rounds beyond this window cannot carry correlated coherent errors when
    every per-round bound stays below p_max.
    """
    if not 0.5 < p_max <= 1.0:
        raise ValueError("p_max must lie in (1/2, 1]")
    if p_max == 1.0:
        raise ValueError("non-decaying profile: p_max = 1 never meets a threshold")
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    if threshold >= 0.5:
        return 0
    base = 2.0 * p_max - 1.0
    if base == 0.0:
        return 1
    guess = max(1, math.ceil(math.log(2.0 * threshold) / math.log(base)))
    while 0.5 * base**guess >= threshold:
        guess += 1
    while guess > 1 and 0.5 * base ** (guess - 1) < threshold:
        guess -= 1
    return guess


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def guess_bound_from_entropy(theta: float) -> float:
    """Fano conversion: entropy bound (bits) -> guessing-probability bound.

    Inverts the binary entropy on its lower branch [0, 1/2] by bisection and
    returns p = 1 - h2inv(theta) in [1/2, 1]. Convenience only; the bound
    functions consume p_k directly.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("entropy bound must lie in [0, 1] bits")
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = (lo + hi) / 2
        if binary_entropy(mid) < theta:
            lo = mid
        else:
            hi = mid
    return 1.0 - (lo + hi) / 2
