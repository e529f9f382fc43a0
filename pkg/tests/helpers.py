"""Shared test oracles, independent of the library's own algorithms."""

import numpy as np


def alternation_legs_bruteforce(x, eps):
    """Maximum number of moves in an alternating subsequence of x.

    A move from index i to j > i is valid upward when x[j] - x[i] >= eps and
    downward when x[i] - x[j] >= eps; successive moves must alternate
    direction.  O(n^2) dynamic program, usable only for short inputs.
    """
    n = len(x)
    up = [0] * n  # most moves in a chain ending at i whose last move went up
    dn = [0] * n
    best = 0
    for j in range(n):
        best_up = 0
        best_dn = 0
        for i in range(j):
            if x[j] - x[i] >= eps:
                cand = dn[i] + 1
                if cand > best_up:
                    best_up = cand
            if x[i] - x[j] >= eps:
                cand = up[i] + 1
                if cand > best_dn:
                    best_dn = cand
        up[j] = best_up
        dn[j] = best_dn
        if best_up > best:
            best = best_up
        if best_dn > best:
            best = best_dn
    return best


def brownian_values(n, dt, sigma, seed):
    """Gaussian random walk used as a reference diffusion path."""
    rng = np.random.default_rng(seed)
    steps = sigma * np.sqrt(dt) * rng.standard_normal(n - 1)
    return np.concatenate([[0.0], np.cumsum(steps)])
