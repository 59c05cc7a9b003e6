"""Simple random walk return probabilities and spectral radii on trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import TreeStore


class BadInput(ValueError):
    pass


class OddStep(ValueError):
    """Odd step counts have zero return probability on a tree."""


MAX_DP_STEPS = 10_000


@dataclass(frozen=True)
class DistanceChain:
    """Distance from the root of SRW on the (d+1)-regular tree.

    From distance 0 every move goes outward; elsewhere the walk moves out with
    probability d/(d+1) and back with probability 1/(d+1).
    """

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise BadInput("branching number must be >= 1")

    @property
    def p_up(self) -> float:
        return self.d / (self.d + 1)

    @property
    def p_down(self) -> float:
        return 1.0 / (self.d + 1)


def spectral_radius_formula(h_min: int) -> float:
    """Almost-sure spectral radius of SRW on a GW tree with minimal offspring ``h_min``."""
    if h_min < 1 or int(h_min) != h_min:
        raise BadInput(f"h_min must be a positive integer, got {h_min}")
    if h_min == 1:
        return 1.0
    return 2.0 * math.sqrt(h_min) / (h_min + 1)


def _step(p: np.ndarray, up: float, down: float) -> np.ndarray:
    q = np.zeros_like(p)
    q[1] += p[0]
    q[2:] += up * p[1:-1]
    q[0] += down * p[1]
    q[1:-1] += down * p[2:]
    return q


def distance_distribution(chain: DistanceChain, n: int) -> np.ndarray:
    """Exact law of the distance after ``n`` steps (states 0..n, no truncation)."""
    p = np.zeros(n + 2)
    p[0] = 1.0
    for _ in range(n):
        p = _step(p, chain.p_up, chain.p_down)
    return p[: n + 1]


def log_return_probability_dp(chain: DistanceChain, n: int) -> float:
    """Natural log of the n-step return probability, with per-step rescaling."""
    if n < 0 or n > MAX_DP_STEPS:
        raise BadInput(f"step count must lie in [0, {MAX_DP_STEPS}], got {n}")
    if n % 2:
        raise OddStep(f"n={n} is odd; the return probability is exactly 0")
    # a path that returns at step n never goes beyond distance n/2
    p = np.zeros(n // 2 + 2)
    p[0] = 1.0
    log_scale = 0.0
    for _ in range(n):
        p = _step(p, chain.p_up, chain.p_down)
        p[-1] = 0.0
        s = p.sum()
        p /= s
        log_scale += math.log(s)
    return log_scale + math.log(p[0])


def return_probability_dp(chain: DistanceChain, n: int) -> float:
    """P(SRW_n = root) for SRW started at the root of the (d+1)-regular tree."""
    return math.exp(log_return_probability_dp(chain, n))


def return_probability(chain: DistanceChain, n: int) -> float:
    """Like :func:`return_probability_dp` but returns 0.0 for odd ``n``."""
    if n % 2:
        return 0.0
    return return_probability_dp(chain, n)


def spectral_radius_dp_estimate(chain: DistanceChain, n_max: int = 1000) -> float:
    if n_max < 100:
        raise BadInput("n_max must be at least 100")
    return math.exp(log_return_probability_dp(chain, n_max) / n_max)


def srw_step(store: TreeStore, v: int, rng: np.random.Generator) -> int:
    """One simple-random-walk step from ``v`` to a uniform neighbour."""
    deg = store.degree(v)
    j = min(int(rng.random() * deg), deg - 1)
    return store.neighbor(v, j)
