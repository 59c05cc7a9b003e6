"""Discrete-time branching random walk on a lazily explored tree.

Each generation every particle is replaced by ``k ~ F_R`` offspring and every
offspring takes one SRW step from its parent's vertex.

Once the population exceeds ``spatial_cap`` the positions are dropped and only
the total is propagated; the total is a GW process with law ``F_R`` whatever
the positions are, so global-survival bookkeeping stays exact while root
occupancy stops being recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dist import OffspringDistribution, geometric_from_rate
from .tree import TreeStore
from .walk import BadInput

DEFAULT_POP_CAP = 1_000_000
DEFAULT_SPATIAL_CAP = 10_000


class BrwPhase(str, Enum):
    SUBCRITICAL = "Subcritical"
    WEAK = "WeakSurvival"
    STRONG = "StrongSurvival"


@dataclass
class BrwState:
    generation: int
    particles: np.ndarray | None  # vertex id per particle, None once positions are dropped
    total: int
    capped: bool = False

    @classmethod
    def at_root(cls) -> "BrwState":
        return cls(0, np.zeros(1, dtype=np.int64), 1)

    @property
    def tracked(self) -> bool:
        return self.particles is not None

    @property
    def occupancy(self) -> dict[int, int]:
        if self.particles is None:
            raise ValueError("positions were dropped above the spatial cap")
        ids, counts = np.unique(self.particles, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def count_at(self, v: int) -> int:
        if self.particles is None:
            return -1
        return int(np.count_nonzero(self.particles == v))


def brw_step(
    state: BrwState,
    store: TreeStore,
    law: OffspringDistribution,
    rng: np.random.Generator,
    pop_cap: int = DEFAULT_POP_CAP,
    spatial_cap: int = DEFAULT_SPATIAL_CAP,
) -> BrwState:
    if pop_cap < 1:
        raise BadInput("pop_cap must be >= 1")
    gen = state.generation + 1
    if state.total == 0:
        return BrwState(gen, np.zeros(0, dtype=np.int64) if state.tracked else None, 0)
    if state.tracked:
        k = law.sample(rng, size=state.total)
        total = int(k.sum())
        if total > spatial_cap:
            return BrwState(gen, None, total, total > pop_cap)
        parents = np.repeat(state.particles, k)
        u = rng.random(total)
        particles = store.random_neighbors(parents, u)
        return BrwState(gen, particles, total, total > pop_cap)
    total = law.sample_sum(rng, state.total)
    return BrwState(gen, None, total, total > pop_cap)


@dataclass
class BrwTrajectory:
    totals: list[int]
    root_counts: list[int]  # N_n(root); -1 where positions were not tracked
    extinct: bool
    capped: bool
    positions_dropped_at: int | None = None
    parity_ok: bool = True

    @property
    def generations_survived(self) -> int:
        """Last generation with at least one particle."""
        return max(n for n, t in enumerate(self.totals) if t > 0)

    @property
    def root_returns(self) -> int:
        """Number of generations n >= 1 with N_n(root) >= 1."""
        return sum(1 for c in self.root_counts[1:] if c > 0)

    @property
    def last_root_generation(self) -> int:
        hits = [n for n, c in enumerate(self.root_counts) if c > 0]
        return hits[-1]


def run_brw(
    store: TreeStore,
    law: OffspringDistribution,
    horizon: int,
    rng: np.random.Generator,
    pop_cap: int = DEFAULT_POP_CAP,
    spatial_cap: int = DEFAULT_SPATIAL_CAP,
    check_parity: bool = False,
) -> BrwTrajectory:
    """Run one BRW from a single particle at the root.

    Stops at ``horizon``, at extinction, or as soon as the total exceeds
    ``pop_cap`` (the trajectory is then flagged ``capped``).
    """
    if horizon < 1:
        raise BadInput("horizon must be >= 1")
    state = BrwState.at_root()
    totals = [1]
    roots = [1]
    dropped = None
    parity_ok = True
    while state.generation < horizon:
        state = brw_step(state, store, law, rng, pop_cap, spatial_cap)
        totals.append(state.total)
        if state.tracked:
            roots.append(int(np.count_nonzero(state.particles == 0)))
            if check_parity and state.total:
                par = store.depths(state.particles) % 2
                parity_ok &= bool(np.all(par == state.generation % 2))
        else:
            roots.append(-1)
            if dropped is None:
                dropped = state.generation
        if state.total == 0 or state.capped:
            break
    return BrwTrajectory(totals, roots, state.total == 0, state.capped, dropped, parity_ok)


def weak_survival_threshold(h_min: int) -> float:
    """Upper end (h_min+1)/(2 sqrt(h_min)) of the BRW weak-survival window."""
    if h_min < 1 or int(h_min) != h_min:
        raise BadInput(f"h_min must be a positive integer, got {h_min}")
    return (h_min + 1) / (2.0 * math.sqrt(h_min))


def brw_phase(h_min: int, mu: float) -> BrwPhase:
    """Phase of the BRW with mean offspring ``mu`` on a GW tree with minimal offspring ``h_min``.

    Weak survival is ``1 < mu <= (h_min+1)/(2 sqrt(h_min))``, closed at the
    upper end because strong survival needs ``mu * r > 1`` strictly. For
    ``h_min = 1`` the window is empty.
    """
    if not mu > 0:
        raise BadInput("mu must be positive")
    thr = weak_survival_threshold(h_min)
    if mu <= 1.0:
        return BrwPhase.SUBCRITICAL
    if mu <= thr:
        return BrwPhase.WEAK
    return BrwPhase.STRONG


def continuous_brw_reduction(lam: float) -> OffspringDistribution:
    """Reproduction law of the embedded discrete BRW for birth rate ``lam``, death rate 1.

    A particle living an Exp(1) lifetime while giving birth at rate ``lam``
    leaves a geometric number of offspring with mean ``lam``, so the rate plays
    the role of the mean offspring number.
    """
    return geometric_from_rate(lam)
