"""Monte Carlo harness: batched trials, survival estimates, empirical critical values.

Trial ``i`` of a plan draws its tree and its process stream from
``(seed, i)`` only, so the per-trial records are identical for any worker
count. Survival is judged by finite-horizon proxies:

* global: alive at the horizon, or capped, or (CP) an infection crossed the depth cap;
* local: the root is occupied at some time in the last quarter of the horizon.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

from .brw import DEFAULT_POP_CAP, DEFAULT_SPATIAL_CAP, run_brw
from .cp import DEFAULT_DEPTH_CAP, run_cp_coupled
from .dist import OffspringDistribution, geometric_from_rate
from .rng import trial_streams
from .tree import TreeMode, new_tree

CP_MAX_INFECTED = 1_000
ZERO_THRESHOLD = 0.02
LOCAL_WINDOW = 0.75


class Mode(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


class BracketNotSeparating(ValueError):
    pass


PROXY_TEXT = {
    ("brw", Mode.GLOBAL): "alive at horizon or population cap exceeded",
    ("brw", Mode.LOCAL): "root occupied in some generation of the last quarter of the horizon",
    ("cp", Mode.GLOBAL): "alive at t_max, or max_infected exceeded, or infection crossed the depth cap",
    ("cp", Mode.LOCAL): "root infected at some time in [0.75 t_max, t_max]",
}


@dataclass
class TrialPlan:
    """Everything needed to reproduce a batch of trials.

    ``param`` is the CP infection rate or the BRW mean offspring number. For
    BRW, ``reproduction`` overrides the default geometric law with mean
    ``param``. For CP, ``lambdas`` (ascending) requests a coupled run and
    ``param`` is ignored.
    """

    process: str
    tree_law: OffspringDistribution
    param: float = 1.0
    trials: int = 1000
    seed: int = 0
    tree_mode: TreeMode = TreeMode.AGW
    horizon: int = 100
    t_max: float = 30.0
    pop_cap: int = DEFAULT_POP_CAP
    spatial_cap: int = DEFAULT_SPATIAL_CAP
    max_infected: int = CP_MAX_INFECTED
    depth_cap: int = DEFAULT_DEPTH_CAP
    lambdas: tuple | None = None
    reproduction: OffspringDistribution | None = None
    workers: int = 1

    def __post_init__(self):
        if self.process not in ("brw", "cp"):
            raise ValueError(f"unknown process {self.process!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.tree_mode = TreeMode(self.tree_mode)

    @property
    def rates(self) -> list[float]:
        if self.process == "cp" and self.lambdas:
            return [float(x) for x in self.lambdas]
        return [float(self.param)]

    def reproduction_law(self) -> OffspringDistribution:
        return self.reproduction if self.reproduction is not None else geometric_from_rate(self.param)


@dataclass
class SurvivalEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_success: int
    proxy: str
    param: float | None = None

    def to_dict(self) -> dict:
        return {
            "lambda": self.param,
            "p_hat": self.p_hat,
            "ci": [self.ci_low, self.ci_high],
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "proxy": self.proxy,
        }


def wilson_interval(successes: int, n: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(successes, n, alpha=alpha, method="wilson")
    p = successes / n
    # clamp: the score formula can overshoot [0, 1] by rounding
    return max(0.0, min(float(lo), p)), min(1.0, max(float(hi), p))


def _brw_record(plan: TrialPlan, i: int, law) -> dict:
    tree_seed, rng = trial_streams(plan.seed, i)
    store = new_tree(plan.tree_law, plan.tree_mode, tree_seed)
    traj = run_brw(store, law, plan.horizon, rng, plan.pop_cap, plan.spatial_cap)
    window = math.ceil(LOCAL_WINDOW * plan.horizon)
    return {
        "trial": i,
        "seed": plan.seed,
        "mu": float(plan.param),
        "extinct": int(traj.extinct),
        "capped": int(traj.capped),
        "generations_survived": traj.generations_survived,
        "root_returns": traj.root_returns,
        "last_root_generation": traj.last_root_generation,
        "positions_dropped_at": -1 if traj.positions_dropped_at is None else traj.positions_dropped_at,
        "global": int(traj.capped or not traj.extinct),
        "local": int(traj.last_root_generation >= window),
    }


def _cp_records(plan: TrialPlan, i: int) -> list[dict]:
    tree_seed, rng = trial_streams(plan.seed, i)
    store = new_tree(plan.tree_law, plan.tree_mode, tree_seed)
    sums = run_cp_coupled(store, plan.rates, plan.t_max, rng, plan.max_infected, plan.depth_cap)
    rows = []
    for s in sums:
        row = {"trial": i, "seed": plan.seed}
        row.update(s.as_row())
        row["capped"] = int(s.capped)
        row["last_root_time"] = round(s.last_root_time, 9)
        row["global"] = int(s.capped or s.frontier_exit or not s.died_out)
        row["local"] = int(s.last_root_time >= LOCAL_WINDOW * plan.t_max)
        rows.append(row)
    return rows


def _run_chunk(args) -> list:
    plan, indices = args
    if plan.process == "brw":
        law = plan.reproduction_law()
        return [[_brw_record(plan, i, law)] for i in indices]
    return [_cp_records(plan, i) for i in indices]


def resolve_workers(workers: int | None) -> int:
    env = os.environ.get("GWCP_THREADS")
    if env:
        return max(1, int(env))
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def run_trials(plan: TrialPlan) -> list[list[dict]]:
    """Per-trial records in trial order; each entry holds one row per rate."""
    workers = resolve_workers(plan.workers)
    idx = list(range(plan.trials))
    if workers == 1:
        return _run_chunk((plan, idx))
    size = max(1, math.ceil(plan.trials / (4 * workers)))
    chunks = [(plan, idx[k : k + size]) for k in range(0, plan.trials, size)]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_run_chunk, chunks):
            out.extend(part)
    return out


def _estimate(rows, mode: Mode, proxy: str, param) -> SurvivalEstimate:
    n = len(rows)
    k = sum(r[mode.value] for r in rows)
    lo, hi = wilson_interval(k, n)
    return SurvivalEstimate(k / n, lo, hi, n, k, proxy, param)


def estimate_survival(plan: TrialPlan, mode=Mode.GLOBAL, records=None) -> SurvivalEstimate:
    """Survival-proxy estimate with a 95% Wilson interval (first rate of a coupled plan)."""
    return estimate_survival_curve(plan, mode, records)[0]


def estimate_survival_curve(plan: TrialPlan, mode=Mode.GLOBAL, records=None) -> list[SurvivalEstimate]:
    """One estimate per rate of the plan, all from the same (coupled) trials."""
    mode = Mode(mode)
    records = run_trials(plan) if records is None else records
    proxy = PROXY_TEXT[(plan.process, mode)]
    return [
        _estimate([trial[j] for trial in records], mode, proxy, rate)
        for j, rate in enumerate(plan.rates)
    ]


@dataclass
class CriticalInterval:
    low: float
    high: float
    probes: list = field(default_factory=list)
    mode: str = "global"
    threshold: float = ZERO_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "interval": [self.low, self.high],
            "mode": self.mode,
            "threshold": self.threshold,
            "probes": self.probes,
        }


def bisect_critical(
    plan: TrialPlan,
    mode=Mode.GLOBAL,
    bracket: tuple[float, float] = (0.8, 2.5),
    tol: float = 0.1,
    trials_per_probe: int | None = None,
    threshold: float = ZERO_THRESHOLD,
) -> CriticalInterval:
    """Bisect the rate at which the survival proxy stops being indistinguishable from zero.

    A probe counts as "zero" when the lower Wilson bound is <= ``threshold``.
    Every probe reuses the plan's seed (common random numbers).
    """
    mode = Mode(mode)
    lo, hi = float(bracket[0]), float(bracket[1])
    trials = trials_per_probe or plan.trials
    probes = []

    def probe(x: float) -> SurvivalEstimate:
        p = replace(plan, param=x, lambdas=None, trials=trials)
        est = estimate_survival(p, mode)
        probes.append(est.to_dict() | {"lambda": x})
        return est

    if not hi > lo:
        raise BracketNotSeparating(f"degenerate bracket [{lo}, {hi}]")
    e_lo, e_hi = probe(lo), probe(hi)
    if not (e_lo.ci_low <= threshold < e_hi.ci_low):
        raise BracketNotSeparating(
            f"bracket ends not separated: ci_low {e_lo.ci_low:.4f} at {lo}, {e_hi.ci_low:.4f} at {hi}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid).ci_low > threshold:
            hi = mid
        else:
            lo = mid
    return CriticalInterval(lo, hi, probes, mode.value, threshold)
