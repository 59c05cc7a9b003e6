"""Contact process with per-vertex total birth rate and exclusion.

Every infected vertex recovers at rate 1 and fires births at total rate
``lam``; each birth goes to a uniformly chosen neighbour and is suppressed if
that neighbour is already infected.

Coupling across several rates uses a thinned graphical representation with
``Lam = max(lambdas)``: marks are read only at vertices infected in the
largest process (the union, by nestedness), a birth mark carries a label
``u ~ U[0, 1)`` and is active at level ``lam`` iff ``u * Lam < lam``. A level
that stops evolving (cap or frontier exit) is frozen and the remaining levels
continue under the next largest active rate, which again thins correctly
because future marks are fresh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BadCertificate, Certificate
from .rng import UniformBuffer
from .tree import TreeStore

DEFAULT_DEPTH_CAP = 60
DEFAULT_MAX_INFECTED = 10_000


class CouplingViolation(RuntimeError):
    pass


@dataclass
class CpSummary:
    lam: float
    died_out: bool = False
    t_end: float = 0.0
    max_infected: int = 1
    final_size: int = 1
    root_reinfections: int = 0
    last_root_time: float = 0.0
    frontier_exit: bool = False
    capped: bool = False
    births: int = 0
    suppressed_births: int = 0
    deaths: int = 0
    root_infection_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (time, sorted tuple of infected ids)

    def as_row(self) -> dict:
        return {
            "lambda": self.lam,
            "died_out": int(self.died_out),
            "t_end": round(self.t_end, 9),
            "max_infected": self.max_infected,
            "root_reinfections": self.root_reinfections,
            "frontier_exit": int(self.frontier_exit),
            "suppressed_births": self.suppressed_births,
        }


@dataclass
class _Level:
    lam: float
    infected: set
    summary: CpSummary
    active: bool = True


def run_cp_coupled(
    store: TreeStore,
    lambdas,
    t_max: float,
    rng: np.random.Generator,
    max_infected: int = DEFAULT_MAX_INFECTED,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    snapshot_times=None,
    check_full: bool = False,
    trace: list | None = None,
) -> list[CpSummary]:
    """Run contact processes at every rate in ``lambdas`` on one shared event stream.

    Starts from the single infected root. Nestedness of the infected sets is
    asserted after every event on the vertex that changed (which, by induction,
    is exact); ``check_full=True`` also compares whole sets. If ``trace`` is
    a list, every mark is appended to it as ``(t, kind, v, w, label)`` with
    kind ``"d"`` (recovery; ``w`` and ``label`` are -1) or ``"b"`` (birth
    towards ``w``, active at every rate above ``label``).
    """
    lambdas = [float(x) for x in lambdas]
    if not lambdas or any(not x > 0 for x in lambdas):
        raise ValueError("rates must be positive")
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("rates must be sorted ascending")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    snaps = sorted(float(s) for s in snapshot_times) if snapshot_times is not None else []
    snap_i = 0

    levels = [_Level(lam, {0}, CpSummary(lam)) for lam in lambdas]
    m = len(levels)
    top = m - 1
    lam_top = lambdas[top]
    members = [0]
    pos = {0: 0}

    ub = UniformBuffer(rng)
    nxt = ub.next
    first = store._first
    parent_arr = store._parent
    depth_arr = store._depth
    nchild = store._nchild
    t = 0.0

    def freeze(i: int, when: float) -> None:
        lv = levels[i]
        lv.active = False
        lv.summary.t_end = when

    def retop() -> bool:
        """Move the union to the largest active level; False if none remain."""
        nonlocal top, lam_top, members, pos
        while top >= 0 and not levels[top].active:
            top -= 1
        if top < 0:
            return False
        lam_top = lambdas[top]
        members = sorted(levels[top].infected)
        pos = {v: k for k, v in enumerate(members)}
        return True

    def check_vertex(x: int) -> None:
        seen = False
        for lv in levels:
            if not lv.active:
                continue
            inside = x in lv.infected
            if seen and not inside:
                raise CouplingViolation(f"vertex {x} breaks nestedness at t={t}")
            seen = seen or inside

    def check_all() -> None:
        act = [lv for lv in levels if lv.active]
        for a, b in zip(act, act[1:]):
            if not a.infected <= b.infected:
                raise CouplingViolation(f"infected sets not nested at t={t}")

    while True:
        n = len(members)
        rate = n * (1.0 + lam_top)
        t += -math.log(1.0 - nxt()) / rate
        while snap_i < len(snaps) and snaps[snap_i] <= t and snaps[snap_i] <= t_max:
            for lv in levels:
                lv.summary.snapshots.append((snaps[snap_i], tuple(sorted(lv.infected))))
            snap_i += 1
        if t >= t_max:
            break
        v = members[int(nxt() * n)]
        u = nxt() * (1.0 + lam_top)
        if u < 1.0:
            # recovery mark at v
            if trace is not None:
                trace.append((t, "d", v, -1, -1.0))
            for i in range(top + 1):
                lv = levels[i]
                if lv.active and v in lv.infected:
                    lv.infected.discard(v)
                    s = lv.summary
                    s.deaths += 1
                    if v == 0:
                        s.last_root_time = t
                    if not lv.infected:
                        s.died_out = True
                        freeze(i, t)
            k = pos.pop(v)
            last = members.pop()
            if last != v:
                members[k] = last
                pos[last] = k
            if not members:
                break
            check_vertex(v)
        else:
            label = u - 1.0  # uniform on [0, lam_top)
            if nchild[v] < 0:
                store.explore([v])
                # exploring may reallocate the store's arrays
                first = store._first
                parent_arr = store._parent
                depth_arr = store._depth
                nchild = store._nchild
            nc = int(nchild[v])
            deg = nc + (v != 0)
            j = int(nxt() * deg)
            if j >= deg:
                j = deg - 1
            if v == 0:
                w = int(first[0]) + j
            elif j == 0:
                w = int(parent_arr[v])
            else:
                w = int(first[v]) + j - 1
            w_depth = int(depth_arr[w])
            if trace is not None:
                trace.append((t, "b", v, w, label))
            changed = False
            for i in range(top + 1):
                lv = levels[i]
                if not lv.active or label >= lv.lam or v not in lv.infected:
                    continue
                s = lv.summary
                s.births += 1
                if w in lv.infected:
                    s.suppressed_births += 1
                elif w_depth > depth_cap:
                    s.frontier_exit = True
                    freeze(i, t)
                else:
                    lv.infected.add(w)
                    changed = True
                    size = len(lv.infected)
                    if size > s.max_infected:
                        s.max_infected = size
                    if w == 0:
                        s.root_reinfections += 1
                        s.root_infection_times.append(t)
                    if size > max_infected:
                        s.capped = True
                        freeze(i, t)
            if not levels[top].active:
                if not retop():
                    break
            elif changed and w not in pos:
                pos[w] = len(members)
                members.append(w)
            check_vertex(w)
        if check_full:
            check_all()

    while snap_i < len(snaps) and snaps[snap_i] <= t_max:
        for lv in levels:
            lv.summary.snapshots.append((snaps[snap_i], tuple(sorted(lv.infected))))
        snap_i += 1
    for lv in levels:
        s = lv.summary
        s.final_size = len(lv.infected)
        if lv.active:
            lv.active = False
            s.t_end = t_max if not s.died_out else s.t_end
        if 0 in lv.infected:
            s.last_root_time = s.t_end
    return [lv.summary for lv in levels]


def run_cp(
    store: TreeStore,
    lam: float,
    t_max: float,
    rng: np.random.Generator,
    max_infected: int = DEFAULT_MAX_INFECTED,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    snapshot_times=None,
) -> CpSummary:
    """Single contact process from the infected root; see :func:`run_cp_coupled`."""
    return run_cp_coupled(store, [lam], t_max, rng, max_infected, depth_cap, snapshot_times)[0]


@dataclass
class LocalStats:
    last_root_time: np.ndarray
    epochs: np.ndarray
    t_max: float

    @property
    def mean_epochs(self) -> float:
        return float(self.epochs.mean())

    def occupied_after(self, frac: float = 0.75) -> np.ndarray:
        """Whether the root was infected at some time in ``[frac * t_max, t_max]``."""
        return self.last_root_time >= frac * self.t_max


def local_survival_stat(summaries, t_max: float) -> LocalStats:
    summaries = list(summaries)
    return LocalStats(
        np.array([s.last_root_time for s in summaries], dtype=float),
        np.array([s.root_reinfections for s in summaries], dtype=np.int64),
        float(t_max),
    )


def weight(store: TreeStore, infected, cert: Certificate) -> float:
    """``sum_v r**depth(v) * (1 - b * [parent of v infected])`` over infected ``v``.

    The root's parent is the top of the extra AGW subtree; on a plain GW tree
    the root has no parent.
    """
    if not (0 < cert.r < 1 and 0 < cert.b < 1):
        raise BadCertificate("weights need 0 < r < 1 and 0 < b < 1")
    inf = set(infected)
    aug = store.augment_child() if 0 in inf else None
    total = 0.0
    for v in inf:
        if v == 0:
            par_inf = aug is not None and aug in inf
        else:
            par_inf = store.parent(v) in inf
        total += cert.r ** store.depth(v) * (1.0 - cert.b * par_inf)
    return total


def weight_process(store: TreeStore, summary: CpSummary, cert: Certificate) -> np.ndarray:
    """Weight functional at each recorded snapshot of ``summary``.

    Snapshots after the process died out have weight 0.
    """
    return np.array([weight(store, snap, cert) for _, snap in summary.snapshots])


@dataclass
class PairedRun:
    max_cp: int
    max_brw: int
    events: int
    violations: int
    extinct_cp: bool
    extinct_brw: bool


def run_cp_brw_paired(
    store: TreeStore,
    lam: float,
    t_max: float,
    rng: np.random.Generator,
    max_particles: int = 5_000,
) -> PairedRun:
    """Continuous-time BRW and CP driven by the same marks.

    Every CP particle is a flagged BRW particle: a birth mark on a flagged
    particle produces a flagged child unless the target is CP-occupied, in
    which case the child lives only in the BRW. Each event checks that the CP
    count never exceeds the BRW count and that flags and occupancy agree.
    """
    where = [0]
    flag = [True]
    cp_occ = {0}
    ub = UniformBuffer(rng)
    nxt = ub.next
    t = 0.0
    events = 0
    violations = 0
    max_cp = max_brw = 1
    n_flag = 1
    while where:
        n = len(where)
        t += -math.log(1.0 - nxt()) / (n * (1.0 + lam))
        if t >= t_max or n > max_particles:
            break
        i = int(nxt() * n)
        v = where[i]
        if nxt() * (1.0 + lam) < 1.0:
            if flag[i]:
                cp_occ.discard(v)
                n_flag -= 1
            where[i] = where[-1]
            flag[i] = flag[-1]
            where.pop()
            flag.pop()
        else:
            deg = store.degree(v)
            w = store.neighbor(v, min(int(nxt() * deg), deg - 1))
            f = flag[i] and w not in cp_occ
            where.append(w)
            flag.append(f)
            if f:
                cp_occ.add(w)
                n_flag += 1
        events += 1
        if len(cp_occ) > len(where) or n_flag != len(cp_occ):
            violations += 1
        max_cp = max(max_cp, len(cp_occ))
        max_brw = max(max_brw, len(where))
    return PairedRun(max_cp, max_brw, events, violations, not cp_occ, not where)
