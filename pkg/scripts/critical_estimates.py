"""Empirical critical rates of the contact process next to the certified bounds.

Bisects the global and local finite-horizon survival proxies on the regular
tree with branching h and prints them alongside the certified interval
lambda_g <= upper < lower <= lambda_l. Intervals are proxy-based consistency
checks, not estimates of the true thresholds.

    python3 scripts/critical_estimates.py --hmin 4 --trials 1000
"""

import argparse
import json
from dataclasses import asdict, dataclass

from gwcp.bounds import bound_report
from gwcp.dist import degenerate
from gwcp.mc import BracketNotSeparating, Mode, TrialPlan, bisect_critical


@dataclass
class CriticalConfig:
    hmin: int = 4
    trials: int = 1000
    t_max: float = 30.0
    low: float = 0.8
    high: float = 3.0
    tol: float = 0.05
    seed: int = 0
    workers: int = 1


def run(cfg: CriticalConfig) -> dict:
    law = degenerate(cfg.hmin)
    rep = bound_report(law)
    plan = TrialPlan("cp", law, trials=cfg.trials, t_max=cfg.t_max, seed=cfg.seed, workers=cfg.workers)
    out = {"config": asdict(cfg), "certified": {"lambda_g_upper": rep.lambda_g_upper, "lambda_l_lower": rep.lambda_l_lower}}
    for mode in Mode:
        try:
            res = bisect_critical(plan, mode, (cfg.low, cfg.high), cfg.tol)
            out[mode.value] = res.to_dict()
        except BracketNotSeparating as exc:
            out[mode.value] = {"error": str(exc)}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, val in asdict(CriticalConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(val), default=val)
    print(json.dumps(run(CriticalConfig(**vars(ap.parse_args()))), indent=2))


if __name__ == "__main__":
    main()
