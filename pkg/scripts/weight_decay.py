"""Mean of the certificate weight functional along CP paths.

For a feasible certificate at rate lam = nu (h+1) the weighted infected-set
functional is a supermartingale, so its mean should decay in time. Prints
time, mean weight and its standard error as CSV.

    python3 scripts/weight_decay.py --trials 10000
"""

import argparse
import math
from dataclasses import asdict, dataclass

import numpy as np

from gwcp.bounds import Certificate, check_certificate
from gwcp.cp import run_cp, weight_process
from gwcp.dist import degenerate
from gwcp.rng import trial_streams
from gwcp.tree import new_tree


@dataclass
class WeightConfig:
    hmin: int = 4
    nu: float = 0.3
    r: float = 0.437
    b: float = 0.256
    trials: int = 10_000
    t_max: float = 4.0
    steps: int = 8
    seed: int = 0


def run(cfg: WeightConfig) -> tuple[np.ndarray, np.ndarray]:
    cert = Certificate(cfg.hmin, cfg.nu, cfg.r, cfg.b)
    if not check_certificate(cert).feasible:
        raise SystemExit("certificate is not feasible")
    times = np.linspace(0.0, cfg.t_max, cfg.steps + 1)
    law = degenerate(cfg.hmin)
    w = np.empty((cfg.trials, times.size))
    for i in range(cfg.trials):
        s, rng = trial_streams(cfg.seed, i)
        tree = new_tree(law, seed=s)
        w[i] = weight_process(tree, run_cp(tree, cert.lam, cfg.t_max, rng, snapshot_times=times), cert)
    return times, w


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, val in asdict(WeightConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(val), default=val)
    times, w = run(WeightConfig(**vars(ap.parse_args())))
    print("t,mean_weight,se")
    for j, t in enumerate(times):
        print(f"{t:.4f},{w[:, j].mean():.6f},{w[:, j].std(ddof=1) / math.sqrt(len(w)):.6f}")


if __name__ == "__main__":
    main()
