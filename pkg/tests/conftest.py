import math

import numpy as np
import pytest

from gwcp.bounds import Certificate
from gwcp.dist import degenerate


def within_sigma(observed: float, expected: float, sd: float, k: float) -> bool:
    return abs(observed - expected) <= k * sd + 1e-15


def assert_pmf_close(draws, support, probs, k=4.0):
    """Per-atom k-sigma check of an empirical pmf."""
    draws = np.asarray(draws)
    n = draws.size
    for x, p in zip(support, probs):
        freq = np.count_nonzero(draws == x) / n
        sd = math.sqrt(p * (1 - p) / n)
        assert within_sigma(freq, p, sd, k), (x, freq, p, sd)


@pytest.fixture
def regular5():
    """Tree law whose AGW tree is the 5-regular tree."""
    return degenerate(4)


@pytest.fixture
def cert_h4():
    return Certificate(4, 0.3, 0.437, 0.256, None, 1e-4)


@pytest.fixture
def cert_h5():
    return Certificate(5, 0.265, 0.397, 0.264, None, 1e-4)


def replay_levels(store, trace, lambdas, max_infected, depth_cap):
    """Re-derive every level of a coupled CP run from its recorded marks.

    Returns one dict per rate with the counts and final infected set implied
    by the exclusion rule, independently of the engine's bookkeeping.
    """
    out = []
    for lam in lambdas:
        inf = {0}
        r = dict(births=0, suppressed=0, deaths=0, frontier=False, capped=False)
        for _, kind, v, w, label in trace:
            if kind == "d":
                if v in inf:
                    inf.discard(v)
                    r["deaths"] += 1
                    if not inf:
                        break
                continue
            if label >= lam or v not in inf:
                continue
            r["births"] += 1
            if w in inf:
                r["suppressed"] += 1
            elif store.depth(w) > depth_cap:
                r["frontier"] = True
                break
            else:
                inf.add(w)
                if len(inf) > max_infected:
                    r["capped"] = True
                    break
        r["infected"] = inf
        out.append(r)
    return out
