"""Offspring laws on the non-negative integers.

One type serves both as a tree law (children per vertex, ``p_0 = 0`` enforced)
and as a reproduction law for branching random walks, which may put mass on
zero. The ``allows_zero`` flag records which role a law was built for.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

NORM_TOL = 1e-12
GEOMETRIC_TAIL = 1e-12


class DistributionError(ValueError):
    pass


class ZeroMass(DistributionError):
    """A tree law was given mass at zero offspring."""


class NotNormalized(DistributionError):
    pass


class EmptySupport(DistributionError):
    pass


class NonPositiveRate(DistributionError):
    pass


class OutOfDomain(DistributionError):
    pass


@dataclass(frozen=True, eq=False)
class OffspringDistribution:
    """Finite-support probability mass function ``k -> p_k``.

    Use the constructors :func:`from_map`, :func:`degenerate` or
    :func:`geometric_from_rate` rather than building this directly.
    """

    support: np.ndarray
    probs: np.ndarray
    allows_zero: bool = False
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    @property
    def h_min(self) -> int:
        return int(self.support[0])

    @property
    def h_max(self) -> int:
        return int(self.support[-1])

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return float(np.dot((self.support - m) ** 2, self.probs))

    @property
    def p0(self) -> float:
        return float(self.probs[0]) if self.support[0] == 0 else 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.support, self.probs)}

    def expect(self, fn) -> float:
        """Exact expectation of ``fn(k)`` over the support; ``fn`` must accept an int array."""
        return float(np.dot(self.probs, fn(self.support.astype(np.float64))))

    def pgf(self, s):
        s_arr = np.asarray(s, dtype=np.float64)
        if np.any(s_arr < 0.0) or np.any(s_arr > 1.0) or np.any(np.isnan(s_arr)):
            raise OutOfDomain(f"pgf argument outside [0, 1]: {s}")
        vals = np.power.outer(s_arr, self.support.astype(np.float64)) @ self.probs
        return float(vals) if vals.ndim == 0 else vals

    def ppf(self, u):
        """Inverse CDF: map uniforms in [0, 1) to offspring counts."""
        idx = np.searchsorted(self._cdf, u, side="right")
        return self.support[np.minimum(idx, len(self.support) - 1)]

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        k = self.ppf(u)
        return int(k) if size is None else k

    def sample_sum(self, rng: np.random.Generator, n: int) -> int:
        """Sum of ``n`` independent draws, O(support size) for any ``n``."""
        if n == 0:
            return 0
        counts = rng.multinomial(n, self.probs)
        return int(np.dot(counts, self.support))

    def extinction_probability(self, tol: float = 1e-12, max_iter: int = 10_000_000) -> float:
        """Smallest fixed point of the pgf on [0, 1]."""
        if self.mean <= 1.0 + NORM_TOL:
            return 1.0
        s = 0.0
        for _ in range(max_iter):
            nxt = float(np.dot(self.probs, s ** self.support))
            if abs(nxt - s) < tol:
                return nxt
            s = nxt
        return s

    def to_descriptor(self) -> dict:
        if self.descriptor:
            return dict(self.descriptor)
        return {"type": "explicit", "p": {str(k): p for k, p in self.as_dict().items()}}

    def __repr__(self):
        return f"OffspringDistribution({self.to_descriptor()})"


def _build(items: Mapping[int, float], allows_zero: bool, descriptor: dict) -> OffspringDistribution:
    if not items:
        raise EmptySupport("empty offspring law")
    keys = sorted(items)
    probs = np.array([float(items[k]) for k in keys])
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise NotNormalized("negative or non-finite probability")
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"probabilities sum to {total!r}, not 1")
    keep = probs > 0
    if not keep.any():
        raise EmptySupport("no atom carries positive mass")
    support = np.array(keys, dtype=np.int64)[keep]
    probs = probs[keep] / total
    return OffspringDistribution(support, probs, allows_zero, descriptor)


def from_map(probs: Mapping) -> OffspringDistribution:
    """Tree law from ``{k: p_k}``; keys must be >= 1 (string keys accepted)."""
    items = {}
    for k, p in probs.items():
        k = int(k)
        if k < 0:
            raise DistributionError(f"negative offspring count {k}")
        if k == 0:
            raise ZeroMass("tree laws must have p_0 = 0")
        items[k] = items.get(k, 0.0) + float(p)
    return _build(items, False, {})


def reproduction_from_map(probs: Mapping) -> OffspringDistribution:
    """Reproduction law from ``{k: p_k}``; mass at zero is allowed."""
    items = {}
    for k, p in probs.items():
        k = int(k)
        if k < 0:
            raise DistributionError(f"negative offspring count {k}")
        items[k] = items.get(k, 0.0) + float(p)
    return _build(items, True, {})


def degenerate(d: int) -> OffspringDistribution:
    d = int(d)
    if d < 1:
        raise ZeroMass("degenerate tree law needs d >= 1")
    return OffspringDistribution(
        np.array([d], dtype=np.int64), np.array([1.0]), False, {"type": "degenerate", "d": d}
    )


def geometric_from_rate(lam: float) -> OffspringDistribution:
    """Geometric law on {0, 1, ...} with mean ``lam``.

    ``p_k = (lam / (1 + lam))**k / (1 + lam)``, cut where the remaining tail
    mass drops below 1e-12 and renormalised. Usable only as a reproduction law.
    """
    if not lam > 0:
        raise NonPositiveRate(f"rate must be positive, got {lam}")
    rho = lam / (1.0 + lam)
    # tail mass beyond K is rho**(K+1)
    kmax = max(1, math.ceil(math.log(GEOMETRIC_TAIL) / math.log(rho)) - 1) if rho > 0 else 1
    while rho ** (kmax + 1) >= GEOMETRIC_TAIL:
        kmax += 1
    k = np.arange(kmax + 1, dtype=np.int64)
    p = rho ** k.astype(np.float64) / (1.0 + lam)
    p /= p.sum()
    return OffspringDistribution(k, p, True, {"type": "geometric", "mean": float(lam)})


def from_descriptor(desc: Mapping) -> OffspringDistribution:
    """Build a law from its JSON descriptor.

    ``{"type": "explicit", "p": {...}}`` (``"probs"`` also accepted),
    ``{"type": "geometric", "mean": m}``, ``{"type": "degenerate", "d": d}``,
    or a bare ``{k: p_k}`` map. Explicit maps with a zero key are read as
    reproduction laws.
    """
    if not isinstance(desc, Mapping):
        raise DistributionError("distribution descriptor must be a JSON object")
    kind = desc.get("type")
    try:
        if kind is None:
            p = desc
        elif kind == "explicit":
            p = desc["p"] if "p" in desc else desc["probs"]
        elif kind == "geometric":
            return geometric_from_rate(float(desc["mean"]))
        elif kind == "degenerate":
            return degenerate(int(desc["d"]))
        else:
            raise DistributionError(f"unknown distribution type {kind!r}")
        if any(int(k) == 0 for k in p):
            return reproduction_from_map(p)
        return from_map(p)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DistributionError):
            raise
        raise DistributionError(f"malformed distribution descriptor: {exc!r}") from exc


def load_descriptor(path) -> OffspringDistribution:
    with open(Path(path), encoding="utf-8") as fh:
        return from_descriptor(json.load(fh))


def require_tree_law(law: OffspringDistribution) -> None:
    if law.allows_zero or law.support[0] == 0:
        raise ZeroMass("tree law must have p_0 = 0")
