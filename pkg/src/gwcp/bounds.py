"""Certified bounds on the critical values of the contact process.

Upper bounds on the global-survival threshold come from an embedded block
branching process; lower bounds on the local-survival threshold come from BRW
domination and from a weighted-supermartingale certificate ``(nu, r, b, c, eps)``
whose implied rate is ``nu * (h_min + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dist import OffspringDistribution, require_tree_law
from .walk import BadInput


class BadCertificate(ValueError):
    """Certificate parameters violate 0<r<1, 0<b<1, b*r<=c, eps>0."""


DEFAULT_EPS = 1e-4
BISECT_BRACKET = (0.01, 100.0)
BISECT_TOL = 1e-4

SIMPLE_UPPER_NOTE = (
    "(h_min+1)/(h_min-1); the printed statement has denominator d_{min-1}, "
    "read as h_min-1 from the value plugged in its proof"
)


# -- upper bounds on lambda_g ---------------------------------------------


def f_hmin(x, lam: float, h_min: int):
    """Per-level growth factor of the block construction.

    ``lam*x/(lam+x+1) / (1 - lam/(lam+x+1) / (2 + lam/(h_min+1)))``.
    Accepts scalar or array ``x``.
    """
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa <= 0) or not lam > 0 or h_min < 1:
        raise BadInput("need x > 0, lam > 0, h_min >= 1")
    a = lam / (lam + xa + 1.0)
    val = lam * xa / (lam + xa + 1.0) / (1.0 - a / (2.0 + lam / (h_min + 1.0)))
    return float(val) if val.ndim == 0 else val


def expected_f(law: OffspringDistribution, lam: float) -> float:
    """``E_X f_{h_min}(X, lam)`` as an exact finite sum."""
    return float(np.dot(law.probs, f_hmin(law.support, lam, law.h_min)))


def expected_ratio(law: OffspringDistribution, lam: float) -> float:
    """``E_X lam X / (lam + X + 1)``."""
    x = law.support.astype(np.float64)
    return float(np.dot(law.probs, lam * x / (lam + x + 1.0)))


def lambda_g_upper_refined(
    law: OffspringDistribution,
    bracket: tuple[float, float] = BISECT_BRACKET,
    tol: float = BISECT_TOL,
) -> float:
    """Smallest rate (to ``tol``) with ``E_X f_{h_min}(X, lam) > 1``.

    Returns the upper end of the final bisection bracket, a rate at which the
    condition holds, or ``inf`` when it fails across the whole bracket.
    """
    require_tree_law(law)
    lo, hi = bracket
    if expected_f(law, hi) <= 1.0:
        return math.inf
    if expected_f(law, lo) > 1.0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if expected_f(law, mid) > 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def lambda_g_upper_simple(h_min: int) -> float:
    if h_min < 2:
        raise BadInput("the simple upper bound needs h_min >= 2")
    return (h_min + 1) / (h_min - 1)


@dataclass(frozen=True)
class BlockExpectation:
    growth: float  # E_X f_{h_min}(X, lam)
    last_level: float  # E_X lam X / (lam + X + 1)
    n: int
    value: float


def block_expectation(law: OffspringDistribution, lam: float, n: int) -> BlockExpectation:
    """Lower bound ``I**n * II`` on the mean offspring of the (n+1)-level block process."""
    if n < 1:
        raise BadInput("block depth n must be >= 1")
    i1 = expected_f(law, lam)
    i2 = expected_ratio(law, lam)
    return BlockExpectation(i1, i2, n, i1**n * i2)


def smallest_block_depth(law: OffspringDistribution, lam: float):
    """Smallest ``n >= 1`` with ``I**n * II > 1``, or ``None`` if ``I <= 1``."""
    be = block_expectation(law, lam, 1)
    if be.value > 1.0:
        return 1
    if be.growth <= 1.0:
        return None
    n = max(1, math.ceil(-math.log(be.last_level) / math.log(be.growth)))
    while be.growth**n * be.last_level <= 1.0:
        n += 1
    return n


# -- lower bounds on lambda_l ---------------------------------------------


def lambda_l_lower_brw(h_min: int) -> float:
    """``1 / r = (h_min+1)/(2 sqrt(h_min))``; the CP local threshold lies strictly above it."""
    if h_min < 1 or int(h_min) != h_min:
        raise BadInput(f"h_min must be a positive integer, got {h_min}")
    return (h_min + 1) / (2.0 * math.sqrt(h_min))


@dataclass(frozen=True)
class Certificate:
    """Parameters of the weighted supermartingale; ``c=None`` means ``c = b*r``."""

    h_min: int
    nu: float
    r: float
    b: float
    c: float | None = None
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", self.b * self.r)

    @property
    def lam(self) -> float:
        return self.nu * (self.h_min + 1)

    def validate(self) -> None:
        if self.h_min < 1:
            raise BadCertificate("h_min must be >= 1")
        if not (0 < self.r < 1):
            raise BadCertificate(f"r={self.r} not in (0, 1)")
        if not (0 < self.b < 1):
            raise BadCertificate(f"b={self.b} not in (0, 1)")
        if not self.b * self.r <= self.c:
            raise BadCertificate(f"need b*r <= c, got b*r={self.b * self.r}, c={self.c}")
        if not self.eps > 0:
            raise BadCertificate("eps must be positive")
        if not self.nu > 0:
            raise BadCertificate("nu must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = self.lam
        return d


@dataclass(frozen=True)
class CertificateCheck:
    feasible: bool
    lhs1: float
    lhs2: float
    slack1: float
    slack2: float


def certificate_lhs(cert: Certificate) -> tuple[float, float]:
    h, nu, r, b, c = cert.h_min, cert.nu, cert.r, cert.b, cert.c
    lhs1 = nu * (1.0 / r - b + h * r * (1.0 - b))
    lhs2 = b + c / r + (h + 1) * nu * r * (1.0 - b)
    return lhs1, lhs2


def check_certificate(cert: Certificate) -> CertificateCheck:
    """Evaluate the two reduced inequalities; feasible iff both LHS < 1 - eps."""
    cert.validate()
    lhs1, lhs2 = certificate_lhs(cert)
    bound = 1.0 - cert.eps
    s1, s2 = bound - lhs1, bound - lhs2
    return CertificateCheck(s1 > 0 and s2 > 0, lhs1, lhs2, s1, s2)


def certificate_full_slacks(cert: Certificate, n_v_max: int = 10_000) -> np.ndarray:
    """Slack ``(1 - eps) - LHS`` of the four unreduced inequalities for each n_v in [h_min, n_v_max].

    Shape ``(4, n_v_max - h_min + 1)``; rows are the cases (theta_1, theta_2) =
    (0, 0), (0, n_v), (1, 0), (1, n_v).
    """
    cert.validate()
    if n_v_max < cert.h_min:
        raise BadInput("n_v_max must be >= h_min")
    lam, r, b, c = cert.lam, cert.r, cert.b, cert.c
    n = np.arange(cert.h_min, n_v_max + 1, dtype=np.float64)
    back = lam / (n + 1.0) * (1.0 / r - b)
    out = lam * n / (n + 1.0) * r * (1.0 - b)
    lhs = np.vstack(
        [
            back + out,
            (b * r - c) * n + back,
            b + out + c / r,
            b + (b * r - c) * n + c / r,
        ]
    )
    return (1.0 - cert.eps) - lhs


def check_certificate_full(cert: Certificate, n_v_max: int = 10_000) -> bool:
    return bool(np.all(certificate_full_slacks(cert, n_v_max) > 0))


def _max_nu(r, b, h_min: int, eps: float, c_factor: float):
    c_over_r = c_factor * b
    nu1 = (1.0 - eps) / (1.0 / r - b + h_min * r * (1.0 - b))
    nu2 = (1.0 - eps - b - c_over_r) / ((h_min + 1) * r * (1.0 - b))
    return np.minimum(nu1, nu2)


def search_certificate(
    h_min: int,
    grid: int = 200,
    eps: float = DEFAULT_EPS,
    c_factor: float = 1.0,
    rounds: int = 3,
) -> Certificate | None:
    """Best certificate over a grid in (r, b) with ``c = c_factor * b * r``.

    For fixed (r, b) both inequalities are linear in nu, so the largest
    feasible nu is closed-form; the grid maximises it, then ``rounds`` passes
    of a 10x finer grid around the incumbent refine it. The returned nu sits a
    relative 1e-9 below the supremum so the strict inequalities hold.
    """
    if h_min < 1:
        raise BadInput("h_min must be >= 1")
    if c_factor < 1.0:
        raise BadInput("c_factor < 1 violates b*r <= c")
    axis = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    step = axis[1] - axis[0]
    r_c, b_c = axis, axis
    best = None
    for k in range(rounds + 1):
        rr, bb = np.meshgrid(r_c, b_c, indexing="ij")
        nu = _max_nu(rr, bb, h_min, eps, c_factor)
        i = np.unravel_index(np.argmax(nu), nu.shape)
        if nu[i] > 0 and (best is None or nu[i] > best[0]):
            best = (float(nu[i]), float(rr[i]), float(bb[i]))
        if best is None:
            return None
        if k == rounds:
            break
        _, r0, b0 = best
        span = step
        step = step / 10.0
        r_c = np.clip(np.arange(r0 - span, r0 + span + step / 2, step), 1e-9, 1 - 1e-9)
        b_c = np.clip(np.arange(b0 - span, b0 + span + step / 2, step), 1e-9, 1 - 1e-9)
    nu, r, b = best
    cert = Certificate(h_min, nu * (1.0 - 1e-9), r, b, c_factor * b * r, eps)
    # the reduction to n_v = h_min needs 1/r - b > r(1 - b)
    assert 1.0 / r - b > r * (1.0 - b)
    chk = check_certificate(cert)
    assert chk.feasible, chk
    return cert


# -- report ----------------------------------------------------------------


@dataclass
class BoundReport:
    law: dict
    h_min: int
    lambda_brw_lower: float
    lambda_g_upper_simple: float | None
    lambda_g_upper_refined: float
    lambda_l_lower_cert: float | None
    certificate: dict | None
    weak_survival: bool
    separating_pair: str | None
    details: dict = field(default_factory=dict)

    @property
    def lambda_g_upper(self) -> float:
        vals = [v for v in (self.lambda_g_upper_simple, self.lambda_g_upper_refined) if v is not None]
        return min(vals)

    @property
    def lambda_l_lower(self) -> float:
        vals = [v for v in (self.lambda_brw_lower, self.lambda_l_lower_cert) if v is not None]
        return max(vals)

    @property
    def verdict(self) -> str:
        return "WEAK" if self.weak_survival else "not certified"

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else x

        return {
            "law": self.law,
            "h_min": self.h_min,
            "lambda_brw_lower": num(self.lambda_brw_lower),
            "lambda_g_upper_simple": num(self.lambda_g_upper_simple),
            "lambda_g_upper_refined": num(self.lambda_g_upper_refined),
            "lambda_l_lower_cert": num(self.lambda_l_lower_cert),
            "lambda_g_upper": num(self.lambda_g_upper),
            "lambda_l_lower": num(self.lambda_l_lower),
            "certificate": self.certificate,
            "weak_survival": self.weak_survival,
            "verdict": self.verdict,
            "separating_pair": self.separating_pair,
            "details": self.details,
        }


def bound_report(law: OffspringDistribution, grid: int = 200) -> BoundReport:
    require_tree_law(law)
    h = law.h_min
    brw = lambda_l_lower_brw(h)
    simple = lambda_g_upper_simple(h) if h >= 2 else None
    refined = lambda_g_upper_refined(law)
    cert = search_certificate(h, grid=grid)
    cert_lam = cert.lam if cert is not None else None

    pair = None
    if simple is not None and simple < brw:
        pair = "simple"
    elif cert_lam is not None and refined < cert_lam:
        pair = "refined"
    else:
        upper = min(v for v in (simple, refined) if v is not None)
        lower = max(v for v in (brw, cert_lam) if v is not None)
        if upper < lower:
            pair = "combined"

    details = {
        "lambda_brw_lower": "formula (h_min+1)/(2 sqrt(h_min)); strict lower bound via BRW domination",
        "lambda_g_upper_simple": ("formula " + SIMPLE_UPPER_NOTE) if simple is not None else "n/a (h_min < 2)",
        "lambda_g_upper_refined": (
            f"root-find: bisection on {list(BISECT_BRACKET)} to tol {BISECT_TOL} of E_X f(X, lam) > 1"
            if math.isfinite(refined)
            else "root-find: E_X f(X, lam) <= 1 on the whole bracket"
        ),
        "lambda_l_lower_cert": "certificate search (grid + refinement)" if cert else "no feasible certificate",
    }
    return BoundReport(
        law.to_descriptor(),
        h,
        brw,
        simple,
        refined,
        cert_lam,
        cert.to_dict() if cert else None,
        pair is not None,
        pair,
        details,
    )
