import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwcp.bounds import (
    BadCertificate,
    Certificate,
    block_expectation,
    bound_report,
    certificate_full_slacks,
    check_certificate,
    check_certificate_full,
    expected_f,
    expected_ratio,
    f_hmin,
    lambda_g_upper_refined,
    lambda_g_upper_simple,
    lambda_l_lower_brw,
    search_certificate,
    smallest_block_depth,
)
from gwcp.dist import degenerate, from_map
from gwcp.walk import BadInput


def f_exact(x, lam, h):
    lam, x = F(lam), F(x)
    a = lam / (lam + x + 1)
    return lam * x / (lam + x + 1) / (1 - a / (2 + lam / (h + 1)))


def lhs_exact(h, nu, r, b):
    nu, r, b = F(nu), F(r), F(b)
    c = b * r
    return nu * (1 / r - b + h * r * (1 - b)), b + c / r + (h + 1) * nu * r * (1 - b)


@pytest.mark.parametrize(
    "x,lam,h,approx",
    [(4, "1.46", 4, 1.00292), (4, "1.45", 4, 0.99711), (5, "1.35", 5, 1.00100), (5, "1.34", 5, 0.99446)],
)
def test_f_against_exact_rationals(x, lam, h, approx):
    exact = f_exact(x, lam, h)
    assert f_hmin(x, float(lam), h) == pytest.approx(float(exact), rel=1e-14)
    assert float(exact) == pytest.approx(approx, abs=1e-5)


def test_f_large_x_tends_to_lambda():
    assert f_hmin(10**6, 1.0, 4) == pytest.approx(1.0, abs=1e-4)


def test_f_rejects_bad_input():
    with pytest.raises(BadInput):
        f_hmin(0, 1.0, 4)
    with pytest.raises(BadInput):
        f_hmin(4, -1.0, 4)


@pytest.mark.parametrize("h", [1, 2, 4, 5, 9])
def test_f_strictly_increasing_in_rate(h):
    lam = np.arange(0.1, 10.0, 1e-3)
    x = np.arange(h, h + 51, dtype=float)
    vals = np.stack([f_hmin(x, l, h) for l in lam])  # rows: rate, columns: x
    assert np.all(np.diff(vals, axis=0) > 0)


@pytest.mark.parametrize("h,lam", [(4, 1.46), (5, 1.35)])
def test_f_increasing_in_x(h, lam):
    x = np.arange(h, 10**4 + 1, dtype=float)
    assert np.all(np.diff(f_hmin(x, lam, h)) > 0)


def test_refined_upper_bound_brackets():
    r4 = lambda_g_upper_refined(degenerate(4))
    r5 = lambda_g_upper_refined(degenerate(5))
    assert 1.45 < r4 < 1.46
    assert 1.34 < r5 < 1.35
    assert expected_f(degenerate(4), r4) > 1 > expected_f(degenerate(4), r4 - 1e-4)


def test_refined_upper_bound_heavy_tail_is_lower():
    heavy = lambda_g_upper_refined(from_map({2: 0.5, 100: 0.5}))
    assert math.isfinite(heavy)
    assert heavy < lambda_g_upper_refined(degenerate(2))


def test_refined_upper_bound_no_root_for_line():
    assert lambda_g_upper_refined(degenerate(1)) == math.inf


@pytest.mark.parametrize("h,val", [(4, 5 / 3), (6, 1.4), (2, 3.0)])
def test_simple_upper_bound(h, val):
    assert lambda_g_upper_simple(h) == pytest.approx(val, abs=1e-15)


def test_simple_upper_bound_needs_branching():
    with pytest.raises(BadInput):
        lambda_g_upper_simple(1)


@pytest.mark.parametrize("h,val", [(4, 1.25), (6, 7 / (2 * math.sqrt(6))), (1, 1.0)])
def test_brw_lower_bound(h, val):
    assert lambda_l_lower_brw(h) == pytest.approx(val, abs=1e-15)
    with pytest.raises(BadInput):
        lambda_l_lower_brw(0)


def test_reference_certificates(cert_h4, cert_h5):
    c4 = check_certificate(cert_h4)
    assert c4.feasible and c4.slack1 > 0 and c4.slack2 > 0
    e1, e2 = lhs_exact(4, "0.3", "0.437", "0.256")
    assert c4.lhs1 == pytest.approx(float(e1), rel=1e-14)
    assert c4.lhs2 == pytest.approx(float(e2), rel=1e-14)
    assert c4.lhs1 == pytest.approx(0.99985, abs=1e-5) and c4.lhs2 == pytest.approx(0.99969, abs=1e-5)
    assert cert_h4.lam == pytest.approx(1.5)
    c5 = check_certificate(cert_h5)
    assert c5.feasible
    e1, e2 = lhs_exact(5, "0.265", "0.397", "0.264")
    assert (c5.lhs1, c5.lhs2) == (pytest.approx(float(e1), rel=1e-14), pytest.approx(float(e2), rel=1e-14))
    assert check_certificate_full(cert_h4, 10**4) and check_certificate_full(cert_h5, 10**4)


def test_infeasible_certificate():
    c = check_certificate(Certificate(4, 0.35, 0.437, 0.256))
    assert not c.feasible and c.slack1 < 0
    assert c.lhs1 == pytest.approx(0.35 / 0.3 * check_certificate(Certificate(4, 0.3, 0.437, 0.256)).lhs1)


def test_full_check_catches_large_b():
    assert not check_certificate_full(Certificate(4, 0.3, 0.437, 0.5), 10**4)


def test_constraint_violations_are_distinct_errors():
    for bad in (Certificate(4, 0.3, 1.0, 0.2), Certificate(4, 0.3, 0.4, 0.2, c=0.01), Certificate(0, 0.3, 0.4, 0.2)):
        with pytest.raises(BadCertificate):
            check_certificate(bad)
    with pytest.raises(BadInput):
        certificate_full_slacks(Certificate(4, 0.3, 0.4, 0.2), 3)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 12),
    st.floats(0.01, 0.99),
    st.floats(0.01, 0.99),
    st.floats(0.05, 0.999),
    st.floats(1.0, 3.0),
)
def test_reduced_check_implies_full_check(h, r, b, frac, c_factor):
    nu1 = 0.9999 / (1 / r - b + h * r * (1 - b))
    cert = Certificate(h, frac * nu1, r, b, c_factor * b * r)
    if check_certificate(cert).feasible:
        assert check_certificate_full(cert, 2000)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(1, 30), min_size=1, max_size=4, unique=True),
    st.floats(0.05, 10.0),
)
def test_expectation_chain(keys, lam):
    law = from_map({k: 1 / len(keys) for k in keys})
    h = law.h_min
    assert expected_f(law, lam) >= expected_ratio(law, lam) - 1e-12
    assert expected_ratio(law, lam) >= lam * h / (lam + h + 1) - 1e-12


def test_block_expectation_examples():
    be = block_expectation(degenerate(4), 1.46, 1)
    assert be.growth == pytest.approx(1.00292, abs=1e-5)
    assert be.last_level == pytest.approx(5.84 / 6.46, rel=1e-12)
    n = smallest_block_depth(degenerate(4), 1.46)
    assert n == math.ceil(-math.log(be.last_level) / math.log(be.growth))
    assert block_expectation(degenerate(4), 1.46, n).value > 1 >= block_expectation(degenerate(4), 1.46, n - 1).value
    low = [block_expectation(degenerate(4), 1.40, n).value for n in (1, 10, 100, 1000)]
    assert block_expectation(degenerate(4), 1.40, 1).growth < 1
    assert all(a > b for a, b in zip(low, low[1:])) and low[-1] < 1e-12
    assert smallest_block_depth(degenerate(4), 1.40) is None
    with pytest.raises(BadInput):
        block_expectation(degenerate(4), 1.46, 0)


def test_search_certificates():
    c4 = search_certificate(4)
    c5 = search_certificate(5)
    assert c4.lam >= 1.50 and c5.lam >= 1.59
    assert check_certificate(c4).feasible and check_certificate_full(c4, 10**4)
    c3 = search_certificate(3)
    assert c3.lam < lambda_g_upper_refined(degenerate(3))


def test_search_rejects_bad_input():
    with pytest.raises(BadInput):
        search_certificate(0)


def test_simple_pair_separates_exactly_from_six():
    sep = [h for h in range(2, 13) if lambda_g_upper_simple(h) < lambda_l_lower_brw(h)]
    assert sep == list(range(6, 13))


@pytest.mark.parametrize(
    "h,weak,pair",
    [(1, False, None), (2, False, None), (3, False, None), (4, True, "refined"), (5, True, "refined"), (6, True, "simple")],
)
def test_bound_report_verdicts(h, weak, pair):
    rep = bound_report(degenerate(h))
    assert rep.weak_survival is weak and rep.separating_pair == pair
    if weak:
        assert rep.lambda_g_upper < rep.lambda_l_lower
    d = rep.to_dict()
    assert d["verdict"] == ("WEAK" if weak else "not certified")
    assert "h_min-1" in d["details"]["lambda_g_upper_simple"] or h < 2


def test_bound_report_h4_numbers():
    rep = bound_report(degenerate(4))
    assert rep.lambda_g_upper <= 1.46 < 1.50 <= rep.lambda_l_lower
