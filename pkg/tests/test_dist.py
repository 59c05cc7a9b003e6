import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_pmf_close, within_sigma
from gwcp.dist import (
    NonPositiveRate,
    NotNormalized,
    OutOfDomain,
    ZeroMass,
    degenerate,
    from_descriptor,
    from_map,
    geometric_from_rate,
    reproduction_from_map,
)
from gwcp.rng import make_rng


@st.composite
def laws(draw, allow_zero=False):
    lo = 0 if allow_zero else 1
    keys = draw(st.lists(st.integers(lo, 12), min_size=1, max_size=5, unique=True))
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=len(keys), max_size=len(keys)))
    tot = sum(w)
    m = {k: x / tot for k, x in zip(keys, w)}
    return reproduction_from_map(m) if allow_zero else from_map(m)


def test_degenerate_summary():
    d = from_map({4: 1.0})
    assert d.h_min == 4 and d.mean == 4


def test_two_point_summary():
    d = from_map({4: 0.5, 6: 0.5})
    assert d.h_min == 4 and d.mean == 5


def test_zero_mass_rejected_for_tree_laws():
    with pytest.raises(ZeroMass):
        from_map({0: 0.2, 4: 0.8})


def test_unnormalized_rejected():
    with pytest.raises(NotNormalized):
        from_map({2: 0.5, 3: 0.4})


def test_geometric_rate_one_matches_closed_form():
    g = geometric_from_rate(1.0)
    p = g.as_dict()
    assert p[0] == pytest.approx(0.5, abs=1e-12)
    assert p[1] == pytest.approx(0.25, abs=1e-12)
    assert p[2] == pytest.approx(0.125, abs=1e-12)
    assert g.mean == pytest.approx(1.0, abs=1e-9)
    assert g.allows_zero


def test_geometric_mean_by_direct_summation():
    g = geometric_from_rate(1.5)
    total = sum(k * p for k, p in g.as_dict().items())
    assert total == pytest.approx(1.5, abs=1e-9)


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_geometric_needs_positive_rate(lam):
    with pytest.raises(NonPositiveRate):
        geometric_from_rate(lam)


def test_sample_degenerate():
    x = degenerate(4).sample(make_rng(1), size=1000)
    assert np.all(x == 4)


@pytest.mark.parametrize(
    "law,mean,var",
    [
        (from_map({4: 0.5, 6: 0.5}), 5.0, 1.0),
        (geometric_from_rate(1.5), 1.5, 1.5 * 2.5),  # geometric variance lam(1+lam)
    ],
)
def test_sample_mean_clt(law, mean, var):
    n = 10**6
    x = law.sample(make_rng(7), size=n)
    assert within_sigma(x.mean(), mean, math.sqrt(var / n), 3)


def test_sample_pmf_per_atom():
    law = from_map({2: 0.2, 3: 0.5, 7: 0.3})
    x = law.sample(make_rng(3), size=10**6)
    assert_pmf_close(x, law.support, law.probs, 4)


def test_sample_deterministic_given_stream():
    law = from_map({2: 0.2, 3: 0.8})
    a = law.sample(make_rng(5), size=50)
    b = law.sample(make_rng(5), size=50)
    assert np.array_equal(a, b)


def test_pgf_examples():
    assert degenerate(4).pgf(0.5) == pytest.approx(0.0625)
    assert from_map({1: 0.3, 5: 0.7}).pgf(1.0) == pytest.approx(1.0)
    # untruncated geometric series: q / (1 - (1-q) s)
    lam, s = 1.5, 0.9
    q = 1 / (1 + lam)
    oracle = sum(q * (1 - q) ** k * s**k for k in range(5000))
    assert geometric_from_rate(lam).pgf(s) == pytest.approx(oracle, abs=1e-10)
    assert oracle == pytest.approx(q / (1 - (1 - q) * s), abs=1e-14)


@pytest.mark.parametrize("s", [-0.1, 1.01])
def test_pgf_domain(s):
    with pytest.raises(OutOfDomain):
        degenerate(2).pgf(s)


def test_extinction_examples():
    assert geometric_from_rate(0.8).extinction_probability() == 1.0
    assert geometric_from_rate(1.5).extinction_probability() == pytest.approx(2 / 3, abs=1e-9)
    assert degenerate(2).extinction_probability() == 0.0


def test_descriptor_round_trip():
    for law in (from_map({2: 0.25, 5: 0.75}), geometric_from_rate(1.2), degenerate(3)):
        again = from_descriptor(law.to_descriptor())
        assert np.array_equal(again.support, law.support)
        assert np.allclose(again.probs, law.probs)


@settings(max_examples=60, deadline=None)
@given(laws(allow_zero=True))
def test_pgf_monotone_and_convex(law):
    s = np.linspace(0, 1, 100)
    g = law.pgf(s)
    assert np.all(np.diff(g) >= -1e-12)
    assert np.all(np.diff(g, 2) >= -1e-12)
    assert g[-1] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(laws(allow_zero=True))
def test_extinction_is_one_iff_subcritical(law):
    q = law.extinction_probability()
    if law.mean <= 1:
        assert q == 1.0
    else:
        assert q < 1.0
        assert law.pgf(q) == pytest.approx(q, abs=1e-9)
