"""Weight sequences: terms, certified series values, tilting, moments.

Oracles: scipy.special.zeta (an independent high-precision summation) and
mpmath Euler-Maclaurin sums for log-power factors.
"""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from gibbs_partitions import SchemeSpec, WeightSequence


def test_term_explicit_direct_read():
    seq = WeightSequence.explicit([0.0, 1.0, 0.5])
    assert seq.term(2) == 0.5
    assert seq.term(7) == 0.0


def test_term_closed_form_power():
    seq = WeightSequence.closed_form(c=1.0, e=4.0, rho=1.0)
    assert seq.term(2) == pytest.approx(0.0625, abs=0)


def test_term_override_precedence():
    seq = WeightSequence.closed_form(c=1.0, e=1.5, rho=1.0, overrides={1: 0.0})
    assert seq.term(1) == 0.0
    assert seq.term(2) == pytest.approx(2.0 ** -1.5)


def test_term0_default_zero():
    seq = WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0)
    assert seq.term(0) == 0.0
    assert WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0, term0=0.3).term(0) == 0.3


def test_series_value_zeta4():
    seq = WeightSequence.closed_form(c=1.0, e=4.0, rho=1.0)
    assert seq.series_value(1.0, tol=1e-12) == pytest.approx(float(zeta(4)), abs=1e-11)


def test_series_value_zeta_three_halves():
    seq = WeightSequence.closed_form(c=1.0, e=1.5, rho=1.0)
    assert seq.series_value(1.0, tol=1e-12) == pytest.approx(float(zeta(1.5)), abs=1e-11)


def test_series_value_at_zero_returns_term0():
    seq = WeightSequence.closed_form(c=2.0, e=3.0, rho=1.0, term0=0.25)
    assert seq.series_value(0.0) == 0.25


def test_series_divergence_flags():
    seq = WeightSequence.closed_form(c=1.0, e=1.5, rho=1.0)
    assert seq.series_value(1.2) == math.inf  # beyond the radius
    assert WeightSequence.closed_form(c=1.0, e=0.9, rho=1.0).series_value(1.0) == math.inf


def test_series_log_power_against_euler_maclaurin():
    seq = WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0, log_exp=1.5)
    mpmath.mp.dps = 25
    oracle = float(
        mpmath.nsum(lambda n: mpmath.log(2 + n) ** 1.5 / n**2, [1, mpmath.inf], method="e")
    )
    assert seq.series_value(1.0, tol=1e-11) == pytest.approx(oracle, abs=1e-10)


def test_radius():
    assert WeightSequence.closed_form(c=1.0, e=2.0, rho=0.5).radius() == 0.5
    assert WeightSequence.explicit([1.0, 2.0, 3.0]).radius() == math.inf


def test_weighted_moment_zeta3():
    seq = WeightSequence.closed_form(c=1.0, e=4.0, rho=1.0)
    assert seq.weighted_moment(1.0, 1, tol=1e-12) == pytest.approx(float(zeta(3)), abs=1e-11)


def test_weighted_moment_divergence():
    seq = WeightSequence.closed_form(c=1.0, e=1.5, rho=1.0)
    assert seq.weighted_moment(1.0, 1) == math.inf


def test_weighted_moment_k0_is_series_value():
    seq = WeightSequence.closed_form(c=1.3, e=2.5, rho=1.0, log_exp=-1.0, term0=0.1)
    assert seq.weighted_moment(0.7, 0) == pytest.approx(seq.series_value(0.7), rel=1e-14)


def test_tilt_identity():
    seq = WeightSequence.closed_form(c=1.0, e=2.5, rho=1.0, overrides={3: 0.7})
    tilted = seq.tilt(1.0)
    for n in range(10):
        assert tilted.term(n) == pytest.approx(seq.term(n), rel=1e-15)


def test_tilt_explicit():
    seq = WeightSequence.explicit([0.0, 1.0, 1.0]).tilt(2.0)
    assert list(seq.coeffs) == [0.0, 2.0, 4.0]


def test_tilt_closed_form_radius():
    seq = WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0).tilt(0.5)
    assert seq.rho == 2.0


@settings(max_examples=40, deadline=None)
@given(
    e=st.floats(min_value=-1.0, max_value=4.0),
    log_exp=st.floats(min_value=-1.5, max_value=1.5),
    t=st.floats(min_value=0.05, max_value=2.0),
    n=st.integers(min_value=0, max_value=1000),
)
def test_tilt_term_identity_property(e, log_exp, t, n):
    seq = WeightSequence.closed_form(c=0.8, e=e, rho=1.3, log_exp=log_exp, term0=0.2)
    got = seq.tilt(t).term(n)
    want = seq.term(n) * t**n
    assert got == pytest.approx(want, rel=1e-11, abs=1e-300)


@settings(max_examples=25, deadline=None)
@given(
    t=st.floats(min_value=0.1, max_value=1.8),
    x=st.floats(min_value=0.05, max_value=0.5),
)
def test_tilt_series_identity_property(t, x):
    seq = WeightSequence.closed_form(c=1.0, e=1.2, rho=1.0, log_exp=0.5)
    lhs = seq.tilt(t).series_value(x, tol=1e-12)
    rhs = seq.series_value(t * x, tol=1e-12)
    if math.isinf(lhs) or math.isinf(rhs):
        assert lhs == rhs
    else:
        assert lhs == pytest.approx(rhs, abs=2e-12, rel=1e-9)


def test_series_monotone_in_t():
    seq = WeightSequence.closed_form(c=1.0, e=2.2, rho=1.0, log_exp=0.3)
    vals = [seq.series_value(t) for t in np.linspace(0.0, 1.0, 21)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_weighted_terms_matches_term_products():
    seq = WeightSequence.closed_form(c=1.1, e=2.0, rho=1.25, log_exp=0.5,
                                     term0=0.3, overrides={2: 0.0, 5: 1.0})
    x = 0.9
    arr = seq.weighted_terms(x, 30)
    for n in range(31):
        assert arr[n] == pytest.approx(seq.term(n) * x**n, rel=1e-12, abs=1e-300)


def test_scheme_requires_v0_zero():
    w = WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0)
    with pytest.raises(ValueError):
        SchemeSpec(v=WeightSequence.explicit([1.0, 1.0]), w=w)


def test_config_round_trip():
    scheme = SchemeSpec(
        v=WeightSequence.closed_form(c=1.0, e=3.0, rho=1.2, overrides={2: 0.5}),
        w=WeightSequence.explicit([0.0, 1.0, 0.25]),
        h=WeightSequence.closed_form(c=2.0, e=1.5, rho=1.0, term0=1.0),
    )
    again = SchemeSpec.from_config(scheme.to_config())
    assert again == scheme
    assert again.fingerprint() == scheme.fingerprint()
