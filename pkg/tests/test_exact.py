"""Exact engine: component laws, stopped sums, conditioned counts, the
brute-force enumeration oracle, prefix laws, deficits, product structures."""

import math

import numpy as np
import pytest
from scipy.special import zeta

from gibbs_partitions import (
    DiscreteLaw,
    SchemeSpec,
    WeightSequence,
    brute_force_partition_law,
    bundled_scheme,
    classify,
    extended_law_Nn,
    giant_deficit_law,
    law_N,
    law_Nhat,
    law_Nn,
    law_X,
    prefix_law,
    product_law,
    stopped_sum_law,
    tv_distance,
)
from gibbs_partitions.exact import ConvolutionTable, convolution_table, default_rho
from gibbs_partitions.series import compose

from test_series import bell_u_n, enumerate_set_partitions


W0_SCHEMES = ["bell", "dense-gauss", "dense-stable", "dense-b3", "convergent",
              "mixture", "dilute", "single-component"]


def test_law_x_two_point():
    scheme = SchemeSpec(
        v=WeightSequence.explicit([0.0, 1.0]), w=WeightSequence.explicit([0.0, 1.0, 1.0])
    )
    law = law_X(scheme, 1.0, 5)
    assert law.pmf[1] == pytest.approx(0.5)
    assert law.pmf[2] == pytest.approx(0.5)
    assert law.mass_accounted == pytest.approx(1.0)


def test_law_x_zeta_tail(dense_gauss):
    law = law_X(dense_gauss, 1.0, 2000)
    z4 = float(zeta(4))
    for k in (1, 2, 7):
        assert law.pmf[k] == pytest.approx(k**-4.0 / z4, rel=1e-12)


def test_law_x_tilt_invariance(dense_gauss):
    base = law_X(dense_gauss, 1.0, 500)
    tilted = law_X(
        SchemeSpec(v=dense_gauss.v, w=dense_gauss.w.tilt(2.0)), 0.5, 500
    )
    assert np.allclose(base.pmf, tilted.pmf, rtol=1e-13)


def test_law_n_point_mass(single_component):
    law = law_N(single_component, 1.0, 6)
    assert law.pmf[1] == pytest.approx(1.0)
    assert law.pmf[2:].sum() == 0.0


def test_law_n_bell_direct_summation(bell):
    # P(N = l) proportional to (e-1)^l / l!, normalized by exp(e-1) - 1
    law = law_N(bell, 1.0, 60)
    w1 = math.e - 1.0
    norm = math.exp(w1) - 1.0
    for ell in (1, 2, 5):
        assert law.pmf[ell] == pytest.approx(w1**ell / math.factorial(ell) / norm, rel=1e-12)


def test_law_n_zeta_normalization(convergent):
    # v_l W(rho_w)^l = l^-3, so P(N = l) = l^-3 / zeta(3)
    law = law_N(convergent, 1.0, 3000)
    z3 = float(zeta(3))
    for ell in (1, 3, 10):
        assert law.pmf[ell] == pytest.approx(ell**-3.0 / z3, rel=1e-10)


def test_law_nhat_constructions(bell, single_component):
    # N = 1 surely: Nhat = 1
    nh = law_Nhat(single_component, 4)
    assert nh.pmf[1] == pytest.approx(1.0)
    # N uniform on {1, 2}: size-biasing gives {1: 1/3, 2: 2/3}
    scheme = SchemeSpec(
        v=WeightSequence.explicit([0.0, 1.0, 0.5]),  # v_l W^l equal for W = 2
        w=WeightSequence.explicit([0.0, 2.0]),
    )
    nh = law_Nhat(scheme, 4, rho=1.0)
    assert nh.pmf[1] == pytest.approx(1.0 / 3.0)
    assert nh.pmf[2] == pytest.approx(2.0 / 3.0)
    # moment identity E[Nhat] = E[N^2] / E[N] on a scheme with all moments
    ln = law_N(bell, 1.0, 80)
    nh = law_Nhat(bell, 80, rho=1.0)
    assert nh.mean() == pytest.approx(ln.moment(2) / ln.mean(), rel=1e-11)


def test_convolution_table_basics():
    delta1 = DiscreteLaw.from_pmf(np.array([0.0, 1.0]))
    table = convolution_table(delta1, 5, 5)
    for ell in range(6):
        assert table.rows[ell, ell] == pytest.approx(1.0)
    uni = DiscreteLaw.from_pmf(np.array([0.0, 0.5, 0.5]))
    table = convolution_table(uni, 3, 4)
    assert table.rows[2, 3] == pytest.approx(0.5)
    # probability conservation per row
    assert np.allclose(table.rows.sum(axis=1)[:3], 1.0, atol=1e-12)


def test_stopped_sum_identity_outer(dense_gauss):
    scheme = SchemeSpec(v=WeightSequence.explicit([0.0, 1.0]), w=dense_gauss.w)
    ssl = stopped_sum_law(scheme, 1.0, 50)
    lx = law_X(scheme, 1.0, 50)
    assert np.allclose(ssl.s_n[1:], lx.pmf[1:], rtol=1e-12)


def test_dual_path_partition_function_bell(bell):
    ssl = stopped_sum_law(bell, 1.0, 60)
    direct = compose(bell.v, bell.w, 60).coeffs
    assert ssl.u[3] == pytest.approx(5.0 / 6.0, rel=1e-12)
    assert ssl.u[4] == pytest.approx(15.0 / 24.0, rel=1e-12)
    assert np.allclose(ssl.u, direct, rtol=1e-10)
    assert ssl.u[5] == pytest.approx(bell_u_n(5), rel=1e-10)


@pytest.mark.parametrize("name", ["dense-gauss", "dense-stable", "convergent", "mixture", "dilute"])
def test_dual_path_partition_function_zeta(name):
    scheme = bundled_scheme(name)
    n = 120
    ssl = stopped_sum_law(scheme, default_rho(scheme), n)
    direct = compose(scheme.v, scheme.w, n).coeffs
    mask = direct > 0
    assert np.max(np.abs(ssl.u[mask] / direct[mask] - 1.0)) < 1e-10


def test_law_nn_stirling(bell):
    law = law_Nn(bell, 3, rho=1.0)
    assert np.allclose(law.pmf, [0.0, 0.2, 0.6, 0.2], atol=1e-14)


def test_law_nn_point_mass(single_component):
    law = law_Nn(single_component, 37)
    assert law.pmf[1] == pytest.approx(1.0)


@pytest.mark.parametrize("name", ["dense-gauss", "dilute", "mixture"])
def test_law_nn_tilt_invariance(name):
    scheme = bundled_scheme(name)
    base = law_Nn(scheme, 500)
    for t in (0.5, 2.0):
        tilted = law_Nn(SchemeSpec(v=scheme.v, w=scheme.w.tilt(t)), 500)
        assert tv_distance(base, tilted) < 1e-12


def test_brute_force_bell_n4(bell):
    lawn, multiset, u4 = brute_force_partition_law(bell, 4)
    assert np.allclose(lawn.pmf * 15.0, [0, 1, 7, 6, 1], atol=1e-10)
    assert u4 == pytest.approx(15.0 / 24.0, rel=1e-12)
    assert multiset[(1, 1, 1, 1)] == pytest.approx(1.0 / 15.0, rel=1e-12)
    assert sum(multiset.values()) == pytest.approx(1.0, rel=1e-12)


def test_brute_force_n1(dense_gauss):
    lawn, multiset, u1 = brute_force_partition_law(dense_gauss, 1)
    assert lawn.pmf[1] == pytest.approx(1.0)
    assert list(multiset) == [(1,)]


def test_brute_force_against_independent_enumerator(dense_stable):
    # recompute the n = 5 law with the testfile's own enumerator
    n = 5
    lawn, _, u_n = brute_force_partition_law(dense_stable, n)
    weights = np.zeros(n + 1)
    total = 0.0
    for part in enumerate_set_partitions(n):
        k = len(part)
        w = math.factorial(k) * dense_stable.v.term(k)
        for block in part:
            w *= math.factorial(len(block)) * dense_stable.w.term(len(block))
        total += w
        weights[k] += w
    assert np.allclose(lawn.pmf, weights / total, atol=1e-14)
    assert u_n == pytest.approx(total / math.factorial(n), rel=1e-12)


def test_brute_force_refusals(bell):
    with pytest.raises(Exception):
        brute_force_partition_law(bell, 10)
    w0 = SchemeSpec(
        v=WeightSequence.explicit([0.0, 1.0]),
        w=WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0, term0=0.5),
    )
    with pytest.raises(ValueError):
        brute_force_partition_law(w0, 3)


@pytest.mark.parametrize("name", W0_SCHEMES)
def test_kolchin_master_consistency(name):
    """law_Nn equals the brute-force law for every w_0 = 0 bundled scheme."""
    scheme = bundled_scheme(name)
    for n in range(1, 7):
        lawn_bf, _, _ = brute_force_partition_law(scheme, n)
        lawn = law_Nn(scheme, n)
        assert tv_distance(lawn, lawn_bf) < 1e-12, (name, n)


def test_prefix_point_mass(single_component):
    pl = prefix_law(single_component, 50, 1)
    assert pl.joint[50] == pytest.approx(1.0)
    assert pl.tv_to_iid > 0.9


def test_prefix_exchangeability(dense_gauss):
    pl2 = prefix_law(dense_gauss, 60, 2)
    marg1 = pl2.joint.sum(axis=1)
    marg2 = pl2.joint.sum(axis=0)
    assert np.allclose(marg1, marg2, atol=1e-13)
    # the m = 2 marginal is the m = 1 law restricted to two-plus components
    pl1 = prefix_law(dense_gauss, 60, 1)
    assert np.all(marg1 <= pl1.joint + 1e-13)
    assert pl1.mass_accounted >= pl2.mass_accounted


def test_prefix_tv_decreasing_and_marginalization(dense_gauss):
    tvs1, tvs2 = [], []
    for n in (100, 400):
        tvs1.append(prefix_law(dense_gauss, n, 1).tv_to_iid)
        tvs2.append(prefix_law(dense_gauss, n, 2).tv_to_iid)
    assert tvs1[1] < tvs1[0]
    # data processing: the two-coordinate TV dominates the marginal TV
    assert tvs2[0] >= tvs1[0]
    assert tvs2[1] >= tvs1[1]


def test_prefix_tilt_invariance(dense_gauss):
    base = prefix_law(dense_gauss, 300, 1)
    tilted = prefix_law(SchemeSpec(v=dense_gauss.v, w=dense_gauss.w.tilt(0.5)), 300, 1)
    assert np.max(np.abs(base.joint - tilted.joint)) < 1e-12


def test_deficit_degenerate_cases(single_component):
    exact_d, limit_d = giant_deficit_law(single_component, 123)
    assert exact_d.pmf[0] == pytest.approx(1.0)
    assert limit_d.pmf[0] == pytest.approx(1.0)
    # N = 2 fixed, X uniform {1, 2}: at n = 3 the only split is 1 + 2
    scheme = SchemeSpec(
        v=WeightSequence.explicit([0.0, 0.0, 1.0]),
        w=WeightSequence.explicit([0.0, 1.0, 1.0]),
    )
    exact_d, _ = giant_deficit_law(scheme, 3)
    assert exact_d.pmf[1] == pytest.approx(1.0)


def test_deficit_against_brute_force(convergent):
    # P(n - M_n = d) from the enumeration oracle at n = 7
    n = 7
    _, multiset, _ = brute_force_partition_law(convergent, n)
    want = np.zeros(n + 1)
    for sizes, prob in multiset.items():
        want[n - max(sizes)] += prob
    exact_d, _ = giant_deficit_law(convergent, n)
    d_max = exact_d.pmf.size - 1
    assert np.allclose(exact_d.pmf, want[: d_max + 1], atol=1e-13)
    assert exact_d.deficit == pytest.approx(want[d_max + 1 :].sum(), abs=1e-13)


def test_deficit_tilt_invariance(convergent):
    base, _ = giant_deficit_law(convergent, 500)
    tilted, _ = giant_deficit_law(
        SchemeSpec(v=convergent.v, w=convergent.w.tilt(2.0)), 500
    )
    # identical truncation, identical values: compare the accounted parts
    assert np.max(np.abs(base.pmf - tilted.pmf)) < 1e-12
    assert abs(base.mass_accounted - tilted.mass_accounted) < 1e-12


def test_deficit_limit_law_convergence(convergent):
    exact_d, limit_d = giant_deficit_law(convergent, 2000)
    assert tv_distance(exact_d, limit_d) < 0.1


def test_stopped_sum_asymptotic_ratio(dense_gauss):
    """P(S_N = n) ~ mu^-1 P(N = floor(n/mu)) in the dense phase."""
    rep = classify(dense_gauss)
    ratios = []
    for n in (500, 1000, 2000, 4000):
        ssl = stopped_sum_law(dense_gauss, 1.0, n)
        ln = law_N(dense_gauss, 1.0, n)
        ratios.append(ssl.s_n[n] / (ln.pmf[int(n / rep.mu)] / rep.mu))
    assert abs(ratios[-1] - 1.0) < 0.10
    deviations = [abs(r - 1.0) for r in ratios]
    assert deviations[-1] <= deviations[0]


def test_product_law_symmetry():
    scheme = bundled_scheme("product-symmetric")
    pl = product_law(scheme.product_factors, 300)
    assert pl.p == pytest.approx((0.5, 0.5))
    assert np.allclose(pl.marginals[0].pmf, pl.marginals[1].pmf, atol=1e-12)


def test_product_law_lighter_tail_vanishes():
    heavy = WeightSequence.closed_form(c=1.0, e=2.0, rho=1.0)
    light = WeightSequence.closed_form(c=1.0, e=4.0, rho=1.0)
    pl = product_law([heavy, light], 100)
    assert pl.p[0] == pytest.approx(1.0)
    assert pl.p[1] == pytest.approx(0.0)


def test_product_law_small_coordinate_split():
    # identical cubic factors: P(P_2 = k) ~ (1/2) P(A_2 = k) for small k
    f = WeightSequence.closed_form(c=1.0, e=3.0, rho=1.0)
    pl = product_law([f, f], 500)
    norm = sum(f.term(k) for k in range(501))
    for k in (1, 2, 3, 5, 8):
        want = 0.5 * f.term(k) / norm
        assert pl.marginals[1].pmf[k] == pytest.approx(want, rel=0.05)


def test_product_law_refuses_pk_for_explicit():
    f = WeightSequence.closed_form(c=1.0, e=3.0, rho=1.0)
    g = WeightSequence.explicit([0.0, 1.0, 1.0])
    pl = product_law([f, g], 50)
    assert pl.p is None


def test_extended_trivial_prefactor(convergent):
    # H = 1 (only h_0 = 1): identical to the base scheme exactly
    ext = SchemeSpec(v=convergent.v, w=convergent.w,
                     h=WeightSequence.explicit([1.0]))
    base = law_Nn(convergent, 300)
    lifted = extended_law_Nn(ext, 300)
    assert tv_distance(base, lifted) < 1e-12
