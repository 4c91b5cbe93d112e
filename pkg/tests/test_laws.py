"""Limit laws: stable densities (series vs inversion dual route), fractional
moments vs quadrature, the dilute limit variable, extreme-value laws, and
the point-process intensity and factorial moments.

Monte Carlo quadrature and scipy adaptive quadrature serve as the
independent oracles throughout.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import zeta

from gibbs_partitions import laws
from gibbs_partitions.laws import (
    DiluteParams,
    StableParams,
    dilute_Z_cdf,
    dilute_Z_density,
    dilute_Z_moment,
    frechet_law,
    gumbel_cdf,
    mixed_poisson_pmf,
    pp_factorial_moment,
    pp_intensity,
    pp_intensity_integral,
    stable_cf,
    stable_density_inversion,
    stable_density_series,
    stable_moment,
)

GAMMA_DENSE_15 = (-math.cos(math.pi * 0.75)) ** (1.0 / 1.5)
LAM_DILUTE = math.gamma(0.5) / (0.5 * float(zeta(1.5)))  # ~1.356967215141875


# ---------------------------------------------------------------------------
# characteristic function


def test_cf_at_zero_is_one():
    assert stable_cf(StableParams(1.5, 1.0, -1.0), 0.0) == 1.0


def test_cf_gaussian_branch():
    p = StableParams(2.0, 1.2, 0.7, 0.3)
    t = 0.9
    want = complex(np.exp(-(1.2**2) * t**2 + 1j * 0.3 * t))  # tan(pi) = 0
    assert stable_cf(p, t) == pytest.approx(want, rel=1e-12)


def test_cf_alpha_one_branch():
    p = StableParams(1.0, 1.0, 1.0, 0.0)
    assert stable_cf(p, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)  # log|1| = 0


# ---------------------------------------------------------------------------
# densities


def test_gaussian_peak_value():
    p = StableParams(2.0, 1.0, -1.0)
    assert stable_density_series(p, 0.0) == 1.0 / (2.0 * math.sqrt(math.pi))
    assert stable_density_inversion(p, 0.0) == pytest.approx(
        1.0 / (2.0 * math.sqrt(math.pi)), abs=1e-10
    )


def test_one_sided_support():
    p = StableParams(0.5, 1.0, 1.0)
    assert stable_density_series(p, -1.0) == 0.0
    assert stable_density_series(p, 0.0) == 0.0


def test_series_vs_inversion_dense():
    p = StableParams(1.5, GAMMA_DENSE_15, -1.0)
    for x in [-30.0, -10.0, -3.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.0, 3.0]:
        s = stable_density_series(p, x)
        i = stable_density_inversion(p, x)
        assert s == pytest.approx(i, rel=1e-6, abs=1e-9)


def test_series_vs_inversion_dilute():
    lam = LAM_DILUTE
    gamma = (lam * math.cos(math.pi * 0.25)) ** 2.0
    p = StableParams(0.5, gamma, 1.0)
    for x in [0.4, 0.8, 1.5, 3.0, 8.0, 25.0]:
        s = stable_density_series(p, x)
        i = stable_density_inversion(p, x)
        assert s == pytest.approx(i, rel=1e-6, abs=1e-9)


def test_levy_closed_form():
    # alpha = 1/2 spectrally positive with Laplace exp(-lam sqrt(s)) is the
    # Levy distribution lam/(2 sqrt(pi)) x^(-3/2) exp(-lam^2/(4x))
    lam = LAM_DILUTE
    gamma = (lam * math.cos(math.pi * 0.25)) ** 2.0
    p = StableParams(0.5, gamma, 1.0)
    for x in [0.3, 1.0, 5.0, 40.0]:
        want = lam / (2.0 * math.sqrt(math.pi)) * x ** -1.5 * math.exp(-(lam**2) / (4.0 * x))
        assert stable_density_series(p, x) == pytest.approx(want, rel=1e-12)


def test_inversion_normalization_and_symmetry():
    p = StableParams(1.5, 1.0, 0.0)
    total = 0.0
    for a, b in [(-4000.0, -50.0), (-50.0, 50.0), (50.0, 4000.0)]:
        val, _ = quad(lambda x: stable_density_inversion(p, x), a, b, limit=500)
        total += val
    # mass beyond |x| = 4000 for the symmetric 3/2-stable tail is ~2e-6/3
    assert total == pytest.approx(1.0, abs=2e-6)
    for x in (0.7, 2.3):
        assert stable_density_inversion(p, x) == pytest.approx(
            stable_density_inversion(p, -x), abs=1e-9
        )


def test_inversion_rejects_tiny_alpha():
    with pytest.raises(ValueError):
        stable_density_inversion(StableParams(0.25, 1.0, 1.0), 1.0)


def test_density_scaling_in_gamma():
    # X(c gamma) = c X(gamma): density scales accordingly
    p1 = StableParams(1.5, GAMMA_DENSE_15, -1.0)
    p2 = StableParams(1.5, 2.0 * GAMMA_DENSE_15, -1.0)
    for x in (0.5, 1.0, -2.0):
        assert stable_density_series(p2, x) == pytest.approx(
            0.5 * stable_density_series(p1, x / 2.0), rel=1e-10
        )


# ---------------------------------------------------------------------------
# fractional moments


def test_stable_moment_trivials():
    assert stable_moment(0.5, 1.3, 0.0) == 1.0
    # s = -1: lam^(-2) Gamma(3)/Gamma(2) = 2 lam^(-2)
    assert stable_moment(0.5, 1.0, -1.0) == pytest.approx(2.0)


def test_stable_moment_quadrature_oracle():
    lam = LAM_DILUTE
    gamma = (lam * math.cos(math.pi * 0.25)) ** 2.0
    p = StableParams(0.5, gamma, 1.0)
    want = stable_moment(0.5, lam, 0.25)
    got, _ = quad(
        lambda x: x**0.25 * stable_density_series(p, x), 0.0, np.inf, limit=400
    )
    assert got == pytest.approx(want, rel=1e-5)


def test_stable_moment_domain():
    with pytest.raises(ValueError):
        stable_moment(0.5, 1.0, 0.6)


# ---------------------------------------------------------------------------
# the dilute limit variable


@pytest.fixture(scope="module")
def dilute_params():
    return DiluteParams(0.5, 1.5, LAM_DILUTE)


def test_dilute_density_normalization(dilute_params):
    total, _ = quad(lambda x: dilute_Z_density(dilute_params, x), 0.0, 50.0, limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_dilute_density_boundary_behavior(dilute_params):
    # near 0 the density diverges like
    #   lam^(2-b) Gamma(1-alpha(b-1)) / (Gamma(2-b) Gamma(1-alpha)) x^(b-2)
    # (the transformed argument x^(-1/alpha) hits the polynomial tail of the
    # one-sided stable density); at the far end it decays superpolynomially.
    lam, alpha, b = dilute_params.lam, dilute_params.alpha, dilute_params.b
    c0 = (
        lam ** (2.0 - b)
        * math.gamma(1.0 - alpha * (b - 1.0))
        / (math.gamma(2.0 - b) * math.gamma(1.0 - alpha))
    )
    x = 1e-9
    assert dilute_Z_density(dilute_params, x) == pytest.approx(
        c0 * x ** (b - 2.0), rel=1e-3
    )
    assert dilute_Z_density(dilute_params, -1.0) == 0.0
    assert dilute_Z_density(dilute_params, 60.0) < 1e-8 * dilute_Z_density(dilute_params, 1.0)


def test_dilute_moment_formula_vs_quadrature(dilute_params):
    for r in (0.5, 1.0, 1.5):
        want = dilute_Z_moment(dilute_params, r)
        got, _ = quad(
            lambda x: x**r * dilute_Z_density(dilute_params, x), 0.0, 60.0, limit=400
        )
        assert got == pytest.approx(want, rel=1e-5)


def test_dilute_moment_edges(dilute_params):
    assert dilute_Z_moment(dilute_params, 0.0) == pytest.approx(1.0)
    # near the divergence boundary r = b - 2 the formula stays finite and
    # matches quadrature
    r = -0.45
    want = dilute_Z_moment(dilute_params, r)
    got, _ = quad(
        lambda x: x**r * dilute_Z_density(dilute_params, x), 0.0, 60.0, limit=500
    )
    assert got == pytest.approx(want, rel=1e-4)
    with pytest.raises(ValueError):
        dilute_Z_moment(dilute_params, -0.5)


def test_dilute_cdf_monotone(dilute_params):
    grid = np.linspace(0.05, 6.0, 30)
    vals = [dilute_Z_cdf(dilute_params, x) for x in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 1.0


def test_mixed_poisson_pmf_total(dilute_params):
    pmf = mixed_poisson_pmf(dilute_params, 1.0, 30)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-6)
    assert pmf[0] == pytest.approx(
        quad(lambda z: dilute_Z_density(dilute_params, z) * math.exp(-z), 0, 60)[0],
        rel=1e-6,
    )


# ---------------------------------------------------------------------------
# extreme-value laws


def test_frechet_forced_point():
    # at x with mu^alpha x^(-alpha) / |Gamma(1-alpha)| = 1 the cdf is e^-1
    mu, alpha = 1.0, 1.5
    x = (-1.0 / math.gamma(1.0 - alpha)) ** (1.0 / alpha)
    law = frechet_law(mu, alpha, 1)
    assert law.cdf(x) == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_frechet_cdf_limits():
    law = frechet_law(2.0, 1.5, 1)
    assert law.cdf(1e9) == pytest.approx(1.0, abs=1e-9)
    assert law.cdf(1e-9) == pytest.approx(0.0, abs=1e-12)


def test_frechet_rank2_density_normalizes():
    law = frechet_law(1.3, 1.5, 2)
    total, _ = quad(lambda x: float(law.pdf(x)), 0.0, np.inf, limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_frechet_pdf_matches_cdf_derivative():
    law = frechet_law(1.0, 1.7, 3)
    for x in (0.4, 1.0, 2.5):
        h = 1e-6
        num = (law.cdf(x + h) - law.cdf(x - h)) / (2 * h)
        assert float(law.pdf(x)) == pytest.approx(float(num), rel=1e-5)


def test_frechet_rejects_alpha_two():
    with pytest.raises(ValueError):
        frechet_law(1.0, 2.0, 1)


def test_gumbel_points():
    assert gumbel_cdf(0.0) == pytest.approx(math.exp(-1.0))
    assert gumbel_cdf(40.0) == pytest.approx(1.0)
    assert gumbel_cdf(-math.log(math.log(2.0))) == pytest.approx(0.5, rel=1e-12)


# ---------------------------------------------------------------------------
# the point process of rescaled component sizes


def test_pp_intensity_direct_gamma_eval():
    # alpha = 1/2, b = 3/2: intensity(1/2) = 2^1.5 * 2^0.75 / B(1/2, 1/4)
    alpha, b = 0.5, 1.5
    B = math.gamma(0.5) * math.gamma(0.25) / math.gamma(0.75)
    want = (0.5 ** -1.5) * (0.5 ** -0.75) / B
    assert pp_intensity(alpha, b, 0.5) == pytest.approx(want, rel=1e-12)


def test_pp_intensity_domain():
    with pytest.raises(ValueError):
        pp_intensity(0.5, 1.5, 0.0)
    assert pp_intensity(0.5, 1.5, 1.0) == math.inf


def test_pp_mean_count_diverges_near_zero():
    vals = [pp_intensity_integral(0.5, 1.5, x) for x in (0.2, 0.05, 0.01)]
    assert vals[0] < vals[1] < vals[2]
    assert pp_intensity_integral(0.5, 1.5, 0.0) == math.inf
    assert pp_factorial_moment(0.5, 1.5, (0.0, 1.0), 1) == math.inf


def test_pp_m1_matches_intensity_integral():
    # definitional consistency: the first factorial moment equals the
    # intensity integral (two different gamma-prefactor routes), both
    # agreeing with a frozen 30-digit endpoint-substituted oracle
    oracle = {0.2: 1.216460678941, 0.4: 0.894577913337, 0.7: 0.629365666454}
    for x0, want in oracle.items():
        via_moment = pp_factorial_moment(0.5, 1.5, (x0, 1.0), 1)
        via_intensity = pp_intensity_integral(0.5, 1.5, x0)
        assert via_moment == pytest.approx(via_intensity, rel=1e-10)
        assert via_moment == pytest.approx(want, rel=1e-8)


def test_pp_m2_monte_carlo_quadrature_oracle():
    # MC integration of the 2-d kernel over the triangle corner
    alpha, b, x0 = 0.5, 1.5, 0.4
    rng = np.random.default_rng(42)
    m = 400_000
    ys = rng.uniform(x0, 1.0, size=(m, 2))
    s = ys.sum(axis=1)
    mask = s <= 1.0
    c2 = alpha * (3.0 - b)
    vals = np.zeros(m)
    vals[mask] = (1.0 - s[mask]) ** (c2 - 1.0) / (ys[mask, 0] * ys[mask, 1]) ** (alpha + 1.0)
    integral_mc = vals.mean() * (1.0 - x0) ** 2
    from scipy.special import gammaln

    pref = math.exp(
        2 * math.log(alpha)
        - 2 * gammaln(1.0 - alpha)
        + gammaln(1.0 + alpha * (1.0 - b))
        + gammaln(4.0 - b)
        - gammaln(1.0 + alpha * (3.0 - b))
        - gammaln(2.0 - b)
    )
    want = pp_factorial_moment(alpha, b, (x0, 1.0), 2)
    assert pref * integral_mc == pytest.approx(want, rel=1e-2)


def test_all_cdfs_monotone_densities_nonneg():
    p = StableParams(1.5, GAMMA_DENSE_15, -1.0)
    xs = np.linspace(-8, 4, 61)
    dens = [stable_density_series(p, x) for x in xs]
    assert all(d >= 0 for d in dens)
    law = frechet_law(1.1, 1.5, 1)
    cdfs = law.cdf(np.linspace(0.01, 20, 50))
    assert all(b >= a for a, b in zip(cdfs, cdfs[1:]))
