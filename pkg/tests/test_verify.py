"""Verifier battery at desk scale plus suite-runner plumbing: negative
controls, structured config errors, CSV/verdict outputs, determinism."""

import json
import math

import numpy as np
import pytest

from gibbs_partitions import bundled_scheme
from gibbs_partitions.verify import (
    PhaseMismatchError,
    SuiteConfigError,
    run_suite,
    verify_convergent,
    verify_dense_extremes,
    verify_dense_llt,
    verify_dilute,
    verify_extended,
    verify_mixture,
    verify_prefix_independence,
)


def test_dense_llt_trend(dense_gauss):
    reports, csvs = verify_dense_llt(dense_gauss, [250, 500, 1000], tol=0.06)
    (r,) = reports
    assert r.passed and r.trend_nonincreasing
    assert r.observed[-1] < 0.05
    header, rows = csvs[500]
    assert header[0] == "ell"
    # central-bucket sanity: discrepancy near x = 0 is below the window sup
    central = rows[np.abs(rows[:, 1]) <= 0.1]
    assert np.max(np.abs(central[:, 2] - central[:, 3])) <= r.observed[1] + 1e-15


def test_dense_llt_phase_gate(dilute):
    with pytest.raises(PhaseMismatchError):
        verify_dense_llt(dilute, [100])


def test_prefix_negative_control(single_component):
    reports, _ = verify_prefix_independence(single_component, [100, 200])
    assert not reports[0].passed
    assert reports[0].observed[-1] > 0.9


def test_convergent_negative_control():
    # a dense scheme with finite E[N]: the count law does not converge to
    # the size-biased limit, so the verifier must fail
    reports, _ = verify_convergent(bundled_scheme("dense-b3"), 400, skip_mc=True)
    by_name = {r.experiment: r for r in reports}
    assert not by_name["convergent_counts"].passed


def test_convergent_positive(convergent):
    reports, _ = verify_convergent(convergent, 600, replicates=800, seed=3)
    by_name = {r.experiment: r for r in reports}
    assert by_name["convergent_counts"].passed
    assert by_name["convergent_deficit"].passed
    assert by_name["convergent_fragments"].passed


def test_mixture_verifier(mixture):
    reports, _ = verify_mixture(mixture, [400, 800])
    by_name = {r.experiment: r for r in reports}
    split = by_name["mixture_split_probability"]
    assert split.passed
    assert split.details["winner"] == "p/(1+p)"
    assert 0.0 < split.details["observed_P"][-1] < 1.0
    assert by_name["mixture_conditional_llt"].trend_nonincreasing


def test_dense_extremes_alpha2_quantile_trend(dense_gauss):
    reports, _ = verify_dense_extremes(
        dense_gauss, [300, 600, 1200], replicates=400, seed=5
    )
    by_name = {r.experiment: r for r in reports}
    trend = by_name["dense_extremes"]
    assert trend.metric == "max-q90-shrinks"
    assert trend.passed  # rescaled maximum degenerates for alpha = 2


def test_extended_regimes_and_product():
    for name, regime in (
        ("extended-light", "base"),
        ("extended-heavy", "boltzmann"),
        ("extended-matched", "mixture"),
    ):
        reports, _ = verify_extended(bundled_scheme(name), 600)
        (r,) = reports
        assert r.details["regime"] == regime
        assert r.passed, (name, r.observed)
    reports, _ = verify_extended(bundled_scheme("product-symmetric"), 500,
                                 replicates=4000, seed=2)
    by_name = {r.experiment: r for r in reports}
    assert by_name["product_marginals"].passed
    assert by_name["product_symmetry"].passed
    assert by_name["product_marginals"].details["p"] == [0.5, 0.5]


def test_run_suite_empty(tmp_path):
    code = run_suite({"experiments": []}, tmp_path / "out")
    assert code == 0
    data = json.loads((tmp_path / "out" / "verdicts.json").read_text())
    assert data["verdicts"] == []


def test_run_suite_unknown_verifier(tmp_path):
    with pytest.raises(SuiteConfigError):
        run_suite(
            {"experiments": [{"verifier": "nope", "scheme": "dilute", "n": 10}]},
            tmp_path / "out",
        )


def test_run_suite_phase_mismatch_is_structured(tmp_path):
    with pytest.raises(PhaseMismatchError):
        run_suite(
            {"experiments": [{"verifier": "dilute", "scheme": "dense-gauss",
                              "n_ladder": [50], "replicates": 10}]},
            tmp_path / "out",
        )


def test_run_suite_parse_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiments": [,]}')
    with pytest.raises(SuiteConfigError) as err:
        run_suite(str(bad), tmp_path / "out")
    assert "line" in str(err.value)


def test_run_suite_outputs_and_determinism(tmp_path):
    cfg = {
        "seed": 77,
        "schemes": {
            "mine": {
                "v": {"kind": "explicit", "coeffs": [0.0, 1.0]},
                "w": {"kind": "closed_form", "c": 1.0, "e": 4.0, "rho": 1.0},
            }
        },
        "experiments": [
            {"id": "ctl", "verifier": "prefix_independence", "scheme": "mine",
             "n_ladder": [60, 120], "expect_fail": True},
            {"id": "llt", "verifier": "dense_llt", "scheme": "dense-gauss",
             "n_ladder": [200, 400], "tol": 0.06},
        ],
    }
    code = run_suite(cfg, tmp_path / "a")
    assert code == 0  # the expected failure counts as suite success
    assert (tmp_path / "a" / "llt" / "400.csv").exists()
    assert (tmp_path / "a" / "runtimes.json").exists()
    run_suite(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "verdicts.json").read_bytes() == (
        tmp_path / "b" / "verdicts.json"
    ).read_bytes()
    data = json.loads((tmp_path / "a" / "verdicts.json").read_text())
    ctl = [v for v in data["verdicts"] if v["experiment"].startswith("ctl")]
    assert ctl and not ctl[0]["passed"]
    assert ctl[0]["details"]["expected_outcome"] == "fail"


def test_run_suite_threads_match_serial(tmp_path):
    cfg = {
        "seed": 5,
        "experiments": [
            {"id": "a", "verifier": "dense_llt", "scheme": "dense-gauss",
             "n_ladder": [150, 300], "tol": 0.08},
            {"id": "b", "verifier": "prefix_independence", "scheme": "dense-gauss",
             "n_ladder": [60, 120]},
        ],
    }
    run_suite(cfg, tmp_path / "serial", threads=1)
    run_suite(cfg, tmp_path / "pooled", threads=4)
    assert (tmp_path / "serial" / "verdicts.json").read_bytes() == (
        tmp_path / "pooled" / "verdicts.json"
    ).read_bytes()


def test_csv_floats_have_full_precision(tmp_path):
    cfg = {
        "experiments": [
            {"id": "llt", "verifier": "dense_llt", "scheme": "dense-gauss",
             "n_ladder": [100], "tol": 0.2}
        ]
    }
    run_suite(cfg, tmp_path / "out")
    lines = (tmp_path / "out" / "llt" / "100.csv").read_text().splitlines()
    assert lines[0] == "ell,x,scaled_pmf,limit_density"
    # 17 significant digits round-trip
    val = lines[5].split(",")[2]
    assert float(val) == float(format(float(val), ".17g"))
