import json
import math

import pytest

import extremal


def test_version_and_efficiency():
    assert extremal.__version__
    assert extremal.relative_efficiency(1.0, 0.0) == pytest.approx(0.5)
    assert 0.0 < extremal.relative_efficiency(0.5, 0.1) < 1.0


def test_simulate_and_sp_estimate():
    x = extremal.simulate("maxar:0.5", 5000, 11)
    assert len(x) == 5000
    assert x == extremal.simulate("maxar:0.5", 5000, 11)
    est = extremal.sp_estimate(x, 20)
    assert 0.3 < est["theta"] < 0.8
    g = extremal.transform_margins(x, "frechet", "gumbel")
    assert extremal.sp_estimate(g, 20)["theta"] == est["theta"]


def test_oracle():
    o = extremal.theta_oracle("maxar:0.5", 20)
    assert o["theta_b"] == pytest.approx(0.525)
    assert o["theta_limit"] == pytest.approx(0.5)


def test_vhat_and_block_maxima():
    x = extremal.simulate("maxar:0.7", 400, 2)
    assert len(extremal.block_maxima(x, 20, "disjoint")) == 20
    v = extremal.compute_vhat(x, 20, "sliding")
    assert v.b == 20 and v.scheme == "sliding"
    assert all(u > 0.0 for u in v.vhat)
    assert 1 <= min(v.ranks) and max(v.ranks) <= 400 - 20 + 1


def test_error_codes():
    with pytest.raises(extremal.ExtremalError) as err:
        extremal.sp_estimate([1.0, 2.0, 3.0], 0)
    assert err.value.code == "invalid-block-size"
    with pytest.raises(extremal.ExtremalError) as err:
        extremal.sp_estimate([1.0, float("nan"), 3.0], 1)
    assert err.value.code == "invalid-series"


def test_gev_fit():
    p = extremal.GevParams(1.0, 2.0, 0.1)
    xs = [extremal.gev_quantile((k + 0.5) / 2000, p) for k in range(2000)]
    fit = extremal.gev_fit(xs)
    assert fit.converged
    assert fit.params.mu == pytest.approx(1.0, abs=0.1)
    assert fit.params.sigma == pytest.approx(2.0, rel=0.05)
    assert fit.params.xi == pytest.approx(0.1, abs=0.05)
    assert extremal.gev_cdf(extremal.gev_quantile(0.3, p), p) == pytest.approx(0.3)


def test_quantile_ci():
    x = extremal.simulate("maxar:0.5", 5000, 4)
    q = extremal.quantile_ci(x, 20, 0.01)
    assert q["lower"] < q["estimate"] < q["upper"]


def test_run_study():
    cfg = {
        "processes": ["maxar:0.5"],
        "m": 1000,
        "reps": 3,
        "block_sizes": [20],
        "estimators": ["sp_disjoint", "sp_sliding"],
        "seed": 7,
    }
    text = extremal.run_study(json.dumps(cfg))
    lines = text.strip().splitlines()
    assert len(lines) == 3
    header = lines[0].split(",")
    assert "rmse" in header
    assert text == extremal.run_study(json.dumps(cfg))


def test_scan():
    x = extremal.simulate("maxar:0.5", 3000, 5)
    lines = extremal.block_size_scan(x, [10, 20, 40]).strip().splitlines()
    assert len(lines) == 4
    assert not any(math.isnan(v) for v in extremal.simulate("cauchy_ar1:0.7", 100, 1))
