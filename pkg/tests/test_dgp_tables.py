import numpy as np
import pandas as pd
import pytest
from dataclasses import replace

from funcdist.econometrics.dgp import DEAL_FIELDS, DGPParams, generate_synthetic_deals
from funcdist.econometrics.ols import ols_fe
from funcdist.econometrics.results import RegressionSpec
from funcdist.econometrics.tables import (TABLES, build_table_pipeline, pair_panel, report_frame,
                                          report_json, table3_specs)
from funcdist.synthetic import distance_panel, firm_panel

YEARS = range(1990, 2022)


@pytest.fixture(scope="module")
def dist():
    return distance_panel(range(1, 13), YEARS, seed=2)


@pytest.fixture(scope="module")
def drawn(dist):
    return generate_synthetic_deals(dist, DGPParams(n_deals=1500), seed=4)


def test_distance_panel_shape(dist):
    assert len(dist) == 144 * 32
    assert (dist["d_TF"] <= dist["d_U"]).all()
    diag = dist.loc[dist["acq_ind"] == dist["tgt_ind"]]
    assert (diag["d_U"] == 1).all()


def test_firm_panel_columns():
    f = firm_panel([1, 2], [2000], 10, seed=1)
    assert len(f) == 20 and f["total_assets"].min() > 10


def test_deterministic(dist):
    a = generate_synthetic_deals(dist, DGPParams(n_deals=200, simulate_returns=False), seed=9)
    b = generate_synthetic_deals(dist, DGPParams(n_deals=200, simulate_returns=False), seed=9)
    pd.testing.assert_frame_equal(a[0], b[0])
    pd.testing.assert_frame_equal(a[1], b[1])


def test_shapes(drawn):
    counts, deals = drawn
    assert len(counts) == 4608
    assert list(deals.columns) == list(DEAL_FIELDS)
    assert len(deals) == 1500
    assert (deals["public_tgt"] <= deals["public_acq"]).all()
    np.testing.assert_allclose(counts["log_count"], np.log1p(counts["n_deals"]))


def test_null_dgp_uncorrelated(dist):
    p = DGPParams(gamma_count=0.0, gamma_int=0.0, n_deals=0)
    rs = []
    for seed in range(5):
        counts, _ = generate_synthetic_deals(dist, p, seed=seed)
        rs.append(np.corrcoef(counts["log_count"], dist.sort_values(["year", "acq_ind", "tgt_ind"])["log_d_U"])[0, 1])
    # industry effects are shared, so allow for their random correlation
    assert abs(np.mean(rs)) < 0.15


def test_planted_count_recovered(drawn, dist):
    counts, _ = drawn
    res = ols_fe(pair_panel(dist, counts), RegressionSpec("t", "log_count", ("log_d_U",),
                                                           ("year", "acq_ind", "tgt_ind"), "year"))
    lo, hi = res.conf_int()[0]
    assert res["log_d_U"] < 0 and res.pvalue[0] < 0.01


def test_bad_params():
    with pytest.raises(ValueError):
        DGPParams(gamma_count=np.nan)
    with pytest.raises(KeyError):
        generate_synthetic_deals(pd.DataFrame({"year": [1]}), DGPParams())


def test_pipeline_full(dist, drawn):
    counts, deals = drawn
    report = build_table_pipeline(dist, counts, deals)
    by_table = {t: [e for e in report if e.table == t] for t in TABLES}
    assert len(by_table["table2"]) == 2 * 32
    assert all(e.result.n_obs == 144 for e in by_table["table2"] if e.ok)
    fe3 = [e for e in by_table["table3"] if e.spec.fe == ("year", "acq_ind", "tgt_ind")]
    assert all(e.result.n_obs == 4608 for e in fe3)
    assert sum(e.ok for e in report) >= len(report) - 4
    frame = report_frame(report)
    assert {"coef", "se", "t", "stars"} <= set(frame.columns)
    assert not frame["name"].fillna("").str.contains(r"\[").any()
    import json
    assert len(json.loads(report_json(report))) == len(report)


def test_pipeline_missing_deals(dist, drawn):
    counts, _ = drawn
    report = build_table_pipeline(dist, counts, None, ("table3", "table4"))
    t3 = [e for e in report if e.table == "table3"]
    t4 = [e for e in report if e.table == "table4"]
    assert all(e.ok for e in t3)
    assert t4 and all(not e.ok and "deal" in e.error for e in t4)


def test_pipeline_empty_and_unknown(dist, drawn):
    assert build_table_pipeline(dist, drawn[0], drawn[1], ()) == []
    with pytest.raises(ValueError):
        build_table_pipeline(dist, drawn[0], drawn[1], ("table99",))


def test_failed_spec_tagged(dist, drawn):
    counts, deals = drawn
    deals = deals.assign(hostile=0)  # constant regressor collides with the intercept
    report = build_table_pipeline(dist, counts, deals, ("table4",))
    assert any(not e.ok for e in report)
    assert all(e.error.split(":")[0].endswith("Error") for e in report if not e.ok)


def test_table3_spec_tiers():
    specs = table3_specs()
    assert len(specs) == 6 and all(s.cluster == "year" for s in specs)


def test_null_dgp_size():
    p = DGPParams(gamma_count=0.0, gamma_int=0.0, n_deals=0)
    small = 0
    for s in range(20):
        d = distance_panel(seed=500 + s)
        counts, _ = generate_synthetic_deals(d, p, seed=s)
        res = ols_fe(pair_panel(d, counts), RegressionSpec("n", "log_count", ("log_d_U",),
                                                          ("year", "acq_ind", "tgt_ind"), "year"))
        small += abs(res.tstat[0]) < 1.96
    assert small >= 18
