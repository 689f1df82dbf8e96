import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from funcdist.econometrics.probit import (average_marginal_effects, design, hessian, loglik, probit_fit,
                                          score, score_obs)
from funcdist.econometrics.results import EstimationError, RegressionSpec, SeparationError


def toy(seed=0, n=50, b=(0.3, 0.8)):
    r = np.random.default_rng(seed)
    x = r.normal(size=n)
    y = (b[0] + b[1] * x + r.normal(size=n) > 0).astype(int)
    return pd.DataFrame({"x": x, "y": y})


def grid_argmax(X, y):
    """Brute-force 2-parameter search: coarse pass, then a 1e-3 grid around the best cell."""
    def best(a_vals, b_vals):
        A, B = np.meshgrid(a_vals, b_vals, indexing="ij")
        betas = np.stack([A.ravel(), B.ravel()], axis=1)
        ll = np.array([loglik(bt, X, y) for bt in betas])
        return betas[np.argmax(ll)]
    c = best(np.arange(-3, 3, 0.05), np.arange(-3, 3, 0.05))
    return best(np.arange(c[0] - 0.06, c[0] + 0.06, 1e-3), np.arange(c[1] - 0.06, c[1] + 0.06, 1e-3))


def test_mle_matches_grid():
    df = toy()
    res = probit_fit(df, RegressionSpec("g", "y", ("x",), model="Probit"))
    X = np.column_stack([np.ones(50), df["x"]])
    np.testing.assert_allclose(res.coef, grid_argmax(X, df["y"].to_numpy(float)), atol=1e-3)


@pytest.mark.parametrize("seed", range(5))
def test_score_zero_at_mle(seed):
    res = probit_fit(toy(seed, 300), RegressionSpec("s", "y", ("x",), model="Probit"))
    assert res.extra["max_abs_score"] < 1e-6


def test_symmetric_data_zero_slope():
    x = np.array([-2, -1, 1, 2] * 10, dtype=float)
    y = np.array([0, 1, 0, 1] * 10)
    df = pd.DataFrame({"x": np.r_[x, x], "y": np.r_[y, 1 - y]})
    res = probit_fit(df, RegressionSpec("sym", "y", ("x",), model="Probit"))
    assert abs(res["x"]) < 1e-6


def test_analytic_derivatives(rng):
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    y = (rng.random(40) < 0.4).astype(float)
    b = np.array([0.1, -0.4, 0.7])
    h = 1e-6
    num_g = [(loglik(b + h * e, X, y) - loglik(b - h * e, X, y)) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(score(b, X, y), num_g, rtol=1e-6)
    num_h = np.array([(score(b + h * e, X, y) - score(b - h * e, X, y)) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(hessian(b, X, y), num_h, rtol=1e-5, atol=1e-6)


def test_continuous_ame_finite_difference():
    df = toy(3, 400)
    res = probit_fit(df, RegressionSpec("a", "y", ("x",), model="Probit"))
    X = np.column_stack([np.ones(400), df["x"]])
    h = 1e-5
    up, dn = X.copy(), X.copy()
    up[:, 1] += h
    dn[:, 1] -= h
    num = (norm.cdf(up @ res.coef).mean() - norm.cdf(dn @ res.coef).mean()) / (2 * h)
    assert res.ame["x"] == pytest.approx(num, abs=1e-6)


def test_indicator_ame_is_discrete_change(rng):
    n = 300
    df = pd.DataFrame({"x": rng.normal(size=n), "d": (rng.random(n) < 0.5).astype(int)})
    df["y"] = (0.2 + 0.5 * df["x"] - 0.6 * df["d"] + rng.normal(size=n) > 0).astype(int)
    res = probit_fit(df, RegressionSpec("d", "y", ("x", "d"), model="Probit"))
    X = np.column_stack([np.ones(n), df["x"], df["d"]])
    X1, X0 = X.copy(), X.copy()
    X1[:, 2], X0[:, 2] = 1, 0
    assert res.ame["d"] == np.mean(norm.cdf(X1 @ res.coef) - norm.cdf(X0 @ res.coef))


def test_ame_delta_method(rng):
    X = np.column_stack([np.ones(200), rng.normal(size=200)])
    b = np.array([0.2, 0.5])
    cov = np.array([[0.01, 0.002], [0.002, 0.02]])
    ame, se = average_marginal_effects(b, X, ["Intercept", "x"], ["x"], cov)
    h = 1e-6
    grad = [(average_marginal_effects(b + h * e, X, ["Intercept", "x"], ["x"])[0]["x"]
             - average_marginal_effects(b - h * e, X, ["Intercept", "x"], ["x"])[0]["x"]) / (2 * h)
            for e in np.eye(2)]
    grad = np.array(grad)
    assert se["x"] == pytest.approx(np.sqrt(grad @ cov @ grad), rel=1e-5)


def test_clustered_covariance_by_hand():
    df = toy(4, 200)
    df["g"] = np.arange(200) % 7
    res = probit_fit(df, RegressionSpec("c", "y", ("x",), cluster="g", model="Probit"))
    X = np.column_stack([np.ones(200), df["x"]])
    y = df["y"].to_numpy(float)
    s = score_obs(res.coef, X, y)
    Hinv = np.linalg.inv(-hessian(res.coef, X, y))
    meat = sum(np.outer(s[df["g"] == g].sum(0), s[df["g"] == g].sum(0)) for g in range(7))
    np.testing.assert_allclose(res.cov, 7 / 6 * Hinv @ meat @ Hinv, atol=1e-10)
    assert res.df_resid is None


def test_fixed_effect_dummies():
    df = toy(5, 300)
    df["yr"] = np.arange(300) % 3
    res = probit_fit(df, RegressionSpec("fe", "y", ("x",), ("yr",), model="Probit"))
    assert res.names == ["Intercept", "x", "yr[1]", "yr[2]"]
    X, names = design(df, res.spec)
    assert X.shape == (300, 4) and names == res.names


def test_separation_detected():
    x = np.linspace(-1, 1, 40)
    df = pd.DataFrame({"x": x, "y": (x > 0).astype(int)})
    with pytest.raises(SeparationError):
        probit_fit(df, RegressionSpec("sep", "y", ("x",), model="Probit"))


def test_bad_dependents():
    df = toy()
    df["y2"] = df["y"] * 2
    with pytest.raises(EstimationError):
        probit_fit(df, RegressionSpec("nb", "y2", ("x",), model="Probit"))
    df["one"] = 1
    with pytest.raises(SeparationError):
        probit_fit(df, RegressionSpec("nv", "one", ("x",), model="Probit"))


def test_pseudo_r2_range():
    res = probit_fit(toy(6, 500), RegressionSpec("r", "y", ("x",), model="Probit"))
    assert 0 < res.pseudo_r2 < 1
