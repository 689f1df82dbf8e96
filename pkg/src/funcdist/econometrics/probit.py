"""Probit maximum likelihood by Newton-Raphson, with average marginal effects."""

from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.special import log_ndtr, ndtr
from scipy.stats import norm

from .ols import cluster_meat, dummy_matrix, prepare, _check_rank
from .results import ConvergenceError, EstimationError, RegressionResult, RegressionSpec, SeparationError

MAX_ITER = 100
SCORE_TOL = 1e-8
# |x'b| beyond this on every observation means the likelihood is flat at 0
SEPARATION_INDEX = 8.0


def loglik(beta, X, y) -> float:
    q = 2.0 * y - 1.0
    return float(log_ndtr(q * (X @ beta)).sum())


def _mills(beta, X, y):
    q = 2.0 * y - 1.0
    xb = X @ beta
    # phi(q xb) / Phi(q xb), computed in logs for the tails
    lam = q * np.exp(norm.logpdf(xb) - log_ndtr(q * xb))
    return xb, lam


def score_obs(beta, X, y) -> np.ndarray:
    _, lam = _mills(beta, X, y)
    return lam[:, None] * X


def score(beta, X, y) -> np.ndarray:
    return score_obs(beta, X, y).sum(axis=0)


def hessian(beta, X, y) -> np.ndarray:
    xb, lam = _mills(beta, X, y)
    w = lam * (lam + xb)
    return -(X * w[:, None]).T @ X


def _check_separation(beta, X, y):
    """A fitted index that classifies every observation strictly has no finite MLE."""
    q = 2.0 * y - 1.0
    if np.all(q * (X @ beta) > 0):
        raise SeparationError("perfect separation: the fitted index classifies every observation")


def newton(X, y, max_iter=MAX_ITER, tol=SCORE_TOL):
    """Maximize the probit log-likelihood; returns (beta, iterations)."""
    beta = np.zeros(X.shape[1])
    ll = loglik(beta, X, y)
    for it in range(1, max_iter + 1):
        g = score(beta, X, y)
        if np.max(np.abs(g)) < tol:
            _check_separation(beta, X, y)
            return beta, it - 1
        H = hessian(beta, X, y)
        try:
            direction = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError as exc:
            raise EstimationError("singular probit Hessian") from exc
        step = 1.0
        while True:
            cand = beta + step * direction
            ll_new = loglik(cand, X, y)
            # tolerate rounding-level decreases near the optimum
            if ll_new >= ll - 1e-12 * max(abs(ll), 1.0) or step < 1e-10:
                break
            step /= 2.0
        beta, ll = cand, ll_new
        if np.min(np.abs(X @ beta)) > SEPARATION_INDEX:
            raise SeparationError("perfect separation: fitted probabilities are all 0 or 1")
    g = score(beta, X, y)
    if np.max(np.abs(g)) < tol:
        _check_separation(beta, X, y)
        return beta, max_iter
    if np.abs(X @ beta).max() > SEPARATION_INDEX:
        raise SeparationError("coefficients diverge; data appear (quasi-)separated")
    raise ConvergenceError(f"probit did not converge in {max_iter} iterations")


def is_indicator(col: np.ndarray) -> bool:
    vals = np.unique(col)
    return len(vals) == 2 and set(vals.tolist()) <= {0.0, 1.0}


def average_marginal_effects(beta, X, names, targets, cov=None):
    """AME and delta-method SE for each name in ``targets``.

    Indicators use the mean discrete change Phi(x'b | d=1) - Phi(x'b | d=0);
    other regressors use mean phi(x'b) * b_k.
    """
    ame, ame_se = {}, {}
    xb = X @ beta
    pdf = norm.pdf(xb)
    for name in targets:
        k = names.index(name)
        if is_indicator(X[:, k]):
            X1, X0 = X.copy(), X.copy()
            X1[:, k], X0[:, k] = 1.0, 0.0
            xb1, xb0 = X1 @ beta, X0 @ beta
            ame[name] = float(np.mean(ndtr(xb1) - ndtr(xb0)))
            grad = (norm.pdf(xb1)[:, None] * X1 - norm.pdf(xb0)[:, None] * X0).mean(axis=0)
        else:
            ame[name] = float(np.mean(pdf) * beta[k])
            grad = -(pdf * xb * beta[k])[:, None] * X
            grad = grad.mean(axis=0)
            grad[k] += pdf.mean()
        if cov is not None:
            ame_se[name] = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    return ame, ame_se


def design(frame: pd.DataFrame, spec: RegressionSpec):
    """[Intercept, regressors, FE dummies (first level dropped)]."""
    X = frame[list(spec.regressors)].to_numpy(dtype=float)
    D, dnames = dummy_matrix(frame, spec.fe, drop_first=True)
    X = np.hstack([np.ones((len(frame), 1)), X, D])
    return X, ["Intercept", *spec.regressors, *dnames]


def probit_fit(data: pd.DataFrame, spec: RegressionSpec, max_iter=MAX_ITER, tol=SCORE_TOL) -> RegressionResult:
    frame = prepare(data, spec)
    y = frame[spec.dependent].to_numpy(dtype=float)
    if not set(np.unique(y).tolist()) <= {0.0, 1.0}:
        raise EstimationError(f"dependent {spec.dependent!r} is not binary")
    if len(np.unique(y)) < 2:
        raise SeparationError(f"dependent {spec.dependent!r} has no variation")
    X, names = design(frame, spec)
    n, k = X.shape
    if n <= k:
        raise EstimationError(f"{n} observations for {k} parameters")
    _check_rank(X, names)

    beta, iterations = newton(X, y, max_iter, tol)
    H = hessian(beta, X, y)
    Hinv = np.linalg.inv(-H)
    n_clusters = None
    if spec.cluster:
        cl = frame[spec.cluster].to_numpy()
        G = len(np.unique(cl))
        if G < 2:
            raise EstimationError("clustered covariance needs at least 2 clusters")
        meat = cluster_meat(score_obs(beta, X, y), cl)
        cov = G / (G - 1) * Hinv @ meat @ Hinv
        n_clusters = G
    else:
        cov = Hinv
    cov = (cov + cov.T) / 2.0

    ll = loglik(beta, X, y)
    p = y.mean()
    ll0 = n * (p * np.log(p) + (1 - p) * np.log(1 - p))
    ame, ame_se = average_marginal_effects(beta, X, names, list(spec.regressors), cov)
    return RegressionResult(
        spec=spec, names=names, coef=beta, se=np.sqrt(np.clip(np.diag(cov), 0.0, None)), cov=cov, n_obs=n,
        df_resid=None, n_clusters=n_clusters, pseudo_r2=1.0 - ll / ll0, loglik=ll,
        ame=ame, ame_se=ame_se, iterations=iterations,
        extra={"max_abs_score": float(np.max(np.abs(score(beta, X, y))))},
    )
