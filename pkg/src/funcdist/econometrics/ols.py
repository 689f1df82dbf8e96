"""OLS with absorbed fixed effects and cluster-robust covariance."""

from __future__ import annotations

import numpy as np
import pandas as pd

from .results import CollinearityError, EstimationError, RegressionResult, RegressionSpec

_MAP_TOL = 1e-14
_MAP_MAX_ITER = 10_000


def _codes(frame: pd.DataFrame, fe) -> list[np.ndarray]:
    return [pd.factorize(frame[c], sort=True)[0] for c in fe]


def demean(values: np.ndarray, groups: list[np.ndarray]) -> np.ndarray:
    """Project out group means for one or more FE dimensions.

    A single dimension is removed exactly; several dimensions use
    alternating projections until the update falls below 1e-14 relative.
    """
    M = np.array(values, dtype=float, copy=True)
    squeeze = M.ndim == 1
    if squeeze:
        M = M[:, None]
    if not groups:
        return M[:, 0] if squeeze else M
    counts = [np.bincount(g).astype(float) for g in groups]

    def sweep(A):
        for g, c in zip(groups, counts):
            sums = np.zeros((len(c), A.shape[1]))
            np.add.at(sums, g, A)
            A -= (sums / c[:, None])[g]
        return A

    M = sweep(M)
    if len(groups) > 1:
        scale = max(np.abs(M).max(), 1.0)
        for _ in range(_MAP_MAX_ITER):
            prev = M.copy()
            M = sweep(M)
            if np.abs(M - prev).max() <= _MAP_TOL * scale:
                break
        else:
            raise EstimationError("fixed-effect demeaning did not converge")
    return M[:, 0] if squeeze else M


def dummy_matrix(frame: pd.DataFrame, fe, drop_first: bool = True) -> tuple[np.ndarray, list[str]]:
    """Explicit indicator columns for each FE dimension."""
    blocks, names = [], []
    for col in fe:
        levels = np.sort(frame[col].unique())
        keep = levels[1:] if drop_first else levels
        blocks.append((frame[col].to_numpy()[:, None] == keep[None, :]).astype(float))
        names += [f"{col}[{v}]" for v in keep]
    if not blocks:
        return np.zeros((len(frame), 0)), []
    return np.hstack(blocks), names


def fe_dof(frame: pd.DataFrame, fe) -> int:
    """Rank of [1, FE dummies]: parameters absorbed by the fixed effects."""
    if not fe:
        return 0
    D, _ = dummy_matrix(frame, fe, drop_first=True)
    return int(np.linalg.matrix_rank(np.hstack([np.ones((len(frame), 1)), D])))


def _check_rank(X, names):
    if X.shape[1] == 0:
        return
    norms = np.linalg.norm(X, axis=0)
    for j, nrm in enumerate(norms):
        if not nrm > 1e-12 * np.sqrt(len(X)):
            raise CollinearityError(f"regressor {names[j]!r} is absorbed by the fixed effects")
    Xn = X / norms
    s = np.linalg.svd(Xn, compute_uv=False)
    if s[-1] < 1e-10 * s[0]:
        raise CollinearityError(f"regressors {names} are collinear after absorbing fixed effects")


def cluster_meat(scores: np.ndarray, clusters: np.ndarray) -> np.ndarray:
    """Sum over clusters of (sum of scores in g)(sum of scores in g)'."""
    codes = pd.factorize(clusters, sort=True)[0]
    S = np.zeros((codes.max() + 1, scores.shape[1]))
    np.add.at(S, codes, scores)
    return S.T @ S


def prepare(data: pd.DataFrame, spec: RegressionSpec) -> pd.DataFrame:
    missing = [c for c in spec.columns() if c not in data.columns]
    if missing:
        raise KeyError(f"spec {spec.name!r} references missing columns {missing}")
    frame = data
    if spec.sample:
        frame = frame.loc[frame[spec.sample].astype(bool)]
    frame = frame[spec.columns()]
    if frame.isna().any().any():
        frame = frame.dropna()
    return frame.reset_index(drop=True)


def ols_fe(data: pd.DataFrame, spec: RegressionSpec) -> RegressionResult:
    """OLS of ``spec.dependent`` on ``spec.regressors`` with absorbed FE.

    Without FE an intercept is estimated. With clustering the covariance is
    the sandwich scaled by G/(G-1) * (N-1)/(N-K), with K counting slopes plus
    absorbed FE parameters.
    """
    frame = prepare(data, spec)
    n = len(frame)
    y = frame[spec.dependent].to_numpy(dtype=float)
    X = frame[list(spec.regressors)].to_numpy(dtype=float)
    names = list(spec.regressors)
    if spec.fe:
        groups = _codes(frame, spec.fe)
        yw = demean(y, groups)
        Xw = demean(X, groups) if X.shape[1] else X
        absorbed = fe_dof(frame, spec.fe)
    else:
        yw, Xw = y, np.hstack([np.ones((n, 1)), X])
        names = ["Intercept"] + names
        absorbed = 0
    k = Xw.shape[1]
    K = k + absorbed
    if n <= K:
        raise EstimationError(f"{n} observations for {K} parameters")
    _check_rank(Xw, names)

    bread = np.linalg.inv(Xw.T @ Xw)
    beta = bread @ (Xw.T @ yw)
    resid = yw - Xw @ beta
    ssr = float(resid @ resid)

    n_clusters = None
    if spec.cluster:
        cl = frame[spec.cluster].to_numpy()
        G = len(np.unique(cl))
        if G < 2:
            raise EstimationError("clustered covariance needs at least 2 clusters")
        meat = cluster_meat(Xw * resid[:, None], cl)
        c = G / (G - 1) * (n - 1) / (n - K)
        cov = c * bread @ meat @ bread
        df_resid, n_clusters = G - 1, G
    else:
        cov = ssr / (n - K) * bread
        df_resid = n - K
    cov = (cov + cov.T) / 2.0

    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / tss if tss > 0 else np.nan
    r2_within = None
    if spec.fe:
        tss_w = float(yw @ yw)
        r2_within = 1.0 - ssr / tss_w if tss_w > 0 else np.nan
    return RegressionResult(
        spec=spec, names=names, coef=beta, se=np.sqrt(np.clip(np.diag(cov), 0.0, None)), cov=cov, n_obs=n,
        df_resid=df_resid, n_clusters=n_clusters, r2=r2, r2_within=r2_within,
        extra={"fe_dof": absorbed},
    )


def residualize(data: pd.DataFrame, spec: RegressionSpec) -> np.ndarray:
    """Residuals of ``spec`` (FE absorbed), aligned with the estimation sample."""
    frame = prepare(data, spec)
    res = ols_fe(frame, RegressionSpec(spec.name, spec.dependent, spec.regressors, spec.fe))
    y = frame[spec.dependent].to_numpy(dtype=float)
    X = frame[list(spec.regressors)].to_numpy(dtype=float)
    if spec.fe:
        groups = _codes(frame, spec.fe)
        return demean(y, groups) - (demean(X, groups) if X.shape[1] else X) @ res.coef
    return y - np.hstack([np.ones((len(y), 1)), X]) @ res.coef


def orthogonalize(target_var: str, conditioning_vars, fe_dims, data: pd.DataFrame) -> np.ndarray:
    """Part of ``target_var`` orthogonal to the conditioning variables and FE dummies."""
    if data[[target_var, *conditioning_vars, *fe_dims]].isna().any().any():
        raise ValueError("orthogonalize requires complete data")
    spec = RegressionSpec(f"orth:{target_var}", target_var, tuple(conditioning_vars), tuple(fe_dims))
    return residualize(data, spec)
