from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats


class EstimationError(RuntimeError):
    pass


class CollinearityError(EstimationError):
    pass


class SeparationError(EstimationError):
    pass


class ConvergenceError(EstimationError):
    pass


@dataclass(frozen=True)
class RegressionSpec:
    name: str
    dependent: str
    regressors: tuple[str, ...]
    fe: tuple[str, ...] = ()
    cluster: str | None = None
    model: str = "OLS"
    # optional boolean column selecting the estimation sample
    sample: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fe", tuple(self.fe))
        if self.model not in ("OLS", "Probit"):
            raise ValueError(f"model must be 'OLS' or 'Probit', got {self.model!r}")

    def columns(self):
        cols = [self.dependent, *self.regressors, *self.fe]
        if self.cluster:
            cols.append(self.cluster)
        if self.sample:
            cols.append(self.sample)
        return list(dict.fromkeys(cols))


def stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


@dataclass
class RegressionResult:
    spec: RegressionSpec
    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    cov: np.ndarray
    n_obs: int
    # degrees of freedom for t-based inference; None means normal
    df_resid: int | None
    n_clusters: int | None = None
    r2: float | None = None
    r2_within: float | None = None
    pseudo_r2: float | None = None
    loglik: float | None = None
    ame: dict = field(default_factory=dict)
    ame_se: dict = field(default_factory=dict)
    iterations: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def tstat(self) -> np.ndarray:
        # a zero standard error leaves inference undefined
        out = np.full_like(self.coef, np.nan, dtype=float)
        np.divide(self.coef, self.se, out=out, where=self.se > 0)
        return out

    def _dist(self):
        return stats.norm if self.df_resid is None else stats.t(self.df_resid)

    @property
    def pvalue(self) -> np.ndarray:
        return 2.0 * self._dist().sf(np.abs(self.tstat))

    def conf_int(self, level: float = 0.95) -> np.ndarray:
        q = self._dist().ppf(0.5 + level / 2.0)
        return np.column_stack([self.coef - q * self.se, self.coef + q * self.se])

    def __getitem__(self, name) -> float:
        return float(self.coef[self.names.index(name)])

    def index(self, name) -> int:
        return self.names.index(name)

    def table(self) -> pd.DataFrame:
        p = self.pvalue
        df = pd.DataFrame({
            "name": self.names, "coef": self.coef, "se": self.se, "t": self.tstat,
            "p": p, "stars": [stars(v) for v in p],
        })
        if self.ame:
            df["ame"] = [self.ame.get(n, np.nan) for n in self.names]
            df["ame_se"] = [self.ame_se.get(n, np.nan) for n in self.names]
        return df

    def summary(self) -> dict:
        return {
            "spec": self.spec.name, "model": self.spec.model, "dependent": self.spec.dependent,
            "fe": list(self.spec.fe), "cluster": self.spec.cluster, "n_obs": self.n_obs,
            "n_clusters": self.n_clusters, "r2": self.r2, "r2_within": self.r2_within,
            "pseudo_r2": self.pseudo_r2, "loglik": self.loglik, **self.extra,
        }

    def to_dict(self) -> dict:
        rows = self.table().to_dict(orient="records")
        return {**self.summary(), "coefficients": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=float)
