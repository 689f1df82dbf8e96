"""Synthetic deal panels with planted effects of industry distance."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
import pandas as pd

from .events import EST_GAP, EST_LENGTH, combine_car, market_model_car
from .ols import orthogonalize

PAIR_FE = ("year", "acq_ind", "tgt_ind")

DEAL_CONTROLS = ("diversify", "hostile", "high_tech", "tender", "stock_deal", "relative_size")
ACQ_CONTROLS = ("acq_size", "acq_q", "acq_lev", "acq_cf")
TGT_CONTROLS = ("tgt_size", "tgt_q", "tgt_lev", "tgt_cf")


@dataclass(frozen=True)
class DealRecord:
    deal_id: int
    year: int
    acq_ind: int
    tgt_ind: int
    completed: int
    diversify: int
    hostile: int
    high_tech: int
    tender: int
    stock_deal: int
    relative_size: float
    acq_size: float
    acq_q: float
    acq_lev: float
    acq_cf: float
    tgt_size: float
    tgt_q: float
    tgt_lev: float
    tgt_cf: float
    public_acq: int
    public_tgt: int
    survival_t1: int
    survival_t2: int
    car_m1_0_eq: float
    car_m1_p1_eq: float
    car_m1_p1_vw: float


DEAL_FIELDS = tuple(f.name for f in fields(DealRecord))


def _default_completion():
    return {"Intercept": 1.4, "log_d_U": -1.0, "log_d_TF": 0.0, "hostile": -1.5,
            "tender": 0.3, "diversify": -0.1, "high_tech": 0.05, "stock_deal": 0.05,
            "relative_size": -0.1}


def _default_survival():
    return {"Intercept": 1.2, "log_d_U": -0.8, "log_d_TF": 0.0, "acq_size": 0.05,
            "acq_cf": 0.5, "hostile": -0.2}


def _default_car():
    # coefficients of the total abnormal return over the (-1, +1) window
    return {"Intercept": 0.01, "log_d_U": -0.03, "log_d_TF": 0.0, "tender": 0.01, "hostile": 0.01}


@dataclass(frozen=True)
class DGPParams:
    """Planted parameters of the synthetic deal-generating process.

    Pair-year counts are Poisson with log mean

        lambda0 + gamma_count*log d_U + gamma_tf*log d_TF
        + gamma_int*log d_U*resid + year, acquiror and target effects + u,

    where resid is log d_TF orthogonalized on log d_U and the three FE, and
    u ~ N(0, count_noise_sd^2). Completion and survival are probits on the
    named coefficients; missing names have coefficient 0.
    """

    lambda0: float = 6.0
    gamma_count: float = -3.0
    gamma_tf: float = 0.0
    gamma_int: float = -4.0
    count_noise_sd: float = 0.3
    year_effect_sd: float = 0.2
    industry_effect_sd: float = 0.3
    n_deals: int = 3000
    completion: dict = field(default_factory=_default_completion)
    survival_t1: dict = field(default_factory=_default_survival)
    survival_t2: dict = field(default_factory=lambda: {**_default_survival(), "Intercept": 0.8})
    car: dict = field(default_factory=_default_car)
    car_noise_sd: float = 0.02
    simulate_returns: bool = True

    def __post_init__(self):
        for name in ("lambda0", "gamma_count", "gamma_tf", "gamma_int", "count_noise_sd"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for block in (self.completion, self.survival_t1, self.survival_t2, self.car):
            if not all(np.isfinite(v) for v in block.values()):
                raise ValueError("planted coefficients must be finite")
        if self.n_deals < 0 or self.count_noise_sd < 0:
            raise ValueError("n_deals and count_noise_sd must be non-negative")


def add_tf_residual(panel: pd.DataFrame) -> pd.DataFrame:
    """Add tf_resid (log d_TF net of log d_U and FE) and the interaction column."""
    out = panel.copy()
    out["tf_resid"] = orthogonalize("log_d_TF", ["log_d_U"], list(PAIR_FE), out)
    out["interaction"] = out["log_d_U"] * out["tf_resid"]
    return out


def _index(coefs: dict, frame: pd.DataFrame) -> np.ndarray:
    xb = np.full(len(frame), float(coefs.get("Intercept", 0.0)))
    for name, b in coefs.items():
        if name != "Intercept":
            xb += b * frame[name].to_numpy(dtype=float)
    return xb


def _simulate_car(rng, abnormal_total, n_days_pre=EST_LENGTH + EST_GAP):
    """Market-model CARs from simulated daily returns.

    ``abnormal_total`` is split over days -1, 0, +1 as 1/3 each.
    """
    n = len(abnormal_total)
    event = n_days_pre
    length = n_days_pre + 2
    market = rng.normal(0.0004, 0.01, size=(n, length))
    alpha = rng.normal(0.0, 0.0005, size=n)
    beta = rng.uniform(0.5, 1.5, size=n)
    stock = alpha[:, None] + beta[:, None] * market + rng.normal(0, 0.015, size=(n, length))
    stock[:, event - 1:event + 2] += (abnormal_total / 3.0)[:, None]
    car_01 = np.empty(n)
    car_11 = np.empty(n)
    for i in range(n):
        car_01[i] = market_model_car(stock[i], market[i], event, (-1, 0))
        car_11[i] = market_model_car(stock[i], market[i], event, (-1, 1))
    return car_01, car_11


def generate_synthetic_deals(distances: pd.DataFrame, params: DGPParams | None = None,
                             seed: int = 0):
    """Return (count panel, deals) drawn from the planted process.

    ``distances`` is a long panel with year, acq_ind, tgt_ind, log_d_U and
    log_d_TF. The count panel has one row per pair-year; ``deals`` has one
    row per DealRecord.
    """
    params = params or DGPParams()
    need = ["year", "acq_ind", "tgt_ind", "log_d_U", "log_d_TF"]
    missing = [c for c in need if c not in distances.columns]
    if missing:
        raise KeyError(f"distance panel lacks {missing}")
    if distances[need].isna().any().any():
        raise ValueError("distance panel has missing values")
    rng = np.random.default_rng(seed)
    panel = distances[need].sort_values(["year", "acq_ind", "tgt_ind"]).reset_index(drop=True)
    panel = add_tf_residual(panel)

    years = np.sort(panel["year"].unique())
    inds = np.sort(np.union1d(panel["acq_ind"].unique(), panel["tgt_ind"].unique()))
    fe_year = dict(zip(years, rng.normal(0, params.year_effect_sd, len(years))))
    fe_acq = dict(zip(inds, rng.normal(0, params.industry_effect_sd, len(inds))))
    fe_tgt = dict(zip(inds, rng.normal(0, params.industry_effect_sd, len(inds))))
    log_mu = (params.lambda0
              + params.gamma_count * panel["log_d_U"].to_numpy()
              + params.gamma_tf * panel["log_d_TF"].to_numpy()
              + params.gamma_int * panel["interaction"].to_numpy()
              + panel["year"].map(fe_year).to_numpy()
              + panel["acq_ind"].map(fe_acq).to_numpy()
              + panel["tgt_ind"].map(fe_tgt).to_numpy()
              + rng.normal(0, params.count_noise_sd, len(panel)))
    panel["n_deals"] = rng.poisson(np.exp(log_mu))
    panel["log_count"] = np.log1p(panel["n_deals"])
    panel["pair_id"] = panel["acq_ind"] * 100 + panel["tgt_ind"]
    counts = panel[["year", "acq_ind", "tgt_ind", "pair_id", "n_deals", "log_count"]]

    deals = _draw_deals(rng, panel, params)
    return counts, deals


def _draw_deals(rng, panel, params: DGPParams) -> pd.DataFrame:
    n = params.n_deals
    if n == 0:
        return pd.DataFrame(columns=list(DEAL_FIELDS))
    w = panel["n_deals"].to_numpy(dtype=float) + 1.0
    pick = rng.choice(len(panel), size=n, p=w / w.sum())
    d = panel.iloc[pick][["year", "acq_ind", "tgt_ind", "log_d_U", "log_d_TF"]].reset_index(drop=True)
    same = (d["acq_ind"] == d["tgt_ind"]).to_numpy()
    d["diversify"] = np.where(same, rng.random(n) < 0.3, True).astype(int)
    d["hostile"] = (rng.random(n) < 0.03).astype(int)
    d["high_tech"] = (rng.random(n) < 0.25).astype(int)
    d["tender"] = (rng.random(n) < 0.08).astype(int)
    d["stock_deal"] = (rng.random(n) < 0.2).astype(int)
    d["relative_size"] = rng.lognormal(-1.5, 1.0, n)
    d["acq_size"] = rng.normal(7.0, 1.5, n)
    d["acq_q"] = rng.lognormal(0.6, 0.5, n)
    d["acq_lev"] = rng.uniform(0.0, 0.6, n)
    d["acq_cf"] = rng.normal(0.02, 0.1, n)
    d["tgt_size"] = rng.normal(5.5, 1.5, n)
    d["tgt_q"] = rng.lognormal(0.8, 0.6, n)
    d["tgt_lev"] = rng.uniform(0.0, 0.6, n)
    d["tgt_cf"] = rng.normal(-0.01, 0.12, n)
    d["public_acq"] = (rng.random(n) < 0.4).astype(int)
    d["public_tgt"] = (d["public_acq"].to_numpy() * (rng.random(n) < 0.4)).astype(int)

    for name, coefs in (("completed", params.completion), ("survival_t1", params.survival_t1),
                        ("survival_t2", params.survival_t2)):
        d[name] = (_index(coefs, d) + rng.standard_normal(n) > 0).astype(int)

    car_acq_total = _index(params.car, d) + rng.normal(0, params.car_noise_sd, n)
    car_tgt_total = _index(params.car, d) + rng.normal(0, params.car_noise_sd, n)
    if params.simulate_returns:
        a01, a11 = _simulate_car(rng, car_acq_total)
        t01, t11 = _simulate_car(rng, car_tgt_total)
    else:
        a01, a11 = car_acq_total * 2 / 3, car_acq_total
        t01, t11 = car_tgt_total * 2 / 3, car_tgt_total
    mv_acq, mv_tgt = np.exp(d["acq_size"].to_numpy()), np.exp(d["tgt_size"].to_numpy())
    d["car_m1_0_eq"] = [combine_car(a, t) for a, t in zip(a01, t01)]
    d["car_m1_p1_eq"] = [combine_car(a, t) for a, t in zip(a11, t11)]
    d["car_m1_p1_vw"] = [combine_car(a, t, ma, mt, "value")
                         for a, t, ma, mt in zip(a11, t11, mv_acq, mv_tgt)]
    d["deal_id"] = np.arange(1, n + 1)
    return d[list(DEAL_FIELDS)]
