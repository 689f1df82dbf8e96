"""Synthetic inputs: firm-year fundamentals and industry-pair distance panels."""

from __future__ import annotations

import numpy as np
import pandas as pd

from .panel import FIRM_FIELDS


def firm_panel(industries=range(1, 13), years=range(1990, 2022), firms_per_industry: int = 60,
               seed: int = 0, noise_sd: float = 0.3) -> pd.DataFrame:
    """Raw Compustat-style fundamentals with industry-specific production maps.

    Each industry maps its standardized input ratios to log Tobin's Q and to
    ROA through its own weights; industries share a common component so that
    some pairs are close and others far apart. Raw fields are backed out so
    that the derived ratios reproduce the planted values.
    """
    rng = np.random.default_rng(seed)
    industries = list(industries)
    common = rng.normal(0, 0.3, size=8)
    ind_w = {i: common + rng.normal(0, 0.25, size=8) for i in industries}
    ind_curv = {i: rng.uniform(-0.4, 0.4, size=8) for i in industries}
    ind_roa = {i: 0.5 * common[::-1] + rng.normal(0, 0.2, size=8) for i in industries}
    rows = []
    for year in years:
        for ind in industries:
            n = firms_per_industry
            log_at = rng.normal(6.0, 1.5, n)
            at = 10.0 + np.exp(log_at)
            ratios = np.column_stack([
                rng.uniform(0.01, 0.15, n),   # capex/at
                rng.uniform(0.0, 0.15, n),    # st debt/at
                rng.uniform(0.0, 0.4, n),     # lt debt/at
                rng.lognormal(-5.0, 0.6, n),  # employees/at
                rng.uniform(0.05, 0.7, n),    # ppent/at
                rng.uniform(0.0, 0.05, n),    # adv/at
                rng.uniform(0.0, 0.15, n),    # rd/at
            ])
            feats = np.column_stack([np.log(at), ratios])
            z = (feats - feats.mean(0)) / feats.std(0)
            log_q = 0.3 + np.tanh(z) @ ind_w[ind] + (z ** 2) @ ind_curv[ind] * 0.2 \
                + rng.normal(0, noise_sd, n)
            roa = 0.08 + 0.03 * np.tanh(z) @ ind_roa[ind] + rng.normal(0, 0.03, n)
            q = np.exp(log_q)
            ceq = at * rng.uniform(0.2, 0.5, n)
            txdb = at * 0.01
            mkt = np.maximum(q * at - at + ceq + txdb, 1e-6 * at)
            shares = rng.uniform(10, 500, n)
            price = mkt / shares
            capex = ratios[:, 0] * at
            oibdp = roa * at
            frame = pd.DataFrame({
                "firm_id": [f"F{ind:02d}-{j:04d}" for j in range(n)],
                "year": year, "industry_id": ind, "total_assets": at,
                "capex": capex, "st_debt": ratios[:, 1] * at, "lt_debt": ratios[:, 2] * at,
                "employees": ratios[:, 3] * at, "ppent": ratios[:, 4] * at,
                "adv_expense": ratios[:, 5] * at, "rd_expense": ratios[:, 6] * at,
                "shares_outstanding": shares, "price_close": price,
                "common_equity": ceq, "deferred_taxes": txdb, "oibdp": oibdp,
                "interest_expense": at * rng.uniform(0.0, 0.03, n),
                "income_taxes": np.maximum(oibdp, 0) * 0.25,
            })
            rows.append(frame)
    return pd.concat(rows, ignore_index=True)[list(FIRM_FIELDS)]


def distance_panel(industries=range(1, 13), years=range(1990, 2022), seed: int = 0,
                   pair_sd: float = 0.35, year_sd: float = 0.08) -> pd.DataFrame:
    """Long-form distances with d_TF <= d_U and unit self-distances.

    log d_U = |pair effect + year shock|; log d_TF is a random fraction
    (0.3 to 1, drawn per pair-year) of log d_U.
    """
    rng = np.random.default_rng(seed)
    industries = list(industries)
    years = list(years)
    m = len(industries)
    base = rng.normal(0.0, pair_sd, size=(m, m))
    rows = []
    for year in years:
        lu = np.abs(base + rng.normal(0.0, year_sd, size=(m, m)))
        lt = lu * rng.uniform(0.3, 1.0, size=(m, m))
        np.fill_diagonal(lu, 0.0)
        np.fill_diagonal(lt, 0.0)
        for a in range(m):
            for t in range(m):
                rows.append((year, industries[a], industries[t], lu[a, t], lt[a, t]))
    df = pd.DataFrame(rows, columns=["year", "acq_ind", "tgt_ind", "log_d_U", "log_d_TF"])
    df["d_U"] = np.exp(df["log_d_U"])
    df["d_TF"] = np.exp(df["log_d_TF"])
    return df[["year", "acq_ind", "tgt_ind", "d_U", "d_TF", "log_d_U", "log_d_TF"]]
