"""Specification sets mirroring the count, completion, interaction, CAR and survival tables."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .dgp import ACQ_CONTROLS, DEAL_CONTROLS, PAIR_FE, TGT_CONTROLS, add_tf_residual
from .ols import ols_fe
from .probit import probit_fit
from .results import RegressionResult, RegressionSpec

log = logging.getLogger(__name__)

TABLES = ("table2", "table3", "table4", "table6", "table9", "table10")
DISTANCES = ("log_d_U", "log_d_TF")
FE_TIERS = {"none": (), "year": ("year",), "year+industry": PAIR_FE}


@dataclass
class ReportEntry:
    table: str
    spec: RegressionSpec
    result: RegressionResult | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def pair_panel(distances: pd.DataFrame, counts: pd.DataFrame) -> pd.DataFrame:
    """Counts joined to distances, with the TF residual and interaction columns."""
    d = add_tf_residual(distances[["year", "acq_ind", "tgt_ind", "log_d_U", "log_d_TF"]])
    return d.merge(counts[["year", "acq_ind", "tgt_ind", "n_deals", "log_count"]],
                   on=["year", "acq_ind", "tgt_ind"], how="inner", validate="one_to_one")


def deal_panel(distances: pd.DataFrame, deals: pd.DataFrame) -> pd.DataFrame:
    d = distances[["year", "acq_ind", "tgt_ind", "log_d_U", "log_d_TF"]]
    out = deals.drop(columns=[c for c in DISTANCES if c in deals.columns])
    out = out.merge(d, on=["year", "acq_ind", "tgt_ind"], how="left", validate="many_to_one")
    out["public_both"] = (out["public_acq"] * out["public_tgt"]).astype(int)
    out["all_deals"] = 1
    return out


def table2_specs(years) -> list[RegressionSpec]:
    return [
        RegressionSpec(f"table2/{dist}/{year}", "log_count", (dist,), sample=f"_year_{year}")
        for dist in DISTANCES for year in years
    ]


def table3_specs() -> list[RegressionSpec]:
    return [
        RegressionSpec(f"table3/{dist}/{tier}", "log_count", (dist,), fe, cluster="year")
        for tier, fe in FE_TIERS.items() for dist in DISTANCES
    ]


def table6_specs() -> list[RegressionSpec]:
    regs = ("log_d_U", "tf_resid", "interaction")
    return [RegressionSpec(f"table6/{tier}", "log_count", regs, fe, cluster="year")
            for tier, fe in FE_TIERS.items()]


_SAMPLES = (
    # name, sample column, firm controls, fixed effects
    ("all", "all_deals", (), ()),
    ("all_fe", "all_deals", (), ("year",)),
    ("public_acq", "public_acq", ACQ_CONTROLS, PAIR_FE),
    ("public_both", "public_both", ACQ_CONTROLS + TGT_CONTROLS, PAIR_FE),
)


def table4_specs() -> list[RegressionSpec]:
    return [
        RegressionSpec(f"table4/{dist}/{name}", "completed", (dist, *DEAL_CONTROLS, *firm),
                       fe, cluster="year", model="Probit", sample=sample)
        for name, sample, firm, fe in _SAMPLES for dist in DISTANCES
    ]


def table9_specs() -> list[RegressionSpec]:
    controls = ("completed", *DEAL_CONTROLS, *ACQ_CONTROLS, *TGT_CONTROLS)
    return [
        RegressionSpec(f"table9/{dep}/{dist}", dep, (dist, *controls), PAIR_FE, cluster="year")
        for dep in ("car_m1_0_eq", "car_m1_p1_eq", "car_m1_p1_vw") for dist in DISTANCES
    ]


def table10_specs() -> list[RegressionSpec]:
    return [
        RegressionSpec(f"table10/{dep}/{dist}/{name}", dep, (dist, *DEAL_CONTROLS, *firm),
                       fe, cluster="year", model="Probit", sample=sample)
        for name, sample, firm, fe in _SAMPLES if name != "all_fe"
        for dep in ("survival_t1", "survival_t2") for dist in DISTANCES
    ]


def _fit(frame, spec):
    return probit_fit(frame, spec) if spec.model == "Probit" else ols_fe(frame, spec)


def build_table_pipeline(distances: pd.DataFrame | None, counts: pd.DataFrame | None,
                         deals: pd.DataFrame | None, tables=TABLES) -> list[ReportEntry]:
    """Run every spec of the requested tables; failures are recorded, not raised."""
    report: list[ReportEntry] = []
    unknown = [t for t in tables if t not in TABLES]
    if unknown:
        raise ValueError(f"unknown tables {unknown}; expected a subset of {TABLES}")
    pairs = deal_level = None
    pair_error = deal_error = None
    if any(t in ("table2", "table3", "table6") for t in tables):
        if distances is None or counts is None:
            pair_error = "distance or count panel not available"
        else:
            pairs = pair_panel(distances, counts)
            for year in pairs["year"].unique():
                pairs[f"_year_{year}"] = pairs["year"] == year
    if any(t in ("table4", "table9", "table10") for t in tables):
        if distances is None or deals is None:
            deal_error = "distance or deal panel not available"
        else:
            deal_level = deal_panel(distances, deals)

    for table in tables:
        if table == "table2":
            years = sorted(pairs["year"].unique()) if pairs is not None else []
            specs = table2_specs(years) if pairs is not None else [RegressionSpec("table2", "log_count", ())]
        else:
            specs = {"table3": table3_specs, "table4": table4_specs, "table6": table6_specs,
                     "table9": table9_specs, "table10": table10_specs}[table]()
        pair_level = table in ("table2", "table3", "table6")
        frame = pairs if pair_level else deal_level
        missing = pair_error if pair_level else deal_error
        for spec in specs:
            if frame is None:
                report.append(ReportEntry(table, spec, error=missing))
                continue
            try:
                report.append(ReportEntry(table, spec, result=_fit(frame, spec)))
            except Exception as exc:  # tagged and carried on
                log.warning("spec %s failed: %s", spec.name, exc)
                report.append(ReportEntry(table, spec, error=f"{type(exc).__name__}: {exc}"))
    return report


def report_frame(report: list[ReportEntry]) -> pd.DataFrame:
    """Long coefficient table; failed specs appear as one row with the error."""
    rows = []
    for entry in report:
        base = {"table": entry.table, "spec": entry.spec.name, "model": entry.spec.model,
                "dependent": entry.spec.dependent}
        if not entry.ok:
            rows.append({**base, "error": entry.error})
            continue
        res = entry.result
        tab = res.table()
        # FE dummies in probits are nuisance parameters
        tab = tab.loc[~tab["name"].str.contains(r"\[", regex=True)]
        for rec in tab.to_dict(orient="records"):
            rows.append({**base, **rec, "n_obs": res.n_obs, "r2": res.r2,
                         "pseudo_r2": res.pseudo_r2, "error": ""})
    cols = ["table", "spec", "model", "dependent", "name", "coef", "se", "t", "p", "stars",
            "ame", "ame_se", "n_obs", "r2", "pseudo_r2", "error"]
    return pd.DataFrame(rows).reindex(columns=cols)


def report_json(report: list[ReportEntry]) -> str:
    docs = []
    for entry in report:
        if entry.ok:
            doc = entry.result.to_dict()
            doc["coefficients"] = [c for c in doc["coefficients"] if "[" not in c["name"]]
        else:
            doc = {"spec": entry.spec.name, "error": entry.error}
        docs.append({"table": entry.table, **doc})

    def clean(v):
        if isinstance(v, float) and not np.isfinite(v):
            return None
        if isinstance(v, (np.floating, np.integer)):
            return clean(v.item())
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean(docs), indent=1, sort_keys=True)
