"""Firm-year fundamentals: ingestion, filters, derived ratios, industry-year datasets.

Currency fields are in millions and employees in thousands (Compustat units).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

FIRM_FIELDS = (
    "firm_id", "year", "industry_id", "total_assets", "capex", "st_debt", "lt_debt",
    "employees", "ppent", "adv_expense", "rd_expense", "shares_outstanding", "price_close",
    "common_equity", "deferred_taxes", "oibdp", "interest_expense", "income_taxes",
)
NUMERIC_FIELDS = FIRM_FIELDS[1:]

# network input order
INPUT_COLUMNS = (
    "log_assets", "capex_at", "st_debt_at", "lt_debt_at", "emp_at", "ppent_at", "adv_at", "rd_at",
)
OUTPUT_KINDS = ("LogQ", "ROA")

DEFAULT_ASSET_THRESHOLD = 10.0
DEFAULT_MIN_FIRMS = 30


class SchemaError(ValueError):
    pass


class TooFewFirmsError(ValueError):
    def __init__(self, industry_id, year, count, min_firms):
        super().__init__(
            f"industry {industry_id}, year {year}: {count} firms < min_firms={min_firms}"
        )
        self.industry_id = industry_id
        self.year = year
        self.count = count
        self.min_firms = min_firms


@dataclass(frozen=True)
class FirmYear:
    firm_id: str
    year: int
    industry_id: int
    total_assets: float
    capex: float
    st_debt: float
    lt_debt: float
    employees: float
    ppent: float
    adv_expense: float
    rd_expense: float
    shares_outstanding: float
    price_close: float
    common_equity: float
    deferred_taxes: float
    oibdp: float
    interest_expense: float
    income_taxes: float


@dataclass(frozen=True)
class DerivedVars:
    log_assets: float
    capex_at: float
    st_debt_at: float
    lt_debt_at: float
    emp_at: float
    ppent_at: float
    adv_at: float
    rd_at: float
    tobins_q: float
    log_q: float
    roa: float
    book_leverage: float
    cash_flow_at: float


DERIVED_COLUMNS = tuple(f.name for f in fields(DerivedVars))


@dataclass
class RejectionReport:
    counts: Counter = field(default_factory=Counter)
    reasons = ("missing_field", "assets_below_threshold", "bad_industry")

    def add(self, reason, n=1):
        self.counts[reason] += int(n)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_frame(self) -> pd.DataFrame:
        names = list(self.reasons) + sorted(set(self.counts) - set(self.reasons))
        return pd.DataFrame({"reason": names, "count": [self.counts.get(r, 0) for r in names]})

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)


@dataclass(frozen=True, eq=False)
class IndustryYearDataset:
    industry_id: int
    year: int
    X: np.ndarray
    y: np.ndarray
    output_kind: str
    firm_ids: tuple = ()

    @property
    def n_firms(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "IndustryYearDataset":
        ids = tuple(np.asarray(self.firm_ids, dtype=object)[idx]) if self.firm_ids else ()
        return IndustryYearDataset(self.industry_id, self.year, self.X[idx], self.y[idx],
                                   self.output_kind, ids)


def load_firm_panel(path, schema: Mapping[str, str] | None = None,
                    asset_threshold: float = DEFAULT_ASSET_THRESHOLD):
    """Read a firm-year CSV and apply the sample filters.

    ``schema`` maps canonical field names to CSV column names; missing
    entries default to the canonical name. Returns ``(frame, report)`` where
    ``frame`` has one canonical column per FirmYear field.
    """
    schema = {name: (schema or {}).get(name, name) for name in FIRM_FIELDS}
    unknown = set(schema) - set(FIRM_FIELDS)
    if unknown:
        raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise OSError(f"cannot read firm panel {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path} has no header row") from exc

    missing_cols = [col for col in schema.values() if col not in raw.columns]
    if missing_cols:
        raise SchemaError(f"{path}: header lacks columns {missing_cols}")

    frame = pd.DataFrame({name: raw[col].str.strip() for name, col in schema.items()})
    blank = frame.eq("") | frame.apply(lambda c: c.str.upper().isin(["NA", "NAN", "NULL"]))
    for name in NUMERIC_FIELDS:
        vals = pd.to_numeric(frame[name].where(~blank[name]), errors="coerce")
        bad = vals.isna() & ~blank[name]
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise SchemaError(
                f"{path}: non-numeric value {frame[name].iloc[row]!r} in column "
                f"{schema[name]!r} (data row {row + 1})"
            )
        frame[name] = vals

    report = RejectionReport()
    missing = blank.any(axis=1).to_numpy()
    report.add("missing_field", missing.sum())
    frame = frame.loc[~missing]

    small = ~(frame["total_assets"] > asset_threshold)
    report.add("assets_below_threshold", small.sum())
    frame = frame.loc[~small]

    ind = frame["industry_id"]
    bad_ind = ~(ind.between(1, 12) & (ind == np.floor(ind)))
    report.add("bad_industry", bad_ind.sum())
    frame = frame.loc[~bad_ind].copy()

    frame["year"] = frame["year"].astype(np.int64)
    frame["industry_id"] = frame["industry_id"].astype(np.int64)
    frame = frame.reset_index(drop=True)
    log.info("loaded %d firm-years from %s, rejected %d", len(frame), path, report.total)
    return frame, report


def _derive(total_assets, capex, st_debt, lt_debt, employees, ppent, adv_expense, rd_expense,
            shares_outstanding, price_close, common_equity, deferred_taxes, oibdp,
            interest_expense, income_taxes):
    at = total_assets
    q = (at + shares_outstanding * price_close - common_equity - deferred_taxes) / at
    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), np.nan)
    return dict(
        log_assets=np.log(at),
        capex_at=capex / at,
        st_debt_at=st_debt / at,
        lt_debt_at=lt_debt / at,
        emp_at=employees / at,
        ppent_at=ppent / at,
        adv_at=adv_expense / at,
        rd_at=rd_expense / at,
        tobins_q=q,
        log_q=log_q,
        roa=oibdp / at,
        book_leverage=(st_debt + lt_debt) / at,
        cash_flow_at=(oibdp - interest_expense - income_taxes - capex) / at,
    )


def compute_derived(fy):
    """Derived ratios for one FirmYear, or a derived-columns frame for a panel frame.

    ``log_q`` is NaN when Tobin's Q is not positive.
    """
    if isinstance(fy, pd.DataFrame):
        vals = _derive(*(fy[name].to_numpy(dtype=float) for name in NUMERIC_FIELDS[2:]))
        return pd.DataFrame(vals, index=fy.index)
    vals = _derive(*(float(getattr(fy, name)) for name in NUMERIC_FIELDS[2:]))
    return DerivedVars(**{k: float(v) for k, v in vals.items()})


def add_derived(frame: pd.DataFrame) -> pd.DataFrame:
    return pd.concat([frame, compute_derived(frame)], axis=1)


def industry_mean_adjust(values) -> np.ndarray:
    """x - mean(x) along the first axis."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] == 0:
        raise ValueError("cannot mean-adjust an empty vector")
    return v - v.mean(axis=0)


def winsorize(frame: pd.DataFrame, columns, pct: float = 0.01) -> pd.DataFrame:
    """Clip each column at its pct and 1 - pct quantiles."""
    if not 0 <= pct < 0.5:
        raise ValueError("pct must lie in [0, 0.5)")
    out = frame.copy()
    for col in columns:
        lo, hi = out[col].quantile([pct, 1 - pct])
        out[col] = out[col].clip(lo, hi)
    return out


def _output_column(output_kind):
    if output_kind not in OUTPUT_KINDS:
        raise ValueError(f"output_kind must be one of {OUTPUT_KINDS}, got {output_kind!r}")
    return "log_q" if output_kind == "LogQ" else "roa"


def qualifying_rows(panel: pd.DataFrame, output_kind: str) -> pd.DataFrame:
    """Rows usable for ``output_kind``; LogQ drops rows with Q <= 0."""
    col = _output_column(output_kind)
    if col not in panel.columns:
        panel = add_derived(panel)
    keep = np.isfinite(panel[col].to_numpy(dtype=float))
    for c in INPUT_COLUMNS:
        keep &= np.isfinite(panel[c].to_numpy(dtype=float))
    return panel.loc[keep]


def build_dataset(panel: pd.DataFrame, industry_id: int, year: int, output_kind: str = "LogQ",
                  min_firms: int = DEFAULT_MIN_FIRMS) -> IndustryYearDataset:
    col = _output_column(output_kind)
    rows = qualifying_rows(panel, output_kind)
    rows = rows.loc[(rows["industry_id"] == industry_id) & (rows["year"] == year)]
    if len(rows) < max(min_firms, 1):
        raise TooFewFirmsError(industry_id, year, len(rows), min_firms)
    X = industry_mean_adjust(rows[list(INPUT_COLUMNS)].to_numpy(dtype=float))
    y = industry_mean_adjust(rows[col].to_numpy(dtype=float))
    ids = tuple(rows["firm_id"].astype(str)) if "firm_id" in rows else ()
    return IndustryYearDataset(int(industry_id), int(year), X, y, output_kind, ids)


def build_all_datasets(panel: pd.DataFrame, output_kind: str = "LogQ",
                       min_firms: int = DEFAULT_MIN_FIRMS):
    """Every industry-year dataset, keyed by (year, industry_id).

    Returns ``(datasets, skipped)``; ``skipped`` lists the TooFewFirmsError
    of each industry-year below ``min_firms``.
    """
    rows = qualifying_rows(panel, output_kind)
    datasets, skipped = {}, []
    keys = sorted(set(zip(panel["year"].astype(int), panel["industry_id"].astype(int))))
    for year, ind in keys:
        try:
            datasets[(year, ind)] = build_dataset(rows, ind, year, output_kind, min_firms)
        except TooFewFirmsError as exc:
            log.warning("skipping: %s", exc)
            skipped.append(exc)
    return datasets, skipped
