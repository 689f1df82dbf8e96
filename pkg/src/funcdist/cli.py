"""Command-line front end.

    funcdist <subcommand> --config run.ini [--workers N] [--seed-override K] [--out DIR]

Exit codes: 0 success, 1 invalid config or input, 2 estimation failure,
3 stylized oracle outside tolerance. Log level comes from FUNCDIST_LOG.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import stylized, synthetic
from .config import ConfigError, RunConfig, load_config
from .distance import CSV_COLUMNS, DegenerateFitError, PairError, all_pairs, child_seed, split_holdout, train_industries
from .econometrics.dgp import DEAL_FIELDS, DGPParams, generate_synthetic_deals
from .econometrics.results import EstimationError
from .econometrics.tables import build_table_pipeline, report_frame, report_json
from .neural import DivergenceError, NetworkArchitecture, TrainConfig, rmse_loss, weights_to_json
from .panel import INPUT_COLUMNS, SchemaError, add_derived, build_all_datasets, load_firm_panel, winsorize

log = logging.getLogger("funcdist")

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION, EXIT_ORACLE = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def write_csv(frame: pd.DataFrame, path: Path):
    frame.to_csv(path, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")


def write_json(doc, path: Path):
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _read_csv(path: Path | None) -> pd.DataFrame | None:
    if path is None or not path.exists():
        return None
    return pd.read_csv(path)


# ---------------------------------------------------------------- helpers

def _arch(cfg: RunConfig) -> NetworkArchitecture:
    return NetworkArchitecture(tuple(cfg["network"]["layer_sizes"]))


def _train_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(seed=child_seed(cfg.seed, "neural"), **cfg["train"])


def _load_datasets(cfg: RunConfig, out: Path):
    path = cfg.path("firms")
    if path is None:
        path = out / "firms.csv"
    if not path.exists():
        raise Failure(EXIT_CONFIG, f"firm panel {path} not found")
    p = cfg["panel"]
    try:
        frame, report = load_firm_panel(path, cfg["schema"], p["asset_threshold"])
    except (SchemaError, OSError) as exc:
        raise Failure(EXIT_CONFIG, str(exc)) from exc
    write_csv(report.to_frame(), out / "rejections.csv")
    frame = add_derived(frame)
    if p["winsorize"]:
        out_col = "log_q" if p["output_kind"] == "LogQ" else "roa"
        cols = list(INPUT_COLUMNS) + [out_col]
        frame = pd.concat([winsorize(g, cols, p["winsorize_pct"])
                           for _, g in frame.groupby("year", sort=True)])
    datasets, skipped = build_all_datasets(frame, p["output_kind"], p["min_firms"])
    skip = pd.DataFrame([(e.year, e.industry_id, e.count, e.min_firms) for e in skipped],
                        columns=["year", "industry_id", "n_firms", "min_firms"])
    write_csv(skip, out / "skipped.csv")
    if not datasets:
        raise Failure(EXIT_ESTIMATION, "every industry-year was skipped; nothing to train")
    return datasets


def _fit_all(cfg: RunConfig, out: Path, workers: int):
    """Split holdouts, train every industry-year network, persist weights."""
    datasets = _load_datasets(cfg, out)
    tc = _train_config(cfg)
    frac = cfg["distance"]["holdout_fraction"]
    fit, evals = {}, {}
    for (year, ind), ds in sorted(datasets.items()):
        fit[(year, ind)], evals[(year, ind)] = split_holdout(
            ds, frac, child_seed(tc.seed, f"holdout/{year}/{ind}"))
    weights = train_industries(fit, _arch(cfg), tc, workers, tag="train")
    wdir = out / "weights"
    wdir.mkdir(exist_ok=True)
    rows = []
    for (year, ind), w in sorted(weights.items()):
        (wdir / f"{year}_{ind:02d}.json").write_text(weights_to_json(w), encoding="utf-8")
        rows.append({"year": year, "industry_id": ind, "n_fit": fit[(year, ind)].n_firms,
                     "n_eval": evals[(year, ind)].n_firms, "seed": w.seed,
                     "rmse_fit": rmse_loss(w, fit[(year, ind)].X, fit[(year, ind)].y),
                     "rmse_eval": rmse_loss(w, evals[(year, ind)].X, evals[(year, ind)].y)})
    write_csv(pd.DataFrame(rows), out / "train_summary.csv")
    return fit, evals, weights, tc


# ---------------------------------------------------------------- commands

def cmd_simulate_stylized(cfg: RunConfig, out: Path, workers: int) -> int:
    s = cfg["stylized"]
    seed = child_seed(cfg.seed, "stylized")
    table = stylized.oracle_table(s["sigma"], s["n"], seed, s["oracle"])
    write_csv(table, out / "stylized_oracle.csv")
    bad = table.loc[~(table["rel_err"] < s["tolerance"])]
    for row in bad.itertuples():
        log.error("oracle cell pair=%s mode=%s rel_err=%.3g exceeds %.3g",
                  row.pair, row.mode, row.rel_err, s["tolerance"])
    if len(bad):
        cells = ", ".join(f"{r.pair}/{r.mode}" for r in bad.itertuples())
        raise Failure(EXIT_ORACLE, f"{len(bad)} oracle cells outside tolerance: {cells}")
    return EXIT_OK


def cmd_gen_synthetic(cfg: RunConfig, out: Path, workers: int) -> int:
    s = cfg["synthetic"]
    inds = range(1, s["industries"] + 1)
    years = range(s["year_start"], s["year_end"] + 1)
    firms = synthetic.firm_panel(inds, years, s["firms_per_industry"],
                                 child_seed(cfg.seed, "synthetic/firms"))
    write_csv(firms, out / "firms.csv")
    if s["distance_source"] == "synthetic":
        distances = synthetic.distance_panel(inds, years, child_seed(cfg.seed, "synthetic/distances"))
        write_csv(distances, out / "synthetic_distances.csv")
    else:
        path = cfg.path("distances") or out / "distances.csv"
        distances = _read_csv(path)
        if distances is None:
            log.warning("no distance panel at %s yet; wrote firms only, run distances first", path)
            return EXIT_OK
    params = DGPParams(lambda0=s["lambda0"], gamma_count=s["gamma_count"], gamma_tf=s["gamma_tf"],
                       gamma_int=s["gamma_int"], count_noise_sd=s["count_noise_sd"],
                       n_deals=s["n_deals"], simulate_returns=s["simulate_returns"])
    counts, deals = generate_synthetic_deals(distances, params, child_seed(cfg.seed, "synthetic/deals"))
    write_csv(counts, out / "counts.csv")
    write_csv(deals[list(DEAL_FIELDS)], out / "deals.csv")
    return EXIT_OK


def cmd_train(cfg: RunConfig, out: Path, workers: int) -> int:
    _fit_all(cfg, out, workers)
    return EXIT_OK


def cmd_distances(cfg: RunConfig, out: Path, workers: int) -> int:
    fit, evals, weights, tc = _fit_all(cfg, out, workers)
    frames, grids = [], []
    for year in sorted({y for y, _ in fit}):
        keys = [k for k in sorted(fit) if k[0] == year]
        by_ind = lambda d: {ind: d[(year, ind)] for _, ind in keys}  # noqa: E731
        matrix = all_pairs(by_ind(weights), by_ind(fit), year, tc,
                           cfg["distance"]["convention"], by_ind(evals), workers)
        frames.append(matrix.to_frame())
        grids.append(json.loads(matrix.to_json()))
    table = pd.concat(frames, ignore_index=True)[CSV_COLUMNS]
    write_csv(table, out / "distances.csv")
    write_json(grids, out / "distance_grids.json")
    log.info("wrote %d distance rows", len(table))
    return EXIT_OK


def _panel_path(cfg: RunConfig, key: str, out: Path, default: str) -> Path:
    return cfg.path(key) or out / default


def cmd_regress(cfg: RunConfig, out: Path, workers: int) -> int:
    dpath = cfg.path("distances")
    if dpath is None:
        dpath = out / "distances.csv"
        if not dpath.exists() and (out / "synthetic_distances.csv").exists():
            dpath = out / "synthetic_distances.csv"
    distances = _read_csv(dpath)
    counts = _read_csv(_panel_path(cfg, "counts", out, "counts.csv"))
    deals = _read_csv(_panel_path(cfg, "deals", out, "deals.csv"))
    if distances is None:
        log.warning("distance panel %s missing; all specs will be tagged", dpath)
    try:
        report = build_table_pipeline(distances, counts, deals, cfg["regress"]["tables"])
    except ValueError as exc:
        raise Failure(EXIT_CONFIG, str(exc)) from exc
    write_csv(report_frame(report), out / "regression_report.csv")
    (out / "regression_report.json").write_text(report_json(report) + "\n", encoding="utf-8")
    n_bad = sum(not e.ok for e in report)
    log.info("%d specs estimated, %d tagged failures", len(report) - n_bad, n_bad)
    return EXIT_OK


def _describe(frame: pd.DataFrame, columns, panel: str) -> list[dict]:
    rows = []
    for col in columns:
        v = frame[col].to_numpy(dtype=float)
        v = v[np.isfinite(v)]
        if len(v) == 0:
            continue
        rows.append({"panel": panel, "variable": col, "n": len(v), "mean": float(v.mean()),
                     "sd": float(v.std(ddof=1)) if len(v) > 1 else float("nan"),
                     "p25": float(np.quantile(v, 0.25)), "median": float(np.median(v)),
                     "p75": float(np.quantile(v, 0.75))})
    return rows


def cmd_report(cfg: RunConfig, out: Path, workers: int) -> int:
    """Descriptive statistics of whatever panels exist in the output directory."""
    rows = []
    dist = _read_csv(out / "distances.csv")
    if dist is not None:
        off = dist.loc[dist["acq_ind"] != dist["tgt_ind"]]
        rows += _describe(off, ["d_U", "d_TF", "log_d_U", "log_d_TF"], "distances")
    counts = _read_csv(_panel_path(cfg, "counts", out, "counts.csv"))
    if counts is not None:
        rows += _describe(counts, ["n_deals", "log_count"], "counts")
    deals = _read_csv(_panel_path(cfg, "deals", out, "deals.csv"))
    if deals is not None:
        cols = [c for c in DEAL_FIELDS if c not in ("deal_id", "year", "acq_ind", "tgt_ind")]
        rows += _describe(deals, cols, "deals")
    if not rows:
        raise Failure(EXIT_CONFIG, f"no panels found in {out} to summarize")
    write_csv(pd.DataFrame(rows), out / "summary.csv")
    meta = {"distance_rows": None if dist is None else len(dist),
            "count_rows": None if counts is None else len(counts),
            "deal_rows": None if deals is None else len(deals)}
    if dist is not None:
        off = dist.loc[dist["acq_ind"] != dist["tgt_ind"]]
        meta["share_tf_le_u"] = float((off["d_TF"] <= off["d_U"] + 1e-12).mean())
    write_json(meta, out / "summary.json")
    return EXIT_OK


COMMANDS = {
    "simulate-stylized": cmd_simulate_stylized,
    "gen-synthetic": cmd_gen_synthetic,
    "train": cmd_train,
    "distances": cmd_distances,
    "regress": cmd_regress,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funcdist", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="INI run configuration")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    parser.add_argument("--seed-override", type=int, default=None, help="replace [run] seed")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    return parser


def _setup_logging():
    level = os.environ.get("FUNCDIST_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.seed_override is not None:
            cfg.values["run"]["seed"] = args.seed_override
        if args.out is not None:
            cfg.values["paths"]["out"] = str(args.out.resolve())
        out = cfg.path("out")
        out.mkdir(parents=True, exist_ok=True)
        (out / "resolved_config.ini").write_text(cfg.resolved_text(), encoding="utf-8")
        return COMMANDS[args.command](cfg, out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Failure as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (EstimationError, DivergenceError, DegenerateFitError, PairError) as exc:
        print(f"{args.command}: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
