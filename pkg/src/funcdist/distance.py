"""Unadjusted and transfer-learning distances between industry production networks.

For an ordered pair (acquiror A, target T) with target data (x_T, y_T):

    d_U  = err(y_T, f(x_T; w_A))            / err(y_T, f(x_T; w_T))
    d_TF = err(y_T, f(x_T; w_A retrained))  / err(y_T, f(x_T; w_T))

where "retrained" re-fits only the output layer of w_A on the target data.
``err`` is the RMSE by default; the square-free MSE convention is available.
"""

from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
import pandas as pd

from .neural import TrainConfig, WeightSet, forward, rmse_loss, train, train_last_layer
from .panel import IndustryYearDataset

log = logging.getLogger(__name__)

CONVENTIONS = ("RMSE", "MSE")
CSV_COLUMNS = ["year", "acq_ind", "tgt_ind", "d_U", "d_TF", "log_d_U", "log_d_TF",
               "rmse_cross", "rmse_tf", "rmse_own"]


class DegenerateFitError(ValueError):
    pass


class PairError(RuntimeError):
    """Wraps a failure for one ordered pair so callers know which one."""

    def __init__(self, acq, tgt, year, cause):
        super().__init__(f"pair (acq={acq}, tgt={tgt}, year={year}) failed: {cause}")
        self.acq, self.tgt, self.year = acq, tgt, year
        self.__cause__ = cause


def child_seed(seed: int, tag: str) -> int:
    """Stable per-subsystem seed: seed XOR crc32(tag)."""
    return (int(seed) ^ zlib.crc32(tag.encode("utf-8"))) & 0xFFFFFFFF


@dataclass(frozen=True)
class DistanceRecord:
    acquiror_industry: int
    target_industry: int
    year: int
    d_U: float
    d_TF: float
    rmse_cross: float
    rmse_tf: float
    rmse_own: float

    @property
    def log_d_U(self) -> float:
        return float(np.log(self.d_U))

    @property
    def log_d_TF(self) -> float:
        return float(np.log(self.d_TF))

    def row(self) -> dict:
        return {
            "year": self.year, "acq_ind": self.acquiror_industry, "tgt_ind": self.target_industry,
            "d_U": self.d_U, "d_TF": self.d_TF, "log_d_U": self.log_d_U,
            "log_d_TF": self.log_d_TF, "rmse_cross": self.rmse_cross,
            "rmse_tf": self.rmse_tf, "rmse_own": self.rmse_own,
        }


@dataclass(frozen=True)
class DistanceMatrix:
    year: int
    industries: tuple[int, ...]
    d_U: np.ndarray
    d_TF: np.ndarray
    records: tuple[DistanceRecord, ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.row() for r in self.records], columns=CSV_COLUMNS)

    def to_json(self) -> str:
        doc = {
            "year": self.year,
            "industries": list(self.industries),
            "d_U": self.d_U.tolist(),
            "d_TF": self.d_TF.tolist(),
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def _err(w: WeightSet, ds: IndustryYearDataset, convention: str) -> float:
    r = rmse_loss(w, ds.X, ds.y)
    return r if convention == "RMSE" else r * r


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def _own_error(w_T, ds_T, convention):
    own = _err(w_T, ds_T, convention)
    if not own > 0:
        raise DegenerateFitError(
            f"target industry {ds_T.industry_id} year {ds_T.year}: own-model error is {own!r}"
        )
    return own


def unadjusted_distance(w_A: WeightSet, w_T: WeightSet, ds_T: IndustryYearDataset,
                        convention: str = "RMSE") -> tuple[float, float, float]:
    """Return (d_U, cross error, own error)."""
    _check_convention(convention)
    if w_A.arch.n_inputs != ds_T.X.shape[1] or w_T.arch.n_inputs != ds_T.X.shape[1]:
        raise ValueError("networks and dataset disagree on the number of inputs")
    if ds_T.n_firms == 0:
        raise ValueError("empty target dataset")
    own = _own_error(w_T, ds_T, convention)
    cross = _err(w_A, ds_T, convention)
    return cross / own, cross, own


def tf_distance(w_A: WeightSet, ds_T: IndustryYearDataset, w_T: WeightSet,
                config: TrainConfig | None = None, convention: str = "RMSE",
                retrain_on: IndustryYearDataset | None = None) -> tuple[float, float, float]:
    """Return (d_TF, retrained error, own error).

    The output layer of ``w_A`` is re-fitted on ``retrain_on`` (default: the
    evaluation data ``ds_T``) and the error is measured on ``ds_T``.
    """
    _check_convention(convention)
    own = _own_error(w_T, ds_T, convention)
    fit_on = ds_T if retrain_on is None else retrain_on
    w_tf = train_last_layer(w_A, fit_on.X, fit_on.y, config)
    tf = _err(w_tf, ds_T, convention)
    return tf / own, tf, own


def distance_record(w_A, w_T, ds_T, acq, year, config=None, convention="RMSE",
                    retrain_on=None) -> DistanceRecord:
    d_u, cross, own = unadjusted_distance(w_A, w_T, ds_T, convention)
    d_tf, tf, _ = tf_distance(w_A, ds_T, w_T, config, convention, retrain_on)
    return DistanceRecord(int(acq), int(ds_T.industry_id), int(year), d_u, d_tf, cross, tf, own)


def split_holdout(ds: IndustryYearDataset, fraction: float, seed: int):
    """Deterministic (train, eval) split; fraction 0 returns (ds, ds)."""
    if fraction == 0:
        return ds, ds
    if not 0 < fraction < 1:
        raise ValueError("holdout_fraction must lie in [0, 1)")
    n = ds.n_firms
    n_eval = int(round(fraction * n))
    if n_eval < 1 or n - n_eval < 2:
        raise ValueError(f"dataset of {n} rows too small for holdout {fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    return ds.subset(np.sort(perm[n_eval:])), ds.subset(np.sort(perm[:n_eval]))


def _pair_job(args):
    acq, tgt, year, w_A, w_T, ds_eval, ds_fit, config, convention = args
    try:
        return distance_record(w_A, w_T, ds_eval, acq, year, config, convention, ds_fit)
    except Exception as exc:
        raise PairError(acq, tgt, year, exc) from exc


def _map(fn, jobs, workers):
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


def all_pairs(trained: dict, datasets: dict, year: int, config: TrainConfig | None = None,
              convention: str = "RMSE", eval_sets: dict | None = None,
              workers: int = 1) -> DistanceMatrix:
    """Distances for every ordered pair, self-pairs included.

    ``datasets`` hold the data each network was trained on; ``eval_sets``
    (default: the same) are where errors are measured. Each pair's
    retraining uses a seed derived from ``config.seed`` and the pair.
    """
    config = config or TrainConfig()
    eval_sets = eval_sets or datasets
    missing = set(trained) ^ set(datasets)
    if missing:
        raise ValueError(f"industries without both weights and data: {sorted(missing)}")
    inds = tuple(sorted(trained))
    jobs = []
    for acq in inds:
        for tgt in inds:
            cfg = replace(config, seed=child_seed(config.seed, f"tf/{year}/{acq}/{tgt}"))
            jobs.append((acq, tgt, year, trained[acq], trained[tgt], eval_sets[tgt],
                         datasets[tgt], cfg, convention))
    records = _map(_pair_job, jobs, workers)
    m = len(inds)
    d_u = np.array([r.d_U for r in records]).reshape(m, m)
    d_tf = np.array([r.d_TF for r in records]).reshape(m, m)
    return DistanceMatrix(int(year), inds, d_u, d_tf, tuple(records))


def _train_job(args):
    key, X, y, arch, cfg = args
    return key, train(X, y, arch, cfg)


def train_industries(datasets: dict, arch, config: TrainConfig, workers: int = 1,
                     tag: str = "train") -> dict:
    """Train one network per key of ``datasets`` with per-key child seeds."""
    jobs = []
    for key in sorted(datasets):
        ds = datasets[key]
        label = "/".join(str(k) for k in (key if isinstance(key, tuple) else (key,)))
        cfg = replace(config, seed=child_seed(config.seed, f"{tag}/{label}"))
        jobs.append((key, ds.X, ds.y, arch, cfg))
    return dict(_map(_train_job, jobs, workers))


def year_distances(datasets: dict, arch, config: TrainConfig, year: int,
                   holdout_fraction: float = 0.0, convention: str = "RMSE",
                   workers: int = 1):
    """Train every industry of one year and compute its distance matrix.

    ``datasets`` maps industry id -> dataset. Returns (matrix, weights).
    """
    fit, evals = {}, {}
    for ind, ds in datasets.items():
        fit[ind], evals[ind] = split_holdout(
            ds, holdout_fraction, child_seed(config.seed, f"holdout/{year}/{ind}"))
    weights = train_industries(fit, arch, config, workers, tag=f"train/{year}")
    matrix = all_pairs(weights, fit, year, config, convention, evals, workers)
    return matrix, weights
