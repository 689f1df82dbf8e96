"""Two-factor, three-layer linear economy with known cross-group errors.

Three groups of firms draw capital K and labor L from U(0, 1):

    group 1:  y = K + eps
    group 2:  y = -K + eps
    group 3:  y = L + eps

with eps ~ N(0, sigma^2). A linear two-layer network with weights
(w_K1, w_K2, w_L1, w_L2, w_H1, w_H2) fitted to group 1 is applied to the
other groups, with and without re-fitting the top layer.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np
import pandas as pd

from .panel import IndustryYearDataset

PAIRS = (11, 12, 13)
MODES = ("NTF", "TF")

# (coefficient on K, coefficient on L) of each group's noiseless output
GROUP_RULES = {1: (1.0, 0.0), 2: (-1.0, 0.0), 3: (0.0, 1.0)}


@dataclass(frozen=True)
class LinearWeights:
    w_K1: float
    w_K2: float
    w_L1: float
    w_L2: float
    w_H1: float
    w_H2: float

    @property
    def w_K(self) -> float:
        return self.w_H1 * self.w_K1 + self.w_H2 * self.w_K2

    @property
    def w_L(self) -> float:
        return self.w_H1 * self.w_L1 + self.w_H2 * self.w_L2

    def as_tuple(self):
        return astuple(self)


W1_STAR = LinearWeights(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)


@dataclass(frozen=True)
class StylizedSample:
    """Columnar samples of one group: arrays K, L, y of equal length."""

    group: int
    K: np.ndarray
    L: np.ndarray
    y: np.ndarray
    sigma: float

    def __len__(self):
        return len(self.y)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"group": self.group, "K": self.K, "L": self.L, "y": self.y})


def box_muller(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Standard normals from two independent U(0,1] streams (cosine branch)."""
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def sample_group(group: int, n: int, sigma: float, seed: int) -> StylizedSample:
    if group not in GROUP_RULES:
        raise ValueError(f"group must be 1, 2 or 3, got {group}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    u = rng.random((4, n))
    K, L = u[0], u[1]
    # 1 - U lies in (0, 1], keeping log finite
    eps = sigma * box_muller(1.0 - u[2], u[3])
    cK, cL = GROUP_RULES[group]
    y = cK * K + cL * L + eps
    return StylizedSample(group, K, L, y, float(sigma))


def linear_forward(w: LinearWeights, K, L):
    h1 = w.w_K1 * K + w.w_L1 * L
    h2 = w.w_K2 * K + w.w_L2 * L
    return w.w_H1 * h1 + w.w_H2 * h2


def _parse_pair(pair) -> int:
    pair = int(pair)
    if pair not in PAIRS:
        raise ValueError(f"unsupported pair {pair}; expected one of {PAIRS}")
    return pair


def analytic_mse(pair, sigma: float, mode: str) -> float:
    """Closed-form cross-group MSE as published for the stylized economy.

    The (13, NTF) and (13, TF) entries are the published values; they do
    not equal the integrals of the stated model (see ``exact_mse``).
    """
    pair = _parse_pair(pair)
    s2 = sigma * sigma
    if mode == "NTF":
        return {11: s2, 12: 4.0 / 3.0 + s2, 13: 13.0 / 6.0 + s2}[pair]
    if mode == "TF":
        return {11: s2, 12: s2, 13: 4.0 / 3.0 + s2}[pair]
    raise ValueError(f"unsupported mode {mode!r}; expected 'NTF' or 'TF'")


def exact_mse(w: LinearWeights, group: int, sigma: float) -> float:
    """E[(y_hat - y)^2] for K, L iid U(0,1), computed from the moments.

    E[K^2] = E[L^2] = 1/3 and E[KL] = 1/4.
    """
    cK, cL = GROUP_RULES[group]
    a = w.w_K - cK
    b = w.w_L - cL
    return a * a / 3.0 + b * b / 3.0 + a * b / 2.0 + sigma * sigma


def empirical_mse(w: LinearWeights, samples: StylizedSample) -> float:
    if len(samples) == 0:
        raise ValueError("empty samples")
    r = linear_forward(w, samples.K, samples.L) - samples.y
    return float(np.mean(r * r))


def optimal_tf_weights(pair) -> LinearWeights:
    """Group-1 weights after re-fitting only the top layer, per target group."""
    pair = _parse_pair(pair)
    if pair == 11:
        return W1_STAR
    if pair == 12:
        return LinearWeights(1.0, 0.0, 0.0, 0.0, -1.0, 0.0)
    return LinearWeights(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def pair_weights(pair, mode: str) -> LinearWeights:
    if mode == "NTF":
        _parse_pair(pair)
        return W1_STAR
    if mode == "TF":
        return optimal_tf_weights(pair)
    raise ValueError(f"unsupported mode {mode!r}")


def oracle_table(sigma: float, n: int, seed: int, oracle: str = "published") -> pd.DataFrame:
    """Analytic vs Monte Carlo MSE for all six (pair, mode) cells.

    ``oracle`` selects the analytic column: "published" closed forms or
    "exact" integrals of the model.
    """
    if oracle not in ("published", "exact"):
        raise ValueError(f"unknown oracle {oracle!r}")
    samples = {g: sample_group(g, n, sigma, seed + g) for g in GROUP_RULES}
    rows = []
    for mode in MODES:
        for pair in PAIRS:
            w = pair_weights(pair, mode)
            target = pair % 10
            if oracle == "published":
                analytic = analytic_mse(pair, sigma, mode)
            else:
                analytic = exact_mse(w, target, sigma)
            empirical = empirical_mse(w, samples[target])
            abs_err = abs(empirical - analytic)
            rel_err = abs_err / analytic if analytic != 0 else (0.0 if abs_err == 0 else np.inf)
            rows.append(dict(pair=pair, mode=mode, sigma=sigma, n=n, analytic=analytic,
                             empirical=empirical, abs_err=abs_err, rel_err=rel_err))
    return pd.DataFrame(rows)


def padded_features(samples: StylizedSample, n_inputs: int = 8) -> np.ndarray:
    """(K, L) in the first two columns, zeros elsewhere."""
    X = np.zeros((len(samples), n_inputs))
    X[:, 0] = samples.K
    X[:, 1] = samples.L
    return X


def to_dataset(samples: StylizedSample, year: int = 0) -> IndustryYearDataset:
    """Wrap raw (not mean-adjusted) stylized samples for the distance code."""
    return IndustryYearDataset(
        industry_id=samples.group,
        year=year,
        X=padded_features(samples),
        y=np.asarray(samples.y, dtype=float).copy(),
        output_kind="stylized",
    )
