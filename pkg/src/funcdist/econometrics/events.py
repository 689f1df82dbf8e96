"""Market-model cumulative abnormal returns and simple correlations."""

from __future__ import annotations

import numpy as np
from scipy import stats

EVENT_WINDOWS = {(-1, 0), (-1, 1)}
# estimation window: 250 trading days, the last one 30 days before the event
EST_LENGTH = 250
EST_GAP = 30
MIN_EST_OBS = 60


class EventDataError(ValueError):
    pass


def fit_market_model(stock, market):
    """OLS alpha, beta of stock on market returns, ignoring NaN pairs."""
    s = np.asarray(stock, dtype=float)
    m = np.asarray(market, dtype=float)
    ok = np.isfinite(s) & np.isfinite(m)
    s, m = s[ok], m[ok]
    mc = m - m.mean()
    denom = mc @ mc
    if denom == 0:
        raise EventDataError("market returns are constant over the estimation window")
    beta = (mc @ (s - s.mean())) / denom
    return s.mean() - beta * m.mean(), beta, int(ok.sum())


def market_model_car(stock_returns, market_returns, event_day: int, window=(-1, 1),
                     estimation_window=(EST_LENGTH, EST_GAP), min_est_obs: int = MIN_EST_OBS) -> float:
    """Sum of (r - alpha - beta * r_m) over ``window`` around position ``event_day``.

    ``estimation_window=(length, gap)`` uses positions
    [event_day - gap - length + 1, event_day - gap], truncated at the start
    of the series; at least ``min_est_obs`` valid returns are required.
    """
    window = tuple(window)
    if window not in EVENT_WINDOWS:
        raise ValueError(f"window must be one of {sorted(EVENT_WINDOWS)}, got {window}")
    r = np.asarray(stock_returns, dtype=float)
    m = np.asarray(market_returns, dtype=float)
    if r.shape != m.shape or r.ndim != 1:
        raise ValueError("stock and market returns must be 1-d series of equal length")
    length, gap = estimation_window
    est_end = event_day - gap
    est_start = max(est_end - length + 1, 0)
    if est_end < 0:
        raise EventDataError(f"no estimation window before event day {event_day}")
    lo, hi = event_day + window[0], event_day + window[1]
    if lo < 0 or hi >= len(r):
        raise EventDataError(f"event window [{lo}, {hi}] outside the series")
    ev_r, ev_m = r[lo:hi + 1], m[lo:hi + 1]
    if not (np.isfinite(ev_r).all() and np.isfinite(ev_m).all()):
        raise EventDataError("missing returns inside the event window")
    est_r, est_m = r[est_start:est_end + 1], m[est_start:est_end + 1]
    n_ok = int((np.isfinite(est_r) & np.isfinite(est_m)).sum())
    if n_ok < min_est_obs:
        raise EventDataError(f"{n_ok} estimation-window returns < {min_est_obs}")
    alpha, beta, _ = fit_market_model(est_r, est_m)
    return float(np.sum(ev_r - alpha - beta * ev_m))


def combine_car(car_acq: float, car_tgt: float, mv_acq: float | None = None,
                mv_tgt: float | None = None, mode: str = "equal") -> float:
    if mode == "equal":
        return (car_acq + car_tgt) / 2.0
    if mode == "value":
        if mv_acq is None or mv_tgt is None or not (mv_acq > 0 and mv_tgt > 0):
            raise ValueError("value weighting needs positive market values")
        return (mv_acq * car_acq + mv_tgt * car_tgt) / (mv_acq + mv_tgt)
    raise ValueError(f"mode must be 'equal' or 'value', got {mode!r}")


def correlation(x, y) -> tuple[float, float]:
    """Pearson r and its two-sided p-value from t = r sqrt((n-2)/(1-r^2))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("correlation needs at least 3 observations")
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = xc @ xc, yc @ yc
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined for constant input")
    r = float(np.clip(xc @ yc / np.sqrt(sxx * syy), -1.0, 1.0))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * stats.t.sf(abs(t), n - 2))
