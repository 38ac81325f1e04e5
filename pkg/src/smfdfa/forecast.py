"""Neural autoregressive one-step forecasting over fractionally
differenced inputs.

A single-hidden-layer sigmoid network maps p lagged values to the next
value and is trained by full-batch Levenberg-Marquardt on mean squared
error. Two pipelines wrap it: global fractional differencing with one
memory parameter for the whole series (FD-NAR), and per-segment local
differencing with one parameter per regime (LFD-NAR). Both reconstruct
one-step-ahead values with teacher forcing and are scored by mean
absolute percentage error, by default on the reintegrated level scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .changepoint import ChangePointResult
from .errors import InputError, NumericalError
from .longmemory import FracDiffResult, frac_diff, gph_estimate
from .series import TimeSeries

DEFAULT_LAGS = 5
DEFAULT_HIDDEN = 20
METHOD_FD = "FD-NAR"
METHOD_LFD = "LFD-NAR"
MIN_TRAIN_MARGIN = 50


@dataclass(frozen=True)
class TrainConfig:
    """Levenberg-Marquardt damping schedule and stopping rule."""

    damping_init: float = 1e-3
    damping_factor: float = 10.0
    damping_cap: float = 1e10
    max_iterations: int = 200
    min_relative_improvement: float = 1e-12

    def __post_init__(self):
        if self.damping_init <= 0 or self.damping_factor <= 1 or self.damping_cap <= 0:
            raise InputError("damping parameters must be positive (factor > 1)")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")


@dataclass(frozen=True)
class NarModel:
    """Trained lag-vector to next-value network with its normalization.

    Weights act in normalized space: u and the target are (value - mean)
    / scale. loss_trace holds the training MSE after every accepted step.
    """

    p: int
    hidden_units: int
    w_in: np.ndarray    # (hidden_units, p)
    b_in: np.ndarray    # (hidden_units,)
    w_out: np.ndarray   # (hidden_units,)
    b_out: float
    mean: float
    scale: float
    seed: int
    loss_trace: tuple[float, ...] = field(repr=False, default=())

    def predict_next(self, lags: np.ndarray) -> np.ndarray:
        """One-step prediction from rows of p most-recent-last lag values."""
        u = (np.atleast_2d(np.asarray(lags, dtype=float)) - self.mean) / self.scale
        if u.shape[1] != self.p:
            raise InputError(f"lag rows must have {self.p} columns, got {u.shape[1]}")
        hidden = _sigmoid(u @ self.w_in.T + self.b_in)
        z = hidden @ self.w_out + self.b_out
        return z * self.scale + self.mean


def _sigmoid(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def _lag_matrix(values: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows [x_{t-p} .. x_{t-1}] paired with targets x_t for t = p..n-1."""
    n = values.size
    idx = np.arange(p, n)[:, None] + np.arange(-p, 0)[None, :]
    return values[idx], values[p:]


def _unpack(theta: np.ndarray, p: int, h: int):
    w_in = theta[: h * p].reshape(h, p)
    b_in = theta[h * p : h * p + h]
    w_out = theta[h * p + h : h * p + 2 * h]
    b_out = theta[-1]
    return w_in, b_in, w_out, b_out


def _forward_jacobian(theta: np.ndarray, u: np.ndarray, p: int, h: int):
    """Network output and its Jacobian w.r.t. the flattened parameters."""
    w_in, b_in, w_out, b_out = _unpack(theta, p, h)
    s = _sigmoid(u @ w_in.T + b_in)  # (n, h)
    out = s @ w_out + b_out
    g = s * (1.0 - s) * w_out  # (n, h): d out / d preactivation
    n = u.shape[0]
    jac = np.empty((n, theta.size))
    jac[:, : h * p] = (g[:, :, None] * u[:, None, :]).reshape(n, h * p)
    jac[:, h * p : h * p + h] = g
    jac[:, h * p + h : h * p + 2 * h] = s
    jac[:, -1] = 1.0
    return out, jac


def train_nar(
    series: np.ndarray,
    p: int = DEFAULT_LAGS,
    hidden_units: int = DEFAULT_HIDDEN,
    seed: int = 0,
    config: TrainConfig = TrainConfig(),
) -> NarModel:
    """Fit the network to all (lag vector, next value) pairs of the series.

    Inputs and targets share one standardization (series mean and standard
    deviation). Training is full-batch Levenberg-Marquardt: solve
    (J'J + damping I) step = -J'r, accept only steps that reduce the sum
    of squares, multiply the damping by the schedule factor on rejection
    and divide on acceptance. Deterministic given the seed.

    Raises NumericalError carrying .last_loss when the damping exceeds its
    cap without finding an acceptable step.
    """
    x = np.asarray(series, dtype=float)
    if p < 1 or hidden_units < 1:
        raise InputError("p and hidden_units must be >= 1")
    if x.size < p + MIN_TRAIN_MARGIN:
        raise InputError(
            f"need at least {p + MIN_TRAIN_MARGIN} samples to train with p={p}, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise InputError(f"non-finite value at index {bad}")
    mean = float(x.mean())
    scale = float(x.std())
    if scale < 1e-12:
        scale = 1.0
    z = (x - mean) / scale
    u, target = _lag_matrix(z, p)
    n_pairs = target.size

    rng = np.random.default_rng(seed)
    n_params = hidden_units * (p + 2) + 1
    theta = rng.normal(0.0, 1.0, n_params)
    theta[: hidden_units * p] /= math.sqrt(p)
    theta[hidden_units * (p + 1) :] *= 0.1

    out, jac = _forward_jacobian(theta, u, p, hidden_units)
    resid = out - target
    loss = float(np.dot(resid, resid)) / n_pairs
    trace = [loss]
    damping = config.damping_init
    eye = np.eye(n_params)
    for _ in range(config.max_iterations):
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        accepted = False
        while damping <= config.damping_cap:
            try:
                step = np.linalg.solve(jtj + damping * eye, -jtr)
            except np.linalg.LinAlgError:
                damping *= config.damping_factor
                continue
            cand = theta + step
            cand_out, cand_jac = _forward_jacobian(cand, u, p, hidden_units)
            cand_resid = cand_out - target
            cand_loss = float(np.dot(cand_resid, cand_resid)) / n_pairs
            if math.isfinite(cand_loss) and cand_loss <= loss:
                improvement = loss - cand_loss
                theta, jac, resid = cand, cand_jac, cand_resid
                loss = cand_loss
                trace.append(loss)
                damping = max(damping / config.damping_factor, 1e-300)
                accepted = True
                break
            damping *= config.damping_factor
        if not accepted:
            err = NumericalError(
                f"damping exceeded cap {config.damping_cap:g} without an acceptable step; "
                f"last training loss {loss:.6g}"
            )
            err.last_loss = loss
            raise err
        if improvement <= config.min_relative_improvement * max(loss, 1e-300):
            break
    w_in, b_in, w_out, b_out = _unpack(theta, p, hidden_units)
    return NarModel(
        p=p,
        hidden_units=hidden_units,
        w_in=w_in,
        b_in=b_in,
        w_out=w_out,
        b_out=float(b_out),
        mean=mean,
        scale=scale,
        seed=seed,
        loss_trace=tuple(trace),
    )


def mape(actual: np.ndarray, forecast: np.ndarray) -> float:
    """Mean absolute percentage error, 100/n * sum |A - F| / |A|."""
    a = np.asarray(actual, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if a.shape != f.shape or a.ndim != 1:
        raise InputError(f"shape mismatch: actual {a.shape} vs forecast {f.shape}")
    if a.size == 0:
        raise InputError("cannot score an empty window")
    zeros = np.flatnonzero(a == 0.0)
    if zeros.size:
        raise InputError(f"actual value is 0 at index {int(zeros[0])}; percentage error undefined")
    return float(np.mean(np.abs((a - f) / a))) * 100.0


@dataclass(frozen=True)
class Reconstruction:
    fitted: np.ndarray
    mape: float


def reconstruct(model: NarModel, series: np.ndarray) -> Reconstruction:
    """One-step-ahead fitted values with teacher forcing.

    fitted[i] predicts series[p + i] from the true values series[i .. p +
    i - 1]; never reads at or beyond the predicted position.
    """
    x = np.asarray(series, dtype=float)
    if x.size <= model.p:
        raise InputError(f"series length {x.size} must exceed p={model.p}")
    u, target = _lag_matrix(x, model.p)
    fitted = model.predict_next(u)
    return Reconstruction(fitted=fitted, mape=mape(target, fitted))


@dataclass(frozen=True)
class ForecastRow:
    segment_label: str
    method: str
    d_used: float
    mape: float
    seed: int
    n_eval: int
    start: int
    stop: int
    skipped_reason: str | None = None
    # populated only when the pipeline is asked to keep fitted traces;
    # eval_start is the absolute index of the first scored observation
    eval_start: int | None = None
    actual: tuple[float, ...] | None = None
    fitted: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "segment": self.segment_label,
            "method": self.method,
            "d_used": self.d_used,
            "mape": self.mape,
            "seed": self.seed,
            "n_eval": self.n_eval,
            "start": self.start,
            "stop": self.stop,
            "skipped_reason": self.skipped_reason,
        }


@dataclass(frozen=True)
class ForecastReport:
    rows: tuple[ForecastRow, ...]
    scale: str  # "levels" or "differenced"

    def aggregate(self) -> dict[str, float]:
        """Mean MAPE per method over rows that were not skipped."""
        out: dict[str, float] = {}
        for method in (METHOD_FD, METHOD_LFD):
            vals = [r.mape for r in self.rows if r.method == method and not r.skipped_reason]
            if vals:
                out[method] = float(np.mean(vals))
        return out


def _fitted_with_levels(
    model: NarModel, y_win: np.ndarray, x_win: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Fitted differenced values and their reintegrated level forecasts.

    With teacher forcing the differencing history c_t = y_t - x_t is known
    exactly from true values, so the level forecast is fitted_y - c_t.
    """
    rec = reconstruct(model, y_win)
    c = y_win[model.p :] - x_win[model.p :]
    return rec.fitted, rec.fitted - c


def pipeline_compare(
    series: TimeSeries | np.ndarray,
    breaks: ChangePointResult | Sequence[int] | None,
    p: int = DEFAULT_LAGS,
    hidden_units: int = DEFAULT_HIDDEN,
    seeds: Sequence[int] = (0,),
    train_config: TrainConfig = TrainConfig(),
    scale: str = "levels",
    methods: tuple[str, ...] = (METHOD_FD, METHOD_LFD),
    truncation: int | None = None,
    evaluation: str = "in-sample",
    keep_fitted: bool = False,
) -> ForecastReport:
    """Global-differencing vs per-segment-differencing NAR comparison.

    FD-NAR estimates one memory parameter on the whole series, differences
    the whole series once, and trains one network per segment on the
    globally differenced values. LFD-NAR re-estimates and re-differences
    inside each segment. Samples still inside a differencing filter's
    burn-in are excluded from training and scoring; within a segment the
    same cut (the widest burn-in among the requested methods) applies to
    every method so their rows stay comparable. Scoring is MAPE per
    (segment, method, seed) row, on reintegrated levels by default or on
    the differenced values with scale="differenced". evaluation="in-sample"
    trains and scores on the whole usable window; evaluation="holdout"
    trains on the first 80% and scores on the remaining 20% only. Segments
    too short to estimate or train produce flagged rows instead of failing
    the run. keep_fitted=True attaches the scored actual/fitted traces to
    each row.
    """
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    label_base = series.label if isinstance(series, TimeSeries) else "series"
    n = x.size
    if scale not in ("levels", "differenced"):
        raise InputError(f"scale must be 'levels' or 'differenced', got {scale!r}")
    if evaluation not in ("in-sample", "holdout"):
        raise InputError(f"evaluation must be 'in-sample' or 'holdout', got {evaluation!r}")
    bad = [m for m in methods if m not in (METHOD_FD, METHOD_LFD)]
    if bad:
        raise InputError(f"unknown method {bad[0]!r}")
    if breaks is None:
        offsets: tuple[int, ...] = ()
    elif isinstance(breaks, ChangePointResult):
        offsets = breaks.offsets
    else:
        offsets = tuple(int(b) for b in breaks)
        if any(b <= 0 or b >= n for b in offsets):
            raise InputError(f"break offsets must lie strictly inside (0, {n})")
        if any(b2 <= b1 for b1, b2 in zip(offsets, offsets[1:])):
            raise InputError("break offsets must be strictly increasing")
    edges = (0, *offsets, n)

    global_d: float | None = None
    global_diff: FracDiffResult | None = None
    if METHOD_FD in methods:
        global_d = gph_estimate(x).d_hat
        global_diff = frac_diff(x, global_d, truncation=truncation)

    rows: list[ForecastRow] = []
    for k, (a, b) in enumerate(zip(edges, edges[1:])):
        seg_label = f"{label_base}::seg{k + 1}"
        x_seg = x[a:b]
        # (method, d_used, differenced segment, in-segment burn-in count)
        jobs: list[tuple[str, float, np.ndarray, int]] = []
        skip: list[tuple[str, str, float]] = []
        if METHOD_FD in methods:
            jobs.append((METHOD_FD, global_d, global_diff.values[a:b],
                         max(global_diff.burn_in - a, 0)))
        if METHOD_LFD in methods:
            try:
                local_d = gph_estimate(x_seg).d_hat
                local_diff = frac_diff(x_seg, local_d, truncation=truncation)
                jobs.append((METHOD_LFD, local_d, local_diff.values, local_diff.burn_in))
            except InputError as exc:
                skip.append((METHOD_LFD, f"local estimate failed: {exc}", math.nan))
        cut = max((burn for *_, burn in jobs), default=0)
        for method, d_used, y_seg, _ in jobs:
            y_win = y_seg[cut:]
            x_win = x_seg[cut:]
            for seed in seeds:
                try:
                    if evaluation == "holdout":
                        split = int(0.8 * y_win.size)
                        model = train_nar(y_win[:split], p, hidden_units, seed, train_config)
                        lo = split - p
                    else:
                        model = train_nar(y_win, p, hidden_units, seed, train_config)
                        lo = 0
                    fitted_y, fitted_x = _fitted_with_levels(model, y_win, x_win)
                    if scale == "levels":
                        scored_actual, scored_fitted = x_win[p + lo :], fitted_x[lo:]
                    else:
                        scored_actual, scored_fitted = y_win[p + lo :], fitted_y[lo:]
                    score = mape(scored_actual, scored_fitted)
                    trace = (
                        dict(
                            eval_start=a + cut + p + lo,
                            actual=tuple(float(v) for v in scored_actual),
                            fitted=tuple(float(v) for v in scored_fitted),
                        )
                        if keep_fitted
                        else {}
                    )
                    rows.append(
                        ForecastRow(
                            seg_label, method, d_used, score, seed,
                            n_eval=scored_actual.size, start=a, stop=b, **trace,
                        )
                    )
                except InputError as exc:
                    rows.append(
                        ForecastRow(
                            seg_label, method, d_used, math.nan, seed,
                            n_eval=0, start=a, stop=b, skipped_reason=str(exc),
                        )
                    )
        for method, reason, d_used in skip:
            for seed in seeds:
                rows.append(
                    ForecastRow(
                        seg_label, method, d_used, math.nan, seed,
                        n_eval=0, start=a, stop=b, skipped_reason=reason,
                    )
                )
    if not any(r.skipped_reason is None for r in rows):
        raise InputError("no segment was long enough to train on")
    return ForecastReport(rows=tuple(rows), scale=scale)
