"""Data-driven bandwidth selection by correlogram thresholding.

For each pair on a 10 x 10 grid of [0,1]^2, find the smallest shift q after
which the cross-correlogram stays below C0 * sqrt(log10(T)/T) over a short
window of lags; aggregate the per-pair shifts and rescale by the effective
flat-top radius: B = 1 / max(ceil(q / c_ef), 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateDataError,
    DomainError,
    FunctionalSeries,
    ParseError,
    center,
    _readonly,
)
from .kernels import FlatTopSpec, effective_flat_top_radius

__all__ = [
    "BandwidthReport",
    "correlogram",
    "select_bandwidth",
    "report_to_json_dict",
    "report_from_json_dict",
]

GRID_SIDE = 10


@dataclass(frozen=True)
class BandwidthReport:
    """Outcome of the empirical bandwidth rule, with the full per-pair shift
    grid kept for diagnostics."""

    q_hat: int
    q_grid: np.ndarray
    B_T: float
    c_ef: float
    C0: float
    K_T: int
    aggregation: str
    threshold: float
    window_start: int
    truncated: bool

    def __post_init__(self):
        object.__setattr__(self, "q_grid", _readonly(np.asarray(self.q_grid, dtype=int)))

    def pair_bandwidth(self, i: int, j: int) -> float:
        """Bandwidth from the shift of a single grid pair instead of the
        aggregate, for targeting one (tau, sigma)."""
        return _bandwidth_from_q(int(self.q_grid[i, j]), self.c_ef)


def _bandwidth_from_q(q: int, c_ef: float) -> float:
    return 1.0 / max(math.ceil(q / c_ef), 1)


def _aggregate(q_grid: np.ndarray, aggregation: str) -> int:
    if aggregation == "max":
        return int(q_grid.max())
    if aggregation == "mean":
        return int(math.ceil(q_grid.mean()))
    raise DomainError(f"aggregation must be 'max' or 'mean', got {aggregation!r}")


def gamma_grid_indices(d: int) -> np.ndarray:
    """Nearest midpoint-grid indices for the probe points i/10, i = 0..9."""
    idx = np.array([round(i * d / 10 - 0.5) for i in range(GRID_SIDE)], dtype=int)
    return np.clip(idx, 0, d - 1)


def correlogram(series: FunctionalSeries, lag: int, tau_idx: int, sigma_idx: int) -> float:
    """Sample cross-correlation rhohat_m(tau, sigma) =
    rhat_m(tau, sigma) / sqrt(rhat_0(tau, tau) * rhat_0(sigma, sigma)).

    The divisor-T autocovariance keeps |rhohat| <= 1 by Cauchy-Schwarz.
    """
    series = center(series)
    T = series.n_curves
    lag = int(lag)
    if abs(lag) >= T:
        raise DomainError(f"lag {lag} out of range for T = {T}")
    v = series.values
    x, y = v[:, tau_idx], v[:, sigma_idx]
    vx = float(x @ x) / T
    vy = float(y @ y) / T
    if vx <= 0.0 or vy <= 0.0:
        raise DegenerateDataError("zero variance at a probed grid point")
    u = abs(lag)
    num = float(x[u:] @ y[: T - u]) / T if lag >= 0 else float(y[u:] @ x[: T - u]) / T
    return num / math.sqrt(vx * vy)


def select_bandwidth(series: FunctionalSeries, spec: FlatTopSpec,
                     C0: float = 2.0, aggregation: str = "mean",
                     window_start: int = 1, K_T: int | None = None) -> BandwidthReport:
    """Empirical bandwidth rule over the 10 x 10 probe grid.

    Per pair, q is the smallest shift such that |rhohat_{m+q}| stays below the
    threshold for every m = window_start..K_T. With window_start = 1 (default)
    the window covers the lags strictly beyond q, matching the simultaneous
    confidence-band reading of the rule; window_start = 0 additionally tests
    lag q itself, which can never pass at q = 0 on the diagonal (rhohat_0 = 1)
    and therefore never selects B = 1.

    Aggregation over the grid is mean-with-ceiling by default, which keeps a
    single outlying pair from dominating; ``max`` is the conservative variant.
    If some pair stays significant through the largest testable shift, its
    entry is capped at T - K_T - 1 and the report is flagged as truncated.
    """
    series = center(series)
    T = series.n_curves
    if T < 8:
        raise DomainError(f"bandwidth selection needs T >= 8, got T = {T}")
    if window_start not in (0, 1):
        raise DomainError(f"window_start must be 0 or 1, got {window_start}")
    if C0 <= 0.0:
        raise DomainError(f"C0 must be positive, got {C0}")
    if K_T is None:
        K_T = max(5, math.ceil(math.sqrt(math.log10(T))))
    K_T = int(K_T)

    idx = gamma_grid_indices(series.d)
    sub = series.values[:, idx]                       # T x 10
    r0 = (sub * sub).mean(axis=0)
    if np.any(r0 <= 0.0):
        raise DegenerateDataError("zero variance at a probed grid point")
    denom = np.sqrt(np.outer(r0, r0))
    threshold = C0 * math.sqrt(math.log10(T) / T)

    q_cap = T - K_T - 1
    if q_cap < 0:
        raise DomainError(f"series too short for the K_T = {K_T} window")

    def rho_ok(max_lag: int) -> np.ndarray:
        ok = np.empty((max_lag + 1, GRID_SIDE, GRID_SIDE), dtype=bool)
        for m in range(max_lag + 1):
            rho = (sub[m:].T @ sub[: T - m]) / T / denom
            ok[m] = np.abs(rho) < threshold
        return ok

    q_grid = np.full((GRID_SIDE, GRID_SIDE), -1, dtype=int)
    max_lag = min(T - 1, 4 * K_T + 8)
    while True:
        ok = rho_ok(max_lag)
        q_grid[:] = -1
        for q in range(0, min(q_cap, max_lag - K_T) + 1):
            window = ok[q + window_start: q + K_T + 1]
            hit = window.all(axis=0) & (q_grid < 0)
            q_grid[hit] = q
            if (q_grid >= 0).all():
                break
        if (q_grid >= 0).all() or max_lag >= T - 1:
            break
        max_lag = min(T - 1, 2 * max_lag)

    truncated = bool((q_grid < 0).any())
    q_grid[q_grid < 0] = q_cap

    c_ef = effective_flat_top_radius(spec)
    q_hat = _aggregate(q_grid, aggregation)
    return BandwidthReport(
        q_hat=q_hat,
        q_grid=q_grid,
        B_T=_bandwidth_from_q(q_hat, c_ef),
        c_ef=c_ef,
        C0=float(C0),
        K_T=K_T,
        aggregation=aggregation,
        threshold=threshold,
        window_start=window_start,
        truncated=truncated,
    )


def report_to_json_dict(report: BandwidthReport) -> dict:
    return {
        "q_hat": report.q_hat,
        "q_grid": report.q_grid.tolist(),
        "B_T": report.B_T,
        "c_ef": report.c_ef,
        "C0": report.C0,
        "K_T": report.K_T,
        "aggregation": report.aggregation,
        "threshold": report.threshold,
        "window_start": report.window_start,
        "truncated": report.truncated,
    }


def report_from_json_dict(obj: dict) -> BandwidthReport:
    try:
        return BandwidthReport(
            q_hat=int(obj["q_hat"]),
            q_grid=np.asarray(obj["q_grid"], dtype=int),
            B_T=float(obj["B_T"]),
            c_ef=float(obj["c_ef"]),
            C0=float(obj["C0"]),
            K_T=int(obj["K_T"]),
            aggregation=str(obj["aggregation"]),
            threshold=float(obj["threshold"]),
            window_start=int(obj["window_start"]),
            truncated=bool(obj["truncated"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad bandwidth report JSON: {exc}") from exc
