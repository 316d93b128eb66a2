"""Moving-average simulation truth and the Monte-Carlo IMSE benchmark.

Data generator: X_t = A0 eps_t + A1 eps_{t-1} with Brownian-motion innovations
represented through a truncated sine expansion, and random coefficient
operators whose rows shrink like 1/j. The spectral density of this model is
available in closed form, which provides the benchmark's ground truth.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    DomainError,
    FrequencyKernel,
    FunctionalSeries,
    Grid,
    center,
    hermitize,
    hs_distance,
    _readonly,
)
from .bandwidth import select_bandwidth
from .estimator import DEFAULT_FREQUENCIES, estimate_smoothed
from .kernels import (
    UnsupportedKernelError,
    epanechnikov,
    flat_top_parzen,
    infinitely_differentiable,
    spec_from_json_dict,
    spec_to_json_dict,
    trapezoid,
)

__all__ = [
    "Fma1Model",
    "TrueSpectrum",
    "basis_matrix",
    "make_fma1_model",
    "generate_fma1",
    "true_spectrum",
    "ImseConfig",
    "ImseRow",
    "imse_experiment",
    "imse_from_estimate",
    "rows_to_csv",
    "rows_to_json",
]

DEFAULT_KERNELS = (epanechnikov(), trapezoid(), flat_top_parzen(),
                   infinitely_differentiable())


def basis_matrix(grid: Grid, n_basis: int) -> np.ndarray:
    """d x n matrix of the orthonormal sine system sqrt(2)*sin((m-1/2)*pi*tau)
    on the grid; exactly orthonormal under the midpoint 1/d quadrature."""
    m = np.arange(1, n_basis + 1)
    return np.sqrt(2.0) * np.sin(np.outer(grid.points, (m - 0.5) * np.pi))


def innovation_variances(n_innov: int) -> np.ndarray:
    """Coordinate variances eta_k = 1/((k - 1/2)^2 pi^2) of the Brownian
    innovation expansion, strictly decreasing."""
    k = np.arange(1, n_innov + 1)
    return 1.0 / ((k - 0.5) ** 2 * np.pi**2)


@dataclass(frozen=True)
class Fma1Model:
    """First-order functional moving average: coefficient operators a0, a1
    (n_basis x n_innov), innovation coordinate variances eta, simulation grid,
    and the seed the model was drawn from."""

    a0: np.ndarray
    a1: np.ndarray
    eta: np.ndarray
    grid: Grid
    seed: int | None = None

    def __post_init__(self):
        a0 = np.asarray(self.a0, dtype=float)
        a1 = np.asarray(self.a1, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        if a0.shape != a1.shape or a0.ndim != 2:
            raise DomainError("a0 and a1 must be matrices of identical shape")
        if eta.shape != (a0.shape[1],):
            raise DomainError("eta length must match the operator column count")
        if not (np.all(np.isfinite(a0)) and np.all(np.isfinite(a1))):
            raise DomainError("operators contain non-finite entries")
        if np.any(eta <= 0.0) or np.any(np.diff(eta) >= 0.0):
            raise DomainError("eta must be positive and strictly decreasing")
        object.__setattr__(self, "a0", _readonly(a0))
        object.__setattr__(self, "a1", _readonly(a1))
        object.__setattr__(self, "eta", _readonly(eta))

    @property
    def n_basis(self) -> int:
        return self.a0.shape[0]

    @property
    def n_innov(self) -> int:
        return self.a0.shape[1]


@dataclass(frozen=True)
class TrueSpectrum:
    """Exact spectral density kernels of a model on its grid, one Hermitian
    PSD matrix per frequency."""

    frequencies: np.ndarray
    kernels: tuple

    def __post_init__(self):
        object.__setattr__(self, "frequencies",
                           _readonly(np.asarray(self.frequencies, dtype=float)))
        object.__setattr__(self, "kernels", tuple(self.kernels))


def _draw_operators(rng: np.random.Generator, n_basis: int, n_innov: int):
    # row j entries ~ N(0, j^{-2})
    scale = 1.0 / np.arange(1, n_basis + 1)[:, None]
    a0 = rng.standard_normal((n_basis, n_innov)) * scale
    a1 = rng.standard_normal((n_basis, n_innov)) * scale
    return a0, a1


def make_fma1_model(seed: int, d: int = 100, n_basis: int = 50,
                    n_innov: int = 100) -> Fma1Model:
    """Draw random coefficient operators from the seed and assemble a model."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    a0, a1 = _draw_operators(rng, n_basis, n_innov)
    return Fma1Model(a0, a1, innovation_variances(n_innov), Grid(d), seed=seed)


def generate_fma1(model: Fma1Model, T: int,
                  rng: np.random.Generator | None = None) -> FunctionalSeries:
    """Simulate T curves from the model.

    Innovation coordinate vectors for t = -1..T-1 are independent centered
    Gaussians with variances eta; curve t is (A0 eps_t + A1 eps_{t-1}) mapped
    through the sine basis. Reproducible: the default generator derives from
    the model seed.
    """
    if T < 2:
        raise DomainError(f"need T >= 2, got {T}")
    if rng is None:
        if model.seed is None:
            raise DomainError("model has no seed; pass an explicit generator")
        rng = np.random.default_rng(np.random.SeedSequence(model.seed).spawn(2)[1])
    eps = rng.standard_normal((T + 1, model.n_innov)) * np.sqrt(model.eta)
    coef = eps[1:] @ model.a0.T + eps[:-1] @ model.a1.T
    psi = basis_matrix(model.grid, model.n_basis)
    return FunctionalSeries(model.grid, coef @ psi.T, centered=False)


def true_spectrum(model: Fma1Model, frequencies=None) -> TrueSpectrum:
    """Closed-form spectral density of the model on its grid:
    f_omega = (1/(2*pi)) * Psi (A0 + e^{-i w} A1) diag(eta) (...)^H Psi^T."""
    if frequencies is None:
        frequencies = DEFAULT_FREQUENCIES
    frequencies = np.asarray(frequencies, dtype=float)
    psi = basis_matrix(model.grid, model.n_basis)
    kernels = []
    for w in frequencies:
        aw = model.a0 + np.exp(-1j * w) * model.a1
        f_coef = (aw * model.eta) @ aw.conj().T / TWO_PI
        m = psi @ f_coef @ psi.T
        kernels.append(FrequencyKernel(w % TWO_PI, hermitize(m)))
    return TrueSpectrum(frequencies, tuple(kernels))


# ---------------------------------------------------------------------------
# IMSE benchmark
# ---------------------------------------------------------------------------

def imse_frequency_weights(frequencies) -> np.ndarray:
    """Trapezoidal weights for 2 * int_0^pi ... d omega on a uniform grid
    starting at 0: one grid spacing per point, halved at omega = 0, doubled
    for the full circle. On the default grid this is (pi/10) per point."""
    frequencies = np.asarray(frequencies, dtype=float)
    h = float(frequencies[1] - frequencies[0]) if frequencies.size > 1 else np.pi
    w = np.full(frequencies.size, h)
    w[frequencies == 0.0] *= 0.5
    return 2.0 * w


def imse_from_estimate(estimate, truth: TrueSpectrum) -> float:
    """Weighted squared Hilbert-Schmidt distance between an estimate and the
    truth over the frequency grid."""
    w = imse_frequency_weights(estimate.frequencies)
    return float(sum(
        wi * hs_distance(a, b) ** 2
        for wi, a, b in zip(w, estimate.kernels, truth.kernels)
    ))


@dataclass(frozen=True)
class ImseConfig:
    """Benchmark configuration; the defaults are the desk-scale run."""

    T_list: tuple = (64, 128, 256, 512, 1024)
    n_runs: int = 50
    kernel_specs: tuple = DEFAULT_KERNELS
    bandwidth_mode: object = "rate"     # "rate", "2rate", "auto", or a float
    seed: int = 0
    d: int = 50
    n_basis: int = 50
    n_innov: int = 100
    redraw_operators: bool = True
    n_jobs: int = 1
    frequencies: tuple = tuple(DEFAULT_FREQUENCIES)

    def __post_init__(self):
        if self.n_runs < 2:
            raise DomainError(f"need at least two runs, got {self.n_runs}")
        if self.bandwidth_mode not in ("rate", "2rate", "auto") and \
                not isinstance(self.bandwidth_mode, (int, float)):
            raise DomainError(f"bad bandwidth mode {self.bandwidth_mode!r}")


@dataclass(frozen=True)
class ImseRow:
    kernel: str
    T: int
    bandwidth_mode: str
    n_runs: int
    mean_imse: float
    mean_log2_imse: float
    stderr: float


def resolve_bandwidth(mode, T: int, series=None, spec=None) -> float:
    """Map a bandwidth mode to a value: the T^(-1/5) rate, twice the rate, the
    empirical rule (flat-top specs only), or an explicit number."""
    if mode == "rate":
        return T ** (-0.2)
    if mode == "2rate":
        b = 2.0 * T ** (-0.2)
        if b > 1.0:
            raise DomainError(f"2*T^(-1/5) = {b:.3f} exceeds 1 at T = {T}")
        return b
    if mode == "auto":
        if spec is None or not spec.is_flat_top:
            raise UnsupportedKernelError(
                "automatic bandwidth needs a flat-top kernel (no effective "
                "flat-top radius exists for the baseline)")
        return select_bandwidth(series, spec).B_T
    return float(mode)


def _replication_setup(task):
    (T, seed_ss, spec_dicts, bandwidth_mode, d, n_basis, n_innov,
     frequencies, operators) = task
    rng = np.random.default_rng(seed_ss)
    if operators is None:
        a0, a1 = _draw_operators(rng, n_basis, n_innov)
    else:
        a0, a1 = operators
    model = Fma1Model(a0, a1, innovation_variances(n_innov), Grid(d))
    series = center(generate_fma1(model, T, rng=rng))
    truth = true_spectrum(model, frequencies)
    specs = [spec_from_json_dict(sd) for sd in spec_dicts]
    return T, series, truth, specs, bandwidth_mode, frequencies


def _run_replication(task) -> dict:
    """One (T, replication) cell: simulate, estimate with every kernel spec,
    and return the per-kernel IMSE against the replication's own truth."""
    T, series, truth, specs, bandwidth_mode, frequencies = _replication_setup(task)
    out = {}
    for spec in specs:
        bandwidth = resolve_bandwidth(bandwidth_mode, T, series=series, spec=spec)
        est = estimate_smoothed(series, spec, bandwidth, frequencies)
        out[spec.identifier] = imse_from_estimate(est, truth)
    return out


def imse_experiment(config: ImseConfig, estimator_override=None) -> list:
    """Run the Monte-Carlo IMSE benchmark and return one :class:`ImseRow` per
    (kernel, T) cell.

    Replications map over per-task generator streams split from the master
    seed, so serial and parallel executions produce identical numbers and the
    whole table is reproducible bitwise from the config.

    ``estimator_override(series, spec, bandwidth, frequencies, truth)`` is a
    test hook replacing the estimator; it forces the serial path.
    """
    tasks = []
    ss = np.random.SeedSequence(config.seed)
    n_tasks = len(config.T_list) * config.n_runs
    children = ss.spawn(n_tasks + 1)
    operators = None
    if not config.redraw_operators:
        rng_op = np.random.default_rng(children[n_tasks])
        operators = _draw_operators(rng_op, config.n_basis, config.n_innov)
    spec_dicts = [spec_to_json_dict(s) for s in config.kernel_specs]
    freqs = tuple(config.frequencies)
    for ti, T in enumerate(config.T_list):
        for r in range(config.n_runs):
            tasks.append((int(T), children[ti * config.n_runs + r], spec_dicts,
                          config.bandwidth_mode, config.d, config.n_basis,
                          config.n_innov, freqs, operators))

    if estimator_override is not None:
        results = [_run_replication_override(t, estimator_override) for t in tasks]
    elif config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            results = list(pool.map(_run_replication, tasks, chunksize=4))
    else:
        results = [_run_replication(t) for t in tasks]

    rows = []
    mode_label = (config.bandwidth_mode if isinstance(config.bandwidth_mode, str)
                  else repr(float(config.bandwidth_mode)))
    for ti, T in enumerate(config.T_list):
        cell = results[ti * config.n_runs:(ti + 1) * config.n_runs]
        for spec in config.kernel_specs:
            imses = np.array([c[spec.identifier] for c in cell])
            mean = float(imses.mean())
            se_mean = float(imses.std(ddof=1) / math.sqrt(imses.size))
            rows.append(ImseRow(
                kernel=spec.identifier,
                T=int(T),
                bandwidth_mode=mode_label,
                n_runs=int(imses.size),
                mean_imse=mean,
                mean_log2_imse=float(np.log2(mean)) if mean > 0.0 else float("-inf"),
                # delta-method standard error of log2(mean)
                stderr=se_mean / (mean * math.log(2.0)) if mean > 0.0 else 0.0,
            ))
    return rows


def _run_replication_override(task, estimator_override) -> dict:
    T, series, truth, specs, bandwidth_mode, frequencies = _replication_setup(task)
    out = {}
    for spec in specs:
        bandwidth = resolve_bandwidth(bandwidth_mode, T, series=series, spec=spec)
        est = estimator_override(series, spec, bandwidth, frequencies, truth)
        out[spec.identifier] = imse_from_estimate(est, truth)
    return out


def rows_to_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kernel", "T", "bandwidth_mode", "mean_log2_imse", "stderr"])
        for r in rows:
            writer.writerow([r.kernel, r.T, r.bandwidth_mode,
                             repr(float(r.mean_log2_imse)), repr(float(r.stderr))])


def rows_to_json(rows, path) -> None:
    payload = [
        {
            "kernel": r.kernel,
            "T": r.T,
            "bandwidth_mode": r.bandwidth_mode,
            "n_runs": r.n_runs,
            "mean_imse": float(r.mean_imse),
            "mean_log2_imse": float(r.mean_log2_imse),
            "stderr": float(r.stderr),
        }
        for r in rows
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
