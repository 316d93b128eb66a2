"""Frequency-domain machinery: functional DFT, periodogram kernels, sample
autocovariance kernels, and the two spectral density estimators (smoothed
periodogram and lag window)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    DomainError,
    FrequencyKernel,
    FunctionalSeries,
    NotCenteredError,
    SpectralEstimate,
    center,
    hermitize,
    _readonly,
)
from .kernels import (
    FlatTopSpec,
    KernelFamily,
    UnsupportedKernelError,
    baseline_weight,
    lag_weights,
)

#: Paper-grid default: omega_j = pi * j / 10 for j = 0..9.
DEFAULT_FREQUENCIES = np.pi * np.arange(10) / 10.0

METHOD_SMOOTHED = "smoothed-periodogram"
METHOD_LAG_WINDOW = "lag-window"


@dataclass(frozen=True)
class Fdft:
    """Functional discrete Fourier transform at one frequency: a length-d
    complex coefficient vector on the grid."""

    omega: float
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", _readonly(c))


@dataclass(frozen=True)
class AutocovKernel:
    """Sample autocovariance kernel at one integer lag, as a d x d real matrix
    with entry (i, j) = rhat_u(tau_i, tau_j)."""

    lag: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(np.asarray(self.matrix, dtype=float)))


def _require_centered(series: FunctionalSeries) -> None:
    if not series.centered:
        raise NotCenteredError("series must be centered; apply center() first")


def _fdft_matrix(series: FunctionalSeries) -> np.ndarray:
    """All fDFT coefficients as a T x d complex matrix, row s = frequency
    2*pi*s/T. Cost O(d T log T) via an FFT over the time axis."""
    _require_centered(series)
    T = series.n_curves
    return np.fft.fft(series.values, axis=0) / math.sqrt(TWO_PI * T)


def fdft_all(series: FunctionalSeries) -> list[Fdft]:
    """Functional DFT at every Fourier frequency 2*pi*s/T, s = 0..T-1:
    Xtilde_omega(tau_i) = (2*pi*T)^(-1/2) * sum_t X_t(tau_i) e^(-i omega t)."""
    F = _fdft_matrix(series)
    T = series.n_curves
    return [Fdft(TWO_PI * s / T, F[s]) for s in range(T)]


def periodogram(fdft: Fdft) -> FrequencyKernel:
    """Rank-1 periodogram kernel p(tau_i, tau_j) = Xtilde(tau_i) *
    conj(Xtilde(tau_j)); Hermitian PSD by construction."""
    c = fdft.coefficients
    return FrequencyKernel(fdft.omega % TWO_PI, np.outer(c, c.conj()))


def autocovariance(series: FunctionalSeries, lag: int) -> AutocovKernel:
    """Sample autocovariance kernel at an integer lag u, |u| < T:
    rhat_u(tau_i, tau_j) = (1/T) * sum_t X_{t+u}(tau_i) X_t(tau_j) with the
    sum over all t keeping both indices in range (divisor T, biased form)."""
    _require_centered(series)
    T = series.n_curves
    lag = int(lag)
    if abs(lag) >= T:
        raise DomainError(f"lag {lag} out of range for T = {T}")
    u = abs(lag)
    v = series.values
    m = (v[u:].T @ v[: T - u]) / T
    if lag < 0:
        m = m.T
    return AutocovKernel(lag, m)


def _weight_matrix(spec: FlatTopSpec, bandwidth: float, x: np.ndarray) -> np.ndarray:
    """Smoothing weights W(x) for the baseline or a flat-top taper."""
    if spec.family is KernelFamily.EPANECHNIKOV:
        return baseline_weight(bandwidth, x)
    lam = lag_weights(spec, bandwidth)
    out = np.full(x.shape, 1.0, dtype=float)
    for u in range(1, lam.size):
        if lam[u] != 0.0:
            out += (2.0 * lam[u]) * np.cos(u * x)
    return out / TWO_PI


def _prepare(series, bandwidth, frequencies):
    series = center(series)
    bandwidth = float(bandwidth)
    if not 0.0 < bandwidth <= 1.0:
        raise DomainError(f"bandwidth must lie in (0, 1], got {bandwidth}")
    if frequencies is None:
        frequencies = DEFAULT_FREQUENCIES
    frequencies = np.asarray(frequencies, dtype=float)
    return series, bandwidth, frequencies


def _map_frequencies(fn, n: int, n_jobs: int) -> list:
    if n_jobs > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=min(n_jobs, n)) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(i) for i in range(n)]


def _smoothed_from_weight_matrix(series, weights, frequencies, bandwidth,
                                 kernel_id, n_jobs=1) -> SpectralEstimate:
    """Weighted periodogram average with an explicit weight matrix of shape
    (n_frequencies, T-1); row f holds W(omega_f - 2*pi*s/T) for s = 1..T-1."""
    T = series.n_curves
    F = _fdft_matrix(series)[1:]  # s = 1..T-1; the s = 0 ordinate is excluded
    scale = TWO_PI / T

    def one(fi: int) -> FrequencyKernel:
        m = scale * ((F.T * weights[fi]) @ F.conj())
        return FrequencyKernel(frequencies[fi] % TWO_PI, hermitize(m))

    kernels = _map_frequencies(one, len(frequencies), n_jobs)
    return SpectralEstimate(frequencies, tuple(kernels), bandwidth, kernel_id,
                            METHOD_SMOOTHED)


def estimate_smoothed(series: FunctionalSeries, spec: FlatTopSpec,
                      bandwidth: float, frequencies=None,
                      n_jobs: int = 1) -> SpectralEstimate:
    """Spectral density estimate by smoothing periodogram ordinates:
    fhat_omega = (2*pi/T) * sum_{s=1}^{T-1} W(omega - 2*pi*s/T) * p_{2*pi*s/T}.

    The weight is the periodized flat-top weight for flat-top specs and the
    periodized Epanechnikov weight for the baseline. The series is centered
    first, which makes the excluded s = 0 ordinate identically zero.
    """
    series, bandwidth, frequencies = _prepare(series, bandwidth, frequencies)
    T = series.n_curves
    om_s = TWO_PI * np.arange(1, T) / T
    x = frequencies[:, None] - om_s[None, :]
    weights = _weight_matrix(spec, bandwidth, x)
    return _smoothed_from_weight_matrix(series, weights, frequencies, bandwidth,
                                        spec.identifier, n_jobs)


def estimate_lagwindow(series: FunctionalSeries, spec: FlatTopSpec,
                       bandwidth: float, frequencies=None,
                       n_jobs: int = 1) -> SpectralEstimate:
    """Lag-window form of the flat-top estimate:
    fhat_omega = (1/(2*pi)) * sum_{|u|<T} lam(B*u) rhat_u e^(-i omega u).

    lam has compact support, so the sum is truncated at the first lag outside
    it; all dropped terms are exactly zero. Flat-top specs only: the baseline
    has no taper form.
    """
    if spec.family is KernelFamily.EPANECHNIKOV:
        raise UnsupportedKernelError("the Epanechnikov baseline has no lag-window form")
    series, bandwidth, frequencies = _prepare(series, bandwidth, frequencies)
    T = series.n_curves
    lam = lag_weights(spec, bandwidth)[: T]  # zero weight beyond the support
    covs = [autocovariance(series, u).matrix for u in range(lam.size)]

    def one(fi: int) -> FrequencyKernel:
        w = frequencies[fi]
        m = lam[0] * covs[0].astype(complex)
        for u in range(1, lam.size):
            if lam[u] == 0.0:
                continue
            a = (lam[u] * np.exp(-1j * w * u)) * covs[u]
            m += a + a.conj().T
        return FrequencyKernel(w % TWO_PI, hermitize(m / TWO_PI))

    kernels = _map_frequencies(one, len(frequencies), n_jobs)
    return SpectralEstimate(frequencies, tuple(kernels), bandwidth,
                            spec.identifier, METHOD_LAG_WINDOW)
