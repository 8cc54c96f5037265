"""PAPR, crosscorrelation and theoretical BER analysis.

Quantities of interest: instantaneous and worst-case peak-to-average
power ratio, its empirical complementary CDF, the normalized pulse
crosscorrelation curve with cutoff/sidelobe metrics, and Gray M-QAM
bit-error-rate theory curves over AWGN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import (
    DegeneratePulseError,
    DegenerateSignalError,
    MetricsOutOfRangeError,
    SearchSpaceTooLargeError,
    UnsupportedOrderError,
)
from .modem import SUPPORTED_ORDERS, OfdmConfig, SampledWaveform, get_kernel
from .pulses import PulseDescriptor, SamplingGrid, pulse_energy, sample_pulse
from . import seeding

__all__ = [
    "CcdfCurve",
    "XcorrCurve",
    "PulseMetrics",
    "papr",
    "max_papr",
    "EXHAUSTIVE_FRAME_CAP",
    "ccdf_empirical",
    "reference_ccdf",
    "xcorr_curve",
    "pulse_metrics",
    "theoretical_ber",
    "q_function",
]

# Largest M**N frame space the exhaustive search will enumerate.
EXHAUSTIVE_FRAME_CAP = 2**16

# |rho| below this counts as a null / orthogonal separation.
NULL_THRESHOLD = 1e-6


@dataclass(frozen=True)
class CcdfCurve:
    """P(PAPR > gamma) on an ascending dB threshold grid."""

    gamma_db: np.ndarray
    prob: np.ndarray
    trials: int


@dataclass(frozen=True)
class XcorrCurve:
    """Normalized crosscorrelation rho(f) between two subcarriers
    carrying the same pulse at frequency separation f (units of 1/T).

    ``phase_center`` is the centroid of p^2; derotating by it removes
    the linear phase of a pulse centered inside [0, T), leaving a real
    curve for symmetric pulses whose sign changes mark the true nulls.
    """

    freq: np.ndarray
    rho: np.ndarray
    phase_center: float = 0.0

    def derotated(self) -> np.ndarray:
        return self.rho * np.exp(2j * np.pi * self.freq * self.phase_center)

    @property
    def resolution(self) -> float:
        """Grid points per unit 1/T."""
        return (len(self.freq) - 1) / float(self.freq[-1] - self.freq[0])


@dataclass(frozen=True)
class PulseMetrics:
    cutoff_3db: float | None
    cutoff_first_null: float | None
    peak_sidelobe_db: float | None
    orthogonality_band: int | None


def papr(w: SampledWaveform) -> float:
    """Peak over mean instantaneous power (linear ratio, >= 1)."""
    power = np.abs(np.asarray(w.samples)) ** 2
    mean = power.mean()
    if mean <= 0.0:
        raise DegenerateSignalError("PAPR of an all-zero waveform is undefined")
    return float(power.max() / mean)


def _batch_papr(symbols: np.ndarray, synth: np.ndarray) -> np.ndarray:
    s = symbols @ synth
    power = np.abs(s) ** 2
    return power.max(axis=1) / power.mean(axis=1)


def _random_paprs(cfg: OfdmConfig, trials: int, seed: int, batch: int = 4096) -> np.ndarray:
    """PAPR of ``trials`` frames with uniform random constellation symbols.

    Trial i draws its symbols from a fixed slice of a counter-based
    stream, so the result is independent of batching.
    """
    kern = get_kernel(cfg)
    points = kern.constellation.points
    M, N = len(points), cfg.n_subcarriers
    words = seeding.words_per_trial(N)
    key = seeding.mix64(seed)
    out = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        u = seeding.trial_uniforms(key, done, b, words)[:, :N]
        idx = seeding.uniforms_to_indices(u, M)
        out[done : done + b] = _batch_papr(points[idx], kern.synth)
        done += b
    return out


def max_papr(
    cfg: OfdmConfig,
    method: str = "exhaustive",
    trials: int = 10_000,
    seed: int = 1,
) -> float:
    """Worst-case PAPR by one of three regimes.

    ``exhaustive`` enumerates every constellation^N frame (only while
    M**N <= 2**16), ``random`` takes the max over seeded random frames,
    ``bound`` returns the coherent-superposition upper bound: the peak
    attainable if every subcarrier carried a maximum-modulus symbol in
    phase, over the mean frame power at unit average symbol energy.
    """
    kern = get_kernel(cfg)
    points = kern.constellation.points
    M, N = len(points), cfg.n_subcarriers

    if method == "exhaustive":
        n_frames = M**N
        if n_frames > EXHAUSTIVE_FRAME_CAP:
            raise SearchSpaceTooLargeError(
                f"M^N = {n_frames} exceeds the exhaustive cap {EXHAUSTIVE_FRAME_CAP}"
            )
        best = 0.0
        batch = 4096
        for start in range(0, n_frames, batch):
            ids = np.arange(start, min(start + batch, n_frames))
            digits = np.empty((len(ids), N), dtype=np.int64)
            rem = ids.copy()
            for k in range(N - 1, -1, -1):
                digits[:, k] = rem % M
                rem //= M
            best = max(best, float(_batch_papr(points[digits], kern.synth).max()))
        return best

    if method == "random":
        return float(_random_paprs(cfg, trials, seed).max())

    if method == "bound":
        a_max = float(np.abs(points).max())
        peak = float(((a_max * np.abs(kern.pulses)).sum(axis=0) ** 2).max())
        mean_power = float(kern.energies.sum())  # T = 1
        return peak / mean_power

    raise ValueError(f"unknown max_papr method: {method!r}")


def ccdf_empirical(
    cfg: OfdmConfig,
    trials: int,
    seed: int,
    gamma_db: np.ndarray,
) -> CcdfCurve:
    """Empirical exceedance probability of PAPR over random frames."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gamma_db = np.asarray(gamma_db, dtype=float)
    papr_db = np.sort(10.0 * np.log10(_random_paprs(cfg, trials, seed)))
    # strict inequality: count of samples > gamma
    exceed = trials - np.searchsorted(papr_db, gamma_db, side="right")
    return CcdfCurve(gamma_db=gamma_db, prob=exceed / trials, trials=trials)


def reference_ccdf(N: int, gamma_linear) -> np.ndarray | float:
    """Classic Nyquist-sampled approximation 1 - (1 - e^-gamma)^N for
    rectangular OFDM; a sanity oracle, not a fit."""
    if N < 1:
        raise ValueError("N must be >= 1")
    g = np.asarray(gamma_linear, dtype=float)
    out = -np.expm1(N * np.log1p(-np.exp(-g), where=g > 0, out=np.zeros_like(g)))
    out = np.where(g > 0, out, 1.0)
    return float(out) if np.isscalar(gamma_linear) else out


def xcorr_curve(
    desc: PulseDescriptor,
    grid: SamplingGrid,
    f_max: float,
    n_points: int,
) -> XcorrCurve:
    """rho(f) = transform of p^2 at separation f, over the pulse energy."""
    if f_max < 1.0 / grid.symbol_duration:
        raise ValueError("f_max must be at least 1/T")
    p = sample_pulse(desc, grid)
    e = pulse_energy(p)
    if e <= 0.0:
        raise DegeneratePulseError("crosscorrelation of a zero-energy pulse")
    t = grid.times()
    freq = np.linspace(0.0, f_max, n_points)
    p2 = np.square(p.samples)
    rho = (np.exp(-2j * np.pi * np.outer(freq, t)) @ p2) * p.dt / e
    center = float(np.sum(t * p2) / p2.sum())
    return XcorrCurve(freq=freq, rho=rho, phase_center=center)


def _interp_crossing(f0, f1, y0, y1, level):
    if y1 == y0:
        return f0
    return f0 + (level - y0) * (f1 - f0) / (y1 - y0)


def pulse_metrics(curve: XcorrCurve) -> PulseMetrics:
    """Cutoffs, peak sidelobe and orthogonality band of |rho(f)|.

    The -3 dB cutoff is the lowest f with |rho|^2 <= 1/2 (linearly
    interpolated); the first null is the lowest f where |rho| drops
    below 1e-6 or the real part changes sign. Raises
    MetricsOutOfRangeError (with partial results) when a feature does
    not occur inside the curve's band.
    """
    if curve.resolution < 64:
        raise ValueError("curve resolution must be >= 64 points per 1/T")
    f = curve.freq
    mag = np.abs(curve.rho)
    mag2 = mag**2

    cutoff_3db = None
    below = np.flatnonzero(mag2 <= 0.5)
    if below.size:
        i = int(below[0])
        cutoff_3db = (
            float(f[i])
            if i == 0
            else float(_interp_crossing(f[i - 1], f[i], mag2[i - 1], mag2[i], 0.5))
        )

    cutoff_null = None
    re = curve.derotated().real
    tiny = np.flatnonzero(mag <= NULL_THRESHOLD)
    flips = np.flatnonzero(np.sign(re[:-1]) * np.sign(re[1:]) < 0)
    candidates = []
    if tiny.size:
        candidates.append(float(f[tiny[0]]))
    if flips.size:
        i = int(flips[0])
        candidates.append(float(_interp_crossing(f[i], f[i + 1], re[i], re[i + 1], 0.0)))
    if candidates:
        cutoff_null = min(candidates)

    sidelobe_db = None
    if cutoff_null is not None:
        tail = mag2[f > cutoff_null]
        if tail.size and tail.max() > 0:
            sidelobe_db = float(10.0 * np.log10(tail.max()))

    band = _orthogonality_band(curve, mag)

    metrics = PulseMetrics(
        cutoff_3db=cutoff_3db,
        cutoff_first_null=cutoff_null,
        peak_sidelobe_db=sidelobe_db,
        orthogonality_band=band,
    )
    if cutoff_3db is None or cutoff_null is None:
        raise MetricsOutOfRangeError(
            f"no {'-3 dB point' if cutoff_3db is None else 'null'} below "
            f"f = {f[-1]:g}/T",
            partial=metrics,
        )
    return metrics


def _orthogonality_band(curve: XcorrCurve, mag: np.ndarray) -> int | None:
    """Smallest b with |rho(k/T)| below threshold for every k >= b on
    the grid; None if even the last integer separation is above it."""
    f = curve.freq
    res = curve.resolution
    ks = np.arange(1, int(math.floor(f[-1] + 1e-9)) + 1)
    if not ks.size:
        return None
    idx = np.round(ks * res).astype(int)
    on_grid = np.abs(f[idx] - ks) < 1e-9
    if not np.all(on_grid):
        raise ValueError("frequency grid must contain the integer separations")
    ok = mag[idx] <= NULL_THRESHOLD
    if not ok[-1]:
        return None
    above = np.flatnonzero(~ok)
    return int(ks[above[-1]] + 1) if above.size else 1


def q_function(x) -> np.ndarray | float:
    """Standard normal tail probability via the complementary error function."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.isscalar(x) else out


def theoretical_ber(M: int, ebn0_db) -> np.ndarray | float:
    """Gray nearest-neighbor BER approximation for M-QAM over AWGN.

    P_b = (4/log2 M)(1 - 1/sqrt M) Q(sqrt(3 log2 M / (M-1) * gamma_b)).
    Exact for Gray QPSK (M = 4, where it reduces to Q(sqrt(2 gamma_b)));
    approximate for the non-square orders 8 and 32.
    """
    if M not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(f"unsupported constellation order M={M}")
    k = math.log2(M)
    gamma_b = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    arg = np.sqrt(3.0 * k / (M - 1) * gamma_b)
    out = (4.0 / k) * (1.0 - 1.0 / math.sqrt(M)) * q_function(arg)
    return float(out) if np.isscalar(ebn0_db) else out
