"""Seeded Monte-Carlo campaigns: BER sweeps, PAPR/CCDF runs, pulse reports.

Every campaign output is a pure function of its plan and master seed.
Frames are independent single OFDM symbols; frame i always consumes the
same random substream slice, and stopping decisions are made at frame
granularity in index order, so re-running with a different worker count
produces byte-identical results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import seeding
from .analysis import (
    CcdfCurve,
    MetricsOutOfRangeError,
    ccdf_empirical,
    max_papr,
    pulse_metrics,
    xcorr_curve,
)
from .errors import PlanError
from .modem import GRAM_CONDITION_LIMIT, IllConditionedGramError, OfdmConfig, get_kernel
from .pulses import PulseDescriptor, PulseFamily, SamplingGrid

__all__ = [
    "BerPoint",
    "SweepPlan",
    "XcorrRow",
    "run_ber_point",
    "run_ber_sweep",
    "run_papr_experiment",
    "run_xcorr_report",
    "wilson_interval",
    "zf_noise_enhancement_db",
]

BATCH_FRAMES = 2048


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    m_order: int
    pulse: str
    shape_n: int
    bits_sent: int
    bit_errors: int
    ber: float
    ci_lo: float
    ci_hi: float
    seed: int


@dataclass(frozen=True)
class SweepPlan:
    cfg: OfdmConfig
    ebn0_db_list: tuple[float, ...]
    target_errors: int = 200
    max_frames: int = 1_000_000
    master_seed: int = 1

    def __post_init__(self):
        if not self.ebn0_db_list:
            raise PlanError("ebn0_db_list must be nonempty")
        if any(b < a for a, b in zip(self.ebn0_db_list, self.ebn0_db_list[1:])):
            raise PlanError("ebn0_db_list must be ascending")
        if self.target_errors < 1:
            raise PlanError("target_errors must be >= 1")
        if self.max_frames < 1:
            raise PlanError("max_frames must be >= 1")


def wilson_interval(errors: int, trials_bits: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if trials_bits < 1:
        raise PlanError("trials_bits must be >= 1")
    if not 0 <= errors <= trials_bits:
        raise PlanError("errors must lie in [0, trials_bits]")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    n = trials_bits
    p = errors / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials_bits else min(1.0, center + half)
    return lo, hi


def _pulse_tag(cfg: OfdmConfig) -> tuple[str, int]:
    if isinstance(cfg.pulse_assignment, PulseDescriptor):
        return cfg.pulse_assignment.tag(), cfg.pulse_assignment.shape_n
    return "mixed", -1


def _frame_errors_batch(kern, ebn0_db, first_frame, n_frames, key):
    """Bit errors per frame for frames [first_frame, first_frame + n_frames)."""
    cfg = kern.cfg
    N, S = cfg.n_subcarriers, cfg.samples_per_symbol
    nbits = cfg.bits_per_frame
    words = seeding.words_per_trial(nbits + 2 * S)
    u = seeding.trial_uniforms(key, first_frame, n_frames, words)

    bits = seeding.uniforms_to_bits(u[:, :nbits])
    const = kern.constellation
    k = const.bits_per_symbol
    values = bits.reshape(n_frames, N, k) @ (1 << np.arange(k - 1, -1, -1))
    a = const.points[values]

    s = a @ kern.synth
    if math.isinf(ebn0_db) and ebn0_db > 0:
        r = s
    else:
        z = seeding.uniforms_to_normals(u[:, nbits : nbits + 2 * S])
        energy = (np.abs(s) ** 2).sum(axis=1) * kern.dt
        n0 = (energy / nbits) * 10.0 ** (-ebn0_db / 10.0)
        sigma = np.sqrt(n0 / (2.0 * kern.dt))
        r = s + sigma[:, None] * (z[:, :S] + 1j * z[:, S:])

    y = r @ kern.mf
    a_hat = kern.solve_zf(y)
    d2 = np.abs(a_hat[:, :, None] - const.points) ** 2
    values_hat = np.argmin(d2, axis=2)
    bits_hat = ((values_hat[:, :, None] >> np.arange(k - 1, -1, -1)) & 1).reshape(
        n_frames, nbits
    )
    return (bits_hat != bits).sum(axis=1)


def run_ber_point(
    cfg: OfdmConfig,
    ebn0_db: float,
    target_errors: int = 200,
    max_frames: int = 1_000_000,
    seed: int = 1,
    workers: int = 1,
) -> BerPoint:
    """One Monte-Carlo BER measurement with an error-count stopping rule.

    Stops at the first frame where the cumulative error count reaches
    ``target_errors``, or at ``max_frames``, whichever comes first.
    """
    if target_errors < 1 or max_frames < 1:
        raise PlanError("target_errors and max_frames must be >= 1")
    kern = get_kernel(cfg)
    if kern.gram_condition > GRAM_CONDITION_LIMIT:
        raise IllConditionedGramError(kern.gram_condition)

    key = seeding.mix64(seed)
    nbits = cfg.bits_per_frame

    batches = [
        (lo, min(lo + BATCH_FRAMES, max_frames))
        for lo in range(0, max_frames, BATCH_FRAMES)
    ]

    total_errors = 0
    frames_used = 0

    def consume(per_frame: np.ndarray, lo: int) -> bool:
        nonlocal total_errors, frames_used
        cum = np.cumsum(per_frame)
        hit = np.flatnonzero(total_errors + cum >= target_errors)
        if hit.size:
            stop_at = int(hit[0])
            total_errors += int(cum[stop_at])
            frames_used = lo + stop_at + 1
            return True
        total_errors += int(cum[-1]) if cum.size else 0
        frames_used = lo + len(per_frame)
        return False

    if workers <= 1:
        for lo, hi in batches:
            if consume(_frame_errors_batch(kern, ebn0_db, lo, hi - lo, key), lo):
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = False
            for wave_start in range(0, len(batches), workers):
                wave = batches[wave_start : wave_start + workers]
                futures = [
                    pool.submit(_frame_errors_batch, kern, ebn0_db, lo, hi - lo, key)
                    for lo, hi in wave
                ]
                for (lo, _), fut in zip(wave, futures):
                    if not done:
                        done = consume(fut.result(), lo)
                    else:
                        fut.result()  # computed past the stop; discarded
                if done:
                    break

    if frames_used == 0:
        raise PlanError("plan produced zero frames")
    bits_sent = frames_used * nbits
    lo_ci, hi_ci = wilson_interval(total_errors, bits_sent)
    tag, shape_n = _pulse_tag(cfg)
    return BerPoint(
        ebn0_db=ebn0_db,
        m_order=cfg.m_order,
        pulse=tag,
        shape_n=shape_n,
        bits_sent=bits_sent,
        bit_errors=total_errors,
        ber=total_errors / bits_sent,
        ci_lo=lo_ci,
        ci_hi=hi_ci,
        seed=seed,
    )


def run_ber_sweep(plan: SweepPlan, workers: int = 1) -> list[BerPoint]:
    """One BerPoint per Eb/N0 value, each with its own derived seed."""
    points = []
    for index, ebn0_db in enumerate(plan.ebn0_db_list):
        point_seed = seeding.mix64(plan.master_seed, index)
        try:
            points.append(
                run_ber_point(
                    plan.cfg,
                    ebn0_db,
                    target_errors=plan.target_errors,
                    max_frames=plan.max_frames,
                    seed=point_seed,
                    workers=workers,
                )
            )
        except Exception as exc:
            exc.args = (f"sweep point {index} (Eb/N0 = {ebn0_db} dB): {exc}",)
            raise
    return points


def run_papr_experiment(
    cfg: OfdmConfig,
    trials: int,
    seed: int,
    gamma_db: np.ndarray,
) -> tuple[CcdfCurve, float]:
    """Empirical CCDF plus the running maximum PAPR over the trials."""
    curve = ccdf_empirical(cfg, trials, seed, gamma_db)
    observed_max = max_papr(cfg, method="random", trials=trials, seed=seed)
    return curve, observed_max


@dataclass(frozen=True)
class XcorrRow:
    shape_n: int
    cutoff_3db: float | None
    cutoff_first_null: float | None
    peak_sidelobe_db: float | None
    orthogonality_band: int | None
    error: str | None = None


def run_xcorr_report(
    family: PulseFamily,
    n_list,
    grid: SamplingGrid,
    f_max: float,
    n_points: int | None = None,
) -> list[XcorrRow]:
    """Crosscorrelation metrics per shape parameter, one row per n.

    A row whose metrics cannot be fully located is marked with the
    error message; the remaining rows are still computed.
    """
    if not len(n_list):
        raise PlanError("n_list must be nonempty")
    if n_points is None:
        n_points = int(round(f_max * 128)) + 1
    rows = []
    for n in n_list:
        desc = PulseDescriptor(family=family, shape_n=int(n))
        curve = xcorr_curve(desc, grid, f_max, n_points)
        try:
            m = pulse_metrics(curve)
            err = None
        except MetricsOutOfRangeError as exc:
            m = exc.partial
            err = str(exc)
        rows.append(
            XcorrRow(
                shape_n=int(n),
                cutoff_3db=m.cutoff_3db,
                cutoff_first_null=m.cutoff_first_null,
                peak_sidelobe_db=m.peak_sidelobe_db,
                orthogonality_band=m.orthogonality_band,
                error=err,
            )
        )
    return rows


def zf_noise_enhancement_db(cfg: OfdmConfig) -> float:
    """Mean diagonal of G^-1 in dB: the ZF noise penalty versus an
    orthogonal (rectangular-pulse) system."""
    kern = get_kernel(cfg)
    inv = np.linalg.inv(kern.gram.entries)
    return float(10.0 * np.log10(np.real(np.trace(inv)) / cfg.n_subcarriers))
