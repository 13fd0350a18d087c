"""Narrowband perceptual-disturbance metric modelled loosely on PESQ.

Both signals are split into 32 ms frames, mapped to bark-band power, turned
into Zwicker-style loudness densities and compared band by band. Differences
inside a masking deadzone are ignored; additive content is weighted further by
an asymmetry factor (capped at 12). Frame disturbances are pooled with an L6
norm over split-second intervals and an L2 norm over the file, then mapped to
MOS with a decreasing logistic.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..audio import AudioBuffer
from .base import Metric, align

RATE = 8000
FRAME = 256
HOP = 128
F_LO = 100.0
F_HI = 3900.0
N_BANDS = 24
# digital power -> dB SPL: a -26 dBFS signal plays at 79 dB SPL
SPL_OFFSET_DB = 105.0
ZWICKER_POWER = 0.23
# Zwicker scale doubled so a silent degraded signal saturates the disturbance
LOUDNESS_SCALE = 2 * 0.1866
DEADZONE = 0.25
ASYM_EXPONENT = 1.2
ASYM_FLOOR = 3.0
ASYM_CAP = 12.0
ASYM_CONSTANT_DB = 50.0  # added in band power (dB SPL) before forming the ratio
SYM_WEIGHT = 0.1
ASYM_WEIGHT = 0.0309
INTERVAL_FRAMES = 20
# logistic: MOS = 1 + MOS_SPAN / (1 + exp(slope * (D - midpoint)))
MOS_SPAN = 3.6
LOGISTIC_SLOPE = 1.3
LOGISTIC_MIDPOINT = 2.5


def hz_to_bark(f):
    f = np.asarray(f, dtype=float)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


def hearing_threshold_db(f):
    """Absolute threshold of hearing (Terhardt), dB SPL."""
    k = np.asarray(f, dtype=float) / 1000.0
    return 3.64 * k ** -0.8 - 6.5 * np.exp(-0.6 * (k - 3.3) ** 2) + 1e-3 * k ** 4


@lru_cache(maxsize=None)
def band_plan():
    """(bin->band index, kept bins, band widths in bark, band centre Hz)."""
    freqs = np.fft.rfftfreq(FRAME, 1.0 / RATE)
    edges_bark = np.linspace(hz_to_bark(F_LO), hz_to_bark(F_HI), N_BANDS + 1)
    bark = hz_to_bark(freqs)
    band = np.searchsorted(edges_bark, bark, side="right") - 1
    keep = np.flatnonzero((band >= 0) & (band < N_BANDS))
    band = band[keep]
    # bands too narrow to hold a bin are merged into their upper neighbour
    used = np.unique(band)
    remap = np.searchsorted(used, band)
    widths = np.array([
        (edges_bark[used[i + 1]] if i + 1 < len(used) else edges_bark[-1]) - edges_bark[u]
        for i, u in enumerate(used)
    ])
    centres = np.array([freqs[keep][remap == i].mean() for i in range(len(used))])
    return remap, keep, widths, centres


def band_power(x: np.ndarray) -> np.ndarray:
    """(frames, bands) power, calibrated to SPL units (10^(dB SPL / 10))."""
    frames = sliding_window_view(x, FRAME)[::HOP] * np.hanning(FRAME)
    # scaled so a full-scale sine reads 0.5 (its mean power) in its bin neighbourhood
    spec = np.abs(np.fft.rfft(frames, axis=1)) ** 2 * (2.0 / (FRAME * np.sum(np.hanning(FRAME) ** 2)))
    remap, keep, widths, _ = band_plan()
    out = np.zeros((frames.shape[0], widths.shape[0]))
    np.add.at(out.T, remap, spec[:, keep].T)
    return out * 10.0 ** (SPL_OFFSET_DB / 10.0)


def loudness(power: np.ndarray) -> np.ndarray:
    """Zwicker loudness density per band (sone/bark-like units)."""
    _, _, _, centres = band_plan()
    p0 = 10.0 ** (hearing_threshold_db(centres) / 10.0)
    ratio = power / p0
    dens = LOUDNESS_SCALE * (p0 / 0.5) ** ZWICKER_POWER * ((0.5 + 0.5 * ratio) ** ZWICKER_POWER - 1.0)
    return np.maximum(dens, 0.0)


def _lp(values: np.ndarray, p: float, axis=None) -> np.ndarray:
    return np.mean(np.abs(values) ** p, axis=axis) ** (1.0 / p)


def frame_disturbances(ref: np.ndarray, deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and asymmetric disturbance per frame."""
    p_ref = band_power(ref)
    p_deg = band_power(deg)
    l_ref = loudness(p_ref)
    l_deg = loudness(p_deg)
    diff = l_deg - l_ref
    mask = DEADZONE * np.minimum(l_ref, l_deg)
    d = np.sign(diff) * np.maximum(np.abs(diff) - mask, 0.0)

    c = 10.0 ** (ASYM_CONSTANT_DB / 10.0)
    asym = ((p_deg + c) / (p_ref + c)) ** ASYM_EXPONENT
    asym = np.where(asym < ASYM_FLOOR, 0.0, np.minimum(asym, ASYM_CAP))

    _, _, widths, _ = band_plan()
    w = widths / widths.sum()
    sym = np.sqrt(np.sum(w * d * d, axis=1)) * np.sqrt(len(w))
    additive = np.sum(w * np.abs(d * asym), axis=1)
    return sym, additive


def pool_frames(per_frame: np.ndarray) -> float:
    """L6 over half-overlapping split-second intervals, then L2 over intervals."""
    n = per_frame.shape[0]
    if n <= INTERVAL_FRAMES:
        return float(_lp(per_frame, 6.0))
    step = INTERVAL_FRAMES // 2
    starts = range(0, n - INTERVAL_FRAMES + 1, step)
    intervals = np.array([_lp(per_frame[s:s + INTERVAL_FRAMES], 6.0) for s in starts])
    return float(_lp(intervals, 2.0))


def disturbance_to_mos(d: float) -> float:
    return float(1.0 + MOS_SPAN / (1.0 + np.exp(LOGISTIC_SLOPE * (d - LOGISTIC_MIDPOINT))))


class DisturbanceMetric(Metric):
    name = "disturbance"
    required_rate = RATE

    def __init__(self, max_shift_s: float = 0.5):
        self.max_shift_s = max_shift_s

    def disturbance(self, reference: AudioBuffer, degraded: AudioBuffer) -> float:
        ref, deg, _ = align(reference.samples, degraded.samples, int(self.max_shift_s * RATE))
        sym, additive = frame_disturbances(ref, deg)
        return SYM_WEIGHT * pool_frames(sym) + ASYM_WEIGHT * pool_frames(additive)

    def _score(self, reference, degraded):
        return disturbance_to_mos(self.disturbance(reference, degraded))
