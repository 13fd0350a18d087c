"""Spectrogram-similarity metric in the style of ViSQOL speech mode.

Reference and degraded signals (16 kHz) are globally aligned, turned into
32-band mel spectrograms with an 80 dB dynamic range, compared with NSIM over
3x3 neighbourhoods, and the frame-averaged similarity is mapped to MOS.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.interpolate import PchipInterpolator

from .. import kernels
from ..audio import AudioBuffer, AudioError
from .base import Metric, align

SPEC_RATE = 16000
N_BANDS = 32
F_MIN = 50.0
F_MAX = 8000.0
FRAME_MS = 30
HOP_MS = 15
NFFT = 512
DYNAMIC_RANGE_DB = 80.0
MIN_DURATION_S = 1.0

C1 = (0.01 * DYNAMIC_RANGE_DB) ** 2
C2 = (0.03 * DYNAMIC_RANGE_DB) ** 2 / 2.0

# NSIM -> MOS anchors
MOS_ANCHORS_NSIM = (0.6, 0.7, 0.8, 0.9, 1.0)
MOS_ANCHORS_MOS = (1.0, 2.0, 3.0, 4.0, 5.0)


@dataclass(frozen=True, eq=False)
class Spectrogram:
    values: np.ndarray  # (bands, frames), dB relative to the signal's loudest cell
    band_edges: np.ndarray
    frame_ms: float = FRAME_MS
    hop_ms: float = HOP_MS

    @property
    def bands(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


@lru_cache(maxsize=None)
def _band_plan(rate: int, nfft: int, bands: int, fmin: float, fmax: float):
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), bands + 1))
    freqs = np.fft.rfftfreq(nfft, 1.0 / rate)
    band = np.searchsorted(edges, freqs, side="right") - 1
    band[freqs == edges[-1]] = bands - 1
    keep = (band >= 0) & (band < bands)
    return edges, np.flatnonzero(keep), band[keep]


def frame_count(n_samples: int, rate: int = SPEC_RATE) -> int:
    frame = rate * FRAME_MS // 1000
    hop = rate * HOP_MS // 1000
    return (n_samples - frame) // hop + 1


def spectrogram(buffer: AudioBuffer) -> Spectrogram:
    """Rectangular mel-band power spectrogram, log-compressed and floored."""
    if buffer.sample_rate != SPEC_RATE:
        raise AudioError(f"spectrogram expects {SPEC_RATE} Hz input, got {buffer.sample_rate}")
    if buffer.duration < MIN_DURATION_S:
        raise AudioError(f"signal too short for a spectrogram ({buffer.duration:.3f} s < {MIN_DURATION_S} s)")
    frame = SPEC_RATE * FRAME_MS // 1000
    hop = SPEC_RATE * HOP_MS // 1000
    frames = sliding_window_view(buffer.samples, frame)[::hop] * np.hanning(frame)
    power = np.abs(np.fft.rfft(frames, NFFT, axis=1)) ** 2
    edges, bins, band = _band_plan(SPEC_RATE, NFFT, N_BANDS, F_MIN, F_MAX)
    energy = np.zeros((N_BANDS, frames.shape[0]))
    np.add.at(energy, band, power[:, bins].T)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(energy)
    top = db.max()
    if not np.isfinite(top):
        top = 0.0
    values = np.maximum(db - top, -DYNAMIC_RANGE_DB)
    return Spectrogram(values, edges)


@lru_cache(maxsize=None)
def gaussian_window(sigma: float = 0.5) -> np.ndarray:
    ax = np.arange(-1, 2)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    g /= g.sum()
    g.flags.writeable = False
    return g


def nsim_map(ref, deg, c1: float = C1, c2: float = C2) -> np.ndarray:
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    deg = np.ascontiguousarray(deg, dtype=np.float64)
    if ref.shape != deg.shape:
        raise ValueError(f"patch shapes differ: {ref.shape} vs {deg.shape}")
    if ref.ndim != 2 or min(ref.shape) < 3:
        raise ValueError(f"patches must be 2-D and at least 3x3, got {ref.shape}")
    return kernels.nsim_map(ref, deg, gaussian_window(), c1, c2)


def nsim(ref_patch, deg_patch, c1: float = C1, c2: float = C2) -> float:
    """Mean luminance x structure similarity over the patch."""
    return float(np.mean(nsim_map(ref_patch, deg_patch, c1, c2)))


_mos_curve = PchipInterpolator(MOS_ANCHORS_NSIM, MOS_ANCHORS_MOS)


def nsim_to_mos(value: float) -> float:
    v = min(max(float(value), MOS_ANCHORS_NSIM[0]), MOS_ANCHORS_NSIM[-1])
    return float(_mos_curve(v))


class NsimMetric(Metric):
    name = "nsim"
    required_rate = SPEC_RATE

    def __init__(self, max_shift_s: float = 0.5):
        self.max_shift_s = max_shift_s

    def similarity(self, reference: AudioBuffer, degraded: AudioBuffer) -> float:
        ref, deg, _ = align(reference.samples, degraded.samples, int(self.max_shift_s * SPEC_RATE))
        s_ref = spectrogram(AudioBuffer(ref, SPEC_RATE))
        s_deg = spectrogram(AudioBuffer(deg, SPEC_RATE))
        per_frame = nsim_map(s_ref.values, s_deg.values).mean(axis=0)
        return float(per_frame.mean())

    def _score(self, reference, degraded):
        return nsim_to_mos(self.similarity(reference, degraded))
