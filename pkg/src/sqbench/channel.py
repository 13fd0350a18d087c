"""Narrowband telephone channel: 300-3400 Hz band limitation and G.711 A-law."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from . import kernels
from .audio import INT16_SCALE, AudioBuffer, AudioError, to_int16


@dataclass(frozen=True)
class IrsFilterSpec:
    passband: tuple = (300.0, 3400.0)
    reference_hz: float = 1000.0
    stop_low_hz: float = 100.0
    stop_high_hz: float = 3950.0
    stop_atten_db: float = 60.0
    sample_rate: int = 8000

    @property
    def numtaps(self) -> int:
        return len(irs_taps(self))


IRS = IrsFilterSpec()


@lru_cache(maxsize=None)
def irs_taps(spec: IrsFilterSpec = IRS) -> np.ndarray:
    """Kaiser-windowed linear-phase band-pass, cut-offs at the transition midpoints."""
    lo, hi = spec.passband
    width = min(lo - spec.stop_low_hz, spec.stop_high_hz - hi)
    numtaps, beta = signal.kaiserord(spec.stop_atten_db, width / (spec.sample_rate / 2.0))
    numtaps |= 1
    cutoffs = [(spec.stop_low_hz + lo) / 2.0, (hi + spec.stop_high_hz) / 2.0]
    taps = signal.firwin(numtaps, cutoffs, window=("kaiser", beta), pass_zero=False,
                         fs=spec.sample_rate, scale=False)
    # unit gain at the reference frequency
    _, h = signal.freqz(taps, worN=[spec.reference_hz], fs=spec.sample_rate)
    taps = taps / np.abs(h[0])
    taps.flags.writeable = False
    return taps


def irs_response(freqs, spec: IrsFilterSpec = IRS) -> np.ndarray:
    """Magnitude response in dB at the given frequencies."""
    _, h = signal.freqz(irs_taps(spec), worN=np.asarray(freqs, dtype=float), fs=spec.sample_rate)
    return 20.0 * np.log10(np.maximum(np.abs(h), 1e-300))


def irs_filter(buffer: AudioBuffer, spec: IrsFilterSpec = IRS) -> AudioBuffer:
    if buffer.sample_rate != spec.sample_rate:
        raise AudioError(f"IRS filter runs at {spec.sample_rate} Hz, got {buffer.sample_rate}")
    taps = irs_taps(spec)
    # odd-length linear phase: 'same' trims (N-1)/2 at each end = group delay
    y = np.convolve(buffer.samples, taps, mode="same")
    return buffer.with_samples(y)


def alaw_encode(pcm) -> np.ndarray:
    """int16 samples -> 8-bit A-law codes."""
    return kernels.alaw_encode(np.ascontiguousarray(pcm, dtype=np.int16).reshape(-1))


def alaw_decode(codes) -> np.ndarray:
    return kernels.alaw_decode(np.ascontiguousarray(codes, dtype=np.uint8).reshape(-1))


def codec_pass(buffer: AudioBuffer) -> AudioBuffer:
    if buffer.sample_rate != 8000:
        raise AudioError(f"G.711 runs at 8000 Hz, got {buffer.sample_rate}")
    pcm = to_int16(buffer.samples)
    decoded = alaw_decode(alaw_encode(pcm))
    return buffer.with_samples(decoded.astype(np.float64) / INT16_SCALE)
