"""Pink/blue/babble noise synthesis and mixing at a target SNR."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audio import AudioBuffer, AudioError, SilentSignalError, normalize_to_dbfs, rms

NOISE_LEVEL_DBFS = -26.0
DEFAULT_TALKERS = 6


class NoiseKind(str, enum.Enum):
    PINK = "pink"
    BLUE = "blue"
    BABBLE = "babble"

    @classmethod
    def parse(cls, value) -> "NoiseKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown noise kind {value!r}; expected one of {[k.value for k in cls]}") from None


@dataclass(frozen=True)
class MixGains:
    """RMS amplitudes: clean, current noise, desired noise; gain in dB."""

    clean_rms: float
    noise_rms: float
    desired_rms: float
    gain_db: float

    @property
    def linear(self) -> float:
        return 10.0 ** (self.gain_db / 20.0)


def gen_colored(kind, length: int, rate: int, seed: int) -> AudioBuffer:
    """Gaussian white noise shaped by f^-1/2 (pink) or f^+1/2 (blue) amplitude weights."""
    kind = NoiseKind.parse(kind)
    if kind is NoiseKind.BABBLE:
        raise ValueError("babble noise is built from speech, use gen_babble")
    if length <= 0:
        raise AudioError("noise length must be positive")
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(length))
    freqs = np.fft.rfftfreq(length, 1.0 / rate)
    weight = np.zeros_like(freqs)
    nz = freqs > 0
    weight[nz] = freqs[nz] ** (-0.5 if kind is NoiseKind.PINK else 0.5)
    shaped = np.fft.irfft(spectrum * weight, n=length)
    return normalize_to_dbfs(AudioBuffer(shaped, rate), NOISE_LEVEL_DBFS)


def gen_babble(pool: Sequence[AudioBuffer], talkers: int = DEFAULT_TALKERS, length: int | None = None,
               seed: int = 0, shift: bool = True) -> AudioBuffer:
    """Sum of randomly picked, circularly shifted talkers, tiled to ``length``.

    With ``shift=False`` the segments are summed without offsets.
    """
    if not pool:
        raise AudioError("babble pool is empty")
    if talkers < 2:
        raise ValueError("babble needs at least two talkers")
    rate = pool[0].sample_rate
    if any(p.sample_rate != rate for p in pool):
        raise AudioError("babble pool mixes sample rates")
    if length is None:
        length = max(len(p) for p in pool)
    if length <= 0:
        raise AudioError("babble length must be positive")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=talkers, replace=len(pool) < talkers)
    mix = np.zeros(length)
    for idx in picks:
        seg = pool[int(idx)].samples
        if seg.shape[0] == 0 or not np.any(seg):
            raise AudioError(f"babble pool entry {int(idx)} is empty or silent")
        tiled = np.resize(seg, length)
        offset = int(rng.integers(length)) if shift else 0
        mix += np.roll(tiled, offset)
    return normalize_to_dbfs(AudioBuffer(mix, rate), NOISE_LEVEL_DBFS)


def required_noise_gain(clean_rms: float, noise_rms: float, snr_db: float) -> MixGains:
    if not (clean_rms > 0 and noise_rms > 0):
        raise ValueError("RMS values must be positive")
    desired = clean_rms / 10.0 ** (snr_db / 20.0)
    return MixGains(clean_rms, noise_rms, desired, 20.0 * math.log10(desired / noise_rms))


def measure_snr(clean: AudioBuffer, noise: AudioBuffer) -> float:
    """SNR in dB from whole-signal RMS of clean and noise components."""
    s, n = rms(clean), rms(noise)
    if s == 0.0 or n == 0.0:
        raise SilentSignalError("SNR undefined for a silent component")
    return 20.0 * math.log10(s / n)


def scale_noise(clean: AudioBuffer, noise: AudioBuffer, snr_db: float) -> AudioBuffer:
    """Noise truncated to the clean length and scaled to sit ``snr_db`` below it."""
    if clean.sample_rate != noise.sample_rate:
        raise AudioError(f"rate mismatch: clean {clean.sample_rate} Hz, noise {noise.sample_rate} Hz")
    if len(noise) < len(clean):
        raise AudioError(f"noise ({len(noise)} samples) shorter than clean ({len(clean)})")
    noise = noise.with_samples(noise.samples[: len(clean)])
    p_s, p_n = rms(clean), rms(noise)
    if p_s == 0.0:
        raise SilentSignalError("clean signal is silent")
    if p_n == 0.0:
        raise SilentSignalError("noise is silent")
    gains = required_noise_gain(p_s, p_n, snr_db)
    return noise.with_samples(noise.samples * gains.linear)


def mix_at_snr(clean: AudioBuffer, noise: AudioBuffer, snr_db: float) -> AudioBuffer:
    """clean + noise scaled to the target SNR. No clipping: re-normalise afterwards."""
    scaled = scale_noise(clean, noise, snr_db)
    return clean.with_samples(clean.samples + scaled.samples)
