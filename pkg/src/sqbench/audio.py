"""Mono audio container, WAV I/O, RMS levels and sample-rate conversion."""
from __future__ import annotations

import logging
import math
import wave
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal

log = logging.getLogger(__name__)

SUPPORTED_RATES = (8000, 16000, 22050)
INT16_SCALE = 32768.0
# more than this fraction of clipped samples after a gain stage is an error
MAX_CLIP_FRACTION = 1e-4
# resampler: stopband attenuation and passband edge relative to the lower Nyquist
RESAMPLE_ATTEN_DB = 80.0
RESAMPLE_PASS_EDGE = 0.9


class AudioError(ValueError):
    pass


class SilentSignalError(AudioError):
    """Operation needs a non-zero signal."""


class ClippingError(AudioError):
    pass


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Immutable mono signal, full scale = 1.0."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise AudioError("samples must be finite")
        if self.sample_rate not in SUPPORTED_RATES:
            raise AudioError(f"unsupported sample rate {self.sample_rate}; expected one of {SUPPORTED_RATES}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples) -> "AudioBuffer":
        return AudioBuffer(samples, self.sample_rate)

    def __eq__(self, other):
        if not isinstance(other, AudioBuffer):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class LevelDbfs:
    """RMS level in dB re full scale. ``value is None`` is the silent state."""

    value: float | None

    @property
    def silent(self) -> bool:
        return self.value is None

    def __float__(self):
        if self.value is None:
            raise SilentSignalError("silent signal has no finite level")
        return float(self.value)


def read_wav(path) -> AudioBuffer:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such WAV file: {path}")
    try:
        with wave.open(str(path), "rb") as w:
            width = w.getsampwidth()
            channels = w.getnchannels()
            rate = w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise AudioError(f"{path}: not a PCM WAV file ({exc})") from exc
    if width != 2:
        raise AudioError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    pcm = np.frombuffer(raw, dtype="<i2")
    if pcm.size == 0:
        raise AudioError(f"{path}: empty audio payload")
    x = pcm.reshape(-1, channels).astype(np.float64) / INT16_SCALE
    return AudioBuffer(x.mean(axis=1), rate)


def to_int16(samples) -> np.ndarray:
    """Saturating float -> int16 with round-half-away-from-zero."""
    v = np.asarray(samples, dtype=np.float64) * INT16_SCALE
    v = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(v, -32768, 32767).astype(np.int16)


def write_wav(buffer: AudioBuffer, path) -> None:
    if np.max(np.abs(buffer.samples), initial=0.0) > 1.0:
        raise AudioError("samples outside [-1, 1]; normalise before writing")
    path = Path(path)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(buffer.sample_rate)
        w.writeframes(to_int16(buffer.samples).astype("<i2").tobytes())


def rms(buffer: AudioBuffer) -> float:
    if len(buffer) == 0:
        raise AudioError("rms of an empty buffer")
    x = buffer.samples
    return float(np.sqrt(np.dot(x, x) / x.shape[0]))


def level_dbfs(buffer: AudioBuffer) -> LevelDbfs:
    r = rms(buffer)
    if r == 0.0:
        return LevelDbfs(None)
    return LevelDbfs(20.0 * math.log10(r))


def clip(samples) -> tuple[np.ndarray, int]:
    x = np.asarray(samples, dtype=np.float64)
    n = int(np.count_nonzero(np.abs(x) > 1.0))
    if n:
        x = np.clip(x, -1.0, 1.0)
    return x, n


def apply_gain(buffer: AudioBuffer, gain: float) -> AudioBuffer:
    """Scale by a linear gain, then hard-clip to full scale."""
    x, clipped = clip(buffer.samples * gain)
    if clipped:
        frac = clipped / len(buffer)
        log.warning("clipped %d of %d samples after gain %.3g", clipped, len(buffer), gain)
        if frac > MAX_CLIP_FRACTION:
            raise ClippingError(f"{clipped} samples ({frac:.4%}) clipped after gain stage")
    return buffer.with_samples(x)


def normalize_to_dbfs(buffer: AudioBuffer, target: float | LevelDbfs = -26.0) -> AudioBuffer:
    target = float(target)
    current = rms(buffer)
    if current == 0.0:
        raise SilentSignalError("cannot normalise a silent signal")
    desired = 10.0 ** (target / 20.0)
    gain = desired / current
    if abs(gain - 1.0) < 1e-12:
        return buffer
    return apply_gain(buffer, gain)


@lru_cache(maxsize=None)
def _resample_plan(src: int, dst: int):
    g = math.gcd(src, dst)
    up, down = dst // g, src // g
    nyq = min(src, dst) / 2.0
    fs_mid = src * up
    width = (1.0 - RESAMPLE_PASS_EDGE) * nyq
    numtaps, beta = signal.kaiserord(RESAMPLE_ATTEN_DB, width / (fs_mid / 2.0))
    numtaps |= 1
    cutoff = (RESAMPLE_PASS_EDGE + 1.0) / 2.0 * nyq
    taps = signal.firwin(numtaps, cutoff, window=("kaiser", beta), fs=fs_mid)
    return up, down, taps


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Polyphase windowed-sinc conversion between the supported rates."""
    src = buffer.sample_rate
    if target_rate not in SUPPORTED_RATES:
        raise AudioError(f"unsupported rate pair {src} -> {target_rate}")
    if target_rate == src:
        return buffer
    up, down, taps = _resample_plan(src, target_rate)
    y = signal.resample_poly(buffer.samples, up, down, window=taps)
    return AudioBuffer(y, target_rate)
