"""Reference preparation and degradation of one excerpt.

reference: excerpt -> edge silence trim -> 8 kHz -> IRS band limit -> -26 dBFS
degraded:  reference + noise at the target SNR -> -26 dBFS -> G.711 A-law
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..audio import AudioBuffer, SilentSignalError, normalize_to_dbfs, read_wav, resample
from ..channel import codec_pass, irs_filter
from ..noise import DEFAULT_TALKERS, NoiseKind, gen_babble, gen_colored, mix_at_snr
from .manifest import SampleMeta

TARGET_DBFS = -26.0
CHANNEL_RATE = 8000
TRIM_THRESHOLD_DBFS = -50.0
TRIM_FRAME_MS = 20.0


@dataclass(frozen=True)
class DegradationSpec:
    noise: NoiseKind
    snr: float
    codec: bool = True

    def __post_init__(self):
        object.__setattr__(self, "noise", NoiseKind.parse(self.noise))
        if not math.isfinite(self.snr):
            raise ValueError("SNR must be finite")


def trim_silence(buffer: AudioBuffer, threshold_dbfs: float = TRIM_THRESHOLD_DBFS,
                 frame_ms: float = TRIM_FRAME_MS) -> AudioBuffer:
    """Drop leading and trailing frames whose RMS level is below the threshold."""
    frame = max(1, int(round(buffer.sample_rate * frame_ms / 1000.0)))
    x = buffer.samples
    n_frames = math.ceil(len(x) / frame)
    padded = np.zeros(n_frames * frame)
    padded[: len(x)] = x
    frames = padded.reshape(n_frames, frame)
    # the last frame may be partial: measure it over its real samples only
    counts = np.full(n_frames, frame)
    counts[-1] = len(x) - (n_frames - 1) * frame
    power = np.sum(frames * frames, axis=1) / counts
    loud = power > 10.0 ** (threshold_dbfs / 10.0)
    if not loud.any():
        raise SilentSignalError(f"excerpt is entirely below {threshold_dbfs} dBFS")
    first = int(np.argmax(loud))
    last = n_frames - int(np.argmax(loud[::-1]))
    return buffer.with_samples(x[first * frame: min(last * frame, len(x))])


def load_excerpt(sample: SampleMeta) -> AudioBuffer:
    audio = read_wav(sample.path)
    start = int(round((sample.start_s or 0.0) * audio.sample_rate))
    stop = len(audio) if sample.end_s is None else int(round(sample.end_s * audio.sample_rate))
    return audio.with_samples(audio.samples[start:stop])


def condition(buffer: AudioBuffer) -> AudioBuffer:
    """Channel-rate conversion, band limitation and level normalisation."""
    return normalize_to_dbfs(irs_filter(resample(buffer, CHANNEL_RATE)), TARGET_DBFS)


def prepare_reference(sample: SampleMeta | AudioBuffer, trim_threshold_dbfs: float = TRIM_THRESHOLD_DBFS,
                      trim_frame_ms: float = TRIM_FRAME_MS) -> AudioBuffer:
    audio = load_excerpt(sample) if isinstance(sample, SampleMeta) else sample
    return condition(trim_silence(audio, trim_threshold_dbfs, trim_frame_ms))


def make_noise(kind, length: int, seed: int, babble_pool: Sequence[AudioBuffer] = (),
               talkers: int = DEFAULT_TALKERS) -> AudioBuffer:
    """Channel-rate noise of ``length`` samples at -26 dBFS."""
    kind = NoiseKind.parse(kind)
    if kind is NoiseKind.BABBLE:
        # pool entries are already band-limited references
        return gen_babble(list(babble_pool), talkers, length, seed)
    noise = gen_colored(kind, length, CHANNEL_RATE, seed)
    return normalize_to_dbfs(irs_filter(noise), TARGET_DBFS)


def degrade(reference: AudioBuffer, spec: DegradationSpec, noise: AudioBuffer | None = None, seed: int = 0,
            babble_pool: Sequence[AudioBuffer] = (), talkers: int = DEFAULT_TALKERS) -> AudioBuffer:
    if noise is None:
        noise = make_noise(spec.noise, len(reference), seed, babble_pool, talkers)
    mixed = normalize_to_dbfs(mix_at_snr(reference, noise, spec.snr), TARGET_DBFS)
    return codec_pass(mixed) if spec.codec else mixed
