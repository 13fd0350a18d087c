"""Speech-like test material and a synthetic corpus builder.

The signals are harmonic complexes with a gliding fundamental, a formant
envelope that changes per syllable, and syllable-rate amplitude modulation
with short pauses. They stand in for real recordings in tests and demos.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy import signal

from .audio import AudioBuffer, normalize_to_dbfs, write_wav

# (F1, F2, F3) in Hz for a handful of vowel-like targets
VOWELS = np.array([
    [730, 1090, 2440],
    [270, 2290, 3010],
    [530, 1840, 2480],
    [570, 840, 2410],
    [300, 870, 2240],
    [660, 1720, 2410],
])
F0_RANGE = {"male": (95.0, 150.0), "female": (175.0, 260.0)}


def speech_like(duration: float, rate: int = 22050, seed: int = 0, gender: str = "male",
                level_dbfs: float = -26.0) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate))
    t = np.arange(n) / rate

    # syllables of 120-300 ms, some followed by short pauses
    bounds = [0]
    while bounds[-1] < n:
        bounds.append(bounds[-1] + int(rng.uniform(0.12, 0.30) * rate))
    bounds[-1] = n
    env = np.zeros(n)
    vowel_track = np.zeros((n, 3))
    for a, b in zip(bounds[:-1], bounds[1:]):
        length = b - a
        if rng.random() < 0.15:
            vowel_track[a:b] = VOWELS[0]
            continue
        env[a:b] = np.hanning(length + 2)[1:-1] ** 0.7 * rng.uniform(0.5, 1.0)
        vowel_track[a:b] = VOWELS[rng.integers(len(VOWELS))] * rng.uniform(0.9, 1.1)
    smooth = signal.windows.hann(int(0.04 * rate))
    smooth /= smooth.sum()
    for k in range(3):
        vowel_track[:, k] = np.convolve(vowel_track[:, k], smooth, mode="same")

    lo, hi = F0_RANGE[gender]
    f0 = lo + (hi - lo) * (0.5 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.2, 0.6) * t + rng.uniform(0, 2 * np.pi)))
    phase = 2 * np.pi * np.cumsum(f0) / rate

    x = np.zeros(n)
    for h in range(1, int(5000 / lo)):
        fh = h * f0
        active = fh < min(5000.0, rate / 2 - 200)
        if not active.any():
            break
        gain = np.zeros(n)
        for k, bw in enumerate((90.0, 110.0, 170.0)):
            gain += (0.9 ** k) / (1.0 + ((fh - vowel_track[:, k]) / bw) ** 2)
        gain *= 1.0 / h ** 0.6
        x += active * gain * np.sin(h * phase + rng.uniform(0, 2 * np.pi))
    # a little aspiration noise
    x += 0.02 * rng.standard_normal(n) * (env > 0)
    x *= env
    return normalize_to_dbfs(AudioBuffer(x, rate), level_dbfs)


LANGUAGES = ("English", "Turkish", "Korean")
MANIFEST_FIELDS = ("sample_id", "path", "language", "gender", "speaker_id", "age", "start_s", "end_s", "role")


def write_corpus(directory, per_language: int = 16, languages=LANGUAGES, babble_pool: int = 6,
                 duration: float = 5.0, rate: int = 22050, seed: int = 0) -> Path:
    """Write gender-balanced synthetic WAVs plus a manifest; returns the manifest path."""
    directory = Path(directory)
    (directory / "wav").mkdir(parents=True, exist_ok=True)
    rows = []
    k = 0
    for lang in languages:
        for i in range(per_language):
            gender = "male" if i % 2 == 0 else "female"
            rows.append((f"{lang[:2].lower()}{i:02d}", lang, gender, "test"))
    for i in range(babble_pool):
        rows.append((f"bab{i:02d}", "other", "male" if i % 2 == 0 else "female", "babble_pool"))
    records = []
    for sample_id, lang, gender, role in rows:
        buf = speech_like(duration, rate, seed=seed * 100003 + k, gender=gender)
        k += 1
        rel = Path("wav") / f"{sample_id}.wav"
        write_wav(buf, directory / rel)
        records.append({
            "sample_id": sample_id, "path": rel.as_posix(), "language": lang, "gender": gender,
            "speaker_id": sample_id, "age": 22, "start_s": 0.0, "end_s": duration, "role": role,
        })
    manifest = directory / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS)
        w.writeheader()
        w.writerows(records)
    return manifest
