"""Shared pieces for intrusive metrics: the interface, alignment, MOS clamping."""
from __future__ import annotations

import numpy as np
from scipy import signal

from ..audio import AudioBuffer, AudioError, SilentSignalError, resample

MOS_MIN = 1.0
MOS_MAX = 5.0


class MetricError(RuntimeError):
    pass


def clamp_mos(value: float) -> float:
    if not np.isfinite(value):
        raise MetricError(f"non-finite score {value!r}")
    return float(min(max(value, MOS_MIN), MOS_MAX))


class Metric:
    """Intrusive metric: ``score(reference, degraded) -> MOS-LQO in [1, 5]``.

    Subclasses set ``name`` and ``required_rate`` and implement ``_score`` on
    buffers already at ``required_rate``.
    """

    name: str = ""
    required_rate: int = 16000
    output_range = (MOS_MIN, MOS_MAX)

    def score(self, reference: AudioBuffer, degraded: AudioBuffer) -> float:
        if reference.sample_rate != degraded.sample_rate:
            raise AudioError(
                f"{self.name}: rate mismatch ({reference.sample_rate} vs {degraded.sample_rate} Hz)")
        if reference.sample_rate != self.required_rate:
            reference = resample(reference, self.required_rate)
            degraded = resample(degraded, self.required_rate)
        return clamp_mos(self._score(reference, degraded))

    def _score(self, reference: AudioBuffer, degraded: AudioBuffer) -> float:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, rate={self.required_rate})"


def align(reference: np.ndarray, degraded: np.ndarray, max_lag: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Remove the global delay of ``degraded`` found by cross-correlation.

    Returns the overlapping parts of both signals and the lag (positive when
    the degraded signal lags the reference).
    """
    if abs(reference.shape[0] - degraded.shape[0]) > max_lag:
        raise AudioError(
            f"duration mismatch of {abs(reference.shape[0] - degraded.shape[0])} samples exceeds "
            f"the {max_lag}-sample alignment window")
    if not np.any(reference):
        raise SilentSignalError("reference is silent")
    lag = 0
    if np.any(degraded):
        xc = signal.correlate(degraded, reference, mode="full", method="fft")
        zero = reference.shape[0] - 1
        lo = max(zero - max_lag, 0)
        hi = min(zero + max_lag, xc.shape[0] - 1)
        window = xc[lo:hi + 1]
        # ties resolve to the smallest |lag|
        cand = np.flatnonzero(window >= window.max() - 1e-12 * max(abs(window.max()), 1.0)) + lo - zero
        lag = int(cand[np.argmin(np.abs(cand))])
    if lag >= 0:
        deg = degraded[lag:]
        ref = reference
    else:
        deg = degraded
        ref = reference[-lag:]
    n = min(ref.shape[0], deg.shape[0])
    return ref[:n], deg[:n], lag
