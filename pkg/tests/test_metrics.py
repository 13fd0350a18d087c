import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sqbench.audio import AudioBuffer, AudioError, SilentSignalError, resample
from sqbench.metrics import (DisturbanceMetric, ExternalMetric, MetricError, NsimMetric, align, available,
                             clamp_mos, external_metric, get_metric, nsim, nsim_map, nsim_to_mos, parse_score,
                             spectrogram)
from sqbench.metrics.disturbance import disturbance_to_mos
from sqbench.metrics.nsim import C1, C2, hz_to_mel, mel_to_hz

from .oracles import spearman, tone

NSIM = NsimMetric()
DIST = DisturbanceMetric()


@pytest.fixture(scope="module")
def ref16(reference_8k):
    return resample(reference_8k, 16000)


# spectrogram ------------------------------------------------------------

def test_spectrogram_tone_has_one_dominant_band():
    s = spectrogram(AudioBuffer(tone(1000, 16000, seconds=2.0), 16000))
    k = np.searchsorted(s.band_edges, 1000.0) - 1
    per_band = s.values.mean(axis=1)
    assert per_band[k] - np.max(np.delete(per_band, k)) >= 20.0


def test_spectrogram_silence_floor_and_framing():
    s = spectrogram(AudioBuffer(np.zeros(16000 * 5), 16000))
    assert s.bands == 32
    # floor((5000 - 30) / 15) + 1
    assert s.frames == 332
    assert np.all(s.values == -80.0)


def test_spectrogram_band_layout():
    s = spectrogram(AudioBuffer(tone(440, 16000, seconds=1.0), 16000))
    assert s.band_edges[0] == pytest.approx(50.0)
    assert s.band_edges[-1] == pytest.approx(8000.0)
    np.testing.assert_allclose(np.diff(hz_to_mel(s.band_edges)), np.diff(hz_to_mel(s.band_edges))[0])
    assert mel_to_hz(hz_to_mel(1234.5)) == pytest.approx(1234.5)
    assert np.all(np.isfinite(s.values)) and s.values.max() == 0.0


def test_spectrogram_errors():
    with pytest.raises(AudioError):
        spectrogram(AudioBuffer(np.zeros(8000), 8000))
    with pytest.raises(AudioError, match="short"):
        spectrogram(AudioBuffer(np.zeros(8000), 16000))


# NSIM -------------------------------------------------------------------

patches = arrays(np.float64, (5, 7), elements=st.floats(-80.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(patches)
def test_nsim_identity(p):
    assert nsim(p, p) == pytest.approx(1.0, abs=1e-9)


def test_nsim_noise_lowers_similarity(rng):
    ref = rng.uniform(-60, 0, size=(32, 50))
    deg = ref + rng.normal(0, 20, size=ref.shape)
    assert nsim(ref, deg) < nsim(ref, ref)


def test_nsim_constant_patches_reduce_to_luminance():
    ref = np.full((4, 4), -20.0)
    deg = np.full((4, 4), -30.0)
    lum = (2 * 20 * 30 + C1) / (20 ** 2 + 30 ** 2 + C1)
    assert nsim(ref, deg) == pytest.approx(lum, rel=1e-12)
    assert lum < 1.0


@settings(max_examples=100, deadline=None)
@given(patches, patches)
def test_nsim_map_is_symmetric(a, b):
    # luminance and structure terms are both symmetric in their arguments
    np.testing.assert_allclose(nsim_map(a, b), nsim_map(b, a), rtol=0, atol=1e-12)


def test_nsim_shape_errors():
    with pytest.raises(ValueError):
        nsim(np.zeros((3, 3)), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        nsim(np.zeros((2, 5)), np.zeros((2, 5)))


def test_nsim_mos_mapping_anchors():
    for v, m in [(1.0, 5.0), (0.9, 4.0), (0.8, 3.0), (0.7, 2.0), (0.6, 1.0), (0.2, 1.0), (1.1, 5.0)]:
        assert nsim_to_mos(v) == pytest.approx(m)
    xs = np.linspace(0.5, 1.05, 200)
    assert np.all(np.diff([nsim_to_mos(x) for x in xs]) >= 0)


# full metrics -----------------------------------------------------------

@pytest.mark.parametrize("metric", [NSIM, DIST], ids=lambda m: m.name)
def test_self_score(metric, reference_8k):
    assert metric.score(reference_8k, reference_8k) >= 4.4


def test_nsim_absorbs_time_shift(ref16):
    shift = 1600  # 100 ms
    x = ref16.samples
    delayed = AudioBuffer(np.concatenate((np.zeros(shift), x[:-shift])), 16000)
    assert NSIM.score(ref16, delayed) >= 4.3


def test_align_recovers_lag(rng):
    x = rng.standard_normal(4000)
    y = np.concatenate((np.zeros(37), x[:-37]))
    r, d, lag = align(x, y, 400)
    assert lag == 37
    np.testing.assert_array_equal(r, d)
    with pytest.raises(AudioError):
        align(x, x[:3000], 400)
    with pytest.raises(SilentSignalError):
        align(np.zeros(100), x[:100], 10)


@pytest.mark.parametrize("metric", [NSIM, DIST], ids=lambda m: m.name)
def test_white_noise_sweep_is_monotone(metric, reference_8k, rng):
    noise = rng.standard_normal(len(reference_8k))
    noise *= np.sqrt(np.mean(reference_8k.samples ** 2)) / np.sqrt(np.mean(noise ** 2))
    levels = np.linspace(-30, 15, 10)  # noise level re speech, dB
    scores = []
    for lvl in levels:
        deg = reference_8k.samples + noise * 10 ** (lvl / 20)
        deg = deg / max(1.0, np.max(np.abs(deg)))
        scores.append(metric.score(reference_8k, AudioBuffer(deg, 8000)))
    assert spearman(levels, scores) <= -0.95


def test_disturbance_against_silence(reference_8k):
    silent = AudioBuffer(np.zeros(len(reference_8k)), 8000)
    assert DIST.score(reference_8k, silent) <= 1.5


def test_disturbance_mapping_is_decreasing():
    d = np.linspace(0, 20, 100)
    m = [disturbance_to_mos(x) for x in d]
    assert np.all(np.diff(m) < 0)
    assert 1.0 <= min(m) and max(m) <= 4.6


def test_metrics_are_deterministic(reference_8k, rng):
    deg = AudioBuffer(reference_8k.samples + 0.01 * rng.standard_normal(len(reference_8k)), 8000)
    for m in (NSIM, DIST):
        assert m.score(reference_8k, deg) == m.score(reference_8k, deg)


def test_metric_errors(reference_8k):
    silent = AudioBuffer(np.zeros(len(reference_8k)), 8000)
    for m in (NSIM, DIST):
        with pytest.raises(SilentSignalError):
            m.score(silent, reference_8k)
        with pytest.raises(AudioError, match="rate"):
            m.score(reference_8k, resample(reference_8k, 16000))


@settings(max_examples=50)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_clamp_range(v):
    assert 1.0 <= clamp_mos(v) <= 5.0


def test_clamp_rejects_nan():
    with pytest.raises(MetricError):
        clamp_mos(float("nan"))


# external adapter -------------------------------------------------------

def test_external_echo(tmp_path):
    assert external_metric("echo 3.2", "a.wav", "b.wav") == 3.2
    assert external_metric("echo 4.19", "a.wav", "b.wav") == 4.19
    assert external_metric("echo 7.5", "a.wav", "b.wav") == 5.0


def test_external_failures():
    with pytest.raises(MetricError, match="exit status"):
        external_metric("false", "a", "b")
    with pytest.raises(MetricError, match="exactly one"):
        external_metric("echo 1.0 2.0", "a", "b")
    with pytest.raises(MetricError, match="exactly one"):
        parse_score("no score here")
    with pytest.raises(MetricError, match="could not start"):
        external_metric("/nonexistent/tool {ref}", "a", "b")
    with pytest.raises(MetricError, match="timed out"):
        external_metric(f"{sys.executable} -c 'import time; time.sleep(5)'", "a", "b", timeout=0.2)


def test_external_metric_receives_wav_paths(reference_8k):
    script = "import sys, wave; w = wave.open(sys.argv[1]); print(2.0 + w.getframerate() / 16000)"
    m = ExternalMetric("probe", f"{sys.executable} -c '{script}' {{ref}} {{deg}}", required_rate=16000)
    assert m.score(reference_8k, reference_8k) == pytest.approx(3.0)


def test_registry():
    assert available() == ["disturbance", "nsim"]
    assert isinstance(get_metric("nsim"), NsimMetric)
    assert get_metric({"name": "x", "command": "echo 1", "rate": 8000}).required_rate == 8000
    with pytest.raises(KeyError):
        get_metric("pesq")
    with pytest.raises(TypeError):
        get_metric(42)
