import math
import wave

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sqbench.audio import (AudioBuffer, AudioError, ClippingError, LevelDbfs, SilentSignalError, apply_gain,
                           level_dbfs, normalize_to_dbfs, read_wav, resample, rms, to_int16, write_wav)

from .oracles import tone, tone_amplitude


def _write_raw(path, pcm, rate=8000, channels=1, width=2):
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(width)
        w.setframerate(rate)
        w.writeframes(np.asarray(pcm).astype("<i2" if width == 2 else "u1").tobytes())


def test_read_wav_maps_int16_to_unit_scale(tmp_path):
    p = tmp_path / "a.wav"
    _write_raw(p, [-32768, 0, 16384, 32767])
    buf = read_wav(p)
    assert buf.sample_rate == 8000
    np.testing.assert_array_equal(buf.samples, [-1.0, 0.0, 0.5, 32767 / 32768])


def test_read_wav_downmixes_stereo_by_mean(tmp_path):
    p = tmp_path / "s.wav"
    _write_raw(p, [1000, 3000, -200, 200], channels=2)
    buf = read_wav(p)
    np.testing.assert_allclose(buf.samples, [2000 / 32768, 0.0])


def test_read_wav_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "missing.wav")
    p = tmp_path / "u8.wav"
    _write_raw(p, [1, 2, 3], width=1)
    with pytest.raises(AudioError, match="16-bit"):
        read_wav(p)
    bad = tmp_path / "junk.wav"
    bad.write_bytes(b"not a wav")
    with pytest.raises(AudioError):
        read_wav(bad)
    p = tmp_path / "r.wav"
    _write_raw(p, [0, 1], rate=44100)
    with pytest.raises(AudioError, match="sample rate"):
        read_wav(p)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 400), elements=st.floats(-1.0, 1.0)))
def test_wav_round_trip_within_one_lsb(tmp_path_factory, x):
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    write_wav(AudioBuffer(x, 16000), p)
    y = read_wav(p).samples
    assert np.max(np.abs(y - x)) <= 1.0 / 32768 + 1e-15


def test_write_wav_rejects_out_of_range(tmp_path):
    with pytest.raises(AudioError):
        write_wav(AudioBuffer([0.0, 1.5], 8000), tmp_path / "x.wav")


def test_to_int16_rounds_half_away_and_saturates():
    x = np.array([0.5, -0.5, 1.5, -1.5, 2.5]) / 32768
    np.testing.assert_array_equal(to_int16(x), [1, -1, 2, -2, 3])
    np.testing.assert_array_equal(to_int16([1.0, -1.0, 2.0, -3.0]), [32767, -32768, 32767, -32768])


def test_buffer_is_immutable_and_validated():
    buf = AudioBuffer([0.1, 0.2], 8000)
    with pytest.raises(ValueError):
        buf.samples[0] = 1.0
    with pytest.raises(AudioError):
        AudioBuffer([0.0], 44100)
    with pytest.raises(AudioError):
        AudioBuffer([np.nan], 8000)
    assert AudioBuffer([0.1], 8000) == AudioBuffer(np.array([0.1]), 8000)
    assert buf.duration == 2 / 8000


def test_rms_and_level():
    buf = AudioBuffer([3.0 / 5, -4.0 / 5], 8000)
    assert rms(buf) == pytest.approx(math.sqrt((0.36 + 0.64) / 2))
    assert level_dbfs(AudioBuffer(np.zeros(10), 8000)).silent
    assert float(level_dbfs(AudioBuffer(np.full(8, 0.1), 8000))) == pytest.approx(-20.0)
    with pytest.raises(SilentSignalError):
        float(LevelDbfs(None))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(16, 300), elements=st.floats(-1.0, 1.0)),
       st.floats(-40.0, -10.0))
def test_normalize_hits_target_and_is_idempotent(x, target):
    r = rms(AudioBuffer(x, 8000))
    # skip inputs whose crest factor would push the peak past full scale
    assume(r > 1e-6 and np.max(np.abs(x)) / r * 10 ** (target / 20) < 0.999)
    buf = normalize_to_dbfs(AudioBuffer(x, 8000), target)
    assert float(level_dbfs(buf)) == pytest.approx(target, abs=1e-9)
    again = normalize_to_dbfs(buf, target)
    np.testing.assert_allclose(again.samples, buf.samples, rtol=0, atol=1e-15)


def test_normalize_silent_raises():
    with pytest.raises(SilentSignalError):
        normalize_to_dbfs(AudioBuffer(np.zeros(100), 8000))


def test_gain_clipping_policy(caplog):
    x = np.full(100_000, 0.1)
    x[0] = 0.9
    out = apply_gain(AudioBuffer(x, 8000), 2.0)  # 1 sample clipped: 0.001% -> warning
    assert out.samples[0] == 1.0
    assert "clipped" in caplog.text
    with pytest.raises(ClippingError):
        apply_gain(AudioBuffer(x, 8000), 20.0)


@pytest.mark.parametrize("src,dst", [(22050, 8000), (16000, 8000), (8000, 16000), (22050, 16000)])
def test_resample_preserves_inband_tone(src, dst):
    x = tone(1000, src, seconds=2.0, amp=0.5)
    y = resample(AudioBuffer(x, src), dst)
    assert len(y) == pytest.approx(len(x) * dst / src, abs=1)
    # interior only: the ends carry filter start-up transients
    interior = y.samples[dst // 4: -dst // 4]
    assert tone_amplitude(interior, 1000, dst) == pytest.approx(0.5, rel=0.01)


def test_resample_rejects_aliasing_components():
    # 5 kHz is above the 4 kHz Nyquist of the target; it must be stopped >= 60 dB
    x = tone(5000, 16000, seconds=2.0, amp=0.5, taper=True)
    y = resample(AudioBuffer(x, 16000), 8000).samples
    peak_in = np.max(np.abs(np.fft.rfft(x)))
    peak_out = np.max(np.abs(np.fft.rfft(y))) * 2  # rfft scales with length; 8k output is half as long
    assert 20 * np.log10(peak_out / peak_in) <= -60.0


def test_upsampling_suppresses_images():
    x = tone(1000, 8000, seconds=2.0, amp=0.5, taper=True)
    y = resample(AudioBuffer(x, 8000), 16000).samples
    spec = np.abs(np.fft.rfft(y))
    f = np.fft.rfftfreq(len(y), 1 / 16000)
    image = spec[(f > 6500) & (f < 7500)].max()
    main = spec[(f > 900) & (f < 1100)].max()
    assert 20 * np.log10(image / main) <= -55.0


def test_resample_identity_and_unsupported():
    buf = AudioBuffer(np.ones(10), 8000)
    assert resample(buf, 8000) is buf
    with pytest.raises(AudioError):
        resample(buf, 44100)
