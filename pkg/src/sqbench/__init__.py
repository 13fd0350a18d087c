"""sqbench: telephony degradations, intrusive speech quality scores, cross-language bias statistics."""
__version__ = "0.1.0"

from .audio import AudioBuffer, LevelDbfs, normalize_to_dbfs, read_wav, resample, rms, write_wav
from .channel import alaw_decode, alaw_encode, codec_pass, irs_filter
from .noise import NoiseKind, gen_babble, gen_colored, mix_at_snr, required_noise_gain

__all__ = [
    "AudioBuffer", "LevelDbfs", "NoiseKind", "__version__", "alaw_decode", "alaw_encode", "codec_pass",
    "gen_babble", "gen_colored", "irs_filter", "mix_at_snr", "normalize_to_dbfs", "read_wav",
    "required_noise_gain", "resample", "rms", "write_wav",
]
