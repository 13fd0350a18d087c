"""Adapter for metric binaries run as child processes.

The command template holds ``{ref}`` and ``{deg}`` placeholders, which are
replaced by WAV paths. The child must exit 0 and print exactly one decimal
number on stdout.
"""
from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
from pathlib import Path

from ..audio import AudioBuffer, write_wav
from .base import Metric, MetricError, clamp_mos

DEFAULT_TIMEOUT_S = 60.0
_NUMBER = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")


def parse_score(stdout: str) -> float:
    found = _NUMBER.findall(stdout)
    if len(found) != 1:
        raise MetricError(f"expected exactly one number on stdout, got {len(found)}: {stdout.strip()[:200]!r}")
    return float(found[0])


def external_metric(command: str, reference, degraded, timeout: float = DEFAULT_TIMEOUT_S) -> float:
    """Run ``command`` on a pair of WAV files and return the clamped MOS."""
    argv = [tok.replace("{ref}", str(reference)).replace("{deg}", str(degraded))
            for tok in shlex.split(command)]
    if not argv:
        raise MetricError("empty command template")
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout, check=False)
    except subprocess.TimeoutExpired as exc:
        raise MetricError(f"{argv[0]}: timed out after {timeout:g} s") from exc
    except OSError as exc:
        raise MetricError(f"{argv[0]}: could not start ({exc})") from exc
    if proc.returncode != 0:
        raise MetricError(f"{argv[0]}: exit status {proc.returncode}: {proc.stderr.strip()[:200]}")
    return clamp_mos(parse_score(proc.stdout))


class ExternalMetric(Metric):
    """Wraps a command template; buffers are written to private temp files per call."""

    def __init__(self, name: str, command: str, required_rate: int = 16000,
                 timeout: float = DEFAULT_TIMEOUT_S):
        self.name = name
        self.command = command
        self.required_rate = required_rate
        self.timeout = timeout

    def _score(self, reference: AudioBuffer, degraded: AudioBuffer) -> float:
        with tempfile.TemporaryDirectory(prefix="sqbench-") as tmp:
            ref_path = Path(tmp) / "ref.wav"
            deg_path = Path(tmp) / "deg.wav"
            write_wav(reference, ref_path)
            write_wav(degraded, deg_path)
            return external_metric(self.command, ref_path, deg_path, self.timeout)
