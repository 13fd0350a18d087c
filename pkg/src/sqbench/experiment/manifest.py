"""Corpus manifest: a CSV listing excerpts and their speaker metadata.

Columns: sample_id, path, language, gender, speaker_id, age, start_s, end_s,
role. ``path`` is resolved against the manifest's directory when relative;
``age``, ``start_s`` and ``end_s`` may be blank (blank bounds = whole file);
``role`` is ``test`` or ``babble_pool``.
"""
from __future__ import annotations

import csv
import logging
import wave
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("sample_id", "path", "language", "gender", "speaker_id", "role")
GENDERS = ("male", "female")
ROLES = ("test", "babble_pool")
EXCERPT_RANGE_S = (5.0, 10.0)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class SampleMeta:
    sample_id: str
    path: Path
    language: str
    gender: str
    speaker_id: str
    age: float | None = None
    start_s: float | None = None
    end_s: float | None = None
    role: str = "test"


@dataclass(frozen=True)
class CorpusManifest:
    samples: tuple  # role == test, manifest order
    babble_pool: tuple

    def __len__(self):
        return len(self.samples)

    def by_id(self, sample_id: str) -> SampleMeta:
        for s in self.samples + self.babble_pool:
            if s.sample_id == sample_id:
                return s
        raise KeyError(sample_id)

    def distinct_speakers(self) -> dict:
        """Distinct speaker count per language (repeated speakers are allowed)."""
        out: dict[str, set] = {}
        for s in self.samples:
            out.setdefault(s.language, set()).add(s.speaker_id)
        return {k: len(v) for k, v in sorted(out.items())}


def _opt_float(value: str, field: str, line: int):
    value = (value or "").strip()
    if not value:
        return None
    try:
        return float(value)
    except ValueError:
        raise ManifestError(f"line {line}: {field} must be a number, got {value!r}") from None


def _wav_duration(path: Path) -> float:
    try:
        with wave.open(str(path), "rb") as w:
            return w.getnframes() / w.getframerate()
    except (wave.Error, EOFError, OSError) as exc:
        raise ManifestError(f"{path}: unreadable WAV ({exc})") from exc


def load_manifest(path) -> CorpusManifest:
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    base = path.parent
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ManifestError(f"{path}: missing column(s) {missing}")
        rows = list(reader)

    seen: set[str] = set()
    tests, pool = [], []
    for line, row in enumerate(rows, start=2):
        sid = (row["sample_id"] or "").strip()
        if not sid:
            raise ManifestError(f"line {line}: empty sample_id")
        if sid in seen:
            raise ManifestError(f"line {line}: duplicate sample_id {sid!r}")
        seen.add(sid)
        gender = (row["gender"] or "").strip().lower()
        if gender not in GENDERS:
            raise ManifestError(f"line {line}: gender must be one of {GENDERS}, got {row['gender']!r}")
        role = (row["role"] or "test").strip().lower()
        if role not in ROLES:
            raise ManifestError(f"line {line}: role must be one of {ROLES}, got {row['role']!r}")
        audio = Path(row["path"].strip())
        if not audio.is_absolute():
            audio = base / audio
        if not audio.is_file():
            raise ManifestError(f"line {line}: audio file not found: {audio}")
        duration = _wav_duration(audio)
        start = _opt_float(row.get("start_s"), "start_s", line)
        end = _opt_float(row.get("end_s"), "end_s", line)
        lo = start or 0.0
        hi = duration if end is None else end
        if not 0.0 <= lo < hi or hi > duration + 1e-6:
            raise ManifestError(f"line {line}: excerpt [{lo}, {hi}] s outside {audio} ({duration:.3f} s)")
        if role == "test" and not EXCERPT_RANGE_S[0] <= hi - lo <= EXCERPT_RANGE_S[1]:
            log.warning("%s: excerpt lasts %.2f s, outside %s s", sid, hi - lo, EXCERPT_RANGE_S)
        meta = SampleMeta(
            sample_id=sid, path=audio, language=row["language"].strip(), gender=gender,
            speaker_id=(row["speaker_id"] or sid).strip(), age=_opt_float(row.get("age"), "age", line),
            start_s=start, end_s=end, role=role,
        )
        (tests if role == "test" else pool).append(meta)

    if not tests:
        raise ManifestError(f"{path}: no test samples")
    shared = {s.path.resolve() for s in tests} & {s.path.resolve() for s in pool}
    if shared:
        raise ManifestError(f"babble pool shares audio with test samples: {sorted(map(str, shared))}")
    balance = Counter((s.language, s.gender) for s in tests)
    for lang in sorted({s.language for s in tests}):
        if balance[(lang, "male")] != balance[(lang, "female")]:
            log.warning("%s: %d male vs %d female samples", lang, balance[(lang, "male")],
                        balance[(lang, "female")])
    return CorpusManifest(tuple(tests), tuple(pool))
