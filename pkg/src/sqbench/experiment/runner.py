"""Degradation grid construction and execution.

Jobs are grouped per sample and fanned out to a process pool. Results come
back in grid order and a single writer appends them to a JSON-lines store, so
the store bytes do not depend on the degree of parallelism. Per-job seeds are
hashed from (master seed, job key), never from scheduling order.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

from .. import __version__
from ..metrics import get_metric
from ..noise import DEFAULT_TALKERS, NoiseKind
from .manifest import CorpusManifest, SampleMeta
from .pipeline import TRIM_THRESHOLD_DBFS, DegradationSpec, degrade, make_noise, prepare_reference

log = logging.getLogger(__name__)

DEFAULT_SNRS = tuple(range(-25, 41, 5))
DEFAULT_NOISES = (NoiseKind.PINK, NoiseKind.BLUE, NoiseKind.BABBLE)
DEFAULT_METRICS = ("disturbance", "nsim")
MAX_FAILURE_FRACTION = 0.01


class RunAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class Job:
    sample: SampleMeta
    spec: DegradationSpec

    @property
    def key(self) -> tuple:
        return (self.sample.sample_id, self.spec.noise.value, float(self.spec.snr))


@dataclass(frozen=True)
class ScoreRecord:
    sample_id: str
    language: str
    gender: str
    noise: str
    snr: float
    metric: str
    mos: float
    seed: int
    version: str = __version__

    @property
    def key(self) -> tuple:
        return (self.sample_id, self.noise, self.snr, self.metric)

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "ScoreRecord":
        data = json.loads(line)
        names = [f.name for f in fields(cls)]
        missing = [n for n in names if n not in data]
        if missing:
            raise ValueError(f"missing field(s) {missing}")
        rec = cls(**{n: data[n] for n in names})
        if not 1.0 <= rec.mos <= 5.0:
            raise ValueError(f"mos {rec.mos} outside [1, 5]")
        return cls(rec.sample_id, rec.language, rec.gender, rec.noise, float(rec.snr), rec.metric,
                   float(rec.mos), int(rec.seed), rec.version)


def job_seed(master_seed: int, key: tuple) -> int:
    digest = hashlib.sha256(repr((int(master_seed),) + tuple(key)).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def build_grid(manifest: CorpusManifest, snr_levels: Sequence[float] = DEFAULT_SNRS,
               noises: Sequence = DEFAULT_NOISES, codec: bool = True) -> list[Job]:
    """Sample-major list of jobs: |samples| x |noises| x |snr_levels|."""
    samples = manifest.samples if isinstance(manifest, CorpusManifest) else tuple(manifest)
    if not samples or not snr_levels or not noises:
        raise ValueError("grid dimensions must be non-empty")
    kinds = [NoiseKind.parse(n) for n in noises]
    return [Job(s, DegradationSpec(k, float(t), codec)) for s in samples for k in kinds for t in snr_levels]


# --------------------------------------------------------------------------
# worker side
# --------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(babble_pool, metrics, master_seed, talkers, trim_threshold):
    _WORKER.update(pool=babble_pool, metrics=metrics, seed=master_seed, talkers=talkers,
                   trim=trim_threshold)


def _run_sample(jobs: list[Job]) -> list[tuple[Job, list[ScoreRecord] | None, str | None]]:
    w = _WORKER
    sample = jobs[0].sample
    out = []
    try:
        reference = prepare_reference(sample, w["trim"])
    except Exception as exc:  # isolate: one bad excerpt must not sink the run
        return [(job, None, f"{type(exc).__name__}: {exc}") for job in jobs]
    for job in jobs:
        seed = job_seed(w["seed"], job.key)
        try:
            noise = make_noise(job.spec.noise, len(reference), seed, w["pool"], w["talkers"])
            degraded = degrade(reference, job.spec, noise)
            records = [
                ScoreRecord(sample.sample_id, sample.language, sample.gender, job.spec.noise.value,
                            float(job.spec.snr), m.name, m.score(reference, degraded), seed)
                for m in w["metrics"]
            ]
            out.append((job, records, None))
        except Exception as exc:
            out.append((job, None, f"{type(exc).__name__}: {exc}"))
    return out


# --------------------------------------------------------------------------
# store
# --------------------------------------------------------------------------

def read_store(path) -> list[ScoreRecord]:
    """Parse a score store; corrupt lines raise ValueError naming the line number."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(ScoreRecord.from_json(line))
            except (ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{n}: corrupt record ({exc})") from None
    return records


def _recover_store(path: Path, metric_names: Sequence[str]) -> set:
    """Truncate to the last complete job group; return completed job keys."""
    if not path.exists():
        return set()
    raw = path.read_bytes()
    lines = raw.split(b"\n")
    offset = 0
    keep = 0
    parsed = []
    for line in lines[:-1]:  # the tail after the last newline is partial (or empty)
        try:
            rec = ScoreRecord.from_json(line.decode("utf-8"))
        except (ValueError, TypeError, UnicodeDecodeError):
            break
        parsed.append((rec, offset + len(line) + 1))
        offset += len(line) + 1
    done = set()
    for key, group in groupby(parsed, key=lambda p: (p[0].sample_id, p[0].noise, p[0].snr)):
        group = list(group)
        if [r.metric for r, _ in group] != list(metric_names):
            break
        done.add(key)
        keep = group[-1][1]
    if keep != len(raw):
        log.info("resume: truncating %s from %d to %d bytes", path, len(raw), keep)
        with open(path, "r+b") as fh:
            fh.truncate(keep)
    return done


def run_experiment(jobs: Sequence[Job], metrics: Sequence, store_path, babble_pool: Sequence = (),
                   parallelism: int = 1, master_seed: int = 0, resume: bool = False,
                   talkers: int = DEFAULT_TALKERS, trim_threshold_dbfs: float = TRIM_THRESHOLD_DBFS,
                   progress=None) -> list[ScoreRecord]:
    """Score every job with every metric, appending to ``store_path``.

    ``babble_pool`` holds prepared (8 kHz, band-limited, normalised) buffers.
    Failed jobs are written to ``<store>.failures.jsonl``; the run aborts once
    they exceed 1% of the grid. Returns all records in the store.
    """
    if not jobs:
        raise ValueError("empty grid")
    metrics = [get_metric(m) for m in metrics]
    names = [m.name for m in metrics]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate metric names {names}")
    store_path = Path(store_path)
    store_path.parent.mkdir(parents=True, exist_ok=True)
    failures_path = store_path.with_name(store_path.stem + ".failures.jsonl")

    if resume:
        done = _recover_store(store_path, names)
    else:
        done = set()
        store_path.write_bytes(b"")
    pending = [j for j in jobs if j.key not in done]
    if any(j.spec.noise is NoiseKind.BABBLE for j in pending) and not babble_pool:
        raise ValueError("babble jobs need a non-empty babble pool")
    tasks = [list(g) for _, g in groupby(pending, key=lambda j: j.sample.sample_id)]
    max_failures = int(MAX_FAILURE_FRACTION * len(jobs))
    failures = []
    finished = len(jobs) - len(pending)
    init = (tuple(babble_pool), metrics, master_seed, talkers, trim_threshold_dbfs)

    if parallelism <= 1:
        _init_worker(*init)
        results = map(_run_sample, tasks)
        executor = None
    else:
        executor = ProcessPoolExecutor(max_workers=parallelism, initializer=_init_worker, initargs=init)
        results = executor.map(_run_sample, tasks)
    try:
        with open(store_path, "a", encoding="utf-8") as store, open(failures_path, "w", encoding="utf-8") as flog:
            for task_result in results:
                for job, records, error in task_result:
                    finished += 1
                    if records is None:
                        failures.append(job.key)
                        log.error("job %s failed: %s", job.key, error)
                        flog.write(json.dumps({"job": list(job.key), "error": error}) + "\n")
                        flog.flush()
                        if len(failures) > max_failures:
                            raise RunAborted(f"{len(failures)} of {len(jobs)} jobs failed (limit {max_failures})")
                        continue
                    store.write("".join(r.to_json() + "\n" for r in records))
                store.flush()
                if progress is not None:
                    progress(finished, len(jobs))
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)
    return read_store(store_path)


def default_parallelism() -> int:
    return max(1, os.cpu_count() or 1)


def stderr_progress(done: int, total: int) -> None:
    print(f"[{done}/{total}] jobs scored", file=sys.stderr, flush=True)


def prepare_pool(samples: Iterable[SampleMeta], trim_threshold_dbfs: float = TRIM_THRESHOLD_DBFS) -> list:
    return [prepare_reference(s, trim_threshold_dbfs) for s in samples]

