"""Command-line entry point: ``sqbench {degrade,score,run,analyze,gen-noise}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .audio import read_wav, resample, write_wav
from .config import ConfigError, default_seed, load_config
from .experiment import (ManifestError, ReportConfig, build_grid, degrade, emit_report, load_manifest, make_noise,
                         prepare_pool, prepare_reference, read_store, run_experiment)
from .experiment.pipeline import DegradationSpec
from .experiment.report import GRANULARITIES
from .experiment.runner import stderr_progress
from .metrics import available, get_metric
from .noise import NoiseKind, gen_colored, measure_snr, scale_noise

log = logging.getLogger("sqbench")


class UsageError(Exception):
    pass


def _seed(value):
    return default_seed() if value is None else value


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    return p


def cmd_degrade(args) -> int:
    ref_in = _existing(args.reference)
    pool = []
    for p in args.babble_pool or ():
        pool.append(prepare_reference(read_wav(_existing(p))))
    kind = NoiseKind.parse(args.noise)
    if kind is NoiseKind.BABBLE and not pool:
        raise UsageError("babble noise needs --babble-pool WAV files")
    seed = _seed(args.seed)
    reference = prepare_reference(read_wav(ref_in))
    noise = make_noise(kind, len(reference), seed, pool, args.talkers)
    spec = DegradationSpec(kind, args.snr, not args.no_codec)
    degraded = degrade(reference, spec, noise)
    out = Path(args.out)
    ref_out = Path(args.ref_out) if args.ref_out else out.with_name(out.stem + "_ref.wav")
    write_wav(degraded, out)
    write_wav(reference, ref_out)
    snr = measure_snr(reference, scale_noise(reference, noise, args.snr))
    print(f"measured_snr_db={snr:.4f}")
    return 0


def cmd_score(args) -> int:
    if args.external:
        metric = get_metric({"name": "external", "command": args.external, "rate": args.rate or 16000,
                             "timeout": args.timeout})
    else:
        try:
            metric = get_metric(args.metric)
        except KeyError:
            raise UsageError(f"unknown metric {args.metric!r}; available: {', '.join(available())}") from None
    ref = read_wav(_existing(args.reference))
    deg = read_wav(_existing(args.degraded))
    if deg.sample_rate != ref.sample_rate:
        deg = resample(deg, ref.sample_rate)
    print(round(metric.score(ref, deg), 4))
    return 0


def cmd_gen_noise(args) -> int:
    kind = NoiseKind.parse(args.kind)
    if kind is NoiseKind.BABBLE:
        raise UsageError("gen-noise makes pink or blue noise; babble comes from speech (see degrade)")
    length = int(round(args.duration * args.rate))
    write_wav(gen_colored(kind, length, args.rate, _seed(args.seed)), args.out)
    return 0


def _run_overrides(args) -> dict:
    return {
        "parallelism": args.parallelism, "master_seed": args.seed,
        "output_dir": args.out, "ks_granularity": args.granularity,
    }


def cmd_run(args) -> int:
    cfg = load_config(_existing(args.config), **_run_overrides(args))
    manifest = load_manifest(cfg.manifest)
    jobs = build_grid(manifest, cfg.snr_levels, cfg.noises, cfg.codec)
    pool = prepare_pool(manifest.babble_pool, cfg.trim_threshold_dbfs) if "babble" in cfg.noises else []
    print(f"{len(jobs)} jobs x {len(cfg.metrics)} metrics -> {cfg.store_path}", file=sys.stderr)
    records = run_experiment(jobs, cfg.metrics, cfg.store_path, pool, cfg.parallelism, cfg.master_seed,
                             resume=args.resume, talkers=cfg.babble_talkers,
                             trim_threshold_dbfs=cfg.trim_threshold_dbfs, progress=stderr_progress)
    paths = emit_report(records, cfg.output_dir, cfg.report)
    for p in paths.values():
        print(p)
    return 0


def cmd_analyze(args) -> int:
    store = _existing(args.store)
    try:
        records = read_store(store)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not records:
        raise UsageError(f"{store}: store is empty")
    cfg = ReportConfig(args.granularity, args.pesq_role, args.visqol_role, args.focus_language, args.focus_gender)
    out = Path(args.out) if args.out else store.parent
    for p in emit_report(records, out, cfg).values():
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="write a reference/degraded pair for one condition")
    p.add_argument("reference", help="clean speech WAV (16-bit PCM)")
    p.add_argument("--noise", required=True, choices=[k.value for k in NoiseKind])
    p.add_argument("--snr", type=float, required=True, help="target SNR in dB")
    p.add_argument("--seed", type=int, help="noise seed (default: $SQBENCH_SEED or 0)")
    p.add_argument("--out", required=True, help="degraded WAV path")
    p.add_argument("--ref-out", help="reference WAV path (default: <out>_ref.wav)")
    p.add_argument("--babble-pool", nargs="+", metavar="WAV", help="speech WAVs for babble noise")
    p.add_argument("--talkers", type=int, default=6)
    p.add_argument("--no-codec", action="store_true", help="skip the G.711 A-law pass")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("score", help="score a degraded WAV against its reference")
    p.add_argument("reference")
    p.add_argument("degraded")
    p.add_argument("--metric", default="nsim", help=f"built-in metric ({', '.join(available())})")
    p.add_argument("--external", metavar="TEMPLATE",
                   help="external command with {ref} and {deg} placeholders; overrides --metric")
    p.add_argument("--rate", type=int, choices=(8000, 16000), help="rate the external tool expects")
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("run", help="run the full degradation grid and write the report bundle")
    p.add_argument("config", help="JSON run configuration")
    p.add_argument("--resume", action="store_true", help="continue an interrupted run")
    p.add_argument("--parallelism", type=int)
    p.add_argument("--seed", type=int, help="master seed (default: config, then $SQBENCH_SEED, then 0)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--granularity", choices=GRANULARITIES)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="recompute the report bundle from a score store")
    p.add_argument("store", help="scores.jsonl written by 'run'")
    p.add_argument("--out", help="output directory (default: next to the store)")
    p.add_argument("--granularity", choices=GRANULARITIES, default="per-snr-mean")
    p.add_argument("--pesq-role", default="disturbance")
    p.add_argument("--visqol-role", default="nsim")
    p.add_argument("--focus-language", default="Turkish")
    p.add_argument("--focus-gender", default="male")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen-noise", help="write seeded pink or blue noise at -26 dBFS")
    p.add_argument("kind", choices=[NoiseKind.PINK.value, NoiseKind.BLUE.value])
    p.add_argument("--duration", type=float, default=5.0, help="seconds")
    p.add_argument("--rate", type=int, default=8000, choices=(8000, 16000, 22050))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_noise)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ManifestError, FileNotFoundError) as exc:
        print(f"sqbench {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"sqbench {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
