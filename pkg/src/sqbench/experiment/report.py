"""Plot-ready CSV tables computed from score records only."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import gaussian_kde

from ..noise import NoiseKind
from ..stats import deviation_stats, group_scores, ks_two_sample, polyfit_cubic

GRANULARITIES = ("per-snr-mean", "per-signal")
REPORT_FILES = (
    "fig1_language_snr.csv",
    "fig2_boxstats.csv",
    "fig4_noise_snr.csv",
    "fig5_gender_fit.csv",
    "table1_ks_language.csv",
    "table2_ks_noise.csv",
    "table3_deviation.csv",
)
_NOISE_ORDER = {k.value: i for i, k in enumerate(NoiseKind)}


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class ReportConfig:
    granularity: str = "per-snr-mean"
    pesq_role: str = "disturbance"
    visqol_role: str = "nsim"
    focus_language: str = "Turkish"
    focus_gender: str = "male"

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ReportError(f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.6f}"
    return str(v)


def _write(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _noise_sort(values):
    return sorted(values, key=lambda v: (_NOISE_ORDER.get(v, len(_NOISE_ORDER)), v))


def _observations(records, field: str, group, granularity: str):
    """Scores for one group; per-snr-mean averages over samples within each (other-factor, snr) cell."""
    subset = [r for r in records if getattr(r, field) == group]
    if granularity == "per-signal":
        return [r.mos for r in subset]
    other = "noise" if field == "language" else "language"
    return [g.mean for g in group_scores(subset, (other, "snr"))]


def _ks_rows(records, metrics, field: str, groups, granularity: str):
    for metric in metrics:
        recs = [r for r in records if r.metric == metric]
        for a, b in combinations(groups, 2):
            xa = _observations(recs, field, a, granularity)
            xb = _observations(recs, field, b, granularity)
            if len(xa) < 2 or len(xb) < 2:
                yield (metric, f"{a} vs {b}", a, b, granularity, len(xa), len(xb), float("nan"), float("nan"), "")
                continue
            res = ks_two_sample(xa, xb)
            yield (metric, f"{a} vs {b}", a, b, granularity, res.n1, res.n2, res.statistic, res.p_value,
                   "yes" if res.significant else "no")


def paired_scores(records, pesq_role: str, visqol_role: str) -> list[tuple]:
    """(record of the first role, mos first role, mos second role) joined on (sample, noise, snr)."""
    first = {(r.sample_id, r.noise, r.snr): r for r in records if r.metric == pesq_role}
    second = {(r.sample_id, r.noise, r.snr): r.mos for r in records if r.metric == visqol_role}
    keys = sorted(set(first) & set(second), key=lambda k: (k[0], _NOISE_ORDER.get(k[1], 99), k[2]))
    return [(first[k], first[k].mos, second[k]) for k in keys]


def _deviation_column(pairs):
    if not pairs:
        return (float("nan"),) * 3 + (0,)
    d = deviation_stats([(a, b) for _, a, b in pairs])
    return d.mad, d.rmsd, d.mean_diff, d.n


def emit_report(records: Sequence, out_dir, config: ReportConfig = ReportConfig()) -> dict[str, Path]:
    if not records:
        raise ReportError("no records to report on")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = sorted({r.metric for r in records})
    languages = sorted({r.language for r in records})
    noises = _noise_sort({r.noise for r in records})
    paths = {name: out_dir / name for name in REPORT_FILES}

    # Fig. 1 / Fig. 4: mean score per SNR by language and by noise kind
    _write(paths["fig1_language_snr.csv"], ("metric", "language", "snr", "mean", "median", "count"),
           ((g.key[0], g.key[1], g.key[2], g.mean, g.median, g.count)
            for g in group_scores(records, ("metric", "language", "snr"))))
    fig4 = sorted(group_scores(records, ("metric", "noise", "snr")),
                  key=lambda g: (g.key[0], _NOISE_ORDER.get(g.key[1], 99), g.key[2]))
    _write(paths["fig4_noise_snr.csv"], ("metric", "noise", "snr", "mean", "median", "count"),
           ((g.key[0], g.key[1], g.key[2], g.mean, g.median, g.count) for g in fig4))

    # Fig. 2 / 3: distribution summaries per metric and language
    rows = []
    by_ml = defaultdict(list)
    for r in records:
        by_ml[(r.metric, r.language)].append(r.mos)
    for (metric, lang) in sorted(by_ml):
        x = np.asarray(by_ml[(metric, lang)])
        q1, med, q3 = np.percentile(x, [25, 50, 75])
        peak = float("nan")
        if x.shape[0] > 1 and np.ptp(x) > 0:
            grid = np.linspace(1.0, 5.0, 401)
            peak = float(grid[np.argmax(gaussian_kde(x)(grid))])
        rows.append((metric, lang, x.shape[0], float(x.mean()), float(x.min()), q1, med, q3, float(x.max()), peak))
    _write(paths["fig2_boxstats.csv"],
           ("metric", "language", "count", "mean", "min", "q1", "median", "q3", "max", "density_peak"), rows)

    # Tables 1 and 2: pairwise KS tests
    ks_header = ("metric", "comparison", "group_a", "group_b", "granularity", "n1", "n2", "ks_statistic",
                 "p_value", "significant")
    _write(paths["table1_ks_language.csv"], ks_header,
           list(_ks_rows(records, metrics, "language", languages, config.granularity)))
    _write(paths["table2_ks_noise.csv"], ks_header,
           list(_ks_rows(records, metrics, "noise", noises, config.granularity)))

    # Table 3 and Fig. 5 need both metric roles
    pairs = paired_scores(records, config.pesq_role, config.visqol_role)
    if not pairs:
        raise ReportError(
            f"no paired scores for metrics {config.pesq_role!r} and {config.visqol_role!r}; found {metrics}")

    def is_focus(rec):
        return rec.language == config.focus_language and rec.gender == config.focus_gender

    overall = _deviation_column(pairs)
    rest = _deviation_column([p for p in pairs if not is_focus(p[0])])
    focus = _deviation_column([p for p in pairs if is_focus(p[0])])
    labels = ("MAD", "RMSD", "Mean difference", "Pairs")
    group = f"{config.focus_language}/{config.focus_gender}"
    _write(paths["table3_deviation.csv"], ("statistic", "overall", "non_focus", "focus", "diff", "focus_group"),
           ((labels[i], overall[i], rest[i], focus[i], focus[i] - rest[i] if i < 3 else "", group)
            for i in range(4)))

    fit_rows = []
    by_lg = defaultdict(list)
    for rec, a, b in pairs:
        by_lg[(rec.language, rec.gender)].append((a, b))
    for (lang, gender) in sorted(by_lg):
        xy = np.asarray(by_lg[(lang, gender)])
        try:
            fit = polyfit_cubic(xy[:, 0], xy[:, 1])
            fit_rows.append((lang, gender, fit.n) + fit.coefficients + (fit.residual_rms,))
        except (ValueError, np.linalg.LinAlgError):
            fit_rows.append((lang, gender, xy.shape[0]) + (float("nan"),) * 5)
    _write(paths["fig5_gender_fit.csv"],
           ("language", "gender", "n", "c0", "c1", "c2", "c3", "residual_rms"), fit_rows)
    return paths
