"""KS tests, paired deviation statistics, cubic fits and group-by aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

SIGNIFICANCE = 0.05
GROUP_KEYS = ("language", "gender", "noise", "snr", "metric")


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE


@dataclass(frozen=True)
class DeviationStats:
    mad: float
    rmsd: float
    mean_diff: float
    n: int


@dataclass(frozen=True)
class PolyFit:
    coefficients: tuple  # ascending powers: c0 + c1 x + c2 x^2 + ...
    residual_rms: float
    n: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefficients)


CubicFit = PolyFit


def _sample(values, name: str) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def kolmogorov_sf(lam: float, tol: float = 1e-12) -> float:
    """Q_KS(lam) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2), clamped to [0, 1]."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(max(2.0 * total, 0.0), 1.0)


def ks_p_value(d: float, n1: int, n2: int) -> float:
    ne = n1 * n2 / (n1 + n2)
    root = math.sqrt(ne)
    return kolmogorov_sf((root + 0.12 + 0.11 / root) * d)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KsResult:
    """Two-sample KS test with the asymptotic p-value (small-sample corrected)."""
    a = np.sort(_sample(a, "first sample"))
    b = np.sort(_sample(b, "second sample"))
    d = float(kernels.ks_statistic(a, b))
    return KsResult(d, ks_p_value(d, a.shape[0], b.shape[0]), a.shape[0], b.shape[0])


def ks_permutation_pvalue(a, b, n_resamples: int = 10_000, seed: int = 0) -> float:
    """Permutation p-value P(D* >= D) with pooled labels reshuffled ``n_resamples`` times."""
    a = _sample(a, "first sample")
    b = _sample(b, "second sample")
    n1, n2 = a.shape[0], b.shape[0]
    pooled = np.concatenate((a, b))
    order = np.argsort(pooled, kind="stable")
    sorted_pool = pooled[order]
    run_end = np.append(sorted_pool[1:] != sorted_pool[:-1], True)
    observed = float(kernels.ks_statistic(np.sort(a), np.sort(b)))
    base = np.zeros(n1 + n2, dtype=np.bool_)
    base[:n1] = True
    rng = np.random.default_rng(seed)
    labels = rng.permuted(np.broadcast_to(base, (n_resamples, n1 + n2)), axis=1)
    stats = kernels.ks_label_statistics(np.ascontiguousarray(labels), run_end, n1, n2)
    # tolerance absorbs the different rounding of the two D computations
    return float(np.mean(stats >= observed - 1e-12))


def deviation_stats(pairs: Iterable[tuple[float, float]]) -> DeviationStats:
    """MAD / RMSD / mean of (a - b) over paired scores."""
    arr = np.asarray(list(pairs), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("deviation statistics need at least one pair")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be (a, b) tuples")
    diff = arr[:, 0] - arr[:, 1]
    return DeviationStats(
        mad=float(np.mean(np.abs(diff))),
        rmsd=float(np.sqrt(np.mean(diff * diff))),
        mean_diff=float(np.mean(diff)),
        n=int(diff.shape[0]),
    )


def polyfit(x, y, degree: int) -> PolyFit:
    """Least-squares polynomial via orthogonal decomposition (lstsq on a Vandermonde matrix)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValueError("x and y lengths differ")
    distinct = np.unique(x).shape[0]
    if distinct < degree + 1:
        raise ValueError(f"degree-{degree} fit needs {degree + 1} distinct x values, got {distinct}")
    vander = np.vander(x, degree + 1, increasing=True)
    # column scaling keeps the conditioning sane for wide x ranges
    scale = np.max(np.abs(vander), axis=0)
    scale[scale == 0] = 1.0
    coef, _, rank, _ = np.linalg.lstsq(vander / scale, y, rcond=None)
    if rank < degree + 1:
        raise np.linalg.LinAlgError(f"rank-deficient design ({rank} < {degree + 1})")
    coef = coef / scale
    resid = y - vander @ coef
    return PolyFit(tuple(float(c) for c in coef), float(np.sqrt(np.mean(resid * resid))), int(x.shape[0]))


def polyfit_cubic(x, y) -> PolyFit:
    return polyfit(x, y, 3)


@dataclass(frozen=True)
class GroupStats:
    key: tuple
    mean: float
    median: float
    count: int


def _field(record, key):
    if isinstance(record, dict):
        return record[key]
    return getattr(record, key)


def group_scores(records: Sequence, keys: Sequence[str], value: str = "mos") -> list[GroupStats]:
    """Mean/median/count of ``value`` per distinct combination of ``keys``, sorted by key."""
    if not records:
        raise ValueError("no records to group")
    unknown = [k for k in keys if k not in GROUP_KEYS and k != "sample_id"]
    if unknown:
        raise KeyError(f"unknown grouping key(s) {unknown}; allowed: {GROUP_KEYS}")
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault(tuple(_field(r, k) for k in keys), []).append(float(_field(r, value)))
    out = []
    for key in sorted(groups, key=lambda k: tuple((isinstance(v, str), v) for v in k)):
        vals = np.asarray(groups[key])
        out.append(GroupStats(key, float(np.mean(vals)), float(np.median(vals)), int(vals.shape[0])))
    return out
