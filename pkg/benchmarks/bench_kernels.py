"""Numba vs numpy timings for the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed (numba compiles or loads its cache), then the
best of ``--repeat`` runs is reported. Outputs are checked for agreement.
"""
import argparse
import sys
import timeit

import numpy as np

from sqbench import _accel, kernels
from sqbench.metrics.nsim import C1, C2, gaussian_window


def cases(rng):
    pcm = rng.integers(-32768, 32768, 8000 * 60).astype(np.int16)  # one minute of audio
    codes = rng.integers(0, 256, 8000 * 60).astype(np.uint8)
    a = np.sort(rng.normal(size=42))
    b = np.sort(rng.normal(0.2, size=42))
    n1 = n2 = 42
    pooled = np.sort(np.concatenate((a, b)))
    run_end = np.append(pooled[1:] != pooled[:-1], True)
    base = np.zeros(n1 + n2, dtype=bool)
    base[:n1] = True
    labels = np.ascontiguousarray(rng.permuted(np.broadcast_to(base, (10_000, n1 + n2)), axis=1))
    ref = rng.uniform(-80, 0, size=(32, 332))  # 5 s spectrogram
    deg = ref + rng.normal(0, 5, size=ref.shape)
    w = gaussian_window()
    return {
        "alaw_encode (480k samples)": ("alaw_encode", (pcm,)),
        "alaw_decode (480k codes)": ("alaw_decode", (codes,)),
        "ks_statistic (42 vs 42)": ("ks_statistic", (a, b)),
        "ks_label_statistics (10k perms)": ("ks_label_statistics", (labels, run_end, n1, n2)),
        "nsim_map (32 x 332)": ("nsim_map", (ref, deg, w, C1, C2)),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _accel.HAS_NUMBA:
        print("numba not available (or SQBENCH_DISABLE_NUMBA set); only the numpy column is meaningful",
              file=sys.stderr)

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<34}{'numpy ms':>12}{'numba ms':>12}{'speed-up':>10}")
    for label, (name, inputs) in cases(rng).items():
        fast = getattr(kernels, f"{name}_numba")
        slow = getattr(kernels, f"{name}_numpy")
        np.testing.assert_allclose(np.asarray(fast(*inputs), dtype=float),
                                   np.asarray(slow(*inputs), dtype=float), rtol=1e-10, atol=1e-12)
        t_np = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        print(f"{label:<34}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
