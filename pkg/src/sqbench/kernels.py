"""Inner loops that dominate runtime, each in a numba and a numpy flavour.

The public names at the bottom dispatch on :data:`sqbench._accel.USE_NUMBA`.
Both flavours are kept importable (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them directly.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._accel import USE_NUMBA, njit

# G.711 A-law: upper bounds of the 8 segments on the 13-bit magnitude scale.
ALAW_SEG_END = np.array([0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF], dtype=np.int32)


# --------------------------------------------------------------------------
# A-law companding
# --------------------------------------------------------------------------

@njit
def alaw_encode_numba(pcm):
    out = np.empty(pcm.shape[0], dtype=np.uint8)
    for i in range(pcm.shape[0]):
        v = np.int32(pcm[i]) >> 3
        if v >= 0:
            mask = 0xD5
        else:
            mask = 0x55
            v = -v - 1
        seg = 8
        for s in range(8):
            if v <= ALAW_SEG_END[s]:
                seg = s
                break
        if seg >= 8:
            out[i] = np.uint8(0x7F ^ mask)
            continue
        aval = seg << 4
        if seg < 2:
            aval |= (v >> 1) & 0x0F
        else:
            aval |= (v >> seg) & 0x0F
        out[i] = np.uint8(aval ^ mask)
    return out


def alaw_encode_numpy(pcm):
    v = pcm.astype(np.int32) >> 3
    negative = v < 0
    mask = np.where(negative, 0x55, 0xD5)
    v = np.where(negative, -v - 1, v)
    seg = np.searchsorted(ALAW_SEG_END, v, side="left")
    shift = np.where(seg < 2, 1, seg)
    aval = (np.minimum(seg, 7) << 4) | ((v >> np.minimum(shift, 7)) & 0x0F)
    aval = np.where(seg >= 8, 0x7F, aval)
    return (aval ^ mask).astype(np.uint8)


@njit
def alaw_decode_numba(codes):
    out = np.empty(codes.shape[0], dtype=np.int16)
    for i in range(codes.shape[0]):
        a = np.int32(codes[i]) ^ 0x55
        t = (a & 0x0F) << 4
        seg = (a & 0x70) >> 4
        if seg == 0:
            t += 8
        elif seg == 1:
            t += 0x108
        else:
            t += 0x108
            t <<= seg - 1
        if a & 0x80:
            out[i] = np.int16(t)
        else:
            out[i] = np.int16(-t)
    return out


def alaw_decode_numpy(codes):
    a = codes.astype(np.int32) ^ 0x55
    t = (a & 0x0F) << 4
    seg = (a & 0x70) >> 4
    t = np.where(seg == 0, t + 8, (t + 0x108) << np.maximum(seg - 1, 0))
    return np.where(a & 0x80, t, -t).astype(np.int16)


# --------------------------------------------------------------------------
# Two-sample KS statistic
# --------------------------------------------------------------------------

@njit
def ks_statistic_numba(a, b):
    # a, b sorted ascending; CDFs compared after each block of tied values
    n1 = a.shape[0]
    n2 = b.shape[0]
    i = 0
    j = 0
    d = 0.0
    while i < n1 and j < n2:
        x = min(a[i], b[j])
        while i < n1 and a[i] == x:
            i += 1
        while j < n2 and b[j] == x:
            j += 1
        gap = abs(i / n1 - j / n2)
        if gap > d:
            d = gap
    return d


def ks_statistic_numpy(a, b):
    pooled = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, pooled, side="right") / a.shape[0]
    cdf_b = np.searchsorted(b, pooled, side="right") / b.shape[0]
    return float(np.max(np.abs(cdf_a - cdf_b)))


@njit
def ks_label_statistics_numba(labels, run_end, n1, n2):
    # labels: (n_perm, n) bool, True marks a member of the first sample,
    # columns in pooled sorted order; run_end marks the last index of each tie run
    n_perm, n = labels.shape
    out = np.empty(n_perm)
    step_a = 1.0 / n1
    step_b = 1.0 / n2
    for r in range(n_perm):
        acc = 0.0
        best = 0.0
        for k in range(n):
            if labels[r, k]:
                acc += step_a
            else:
                acc -= step_b
            if run_end[k]:
                g = abs(acc)
                if g > best:
                    best = g
        out[r] = best
    return out


def ks_label_statistics_numpy(labels, run_end, n1, n2):
    steps = np.where(labels, 1.0 / n1, -1.0 / n2)
    path = np.cumsum(steps, axis=1)[:, run_end]
    return np.max(np.abs(path), axis=1)


# --------------------------------------------------------------------------
# NSIM similarity map (3x3 weighted neighbourhood, valid region only)
# --------------------------------------------------------------------------

@njit
def nsim_map_numba(ref, deg, window, c1, c2):
    rows = ref.shape[0] - 2
    cols = ref.shape[1] - 2
    out = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            mr = 0.0
            md = 0.0
            srr = 0.0
            sdd = 0.0
            srd = 0.0
            for u in range(3):
                for v in range(3):
                    w = window[u, v]
                    r = ref[i + u, j + v]
                    d = deg[i + u, j + v]
                    mr += w * r
                    md += w * d
                    srr += w * r * r
                    sdd += w * d * d
                    srd += w * r * d
            var_r = max(srr - mr * mr, 0.0)
            var_d = max(sdd - md * md, 0.0)
            cov = srd - mr * md
            lum = (2.0 * mr * md + c1) / (mr * mr + md * md + c1)
            struct = (cov + c2) / (np.sqrt(var_r) * np.sqrt(var_d) + c2)
            out[i, j] = lum * struct
    return out


def nsim_map_numpy(ref, deg, window, c1, c2):
    def local(x):
        return np.einsum("ijuv,uv->ij", sliding_window_view(x, (3, 3)), window)

    mr = local(ref)
    md = local(deg)
    var_r = np.maximum(local(ref * ref) - mr * mr, 0.0)
    var_d = np.maximum(local(deg * deg) - md * md, 0.0)
    cov = local(ref * deg) - mr * md
    lum = (2.0 * mr * md + c1) / (mr * mr + md * md + c1)
    struct = (cov + c2) / (np.sqrt(var_r) * np.sqrt(var_d) + c2)
    return lum * struct


if USE_NUMBA:
    alaw_encode = alaw_encode_numba
    alaw_decode = alaw_decode_numba
    ks_statistic = ks_statistic_numba
    ks_label_statistics = ks_label_statistics_numba
    nsim_map = nsim_map_numba
else:
    alaw_encode = alaw_encode_numpy
    alaw_decode = alaw_decode_numpy
    ks_statistic = ks_statistic_numpy
    ks_label_statistics = ks_label_statistics_numpy
    nsim_map = nsim_map_numpy
