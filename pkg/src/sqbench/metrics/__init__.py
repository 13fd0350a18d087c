"""Intrusive quality metrics behind one interface."""
from .base import MOS_MAX, MOS_MIN, Metric, MetricError, align, clamp_mos
from .disturbance import DisturbanceMetric
from .external import ExternalMetric, external_metric, parse_score
from .nsim import NsimMetric, Spectrogram, nsim, nsim_map, nsim_to_mos, spectrogram

BUILTIN = {
    NsimMetric.name: NsimMetric,
    DisturbanceMetric.name: DisturbanceMetric,
}


def available() -> list[str]:
    return sorted(BUILTIN)


def get_metric(spec) -> Metric:
    """Build a metric from a built-in name or an external spec mapping.

    External specs look like ``{"name": "pesq", "command": "pesq +8000 {ref} {deg}", "rate": 8000}``.
    """
    if isinstance(spec, Metric):
        return spec
    if isinstance(spec, str):
        try:
            return BUILTIN[spec]()
        except KeyError:
            raise KeyError(f"unknown metric {spec!r}; available: {', '.join(available())}") from None
    if isinstance(spec, dict) and "command" in spec:
        return ExternalMetric(spec["name"], spec["command"], int(spec.get("rate", 16000)),
                              float(spec.get("timeout", 60.0)))
    raise TypeError(f"cannot build a metric from {spec!r}")


__all__ = [
    "BUILTIN", "DisturbanceMetric", "ExternalMetric", "MOS_MAX", "MOS_MIN", "Metric", "MetricError",
    "NsimMetric", "Spectrogram", "align", "available", "clamp_mos", "external_metric", "get_metric",
    "nsim", "nsim_map", "nsim_to_mos", "parse_score", "spectrogram",
]
