"""Labeled sample sets with CDF/CCDF projections and CSV export."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from .errors import EmptySeries

KINDS = ("throughput_Mbps", "delay_s")


@dataclass(frozen=True)
class MetricSeries:
    """A labeled set of measurement samples of one kind.

    Delay samples may be +inf for runs that delivered no packets; all
    other values must be finite and non-negative.
    """

    label: str
    kind: str
    samples: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        for v in self.samples:
            if math.isnan(v) or v < 0:
                raise ValueError("samples must be non-negative")
            if math.isinf(v) and self.kind != "delay_s":
                raise ValueError("only delay series may contain +inf")


def cdf(samples) -> list[tuple[float, float]]:
    """(value, fraction of samples <= value) over sorted unique values."""
    samples = list(samples)
    if not samples:
        raise EmptySeries("cannot build a CDF from zero samples")
    n = len(samples)
    ordered = sorted(samples)
    out = []
    seen = 0
    for i, v in enumerate(ordered):
        seen = i + 1
        if i + 1 == n or ordered[i + 1] != v:
            out.append((v, seen / n))
    return out


def ccdf(samples) -> list[tuple[float, float]]:
    """(value, fraction of samples > value) over sorted unique values."""
    return [(v, 1.0 - f) for v, f in cdf(samples)]


def distribution_rows(samples) -> list[tuple[float, float, float]]:
    """(value, cdf, ccdf) rows; the two projections sum to 1 at each value."""
    return [(v, f, 1.0 - f) for v, f in cdf(samples)]


def _format(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return repr(v)


def export_metrics(series_list, out_dir, manifest: dict) -> list[str]:
    """Write one value,cdf,ccdf CSV per series plus a run manifest.

    Re-exporting the same inputs produces byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for series in series_list:
        rows = distribution_rows(series.samples)
        path = os.path.join(out_dir, f"{series.label}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("value,cdf,ccdf\n")
            for v, lo, hi in rows:
                fh.write(f"{_format(v)},{_format(lo)},{_format(hi)}\n")
        written.append(path)
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(manifest_path)
    return written
