"""Feature dispersion statistics: MAD, NMAD, QCD and the intra-class ratio."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DispersionError(ValueError):
    pass


def median(xs: Sequence[float]) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise DispersionError("median of an empty list")
    return float(np.median(xs))


def mad(xs: Sequence[float]) -> float:
    """Median absolute deviation from the median."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise DispersionError("MAD of an empty list")
    return float(np.median(np.abs(xs - np.median(xs))))


def nmad(mad_value: float, reference: float) -> float:
    """MAD as a percentage of ``|reference|``; a zero reference raises ``ZeroDivisionError``."""
    if reference == 0:
        raise ZeroDivisionError("NMAD reference value is zero")
    return mad_value / abs(reference) * 100.0


def quartiles(xs: Sequence[float]) -> tuple[float, float]:
    """First and third quartile, linear interpolation at ``0.25 (n-1)`` and ``0.75 (n-1)``."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size < 2:
        raise DispersionError("quartiles need at least two values")
    q1, q3 = np.quantile(xs, [0.25, 0.75], method="linear")
    return float(q1), float(q3)


def qcd(xs: Sequence[float]) -> float:
    """Quartile coefficient of dispersion ``(Q3 - Q1) / (Q3 + Q1)``."""
    q1, q3 = quartiles(xs)
    if q1 + q3 == 0:
        raise ZeroDivisionError("quartile sum is zero")
    return (q3 - q1) / (q3 + q1)


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: list[str]
    ids: list[str] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DispersionError("feature matrix must be 2-D")
        if len(self.labels) != self.features.shape[0]:
            raise DispersionError("one label per row required")
        if not self.ids:
            self.ids = [str(i) for i in range(len(self.labels))]
        if not self.names:
            self.names = [f"f{i}" for i in range(self.features.shape[1])]


@dataclass
class FeatureDispersion:
    name: str
    intra_qcd: float
    inter_qcd: float
    degenerate: bool
    note: str = ""


@dataclass
class DispersionReport:
    features: list[FeatureDispersion]
    mode: str

    @property
    def usable(self) -> list[FeatureDispersion]:
        return [f for f in self.features if not f.degenerate]

    @property
    def degenerate_count(self) -> int:
        return sum(f.degenerate for f in self.features)

    @property
    def intra_class_variance_ratio(self) -> float:
        usable = self.usable
        if not usable:
            return math.nan
        return sum(f.intra_qcd < f.inter_qcd for f in usable) / len(usable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "feature", "intra_qcd", "inter_qcd", "degenerate", "note"])
        for i, f in enumerate(self.features):
            w.writerow([i, f.name, repr(f.intra_qcd), repr(f.inter_qcd), int(f.degenerate), f.note])
        w.writerow(
            ["# intra_class_variance_ratio", repr(self.intra_class_variance_ratio),
             f"usable={len(self.usable)}", f"degenerate={self.degenerate_count}", f"mode={self.mode}"]
        )
        return buf.getvalue()


def _nmad_values(column: np.ndarray, groups: list[np.ndarray]) -> list[float]:
    out = []
    for ref_idx, pool in enumerate(groups):
        ref = column[ref_idx]
        if ref == 0 or pool.size == 0:
            continue
        out.append(nmad(mad(column[pool]), ref))
    return out


def _qcd_of(values: list[float]) -> tuple[float, str]:
    """QCD with the degenerate cases spelled out.

    An all-zero NMAD set has no dispersion at all and is reported as 0; too
    few usable values give ``nan``.
    """
    if len(values) < 2:
        return math.nan, "too few non-zero references"
    arr = np.asarray(values)
    if np.all(arr == 0):
        return 0.0, "zero dispersion"
    return qcd(arr), ""


def class_dispersion(dataset: LabeledDataset, mode: str = "pooled") -> DispersionReport:
    """Intra- and inter-class QCD of NMAD for every feature.

    For each molecule ``r`` and feature ``i``, NMAD is the MAD of feature ``i``
    over a comparison set, divided by ``|x_ri|``; QCD is then taken over the
    per-molecule NMAD values.  Comparison sets:

    ``pooled`` (default)
        intra: ``r``'s whole class; inter: every molecule of every class.
    ``loo``
        intra: ``r``'s class without ``r``; inter: the other classes only.

    A feature is degenerate when either QCD is undefined or when both are
    zero; degenerate features are left out of the ratio.
    """
    if mode not in ("pooled", "loo"):
        raise DispersionError(f"unknown mode {mode!r}")
    labels = np.asarray(dataset.labels)
    classes = sorted(set(dataset.labels))
    if len(classes) < 2:
        raise DispersionError("inter-class undefined: dataset has a single class")
    for c in classes:
        if np.sum(labels == c) < 2:
            raise DispersionError(f"class {c!r} has fewer than 2 members")

    rows = np.arange(len(labels))
    intra_groups, inter_groups = [], []
    for r in rows:
        same = labels == labels[r]
        if mode == "loo":
            intra_groups.append(rows[same & (rows != r)])
            inter_groups.append(rows[~same])
        else:
            intra_groups.append(rows[same])
            inter_groups.append(rows)

    results = []
    for i, name in enumerate(dataset.names):
        column = dataset.features[:, i]
        intra, note_a = _qcd_of(_nmad_values(column, intra_groups))
        inter, note_b = _qcd_of(_nmad_values(column, inter_groups))
        both_flat = note_a == note_b == "zero dispersion"
        degenerate = math.isnan(intra) or math.isnan(inter) or both_flat
        note = "; ".join(sorted({n for n in (note_a, note_b) if n}))
        results.append(FeatureDispersion(name, intra, inter, degenerate, note))
    return DispersionReport(results, mode)
