"""Verification metrics from confusion counts, with exact arithmetic.

Ratios are computed as exact fractions and only rounded for display, to
two decimal places of a percent. A ratio whose denominator is zero is
absent (None), never reported as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricSet:
    """Exact ratios; every field is a Fraction or None when undefined."""

    sensitivity: Fraction | None
    specificity: Fraction | None
    fpr: Fraction | None
    fnr: Fraction | None
    accuracy: Fraction | None
    balanced_accuracy: Fraction | None

    def as_percent_floats(self) -> dict[str, float | None]:
        return {
            name: None if value is None else float(value * 100)
            for name, value in self.__dict__.items()
        }

    def display(self) -> dict[str, str]:
        """Percent strings rounded to 0.01, 'n/a' where undefined."""
        out = {}
        for name, value in self.__dict__.items():
            if value is None:
                out[name] = "n/a"
            else:
                out[name] = f"{float(value * 100):.2f}%"
        return out


def _ratio(num: int, den: int) -> Fraction | None:
    if den == 0:
        return None
    return Fraction(num, den)


def compute_metrics(counts: ConfusionCounts) -> MetricSet:
    """Sensitivity, specificity, error rates, accuracy, balanced accuracy.

    balanced_accuracy is the mean of sensitivity and specificity and is
    absent when either of them is.
    """
    sens = _ratio(counts.tp, counts.tp + counts.fn)
    spec = _ratio(counts.tn, counts.tn + counts.fp)
    fpr = _ratio(counts.fp, counts.fp + counts.tn)
    fnr = _ratio(counts.fn, counts.fn + counts.tp)
    acc = _ratio(counts.tp + counts.tn, counts.total)
    bal = None if sens is None or spec is None else (sens + spec) / 2
    return MetricSet(
        sensitivity=sens,
        specificity=spec,
        fpr=fpr,
        fnr=fnr,
        accuracy=acc,
        balanced_accuracy=bal,
    )


@dataclass
class ProbeRecord:
    """Outcome of one probe presentation."""

    path: str
    subject: str
    role: str
    claimed_class: str
    predicted_class: str
    best_score: float
    accepted: bool
    outcome: str


@dataclass
class EvalReport:
    counts: ConfusionCounts
    metrics: MetricSet
    tau: float
    rank1_accuracy: float | None
    n_classes: int
    n_train: int
    n_probe_pos: int
    n_probe_neg: int
    config_fingerprint: str
    scan_mode: str
    probes: list[ProbeRecord] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        display = self.metrics.display()
        percents = self.metrics.as_percent_floats()
        return {
            "counts": {
                "tp": self.counts.tp,
                "fp": self.counts.fp,
                "fn": self.counts.fn,
                "tn": self.counts.tn,
            },
            "metrics_percent": percents,
            "metrics_display": display,
            "tau": self.tau,
            "rank1_accuracy": self.rank1_accuracy,
            "n_classes": self.n_classes,
            "n_train": self.n_train,
            "n_probe_pos": self.n_probe_pos,
            "n_probe_neg": self.n_probe_neg,
            "config_fingerprint": self.config_fingerprint,
            "scan_mode": self.scan_mode,
        }


def decide_positive(predicted: str, claimed: str, best_score: float, tau: float) -> str:
    """A claimed identity counts as verified only if the nearest class is
    the claimed one and its score clears the threshold."""
    if predicted == claimed and best_score <= tau:
        return "tp"
    return "fn"


def decide_negative(best_score: float, tau: float) -> str:
    """An impostor is falsely accepted if any class clears the threshold."""
    if best_score <= tau:
        return "fp"
    return "tn"


def calibrate_tau(self_scores, percentile: float = 100.0) -> float:
    """Acceptance threshold from the training self-class score spread."""
    arr = np.asarray(list(self_scores), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot calibrate a threshold from zero scores")
    if not 0.0 <= percentile <= 100.0:
        raise ValueError(f"percentile must lie in [0, 100], got {percentile}")
    return float(np.percentile(arr, percentile))


def render_table(report: EvalReport) -> str:
    """Fixed-width text table of counts and rates."""
    d = report.metrics.display()
    c = report.counts
    rows = [
        ("true positives", str(c.tp)),
        ("false positives", str(c.fp)),
        ("false negatives", str(c.fn)),
        ("true negatives", str(c.tn)),
        ("sensitivity", d["sensitivity"]),
        ("specificity", d["specificity"]),
        ("false positive rate", d["fpr"]),
        ("false negative rate", d["fnr"]),
        ("accuracy", d["accuracy"]),
        ("balanced accuracy", d["balanced_accuracy"]),
        ("threshold tau", f"{report.tau:.6g}"),
        ("rank-1 accuracy", "n/a" if report.rank1_accuracy is None
         else f"{report.rank1_accuracy * 100:.2f}%"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name.ljust(width)}  {value}" for name, value in rows]
    return "\n".join(lines)
