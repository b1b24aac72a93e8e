"""
Positive/negative testing protocol and the derived rates.

Positive probes (images of an enrolled identity) count as true positives when
they are assigned their own class AND the winning distance is within tau;
otherwise false negatives. Negative probes (impostors) count as true
negatives when the winning distance exceeds tau; otherwise false positives.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .classify import Measure, classify
from .exceptions import ProtocolError
from .imageio import DatasetEntry, LabeledDataset, Role

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["measure", "tau", "TP", "FP", "TN", "FN", "sensitivity", "specificity", "fpr", "fnr", "accuracy"]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ProtocolError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    sensitivity: Optional[Fraction]
    specificity: Optional[Fraction]
    false_positive_rate: Optional[Fraction]
    false_negative_rate: Optional[Fraction]
    accuracy: Fraction
    measure: Optional[str] = None
    tau: Optional[float] = None

    def as_row(self, places: int = 6) -> dict:
        return {
            "measure": self.measure or "",
            "tau": format_tau(self.tau),
            "TP": self.counts.tp,
            "FP": self.counts.fp,
            "TN": self.counts.tn,
            "FN": self.counts.fn,
            "sensitivity": format_fraction(self.sensitivity, places),
            "specificity": format_fraction(self.specificity, places),
            "fpr": format_fraction(self.false_positive_rate, places),
            "fnr": format_fraction(self.false_negative_rate, places),
            "accuracy": format_fraction(self.accuracy, places),
        }


@dataclass(frozen=True)
class ProbeScore:
    role: Role
    label: str
    predicted: str
    distance: float


# --- formatting -----------------------------------------------------------

def round_half_up(value: Fraction, places: int) -> str:
    """Exact decimal rendering of a nonnegative rational, rounding halves up."""
    scaled = Fraction(value) * 10 ** places
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    whole, part = divmod(q, 10 ** places)
    return f"{whole}.{part:0{places}d}" if places else str(whole)


def format_fraction(value: Optional[Fraction], places: int = 6) -> str:
    return "NA" if value is None else round_half_up(value, places)


def format_percent(value: Optional[Fraction], places: int = 2) -> str:
    return "NA" if value is None else round_half_up(value * 100, places) + "%"


def format_tau(tau: Optional[float]) -> str:
    if tau is None:
        return ""
    if math.isinf(tau):
        return "inf" if tau > 0 else "-inf"
    return repr(float(tau))


# --- metrics --------------------------------------------------------------

def compute_metrics(c: ConfusionCounts, measure: Optional[str] = None, tau: Optional[float] = None) -> EvalReport:
    if c.total == 0:
        raise ProtocolError("all confusion counts are zero")
    positives = c.tp + c.fn
    negatives = c.fp + c.tn
    sensitivity = Fraction(c.tp, positives) if positives else None
    specificity = Fraction(c.tn, negatives) if negatives else None
    return EvalReport(
        counts=c,
        sensitivity=sensitivity,
        specificity=specificity,
        false_positive_rate=None if specificity is None else 1 - specificity,
        false_negative_rate=None if sensitivity is None else 1 - sensitivity,
        accuracy=Fraction(c.tp + c.tn, c.total),
        measure=measure,
        tau=tau,
    )


def count_confusion(scores: Iterable[ProbeScore], tau: float) -> ConfusionCounts:
    tau = float(tau)
    if math.isnan(tau):
        raise ProtocolError("tau must not be NaN")
    tp = fp = tn = fn = 0
    for s in scores:
        accepted = s.distance <= tau
        if s.role == Role.POSITIVE:
            if accepted and s.predicted == s.label:
                tp += 1
            else:
                fn += 1
        elif s.role == Role.NEGATIVE:
            if accepted:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def recognition_rate(scores: Iterable[ProbeScore]) -> Optional[Fraction]:
    """Closed-set identification rate over positive probes (tau ignored)."""
    positives = [s for s in scores if s.role == Role.POSITIVE]
    if not positives:
        return None
    return Fraction(sum(1 for s in positives if s.predicted == s.label), len(positives))


def tau_sweep(
    scores: Sequence[ProbeScore],
    steps: int,
    tau_min: Optional[float] = None,
    tau_max: Optional[float] = None,
) -> List[float]:
    """``steps`` thresholds spaced linearly over the observed distance range (or the given bounds)."""
    if steps < 1:
        raise ProtocolError(f"tau sweep needs at least one step, got {steps}")
    distances = [s.distance for s in scores]
    if not distances and (tau_min is None or tau_max is None):
        raise ProtocolError("no probe distances to derive a tau range from")
    lo = min(distances) if tau_min is None else float(tau_min)
    hi = max(distances) if tau_max is None else float(tau_max)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ProtocolError(f"invalid tau range [{lo}, {hi}]")
    return [float(t) for t in np.linspace(lo, hi, steps)]


# --- protocol -------------------------------------------------------------

def probe_entries(dataset: LabeledDataset) -> List[DatasetEntry]:
    return [e for e in dataset if e.role in (Role.POSITIVE, Role.NEGATIVE)]


def score_embeddings(fitted, probes: Sequence[DatasetEntry], embeddings, measure: Measure) -> List[ProbeScore]:
    measure = Measure.parse(measure)
    scores = []
    for entry, emb in zip(probes, embeddings):
        predicted, dist = classify(emb, fitted.classes, measure)
        scores.append(ProbeScore(entry.role, entry.label, predicted, dist))
    return scores


def score_probes(fitted, dataset: LabeledDataset, measure: Measure) -> List[ProbeScore]:
    probes = probe_entries(dataset)
    embeddings = fitted.embed_images([e.image for e in probes])
    return score_embeddings(fitted, probes, embeddings, measure)


def check_roles(dataset: LabeledDataset) -> None:
    missing = [r.value for r in Role if not dataset.by_role(r)]
    if missing:
        raise ProtocolError(f"dataset lacks entries with role(s): {', '.join(missing)}", missing=",".join(missing))
    check_probe_labels(dataset, dataset.class_labels)


def check_probe_labels(dataset: LabeledDataset, class_labels: Sequence[str]) -> None:
    """Positive probes must name an enrolled class; negative probes must not."""
    enrolled = set(class_labels)
    unknown = sorted({e.label for e in dataset.by_role(Role.POSITIVE)} - enrolled)
    if unknown:
        raise ProtocolError(
            f"positive-test labels not among the trained classes: {', '.join(unknown)}",
            labels=",".join(unknown),
        )
    impostors = sorted({e.label for e in dataset.by_role(Role.NEGATIVE)} & enrolled)
    if impostors:
        raise ProtocolError(
            f"negative-test labels are trained classes: {', '.join(impostors)}",
            labels=",".join(impostors),
        )


def run_protocol(dataset: LabeledDataset, config, tau: float, measure: Measure) -> ConfusionCounts:
    """Fit the whole pipeline on the train entries, then score every probe at ``tau``."""
    from .pipeline import GaborKecaPipeline

    if math.isnan(float(tau)):
        raise ProtocolError("tau must not be NaN")
    check_roles(dataset)
    fitted = GaborKecaPipeline(config).fit(dataset)
    counts = count_confusion(score_probes(fitted, dataset, measure), tau)
    logger.info(f"Protocol ({Measure.parse(measure).value}, tau={tau}): {counts}")
    return counts
