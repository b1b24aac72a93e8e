"""
Evaluation Test Script
Tests confusion counting, the derived rates and their exact decimal rendering.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from gaborkeca.evaluate import (
    ConfusionCounts,
    ProbeScore,
    compute_metrics,
    count_confusion,
    format_fraction,
    format_percent,
    format_tau,
    recognition_rate,
    round_half_up,
    tau_sweep,
)
from gaborkeca.exceptions import ProtocolError
from gaborkeca.imageio import Role


def pos(distance, correct=True):
    return ProbeScore(Role.POSITIVE, "s1", "s1" if correct else "s2", distance)


def neg(distance):
    return ProbeScore(Role.NEGATIVE, "s9", "s1", distance)


def test_published_count_figures():
    combined = compute_metrics(ConfusionCounts(tp=1481, fp=20, tn=1380, fn=119))
    assert format_percent(combined.sensitivity) == "92.56%"
    assert format_percent(combined.specificity) == "98.57%"
    assert format_percent(combined.false_negative_rate) == "7.44%"
    assert format_percent(combined.false_positive_rate) == "1.43%"
    assert format_percent(combined.accuracy) == "95.37%"

    single = compute_metrics(ConfusionCounts(tp=773, fn=27))
    assert single.sensitivity == Fraction(773, 800)
    assert format_percent(single.sensitivity) == "96.63%"


def test_rates_are_complementary_and_exact():
    report = compute_metrics(ConfusionCounts(tp=3, fp=1, tn=2, fn=1))
    assert report.sensitivity + report.false_negative_rate == 1
    assert report.specificity + report.false_positive_rate == 1
    assert report.accuracy == Fraction(5, 7)
    assert report.as_row()["accuracy"] == "0.714286"


def test_undefined_rates_render_as_na():
    report = compute_metrics(ConfusionCounts(tn=4, fp=0))
    assert report.sensitivity is None and report.false_negative_rate is None
    assert report.specificity == 1
    row = report.as_row()
    assert row["sensitivity"] == "NA"
    assert row["fnr"] == "NA"
    assert row["specificity"] == "1.000000"


def test_all_zero_counts_are_rejected():
    with pytest.raises(ProtocolError):
        compute_metrics(ConfusionCounts())
    with pytest.raises(ProtocolError):
        ConfusionCounts(tp=-1)


def test_round_half_up():
    assert round_half_up(Fraction(1, 8), 2) == "0.13"
    assert round_half_up(Fraction(5, 2), 0) == "3"
    assert round_half_up(Fraction(1, 3), 4) == "0.3333"
    assert round_half_up(Fraction(1), 2) == "1.00"
    assert format_fraction(None) == "NA"


def test_format_tau():
    assert format_tau(None) == ""
    assert format_tau(math.inf) == "inf"
    assert format_tau(-math.inf) == "-inf"
    assert format_tau(0.25) == "0.25"


def test_counting_rules():
    scores = [pos(0.1), pos(0.1, correct=False), pos(0.9), neg(0.2), neg(0.8)]
    assert count_confusion(scores, 0.5) == ConfusionCounts(tp=1, fp=1, tn=1, fn=2)
    # distance equal to tau is accepted
    assert count_confusion([pos(0.5), neg(0.5)], 0.5) == ConfusionCounts(tp=1, fp=1)


def test_infinite_thresholds():
    scores = [pos(0.1), pos(3.0, correct=False), neg(-2.0), neg(7.0)]
    assert count_confusion(scores, -math.inf) == ConfusionCounts(tn=2, fn=2)
    assert count_confusion(scores, math.inf) == ConfusionCounts(tp=1, fp=2, fn=1)


def test_nan_threshold_is_rejected():
    with pytest.raises(ProtocolError):
        count_confusion([pos(0.1)], float("nan"))


def test_raising_tau_is_monotone():
    rng = np.random.default_rng(3)
    scores = [pos(d, correct=bool(c)) for d, c in zip(rng.normal(size=40), rng.integers(0, 2, 40))]
    scores += [neg(d) for d in rng.normal(size=40)]
    previous = None
    for tau in tau_sweep(scores, 25):
        counts = count_confusion(scores, tau)
        if previous is not None:
            assert counts.tp >= previous.tp
            assert counts.fp >= previous.fp
            assert counts.tn <= previous.tn
            assert counts.fn <= previous.fn
        previous = counts


def test_tau_sweep_range():
    scores = [pos(1.0), neg(5.0), pos(3.0)]
    assert tau_sweep(scores, 5) == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert tau_sweep(scores, 3, tau_min=0.0, tau_max=1.0) == [0.0, 0.5, 1.0]
    assert tau_sweep([], 2, tau_min=-1.0, tau_max=1.0) == [-1.0, 1.0]
    with pytest.raises(ProtocolError):
        tau_sweep(scores, 0)
    with pytest.raises(ProtocolError):
        tau_sweep([], 3)
    with pytest.raises(ProtocolError):
        tau_sweep(scores, 3, tau_min=2.0, tau_max=1.0)


def test_recognition_rate_ignores_tau_and_negatives():
    scores = [pos(100.0), pos(0.1, correct=False), pos(2.0), neg(0.0)]
    assert recognition_rate(scores) == Fraction(2, 3)
    assert recognition_rate([neg(1.0)]) is None
