import math
import random
from fractions import Fraction

import pytest

from app.errors import EmptyHistogram, InsufficientCells
from app.logic.fidelity import Histogram, chi_square, mixture, tv_distance
from app.logic.weights import distribution_from_weights


def _tv_oracle(weights, counts):
    total = sum(weights.values())
    n = sum(counts.values())
    cats = set(weights) | set(counts)
    return float(sum(abs(Fraction(weights.get(c, 0), total) - Fraction(counts.get(c, 0), n)) for c in cats) / 2)


def _chi_oracle(weights, counts, min_expected=5):
    total = sum(weights.values())
    n = sum(counts.values())
    cells = []
    pooled_e, pooled_o = Fraction(0), 0
    for c in sorted(set(weights) | set(counts)):
        e = Fraction(n * weights.get(c, 0), total)
        o = counts.get(c, 0)
        if e >= min_expected:
            cells.append((e, o))
        else:
            pooled_e += e
            pooled_o += o
    if pooled_e > 0:
        cells.append((pooled_e, pooled_o))
    if len(cells) < 2:
        return None
    if pooled_e == 0 and pooled_o > 0:
        return math.inf, len(cells) - 1
    return float(sum((o - e) ** 2 / e for e, o in cells)), len(cells) - 1


def _close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_chi_square_worked_example():
    target = distribution_from_weights({"a": 1, "b": 1})
    stat, dof = chi_square(target, Histogram.from_counts({"a": 60, "b": 40}))
    assert stat == pytest.approx(4.0, abs=1e-12)
    assert dof == 1


def test_tv_identical_and_disjoint():
    target = distribution_from_weights({"a": 1, "b": 3})
    assert tv_distance(target, Histogram.from_counts({"a": 25, "b": 75})) == pytest.approx(0.0, abs=1e-15)
    assert tv_distance(target, Histogram.from_counts({"z": 10})) == pytest.approx(1.0)


def test_tv_counts_zero_weight_categories():
    target = distribution_from_weights({"Single": 9, "Widowed": 0, "Married": 1})
    hist = Histogram.of(["Single"] * 8 + ["Widowed"] * 2)
    assert tv_distance(target, hist) == pytest.approx(0.2)


def test_empty_histogram():
    target = distribution_from_weights({"a": 1})
    with pytest.raises(EmptyHistogram):
        tv_distance(target, Histogram.from_counts({}))
    with pytest.raises(EmptyHistogram):
        chi_square(target, Histogram.from_counts({}))


def test_single_cell_is_insufficient():
    with pytest.raises(InsufficientCells):
        chi_square(distribution_from_weights({"a": 1}), Histogram.from_counts({"a": 100}))


def test_small_cells_are_pooled():
    target = distribution_from_weights({"a": 90, "b": 6, "c": 4})
    stat, dof = chi_square(target, Histogram.from_counts({"a": 90, "b": 6, "c": 4}))
    # expected 90, 6, 4 with n=100: only c is pooled and it stays as its own cell
    assert (stat, dof) == (pytest.approx(0.0, abs=1e-12), 2)
    stat, dof = chi_square(target, Histogram.from_counts({"a": 27, "b": 2, "c": 1}))
    # n=30: b (1.8) and c (1.2) pool into one cell of 3
    assert dof == 1
    assert stat == pytest.approx(0.0, abs=1e-12)


def test_unexpected_category_without_pool_is_infinite():
    target = distribution_from_weights({"a": 50, "b": 50})
    stat, dof = chi_square(target, Histogram.from_counts({"a": 5, "b": 5, "c": 1}))
    assert math.isinf(stat)
    assert dof == 1


def test_agrees_with_exact_oracle_on_random_pairs():
    rng = random.Random(20130901)
    for _ in range(100):
        k = rng.randint(2, 8)
        cats = [f"c{i}" for i in range(k)]
        weights = {c: rng.randint(0, 40) for c in cats}
        if not any(weights.values()):
            weights[cats[0]] = 1
        n = rng.randint(1, 600)
        counts = {}
        for _ in range(n):
            c = rng.choice(cats)
            counts[c] = counts.get(c, 0) + 1

        target = distribution_from_weights(weights)
        hist = Histogram.from_counts(counts)
        assert _close(tv_distance(target, hist), _tv_oracle(weights, counts))

        expected = _chi_oracle(weights, counts)
        if expected is None:
            with pytest.raises(InsufficientCells):
                chi_square(target, hist)
            continue
        stat, dof = chi_square(target, hist)
        assert dof == expected[1]
        if math.isinf(expected[0]):
            assert math.isinf(stat)
        else:
            assert _close(stat, expected[0])


def test_tv_is_bounded_and_symmetric_on_random_pairs():
    rng = random.Random(20130901)
    for _ in range(200):
        cats = [f"c{i}" for i in range(rng.randint(1, 8))]
        a = {c: rng.randint(0, 30) for c in cats}
        b = {c: rng.randint(0, 30) for c in rng.sample(cats, rng.randint(1, len(cats)))}
        a[cats[0]] += 1
        b[next(iter(b))] += 1

        forward = tv_distance(distribution_from_weights(a), Histogram.from_counts(b))
        backward = tv_distance(distribution_from_weights(b), Histogram.from_counts(a))
        assert 0.0 <= forward <= 1.0
        assert forward == pytest.approx(backward, abs=1e-12)
        assert forward == pytest.approx(_tv_oracle(a, b), abs=1e-12)


def test_mixture_is_exact():
    young = distribution_from_weights({"Single": 9, "Married": 1})
    old = distribution_from_weights({"Married": 2, "Widowed": 1})
    mixed = mixture([(1, young), (3, old)])
    assert mixed.probability("Single") == Fraction(1, 4) * Fraction(9, 10)
    assert mixed.probability("Married") == Fraction(1, 4) * Fraction(1, 10) + Fraction(3, 4) * Fraction(2, 3)
    assert mixed.probability("Widowed") == Fraction(3, 4) * Fraction(1, 3)


def test_mixture_keeps_zero_categories():
    a = distribution_from_weights({"Employee": 3, "Retired": 0})
    b = distribution_from_weights({"Employee": 1, "Student or pupil": 0})
    mixed = mixture([(1, a), (1, b)])
    assert set(mixed.domain) == {"Employee", "Retired", "Student or pupil"}
    assert mixed.probability("Employee") == 1


def test_tv_half_and_half_against_three_quarters():
    target = distribution_from_weights({"a": 1, "b": 1})
    assert tv_distance(target, Histogram.from_counts({"a": 75, "b": 25})) == pytest.approx(0.25)
