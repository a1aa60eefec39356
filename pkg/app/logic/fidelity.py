"""Divergence between a target weight table and an observed histogram."""
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from app.errors import EmptyHistogram, InsufficientCells
from app.logic.weights import CategoricalDistribution, distribution_from_weights

DEFAULT_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class Histogram:
    counts: Mapping[str, int]
    n: int

    @classmethod
    def of(cls, values: Iterable[str]) -> "Histogram":
        counts = Counter(values)
        return cls(dict(counts), sum(counts.values()))

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "Histogram":
        return cls(dict(counts), sum(counts.values()))


def _aligned(target: CategoricalDistribution, observed: Histogram) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """Union of categories (target order first) with target probabilities and observed counts."""
    cats = list(target.domain)
    known = set(cats)
    cats.extend(c for c in observed.counts if c not in known)
    weights = target.as_dict()
    total = target.total_weight
    # through Fraction: mixture weights can exceed the float range
    p = np.array([float(Fraction(weights.get(c, 0), total)) for c in cats], dtype=np.float64)
    o = np.array([observed.counts.get(c, 0) for c in cats], dtype=np.float64)
    return cats, p, o


def tv_distance(target: CategoricalDistribution, observed: Histogram) -> float:
    if observed.n < 1:
        raise EmptyHistogram("observed histogram is empty")
    _, p, o = _aligned(target, observed)
    q = o / float(observed.n)
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def chi_square(
    target: CategoricalDistribution, observed: Histogram, min_expected: float = DEFAULT_MIN_EXPECTED
) -> Tuple[float, int]:
    """Pearson statistic and degrees of freedom.

    Cells expecting fewer than `min_expected` are pooled into one "other" cell, which is kept
    when its expectation is positive. Observations in cells that expect nothing, with nothing
    to pool them into, make the statistic infinite.
    """
    n = observed.n
    if n < 1:
        raise EmptyHistogram("observed histogram is empty")
    cats, _, o = _aligned(target, observed)
    weights = target.as_dict()
    total = target.total_weight
    # exact n*w/total, so integral expectations stay integral
    expected = np.array([float(Fraction(n * weights.get(c, 0), total)) for c in cats], dtype=np.float64)

    keep = expected >= min_expected
    exp_cells = list(expected[keep])
    obs_cells = list(o[keep])
    pooled_exp = float(expected[~keep].sum())
    pooled_obs = float(o[~keep].sum())
    if pooled_exp > 0:
        exp_cells.append(pooled_exp)
        obs_cells.append(pooled_obs)

    if len(exp_cells) < 2:
        raise InsufficientCells(f"{len(exp_cells)} cell(s) left after pooling, need at least 2")
    if pooled_exp == 0 and pooled_obs > 0:
        return math.inf, len(exp_cells) - 1

    e = np.array(exp_cells)
    d = np.array(obs_cells) - e
    return float((d * d / e).sum()), len(exp_cells) - 1


def mixture(components: Sequence[Tuple[int, CategoricalDistribution]]) -> CategoricalDistribution:
    """Exact mixture sum_i (a_i / A) * dist_i, kept as integer weights on a common denominator."""
    total = sum(a for a, _ in components)
    probs: Dict[str, Fraction] = {}
    for a, dist in components:
        for category, weight in dist.as_dict().items():
            probs[category] = probs.get(category, Fraction(0)) + Fraction(a * weight, total * dist.total_weight)
    denom = math.lcm(*(p.denominator for p in probs.values()))
    weights = {c: int(p * denom) for c, p in probs.items()}
    return distribution_from_weights(weights, limit_64bit=False)
