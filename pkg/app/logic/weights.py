"""Exact integer weight tables and the categorical distributions built from them."""
import csv
import io
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import accumulate
from typing import Dict, List, Mapping, Optional, Tuple

from app.errors import (
    AgeOutOfRange,
    AllWeightsZero,
    DuplicateCategory,
    EmptyTable,
    MalformedRow,
    MissingCategory,
    NegativeWeight,
    NonIntegerWeight,
    WeightOverflow,
)

AGE_MIN = 17
AGE_MAX = 84
BAND_LOW = 15
BAND_HIGH = 84
GENDER_TOKENS = ("Female", "Male")

_MAX_TOTAL = 1 << 64


@dataclass(frozen=True)
class WeightTable:
    entries: Tuple[Tuple[str, int], ...]
    source: Optional[str] = None

    @property
    def total_weight(self) -> int:
        return sum(w for _, w in self.entries)

    @property
    def categories(self) -> Tuple[str, ...]:
        return tuple(c for c, _ in self.entries)


@dataclass(frozen=True)
class CategoricalDistribution:
    categories: Tuple[str, ...]
    cumulative: Tuple[int, ...]
    dropped: Tuple[str, ...] = ()

    @property
    def total_weight(self) -> int:
        return self.cumulative[-1]

    @property
    def weights(self) -> Tuple[int, ...]:
        prev = (0,) + self.cumulative[:-1]
        return tuple(c - p for c, p in zip(self.cumulative, prev))

    def as_dict(self) -> Dict[str, int]:
        """category -> weight, zero-weight categories included, file order kept."""
        out = dict(zip(self.categories, self.weights))
        for c in self.dropped:
            out[c] = 0
        return out

    @property
    def domain(self) -> Tuple[str, ...]:
        return self.categories + self.dropped

    def weight(self, category: str) -> int:
        try:
            i = self.categories.index(category)
        except ValueError:
            return 0
        return self.cumulative[i] - (self.cumulative[i - 1] if i else 0)

    def probability(self, category: str) -> Fraction:
        return Fraction(self.weight(category), self.total_weight)

    def top(self, k: int = 3) -> List[Tuple[str, int]]:
        ranked = sorted(zip(self.categories, self.weights), key=lambda cw: -cw[1])
        return ranked[:k]


class GroupKeyKind(str, Enum):
    AGE_BUCKET = "age_bucket"
    AGE_BUCKET_AND_GENDER = "age_bucket_and_gender"


@dataclass(frozen=True, order=True)
class AgeBucket:
    low: int
    high: int

    def __post_init__(self):
        if self.low % 5 != 0 or self.high != self.low + 4 or self.low < BAND_LOW or self.high > BAND_HIGH:
            raise AgeOutOfRange(f"{self.low}-{self.high} is not a 5-year band within {BAND_LOW}-{BAND_HIGH}")

    @property
    def label(self) -> str:
        return f"{self.low}-{self.high}"

    def __str__(self) -> str:
        return self.label


ALL_BUCKETS: Tuple[AgeBucket, ...] = tuple(AgeBucket(lo, lo + 4) for lo in range(BAND_LOW, BAND_HIGH, 5))


def age_bucket(age: int) -> AgeBucket:
    if age < BAND_LOW or age > BAND_HIGH:
        raise AgeOutOfRange(f"age {age} outside {BAND_LOW}-{BAND_HIGH}")
    low = age - age % 5
    return AgeBucket(low, low + 4)


def gender_token(value: str) -> str:
    """'female' -> 'Female', as used in fixture file names and group keys."""
    return value.strip().capitalize()


def group_label(bucket: AgeBucket, gender: Optional[str] = None) -> str:
    return f"{gender_token(gender)}_{bucket.label}" if gender else bucket.label


def group_labels(kind: GroupKeyKind) -> Tuple[str, ...]:
    if kind is GroupKeyKind.AGE_BUCKET:
        return tuple(b.label for b in ALL_BUCKETS)
    return tuple(group_label(b, g) for g in GENDER_TOKENS for b in ALL_BUCKETS)


@dataclass(frozen=True)
class GroupedDistributionSet:
    group_key_kind: GroupKeyKind
    groups: Mapping[str, CategoricalDistribution]

    def select(self, bucket: AgeBucket, gender: Optional[str] = None) -> Optional[CategoricalDistribution]:
        if self.group_key_kind is GroupKeyKind.AGE_BUCKET:
            return self.groups.get(bucket.label)
        return self.groups.get(group_label(bucket, gender))

    @property
    def domain(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for dist in self.groups.values():
            for c in dist.domain:
                seen.setdefault(c, None)
        return tuple(seen)


_WEIGHT = re.compile(r"[0-9]+")


def parse_weight_table(text: str, source: Optional[str] = None) -> WeightTable:
    entries: List[Tuple[str, int]] = []
    seen = set()
    reader = csv.reader(io.StringIO(text.lstrip("\ufeff"), newline=""))
    rows = iter(reader)
    while True:
        try:
            row = next(rows)
        except StopIteration:
            break
        except csv.Error as e:
            raise MalformedRow(str(e), source, reader.line_num) from e
        line = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        raw = row[-1].strip()
        category = ",".join(row[:-1]).strip()
        if _WEIGHT.fullmatch(raw) is None:
            if raw.startswith("-") and _WEIGHT.fullmatch(raw[1:]):
                raise NegativeWeight(f"negative weight {raw!r} for {category!r}", source, line)
            raise NonIntegerWeight(f"weight {raw!r} is not a non-negative integer", source, line)
        if not category:
            raise MissingCategory("row has a weight but no category", source, line)
        if category in seen:
            raise DuplicateCategory(f"category {category!r} listed twice", source, line)
        seen.add(category)
        entries.append((category, int(raw)))

    if not entries:
        raise EmptyTable("weight table has no rows", source)
    table = WeightTable(tuple(entries), source)
    if table.total_weight == 0:
        raise AllWeightsZero("every weight is zero", source)
    return table


def build_distribution(table: WeightTable, limit_64bit: bool = True) -> CategoricalDistribution:
    """Drop zero-weight categories (remembered in `dropped`) and accumulate the rest.

    Tables meant for sampling must total below 2**64; exact targets built for reporting may not.
    """
    kept = [(c, w) for c, w in table.entries if w > 0]
    if not kept:
        raise AllWeightsZero("every weight is zero", table.source)
    cumulative = tuple(accumulate(w for _, w in kept))
    if limit_64bit and cumulative[-1] >= _MAX_TOTAL:
        raise WeightOverflow(f"total weight {cumulative[-1]} does not fit in 64 bits", table.source)
    return CategoricalDistribution(
        categories=tuple(c for c, _ in kept),
        cumulative=cumulative,
        dropped=tuple(c for c, w in table.entries if w == 0),
    )


def distribution_from_weights(
    weights: Mapping[str, int], source: Optional[str] = None, limit_64bit: bool = True
) -> CategoricalDistribution:
    return build_distribution(WeightTable(tuple(weights.items()), source), limit_64bit)
