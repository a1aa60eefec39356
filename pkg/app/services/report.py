"""Fidelity reports: compare a generated CSV against the fixture tables it was drawn from."""
import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from app.config import FidelityTolerances
from app.errors import (
    AgeOutOfRange,
    EmptyHistogram,
    InsufficientCells,
    InvalidInvocation,
    IoFailure,
    UnknownColumn,
    UnparsableAge,
)
from app.logic.catalog import AttributeGenerator, GeneratorKind, field_for_name
from app.logic.fidelity import Histogram, chi_square, mixture, tv_distance
from app.logic.fixture_set import FixtureSet
from app.logic.schema import DescriptorModel
from app.logic.thresholds import entry_status
from app.logic.weights import (
    ALL_BUCKETS,
    GENDER_TOKENS,
    CategoricalDistribution,
    age_bucket,
    gender_token,
)
from app.utils.log import get_logger

logger = get_logger(__name__)

Dataset = Union[str, Path, pd.DataFrame]

_REPORTABLE = (
    GeneratorKind.INDEPENDENT,
    GeneratorKind.DERIVED,
    GeneratorKind.AGE_KEYED,
    GeneratorKind.AGE_GENDER_KEYED,
)
_WHOLE_YEARS = re.compile(r"-?[0-9]+")


class Grouping(str, Enum):
    NONE = "none"
    AGE = "age"
    AGE_GENDER = "age_gender"


@dataclass(frozen=True)
class GroupBy:
    column: str
    bucketing: str = "value"  # value | age_bucket | gender


@dataclass(frozen=True)
class ReportSpec:
    column: str
    field: AttributeGenerator
    grouping: Grouping = Grouping.NONE


@dataclass(frozen=True)
class FidelityEntry:
    attribute: str
    group: Optional[str]
    n: int
    tv: float
    chi2: float
    dof: int
    missing_categories: Tuple[str, ...]
    unexpected_categories: Tuple[str, ...]
    status: str
    tolerance: float


@dataclass(frozen=True)
class FidelityReport:
    dataset: str
    entries: Tuple[FidelityEntry, ...]
    tolerances: FidelityTolerances

    @property
    def passed(self) -> bool:
        return all(e.status != "fail" for e in self.entries)


def read_dataset(path: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise EmptyHistogram("dataset has no header and no records", source=str(path)) from e
    except FileNotFoundError as e:
        raise IoFailure("dataset not found", source=str(path)) from e
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise IoFailure(f"cannot read dataset: {e}", source=str(path)) from e


def _frame(dataset: Dataset) -> Tuple[pd.DataFrame, str]:
    if isinstance(dataset, pd.DataFrame):
        return dataset, "<frame>"
    return read_dataset(dataset), str(dataset)


def resolve_column(df: pd.DataFrame, name: str, source: str = "") -> str:
    if name in df.columns:
        return name
    key = name.strip().lower()
    for col in df.columns:
        if str(col).strip().lower() == key:
            return col
    raise UnknownColumn(f"dataset has no column {name!r}", source=source or None)


def _labels(df: pd.DataFrame, group_by: GroupBy, source: str) -> pd.Series:
    col = resolve_column(df, group_by.column, source)
    values = df[col]
    if group_by.bucketing == "gender":
        return values.map(gender_token)
    if group_by.bucketing != "age_bucket":
        return values

    out = []
    for row, raw in enumerate(values, start=2):
        text = raw.strip()
        if not _WHOLE_YEARS.fullmatch(text):
            raise UnparsableAge(f"column {col!r}: {raw!r} is not a whole number of years", source, row)
        try:
            out.append(age_bucket(int(text)).label)
        except AgeOutOfRange as e:
            raise UnparsableAge(f"column {col!r}: {e.message}", source, row) from e
    return pd.Series(out, index=values.index)


def _label_order(label: str) -> Tuple:
    parts = label.split("_")
    return tuple((0, int(p.split("-")[0])) if p[:1].isdigit() else (1, p) for p in parts)


def empirical_distribution(
    dataset: Dataset,
    attribute: str,
    group_by: Union[None, GroupBy, Sequence[GroupBy]] = None,
) -> Union[Histogram, Dict[str, Histogram]]:
    """Exact counts of `attribute`, overall or per group label ('45-49', 'Female_45-49')."""
    df, source = _frame(dataset)
    col = resolve_column(df, attribute, source)
    if group_by is None:
        return Histogram.from_counts(df[col].value_counts(sort=False).to_dict())

    keys = [group_by] if isinstance(group_by, GroupBy) else list(group_by)
    labels = _labels(df, keys[0], source)
    for extra in keys[1:]:
        labels = labels + "_" + _labels(df, extra, source)

    out: Dict[str, Histogram] = {}
    for label, values in df[col].groupby(labels, sort=False):
        out[str(label)] = Histogram.from_counts(values.value_counts(sort=False).to_dict())
    return {k: out[k] for k in sorted(out, key=_label_order)}


# -------- targets --------
def _bucket_weights(fixtures: FixtureSet, age_gen: AttributeGenerator) -> Dict[str, int]:
    ages = fixtures.distribution_for(age_gen)
    lo, hi = age_gen.clamp or (0, 200)
    weights = {b.label: 0 for b in ALL_BUCKETS}
    for category, w in zip(ages.categories, ages.weights):
        weights[age_bucket(min(max(int(category), lo), hi)).label] += w
    return weights


def _gender_weights(fixtures: FixtureSet, gender_gen: AttributeGenerator) -> Dict[str, int]:
    genders = fixtures.distribution_for(gender_gen)
    return {gender_token(c): w for c, w in zip(genders.categories, genders.weights)}


def target_distribution(
    fixtures: FixtureSet,
    field: AttributeGenerator,
    grouping: Grouping,
    label: Optional[str],
    age_gen: AttributeGenerator,
    gender_gen: AttributeGenerator,
) -> Optional[CategoricalDistribution]:
    """Exact target for one report entry; None when `label` names no group of the field."""
    if field.kind in (GeneratorKind.INDEPENDENT, GeneratorKind.DERIVED):
        return fixtures.distribution_for(field)

    grouped = fixtures.grouped_for(field)
    if grouped is None:
        return None
    gender, bucket = None, None
    if label is not None:
        parts = label.split("_")
        bucket = parts[-1]
        gender = parts[0] if grouping is Grouping.AGE_GENDER else None
        if bucket not in {b.label for b in ALL_BUCKETS} or (gender is not None and gender not in GENDER_TOKENS):
            return None

    buckets = [bucket] if bucket else [b.label for b in ALL_BUCKETS]
    bucket_w = _bucket_weights(fixtures, age_gen) if bucket is None else {bucket: 1}

    if field.kind is GeneratorKind.AGE_KEYED:
        if len(buckets) == 1:
            return grouped.groups[buckets[0]]
        return mixture([(bucket_w[b], grouped.groups[b]) for b in buckets if bucket_w[b] > 0])

    genders = [gender] if gender else list(GENDER_TOKENS)
    gender_w = _gender_weights(fixtures, gender_gen) if gender is None else {gender: 1}
    comps = [
        (gender_w.get(g, 0) * bucket_w[b], grouped.groups[f"{g}_{b}"])
        for g in genders
        for b in buckets
    ]
    comps = [(w, d) for w, d in comps if w > 0]
    if len(comps) == 1:
        return comps[0][1]
    return mixture(comps)


# -------- specs --------
def column_fields(
    columns: Sequence[str],
    catalog: Mapping[str, AttributeGenerator],
    model: Optional[DescriptorModel] = None,
) -> Dict[str, AttributeGenerator]:
    """Dataset column -> catalog field, through the descriptor's single-field scripts when given."""
    out: Dict[str, AttributeGenerator] = {}
    for col in columns:
        gen = None
        attr = model.attribute(col) if model else None
        if attr is not None and attr.source.single_field is not None:
            gen = catalog.get(attr.source.single_field.field)
        elif attr is None:
            gen = field_for_name(catalog, col)
        if gen is not None:
            out[col] = gen
    return out


def _role_column(col_fields: Mapping[str, AttributeGenerator], field_name: str) -> Optional[str]:
    for col, gen in col_fields.items():
        if gen.name == field_name:
            return col
    return None


def default_specs(col_fields: Mapping[str, AttributeGenerator]) -> List[ReportSpec]:
    has_age = _role_column(col_fields, "age") is not None
    has_gender = _role_column(col_fields, "gender") is not None
    specs = []
    for col, gen in col_fields.items():
        if gen.kind not in _REPORTABLE:
            continue
        grouping = Grouping.NONE
        if gen.kind is GeneratorKind.AGE_KEYED and has_age:
            grouping = Grouping.AGE
        elif gen.kind is GeneratorKind.AGE_GENDER_KEYED and has_age:
            grouping = Grouping.AGE_GENDER if has_gender else Grouping.AGE
        specs.append(ReportSpec(col, gen, grouping))
    return specs


def parse_attribute_option(text: str, col_fields: Mapping[str, AttributeGenerator]) -> ReportSpec:
    """'MaritalStatus' or 'MaritalStatus:age' -> ReportSpec."""
    column, _, grouping = text.partition(":")
    try:
        g = Grouping(grouping.strip().lower() or "none")
    except ValueError:
        raise InvalidInvocation(f"--attribute {text!r}: grouping must be none, age or age_gender") from None
    key = column.strip().lower()
    for col, gen in col_fields.items():
        if col.lower() == key:
            if gen.kind not in _REPORTABLE:
                raise InvalidInvocation(f"--attribute {text!r}: {gen.name} has no weight tables to compare against")
            return ReportSpec(col, gen, g)
    raise UnknownColumn(f"--attribute {text!r}: no dataset column maps to a catalog field")


# -------- report --------
def _entry(
    column: str,
    label: Optional[str],
    hist: Histogram,
    target: Optional[CategoricalDistribution],
    tol: FidelityTolerances,
) -> FidelityEntry:
    grouped = label is not None
    if target is None:
        status, limit = entry_status(1.0, hist.n, grouped, False, tol)
        return FidelityEntry(column, label, hist.n, 1.0, math.nan, 0, (), tuple(hist.counts), status, limit)

    tv = tv_distance(target, hist)
    try:
        chi2, dof = chi_square(target, hist, tol.min_expected)
    except InsufficientCells:
        chi2, dof = math.nan, 0
    missing = tuple(c for c in target.categories if hist.counts.get(c, 0) == 0)
    unexpected = tuple(c for c in hist.counts if target.weight(c) == 0)
    status, limit = entry_status(tv, hist.n, grouped, not unexpected, tol)
    return FidelityEntry(column, label, hist.n, tv, chi2, dof, missing, unexpected, status, limit)


def fidelity_report(
    dataset: Dataset,
    fixtures: FixtureSet,
    specs: Sequence[ReportSpec],
    catalog: Mapping[str, AttributeGenerator],
    tolerances: Optional[FidelityTolerances] = None,
    source: Optional[str] = None,
) -> FidelityReport:
    tol = tolerances or FidelityTolerances()
    df, src = _frame(dataset)
    source = source or src
    if len(df) == 0:
        raise EmptyHistogram("dataset has no records", source=source)

    col_fields = {s.column: s.field for s in specs}
    for col in df.columns:
        gen = field_for_name(catalog, col)
        if gen is not None:
            col_fields.setdefault(col, gen)
    age_col = _role_column(col_fields, "age")
    gender_col = _role_column(col_fields, "gender")
    age_gen, gender_gen = catalog["age"], catalog["gender"]

    entries: List[FidelityEntry] = []
    for spec in specs:
        if spec.grouping is Grouping.NONE:
            hist = empirical_distribution(df, spec.column)
            target = target_distribution(fixtures, spec.field, Grouping.NONE, None, age_gen, gender_gen)
            entries.append(_entry(spec.column, None, hist, target, tol))
            continue

        if age_col is None or (spec.grouping is Grouping.AGE_GENDER and gender_col is None):
            raise UnknownColumn(f"grouping {spec.column} by {spec.grouping.value} needs age/gender columns", source)
        keys = [GroupBy(age_col, "age_bucket")]
        if spec.grouping is Grouping.AGE_GENDER:
            keys.insert(0, GroupBy(gender_col, "gender"))
        for label, hist in empirical_distribution(df, spec.column, keys).items():
            target = target_distribution(fixtures, spec.field, spec.grouping, label, age_gen, gender_gen)
            entries.append(_entry(spec.column, label, hist, target, tol))

    logger.debug("fidelity report dataset=%s entries=%d", source, len(entries))
    return FidelityReport(source, tuple(entries), tol)


# -------- output --------
def _num(value: float, digits: int) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}f}"


def format_tsv(report: FidelityReport) -> str:
    """One tab-separated line per entry: attribute group n tv chi2 dof status."""
    tol = report.tolerances
    lines = [
        "# census-synth fidelity report",
        f"# dataset: {report.dataset}",
        f"# tolerances are tool-defined, not census-derived: tv < {tol.independent_tv} ungrouped, "
        f"tv < {tol.grouped_tv} grouped; groups with n < {tol.min_group_n} excluded",
        "# attribute\tgroup\tn\ttv\tchi2\tdof\tstatus",
    ]
    for e in report.entries:
        lines.append("\t".join([
            e.attribute, e.group or "-", str(e.n), _num(e.tv, 6), _num(e.chi2, 4), str(e.dof), e.status,
        ]))
    return "\n".join(lines) + "\n"


def report_frame(report: FidelityReport) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "attribute": e.attribute,
            "group": e.group or "-",
            "n": e.n,
            "tv": round(e.tv, 6),
            "tolerance": e.tolerance,
            "chi2": round(e.chi2, 4) if math.isfinite(e.chi2) else e.chi2,
            "dof": e.dof,
            "missing": len(e.missing_categories),
            "unexpected": len(e.unexpected_categories),
            "status": e.status,
        }
        for e in report.entries
    ])


def format_table(report: FidelityReport) -> str:
    if not report.entries:
        return "(no entries)\n"
    return report_frame(report).to_string(index=False) + "\n"


def default_report_prefix(dataset: Union[str, Path]) -> Path:
    return Path(dataset).with_suffix(".fidelity")


def write_report(report: FidelityReport, prefix: Union[str, Path]) -> Tuple[Path, Path]:
    prefix = Path(prefix)
    tsv = prefix.parent / (prefix.name + ".tsv")
    txt = prefix.parent / (prefix.name + ".txt")
    try:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        tsv.write_text(format_tsv(report), encoding="utf-8", newline="\n")
        txt.write_text(format_table(report), encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoFailure(f"cannot write report: {e.strerror or e}", source=str(prefix)) from e
    return tsv, txt
