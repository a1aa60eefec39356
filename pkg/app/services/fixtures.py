import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterable, List, Tuple, Union

from app.errors import (
    BadAgeCategory,
    BadFileNamePattern,
    FixtureError,
    IoFailure,
    MissingFixtureFile,
    MissingGroupFile,
    MissingNameFallback,
    AgeOutOfRange,
)
from app.logic.catalog import AttributeGenerator, GeneratorKind, NamePart
from app.logic.fixture_set import DEFAULT_NATIONALITY, FixtureSet, fixture_key
from app.logic.plan import GenerationPlan
from app.logic.weights import (
    GENDER_TOKENS,
    AgeBucket,
    CategoricalDistribution,
    GroupedDistributionSet,
    GroupKeyKind,
    WeightTable,
    build_distribution,
    distribution_from_weights,
    group_label,
    group_labels,
    parse_weight_table,
)
from app.utils.log import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

COUNTRY_MAPPING = "NationalityCountry"
_GROUP_KINDS = {
    GeneratorKind.AGE_KEYED: GroupKeyKind.AGE_BUCKET,
    GeneratorKind.AGE_GENDER_KEYED: GroupKeyKind.AGE_BUCKET_AND_GENDER,
}
_GIVEN = re.compile(r"GivenNames_([A-Za-z]+)_([A-Za-z]+)\.csv")
_FAMILY = re.compile(r"FamilyNames_([A-Za-z]+)\.csv")


def _read_text(path: Path) -> str:
    if not path.is_file():
        raise MissingFixtureFile(f"fixture file {path.name} not found", source=str(path.parent))
    try:
        return path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as e:
        raise FixtureError(f"not UTF-8: {e}", source=str(path)) from e
    except OSError as e:
        raise IoFailure(f"cannot read: {e}", source=str(path)) from e


def read_weight_table(path: PathLike) -> WeightTable:
    path = Path(path)
    return parse_weight_table(_read_text(path), source=str(path))


def load_distribution(path: PathLike) -> CategoricalDistribution:
    table = read_weight_table(path)
    dist = build_distribution(table)
    logger.debug("fixture loaded path=%s categories=%d total=%d", path, len(table.entries), dist.total_weight)
    return dist


def resolve_fixture_dir(root: PathLike, region: str = "") -> Path:
    """<root>/<region> when it exists, else <root>."""
    root = Path(root)
    if region and (root / region).is_dir():
        return root / region
    return root


def load_grouped(directory: PathLike, attr: str, kind: GroupKeyKind) -> GroupedDistributionSet:
    directory = Path(directory)
    if kind is GroupKeyKind.AGE_BUCKET:
        pattern = re.compile(rf"{re.escape(attr)}Qty(\d+)-(\d+)\.csv")
        expected = f"{attr}Qty<low>-<high>.csv"
    else:
        pattern = re.compile(rf"{re.escape(attr)}Qty_([A-Za-z]+)_(\d+)-(\d+)\.csv")
        expected = f"{attr}Qty_<Gender>_<low>-<high>.csv"

    groups: Dict[str, CategoricalDistribution] = {}
    for path in sorted(directory.glob(f"{attr}Qty*.csv")):
        m = pattern.fullmatch(path.name)
        if m is None:
            raise BadFileNamePattern(f"{path.name} does not match {expected}", source=str(directory))
        *gender, low, high = m.groups()
        if gender and gender[0] not in GENDER_TOKENS:
            raise BadFileNamePattern(f"{path.name}: gender must be one of {GENDER_TOKENS}", source=str(directory))
        try:
            bucket = AgeBucket(int(low), int(high))
        except AgeOutOfRange as e:
            raise BadFileNamePattern(f"{path.name}: {e.message}", source=str(directory)) from e
        groups[group_label(bucket, gender[0] if gender else None)] = load_distribution(path)

    for label in group_labels(kind):
        if label not in groups:
            raise MissingGroupFile(label, source=str(directory / f"{attr}Qty*.csv"))
    return GroupedDistributionSet(kind, MappingProxyType(groups))


def load_country_mapping(path: PathLike) -> Dict[str, str]:
    """nationality -> country, from two-column rows without a header."""
    path = Path(path)
    mapping: Dict[str, str] = {}
    reader = csv.reader(io.StringIO(_read_text(path), newline=""))
    for row in reader:
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise FixtureError("expected 'nationality,country'", source=str(path), line=reader.line_num)
        nationality, country = row[0].strip(), row[1].strip()
        if nationality in mapping:
            raise FixtureError(f"nationality {nationality!r} mapped twice", source=str(path), line=reader.line_num)
        mapping[nationality] = country
    return mapping


def relabel(dist: CategoricalDistribution, mapping: Dict[str, str], source: str) -> CategoricalDistribution:
    weights: Dict[str, int] = {}
    for category, weight in dist.as_dict().items():
        if category not in mapping:
            raise FixtureError(f"category {category!r} has no entry in {COUNTRY_MAPPING}.csv", source=source)
        target = mapping[category]
        weights[target] = weights.get(target, 0) + weight
    return distribution_from_weights(weights, source)


def _check_ages(dist: CategoricalDistribution, source: str) -> None:
    for category in dist.domain:
        if not re.fullmatch(r"\d+", category.strip()):
            raise BadAgeCategory(f"age category {category!r} is not a whole number of years", source=source)


def load_name_tables(directory: PathLike) -> Tuple[Dict[Tuple[str, str], CategoricalDistribution], Dict[str, CategoricalDistribution]]:
    directory = Path(directory)
    given: Dict[Tuple[str, str], CategoricalDistribution] = {}
    family: Dict[str, CategoricalDistribution] = {}
    for path in sorted(directory.glob("GivenNames_*.csv")):
        m = _GIVEN.fullmatch(path.name)
        if m is None or m.group(2) not in GENDER_TOKENS:
            raise BadFileNamePattern(f"{path.name} does not match GivenNames_<Nationality>_<Gender>.csv", source=str(directory))
        given[(m.group(1), m.group(2))] = load_distribution(path)
    for path in sorted(directory.glob("FamilyNames_*.csv")):
        m = _FAMILY.fullmatch(path.name)
        if m is None:
            raise BadFileNamePattern(f"{path.name} does not match FamilyNames_<Nationality>.csv", source=str(directory))
        family[m.group(1)] = load_distribution(path)
    return given, family


def load_fixtures(root: PathLike, generators: Iterable[AttributeGenerator]) -> FixtureSet:
    """Load exactly the tables the given generators draw from."""
    root = Path(root)
    generators = list(generators)
    if not root.is_dir():
        # runs that need grouped tables report the first group they cannot find
        for gen in generators:
            if gen.kind in _GROUP_KINDS:
                first = group_labels(_GROUP_KINDS[gen.kind])[0]
                raise MissingGroupFile(first, source=str(root / f"{gen.fixture}Qty*.csv"))
        raise MissingFixtureFile(f"fixture directory {root} does not exist", source=str(root))

    independent: Dict[str, CategoricalDistribution] = {}
    grouped: Dict[str, GroupedDistributionSet] = {}
    country_of: Dict[str, str] = {}
    parts = set()
    for gen in generators:
        if gen.kind in (GeneratorKind.INDEPENDENT, GeneratorKind.DERIVED):
            key = fixture_key(gen)
            if key in independent:
                continue
            path = root / f"{gen.fixture}.csv"
            dist = load_distribution(path)
            if gen.clamp:
                _check_ages(dist, str(path))
            if gen.relabel:
                mapping = load_country_mapping(root / f"{gen.relabel}.csv")
                dist = relabel(dist, mapping, str(path))
                country_of.update(mapping)
            independent[key] = dist
        elif gen.kind in _GROUP_KINDS and gen.fixture not in grouped:
            grouped[gen.fixture] = load_grouped(root, gen.fixture, _GROUP_KINDS[gen.kind])
        elif gen.kind is GeneratorKind.NAME_PART:
            parts.add(gen.part)

    given: Dict = {}
    family: Dict = {}
    if parts:
        given, family = load_name_tables(root)
        if NamePart.GIVEN in parts:
            for g in GENDER_TOKENS:
                if (DEFAULT_NATIONALITY, g) not in given:
                    raise MissingNameFallback(f"GivenNames_{DEFAULT_NATIONALITY}_{g}.csv is required", source=str(root))
        if NamePart.FAMILY in parts and DEFAULT_NATIONALITY not in family:
            raise MissingNameFallback(f"FamilyNames_{DEFAULT_NATIONALITY}.csv is required", source=str(root))

    return FixtureSet(
        root=str(root),
        independent=MappingProxyType(independent),
        grouped=MappingProxyType(grouped),
        given_names=MappingProxyType(given),
        family_names=MappingProxyType(family),
        country_of=MappingProxyType(country_of),
    )


def load_plan_fixtures(root: PathLike, plan: GenerationPlan) -> FixtureSet:
    return load_fixtures(root, plan.fixture_generators())


@dataclass(frozen=True)
class TableSummary:
    name: str
    categories: int
    zero_weight: int
    total_weight: int
    top: Tuple[Tuple[str, int], ...]


def summarize_tables(directory: PathLike) -> List[TableSummary]:
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFixtureFile(f"fixture directory {directory} does not exist", source=str(directory))
    paths = [p for p in sorted(directory.glob("*.csv")) if p.stem != COUNTRY_MAPPING]
    if not paths:
        raise FixtureError("no weight tables found", source=str(directory))
    out = []
    for path in paths:
        table = read_weight_table(path)
        dist = build_distribution(table)
        out.append(TableSummary(
            name=path.stem,
            categories=len(table.entries),
            zero_weight=len(dist.dropped),
            total_weight=table.total_weight,
            top=tuple(dist.top(3)),
        ))
    return out
