from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Mapping, Optional, Tuple

from app.errors import PlanError
from app.logic.script import ScriptExpr, parse_script
from app.logic.weights import AGE_MAX, AGE_MIN


class GeneratorKind(str, Enum):
    INDEPENDENT = "independent"
    AGE_KEYED = "age_keyed"
    AGE_GENDER_KEYED = "age_gender_keyed"
    COMPOSED = "composed"
    NAME_PART = "name_part"
    DERIVED = "derived"


class NamePart(str, Enum):
    GIVEN = "given"
    FAMILY = "family"


# number of key fields each kind is conditioned on
_KEY_COUNT = {
    GeneratorKind.INDEPENDENT: 0,
    GeneratorKind.AGE_KEYED: 1,
    GeneratorKind.AGE_GENDER_KEYED: 2,
    GeneratorKind.DERIVED: 1,
}


@dataclass(frozen=True)
class AttributeGenerator:
    """One sub-generator.

    `keys` names the already-generated fields the draw is conditioned on:
    age_keyed (age,), age_gender_keyed (age, gender),
    name_part given (nationality, gender), family (nationality,),
    derived (source,): no draw, the source value mapped through `relabel`.
    Composed generators take their dependencies from `script` instead.

    `implicit` fields are drawn whenever another field needs them, even when no
    attribute exposes them.
    """

    name: str
    kind: GeneratorKind
    keys: Tuple[str, ...] = ()
    fixture: Optional[str] = None
    relabel: Optional[str] = None
    part: Optional[NamePart] = None
    script: Optional[ScriptExpr] = None
    clamp: Optional[Tuple[int, int]] = None
    implicit: bool = False
    variable: str = ""

    def __post_init__(self):
        if self.kind is GeneratorKind.COMPOSED:
            if self.script is None or self.keys:
                raise PlanError(f"composed generator {self.name!r} needs a script and no keys")
            return
        if self.kind is GeneratorKind.NAME_PART:
            want = 2 if self.part is NamePart.GIVEN else 1
            if self.part is None or len(self.keys) != want:
                raise PlanError(f"name generator {self.name!r} needs part and {want} key(s)")
        elif len(self.keys) != _KEY_COUNT[self.kind]:
            raise PlanError(f"{self.kind.value} generator {self.name!r} takes {_KEY_COUNT[self.kind]} key(s)")
        if self.fixture is None and self.kind is not GeneratorKind.NAME_PART:
            raise PlanError(f"generator {self.name!r} has no fixture")
        if self.kind is GeneratorKind.DERIVED and self.relabel is None:
            raise PlanError(f"derived generator {self.name!r} needs a relabel table")

    @property
    def depends_on(self) -> FrozenSet[str]:
        if self.kind is GeneratorKind.COMPOSED:
            return frozenset(ref.field for ref in self.script.field_refs)
        return frozenset(self.keys)

    @property
    def node_id(self) -> str:
        return f"{self.variable}.{self.name}" if self.variable else self.name


def _independent(name: str, fixture: str, **kw) -> AttributeGenerator:
    return AttributeGenerator(name, GeneratorKind.INDEPENDENT, fixture=fixture, **kw)


def _by_age(name: str, fixture: str) -> AttributeGenerator:
    return AttributeGenerator(name, GeneratorKind.AGE_KEYED, keys=("age",), fixture=fixture)


def _by_age_gender(name: str, fixture: str) -> AttributeGenerator:
    return AttributeGenerator(name, GeneratorKind.AGE_GENDER_KEYED, keys=("age", "gender"), fixture=fixture)


# nationality is the one draw behind nativeCountry and both name parts; nativeCountry
# is its country spelling from the NationalityCountry table.
PERSON_CENSUS: Mapping[str, AttributeGenerator] = {
    g.name: g
    for g in (
        _independent("gender", "Gender"),
        _independent("age", "Age", clamp=(AGE_MIN, AGE_MAX)),
        _independent("nationality", "Nationality", implicit=True),
        AttributeGenerator(
            "nativeCountry", GeneratorKind.DERIVED, keys=("nationality",),
            fixture="Nationality", relabel="NationalityCountry",
        ),
        _independent("county", "County"),
        _by_age("maritalStatus", "MaritalStatus"),
        _by_age("economicStatus", "EconomicStatus"),
        _by_age("education", "Education"),
        _by_age_gender("industrialGroup", "IndustrialGroup"),
        _by_age_gender("fieldOfStudy", "FieldOfStudy"),
        AttributeGenerator("givenName", GeneratorKind.NAME_PART, keys=("nationality", "gender"), part=NamePart.GIVEN),
        AttributeGenerator("familyName", GeneratorKind.NAME_PART, keys=("nationality",), part=NamePart.FAMILY),
        AttributeGenerator("fullName", GeneratorKind.COMPOSED, script=parse_script("self.givenName + ' ' + self.familyName")),
    )
}

CATALOGS: Dict[str, Mapping[str, AttributeGenerator]] = {
    "PersonCensusGenerator": PERSON_CENSUS,
}


def catalog_for(generator_id: str) -> Optional[Mapping[str, AttributeGenerator]]:
    return CATALOGS.get(generator_id)


def field_for_name(catalog: Mapping[str, AttributeGenerator], name: str) -> Optional[AttributeGenerator]:
    """Case-insensitive catalog lookup ('MaritalStatus' -> maritalStatus)."""
    key = name.strip().lower()
    for gen in catalog.values():
        if gen.name.lower() == key:
            return gen
    return None
