from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from app.logic.catalog import AttributeGenerator
from app.logic.weights import CategoricalDistribution, GroupedDistributionSet, gender_token

DEFAULT_NATIONALITY = "Default"


def nationality_token(value: str) -> str:
    """'New Zealander' -> 'NewZealander', the spelling used in name file names."""
    return "".join(value.split())


def fixture_key(gen: AttributeGenerator) -> str:
    return f"{gen.fixture}@{gen.relabel}" if gen.relabel else str(gen.fixture)


@dataclass(frozen=True)
class FixtureSet:
    """Loaded, immutable distributions; shared read-only across generation threads."""

    root: str
    independent: Mapping[str, CategoricalDistribution] = field(default_factory=dict)
    grouped: Mapping[str, GroupedDistributionSet] = field(default_factory=dict)
    given_names: Mapping[Tuple[str, str], CategoricalDistribution] = field(default_factory=dict)
    family_names: Mapping[str, CategoricalDistribution] = field(default_factory=dict)
    # nationality spelling -> country spelling ("Irish" -> "Ireland")
    country_of: Mapping[str, str] = field(default_factory=dict)

    def distribution_for(self, gen: AttributeGenerator) -> Optional[CategoricalDistribution]:
        return self.independent.get(fixture_key(gen))

    def grouped_for(self, gen: AttributeGenerator) -> Optional[GroupedDistributionSet]:
        return self.grouped.get(str(gen.fixture))

    def country(self, nationality: str) -> Optional[str]:
        return self.country_of.get(nationality)

    def given_names_for(self, nationality: str, gender: str) -> Optional[CategoricalDistribution]:
        g = gender_token(gender)
        return self.given_names.get((nationality_token(nationality), g)) or self.given_names.get(
            (DEFAULT_NATIONALITY, g)
        )

    def family_names_for(self, nationality: str) -> Optional[CategoricalDistribution]:
        return self.family_names.get(nationality_token(nationality)) or self.family_names.get(DEFAULT_NATIONALITY)
