from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator, model_validator

from app.errors import InvalidInvocation

SEED_MAX = (1 << 64) - 1


class Subcommand(str, Enum):
    GENERATE = "generate"
    VALIDATE = "validate"
    REPORT = "report"
    INSPECT = "inspect"


class FidelityTolerances(BaseModel):
    """Pass/fail thresholds. They come from the sqrt(k/n) sampling-noise scale, not from census data."""

    model_config = ConfigDict(frozen=True)

    independent_tv: float = Field(0.02, gt=0, le=1)
    grouped_tv: float = Field(0.05, gt=0, le=1)
    min_group_n: int = Field(500, ge=0)
    min_expected: float = Field(5.0, gt=0)


def parse_seed(value) -> int:
    """Decimal or 0x-hex, 0 <= seed < 2**64."""
    if isinstance(value, int):
        seed = value
    else:
        text = str(value).strip().lower()
        try:
            seed = int(text[2:], 16) if text.startswith("0x") else int(text, 10)
        except ValueError:
            raise ValueError(f"seed {value!r} is not a decimal or 0x-hex integer") from None
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed {value!r} does not fit in 64 bits")
    return seed


class CliInvocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    descriptor_path: Optional[Path] = None
    fixtures_dir: Optional[Path] = None
    seed: int = 0
    count_override: Optional[PositiveInt] = None
    output_override: Optional[Path] = None
    threads: PositiveInt = 1
    report_out: Optional[Path] = None
    attributes: Tuple[str, ...] = ()

    @field_validator("seed", mode="before")
    @classmethod
    def _seed(cls, v):
        return parse_seed(v)

    @model_validator(mode="after")
    def _required(self):
        sub = self.subcommand
        if self.fixtures_dir is None:
            raise ValueError(f"{sub.value} needs --fixtures")
        if sub in (Subcommand.GENERATE, Subcommand.VALIDATE) and self.descriptor_path is None:
            raise ValueError(f"{sub.value} needs --descriptor")
        if sub is Subcommand.REPORT and self.descriptor_path is None and self.output_override is None:
            raise ValueError("report needs --descriptor or --output (the dataset to check)")
        return self


def make_invocation(**kwargs) -> CliInvocation:
    try:
        return CliInvocation(**kwargs)
    except ValidationError as e:
        msgs = "; ".join(err["msg"].removeprefix("Value error, ") for err in e.errors())
        raise InvalidInvocation(msgs) from e
