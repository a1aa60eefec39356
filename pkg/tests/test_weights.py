import random
from fractions import Fraction

import pytest

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
    WeightTableError,
)
from app.logic.weights import (
    ALL_BUCKETS,
    AgeBucket,
    GroupKeyKind,
    age_bucket,
    build_distribution,
    distribution_from_weights,
    gender_token,
    group_label,
    group_labels,
    parse_weight_table,
)
from tests.conftest import IE_DIR

MARITAL_15_19 = """Single,282106
Married (first marriage),836
Re-married (following widowhood),4
Re-married (following dissolution of previous marriage),3
Separated (including deserted),55
Divorced,8
Widowed,7
"""

MARITAL_80_84 = [11898, 25133, 565, 209, 699, 308, 31301]


def test_listing_totals():
    table = parse_weight_table(MARITAL_15_19)
    assert table.total_weight == 282106 + 836 + 4 + 3 + 55 + 8 + 7 == 283019
    assert table.categories[0] == "Single"


def test_bundled_listing_totals():
    t15 = parse_weight_table((IE_DIR / "MaritalStatusQty15-19.csv").read_text(encoding="utf-8"))
    t80 = parse_weight_table((IE_DIR / "MaritalStatusQty80-84.csv").read_text(encoding="utf-8"))
    assert t15.total_weight == 283019
    assert t80.total_weight == sum(MARITAL_80_84) == 70113


def test_nationality_listing_rows():
    table = parse_weight_table((IE_DIR / "Nationality.csv").read_text(encoding="utf-8"))
    weights = dict(table.entries)
    assert weights["Irish"] == 969087
    assert weights["New Zealander"] == 914
    assert weights["Cypriot"] == 53


def test_quoted_and_unquoted_commas_in_category():
    table = parse_weight_table('"Arts, entertainment and recreation (R)",12\nMotor vehicles, ships and aircraft,3\n')
    assert table.categories == ("Arts, entertainment and recreation (R)", "Motor vehicles, ships and aircraft")


def test_bom_blank_lines_and_crlf():
    table = parse_weight_table("\ufefffemale,10\r\n\r\nmale,12\r\n")
    assert table.entries == (("female", 10), ("male", 12))


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("Single,abc\n", NonIntegerWeight, 1),
        ("Single,1\nMarried,2.5\n", NonIntegerWeight, 2),
        ("Single,-3\n", NegativeWeight, 1),
        ("Single,1\n,4\n", MissingCategory, 2),
        ("Single\n", NonIntegerWeight, 1),
        ("Single,1\nSingle,2\n", DuplicateCategory, 2),
        ("Single,٣\n", NonIntegerWeight, 1),
    ],
)
def test_row_errors_carry_line(text, error, line):
    with pytest.raises(error) as exc:
        parse_weight_table(text, source="t.csv")
    assert exc.value.line == line
    assert str(exc.value).startswith(f"t.csv:{line}:")


def test_empty_table():
    with pytest.raises(EmptyTable):
        parse_weight_table("\n\n")


def test_all_zero():
    with pytest.raises(AllWeightsZero):
        parse_weight_table("a,0\nb,0\n")


def test_malformed_row():
    with pytest.raises(MalformedRow):
        parse_weight_table("a" * 200_000 + ",1\n", source="t.csv")


def test_zero_weights_are_dropped_but_remembered():
    dist = build_distribution(parse_weight_table("Employee,5\nRetired,0\nStudent or pupil,3\n"))
    assert dist.categories == ("Employee", "Student or pupil")
    assert dist.cumulative == (5, 8)
    assert dist.dropped == ("Retired",)
    assert dist.as_dict() == {"Employee": 5, "Student or pupil": 3, "Retired": 0}
    assert dist.probability("Retired") == 0
    assert dist.probability("Employee") == Fraction(5, 8)


def test_top():
    dist = distribution_from_weights({"a": 1, "b": 7, "c": 3, "d": 5})
    assert dist.top(3) == [("b", 7), ("d", 5), ("c", 3)]


def test_overflow():
    with pytest.raises(WeightOverflow):
        distribution_from_weights({"a": 1 << 63, "b": 1 << 63})
    assert distribution_from_weights({"a": 1 << 63, "b": 1 << 63}, limit_64bit=False).total_weight == 1 << 64


@pytest.mark.parametrize(
    "age, label",
    [(15, "15-19"), (17, "15-19"), (19, "15-19"), (20, "20-24"), (47, "45-49"), (84, "80-84")],
)
def test_age_bucket(age, label):
    assert age_bucket(age).label == label


@pytest.mark.parametrize("age", [14, 85, -1])
def test_age_bucket_out_of_range(age):
    with pytest.raises(AgeOutOfRange):
        age_bucket(age)


def test_bucket_validation():
    with pytest.raises(AgeOutOfRange):
        AgeBucket(16, 20)
    assert len(ALL_BUCKETS) == 14
    assert ALL_BUCKETS[0] < ALL_BUCKETS[-1]


def test_group_labels():
    assert gender_token("female") == "Female"
    assert group_label(AgeBucket(45, 49), "male") == "Male_45-49"
    assert len(group_labels(GroupKeyKind.AGE_BUCKET)) == 14
    assert len(group_labels(GroupKeyKind.AGE_BUCKET_AND_GENDER)) == 28


def _random_table(rng):
    rows = []
    for _ in range(rng.randint(0, 5)):
        row = [rng.choice(["Irish", "New Zealand", '"Arts, (R)"', ""]), rng.choice(["0", "7", "12"])]
        if rng.random() < 0.3:
            row[rng.randrange(2)] = rng.choice(["-3", "\u00b2", "x", '"', " ", "1.5", "Irish,2"])
        rows.append(",".join(row))
    bom = "\ufeff" if rng.random() < 0.1 else ""
    return bom + rng.choice(["\n", "\r\n"]).join(rows) + rng.choice(["", "\n"])


def test_random_text_parses_or_raises_table_error():
    rng = random.Random(20130901)
    parsed = 0
    for _ in range(5000):
        text = _random_table(rng)
        try:
            table = parse_weight_table(text, source="fuzz.csv")
        except WeightTableError as e:
            assert e.source == "fuzz.csv"
            continue
        parsed += 1
        categories = [c for c, _ in table.entries]
        assert len(categories) == len(set(categories))
        assert all(c and w >= 0 for c, w in table.entries)
        assert table.total_weight > 0
    assert parsed > 0
