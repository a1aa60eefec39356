import math
from fractions import Fraction

import pandas as pd
import pytest

from app.errors import EmptyHistogram, InvalidInvocation, UnknownColumn, UnparsableAge
from app.logic.catalog import PERSON_CENSUS
from app.logic.engine import generate_dataset
from app.logic.fidelity import Histogram
from app.logic.weights import ALL_BUCKETS, age_bucket
from app.services.export import CsvLayout, export_csv
from app.services.report import (
    GroupBy,
    Grouping,
    ReportSpec,
    column_fields,
    default_report_prefix,
    default_specs,
    empirical_distribution,
    fidelity_report,
    format_table,
    format_tsv,
    parse_attribute_option,
    read_dataset,
    target_distribution,
    write_report,
)

AGE, GENDER = PERSON_CENSUS["age"], PERSON_CENSUS["gender"]


@pytest.fixture(scope="module")
def generated_csv(person_plan, plan_fixtures, person_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("report") / "people.csv"
    layout = CsvLayout.bind(path, person_model.consumer.columns, person_plan.attribute_names)
    export_csv(generate_dataset(person_plan, 5000, 42, plan_fixtures), layout)
    return path


def _frame(**cols):
    return pd.DataFrame({k: [str(v) for v in vals] for k, vals in cols.items()})


def test_empirical_ungrouped():
    df = _frame(Gender=["female", "male", "female"])
    hist = empirical_distribution(df, "gender")
    assert hist.counts == {"female": 2, "male": 1}
    assert hist.n == 3


def test_empirical_grouped_by_age_bucket():
    df = _frame(Age=[18, 19, 47, 84], MaritalStatus=["Single", "Single", "Divorced", "Widowed"])
    groups = empirical_distribution(df, "MaritalStatus", GroupBy("Age", "age_bucket"))
    assert list(groups) == ["15-19", "45-49", "80-84"]
    assert groups["15-19"].counts == {"Single": 2}


def test_empirical_grouped_by_gender_and_age():
    df = _frame(Gender=["female", "male", "female"], Age=[30, 30, 31], X=["a", "b", "c"])
    groups = empirical_distribution(df, "X", [GroupBy("Gender", "gender"), GroupBy("Age", "age_bucket")])
    assert set(groups) == {"Female_30-34", "Male_30-34"}
    assert groups["Female_30-34"].n == 2


def test_unknown_column():
    with pytest.raises(UnknownColumn):
        empirical_distribution(_frame(Gender=["female"]), "Height")


@pytest.mark.parametrize("value", ["abc", "30.5", "14", "", "--5", "²", "-"])
def test_unparsable_age(value):
    df = _frame(Age=["30", value], X=["a", "b"])
    with pytest.raises(UnparsableAge) as exc:
        empirical_distribution(df, "X", GroupBy("Age", "age_bucket"))
    assert exc.value.line == 3


def test_read_empty_file(write_file):
    with pytest.raises(EmptyHistogram):
        read_dataset(write_file("empty.csv", ""))


def test_header_only_dataset(write_file, catalog_fixtures):
    path = write_file("header.csv", "Gender,Age\n")
    specs = [ReportSpec("Gender", GENDER)]
    with pytest.raises(EmptyHistogram):
        fidelity_report(path, catalog_fixtures, specs, PERSON_CENSUS)


def test_ungrouped_age_keyed_target_is_exact_mixture(catalog_fixtures):
    marital = PERSON_CENSUS["maritalStatus"]
    target = target_distribution(catalog_fixtures, marital, Grouping.NONE, None, AGE, GENDER)
    ages = catalog_fixtures.distribution_for(AGE)
    grouped = catalog_fixtures.grouped_for(marital)
    bucket_w = {b.label: 0 for b in ALL_BUCKETS}
    for age, w in zip(ages.categories, ages.weights):
        bucket_w[age_bucket(int(age)).label] += w
    expected = sum(
        Fraction(bucket_w[b], ages.total_weight) * grouped.groups[b].probability("Widowed") for b in bucket_w
    )
    assert target.probability("Widowed") == expected


def test_age_grouping_of_gender_keyed_field_mixes_genders(catalog_fixtures):
    industry = PERSON_CENSUS["industrialGroup"]
    target = target_distribution(catalog_fixtures, industry, Grouping.AGE, "30-34", AGE, GENDER)
    genders = catalog_fixtures.distribution_for(GENDER)
    grouped = catalog_fixtures.grouped_for(industry)
    p_female = genders.probability("female")
    cat = "Construction (F)"
    expected = p_female * grouped.groups["Female_30-34"].probability(cat) + (1 - p_female) * grouped.groups[
        "Male_30-34"
    ].probability(cat)
    assert target.probability(cat) == expected


def test_group_target_is_the_table_itself(catalog_fixtures):
    marital = PERSON_CENSUS["maritalStatus"]
    target = target_distribution(catalog_fixtures, marital, Grouping.AGE, "15-19", AGE, GENDER)
    assert target.total_weight == 283019


def test_report_on_generated_data(generated_csv, catalog_fixtures, person_model):
    df = read_dataset(generated_csv)
    specs = default_specs(column_fields(list(df.columns), PERSON_CENSUS, person_model))
    assert {(s.column, s.grouping) for s in specs} == {
        ("NativeCountry", Grouping.NONE),
        ("Gender", Grouping.NONE),
        ("Age", Grouping.NONE),
        ("MaritalStatus", Grouping.AGE),
        ("EconomicStatus", Grouping.AGE),
    }
    report = fidelity_report(df, catalog_fixtures, specs, PERSON_CENSUS, source=str(generated_csv))
    assert report.dataset == str(generated_csv)
    for e in report.entries:
        assert e.unexpected_categories == ()
        assert e.status in ("pass", "fail", "excluded")
        assert 0.0 <= e.tv <= 1.0
    marital = [e for e in report.entries if e.attribute == "MaritalStatus"]
    assert sum(e.n for e in marital) == 5000
    assert [e.group for e in marital] == sorted((e.group for e in marital), key=lambda g: int(g.split("-")[0]))
    small = [e for e in marital if e.n < 500]
    assert all(e.status == "excluded" for e in small)


def test_corrupted_group_fails(catalog_fixtures):
    df = _frame(Age=[18] * 1000, MaritalStatus=["Widowed"] * 1000)
    spec = ReportSpec("MaritalStatus", PERSON_CENSUS["maritalStatus"], Grouping.AGE)
    [entry] = fidelity_report(df, catalog_fixtures, [spec], PERSON_CENSUS).entries
    assert entry.group == "15-19"
    assert entry.status == "fail"
    assert entry.tv == pytest.approx(1 - 7 / 283019)
    assert "Single" in entry.missing_categories


def test_unexpected_category_fails_even_with_small_tv(catalog_fixtures):
    df = _frame(Gender=["female"] * 5074 + ["male"] * 4925 + ["other"])
    [entry] = fidelity_report(df, catalog_fixtures, [ReportSpec("Gender", GENDER)], PERSON_CENSUS).entries
    assert entry.unexpected_categories == ("other",)
    assert entry.tv < 0.02
    assert entry.status == "fail"


def test_exact_proportions_pass(catalog_fixtures):
    df = _frame(Gender=["female"] * 5074 + ["male"] * 4926)
    report = fidelity_report(df, catalog_fixtures, [ReportSpec("Gender", GENDER)], PERSON_CENSUS)
    assert report.passed
    [entry] = report.entries
    assert (entry.n, entry.dof, entry.group) == (10000, 1, None)


def test_unknown_gender_group(catalog_fixtures):
    df = _frame(Gender=["other"] * 3, Age=[30, 31, 32], IndustrialGroup=["Construction (F)"] * 3)
    spec = ReportSpec("IndustrialGroup", PERSON_CENSUS["industrialGroup"], Grouping.AGE_GENDER)
    [entry] = fidelity_report(df, catalog_fixtures, [spec], PERSON_CENSUS).entries
    assert entry.group == "Other_30-34"
    assert entry.tv == 1.0
    assert math.isnan(entry.chi2)
    assert entry.status == "excluded"


def test_parse_attribute_option():
    fields = column_fields(["MaritalStatus", "FullName"], PERSON_CENSUS)
    spec = parse_attribute_option("maritalstatus:age_gender", fields)
    assert (spec.column, spec.grouping) == ("MaritalStatus", Grouping.AGE_GENDER)
    assert parse_attribute_option("MaritalStatus", fields).grouping is Grouping.NONE
    with pytest.raises(InvalidInvocation):
        parse_attribute_option("MaritalStatus:decade", fields)
    with pytest.raises(InvalidInvocation):
        parse_attribute_option("FullName", fields)
    with pytest.raises(UnknownColumn):
        parse_attribute_option("Height", fields)


def test_tsv_format(catalog_fixtures):
    df = _frame(Gender=["female"] * 5074 + ["male"] * 4926)
    report = fidelity_report(df, catalog_fixtures, [ReportSpec("Gender", GENDER)], PERSON_CENSUS, source="d.csv")
    lines = format_tsv(report).splitlines()
    assert lines[0].startswith("#")
    assert "tool-defined" in lines[2]
    assert lines[3] == "# attribute\tgroup\tn\ttv\tchi2\tdof\tstatus"
    fields = lines[4].split("\t")
    assert fields[:3] == ["Gender", "-", "10000"]
    assert fields[5:] == ["1", "pass"]
    assert float(fields[3]) < 0.001


def test_write_report(tmp_path, catalog_fixtures):
    df = _frame(Gender=["female"] * 60 + ["male"] * 40)
    report = fidelity_report(df, catalog_fixtures, [ReportSpec("Gender", GENDER)], PERSON_CENSUS)
    tsv, txt = write_report(report, tmp_path / "out" / "people.fidelity")
    assert tsv.name == "people.fidelity.tsv" and txt.name == "people.fidelity.txt"
    assert tsv.read_text(encoding="utf-8") == format_tsv(report)
    assert txt.read_text(encoding="utf-8") == format_table(report)
    assert "Gender" in format_table(report)


def test_default_report_prefix():
    assert default_report_prefix("out/people.csv").name == "people.fidelity"


def test_histogram_of():
    assert Histogram.of(["a", "b", "a"]) == Histogram({"a": 2, "b": 1}, 3)
