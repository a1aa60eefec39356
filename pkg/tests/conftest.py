from pathlib import Path

import pytest

from app.logic.catalog import PERSON_CENSUS
from app.logic.plan import build_plan
from app.logic.schema import parse_descriptor
from app.services.fixtures import load_fixtures, load_plan_fixtures

REPO = Path(__file__).resolve().parent.parent
DESCRIPTOR = REPO / "data" / "PersonCensusDescriptor.xml"
FIXTURES_ROOT = REPO / "data" / "fixtures"
IE_DIR = FIXTURES_ROOT / "IE"


@pytest.fixture(scope="session")
def person_model():
    return parse_descriptor(DESCRIPTOR.read_bytes(), source=str(DESCRIPTOR))


@pytest.fixture(scope="session")
def person_plan(person_model):
    return build_plan(person_model)


@pytest.fixture(scope="session")
def plan_fixtures(person_plan):
    return load_plan_fixtures(IE_DIR, person_plan)


@pytest.fixture(scope="session")
def catalog_fixtures():
    return load_fixtures(IE_DIR, PERSON_CENSUS.values())


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def descriptor_xml(attributes, count=10, generator="PersonCensusGenerator", uri="out.csv", columns=None):
    """A minimal descriptor over one `person` variable; `attributes` maps name -> script."""
    attrs = "\n".join(f'    <attribute name="{n}" script="{s}"/>' for n, s in attributes.items())
    cols = ", ".join(columns or attributes)
    return f"""<?xml version="1.0" encoding="UTF-8"?>
<setup defaultDataset="IE">
  <generate type="PersonCensus" count="{count}">
    <variable name="person" generator="{generator}"/>
{attrs}
    <consumer class="csv">
      <property name="uri" value="{uri}"/>
      <property name="columns" value="{cols}"/>
    </consumer>
  </generate>
</setup>
"""
