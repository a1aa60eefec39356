from pathlib import Path
from typing import List, Optional, Tuple

import streamlit as st

from app.errors import CensusSynthError
from app.logic.catalog import PERSON_CENSUS
from app.logic.fixture_set import FixtureSet
from app.logic.plan import GenerationPlan, build_plan
from app.logic.schema import DescriptorModel, parse_descriptor
from app.services.fixtures import TableSummary, load_fixtures, load_plan_fixtures, resolve_fixture_dir, summarize_tables


def _fail(e: CensusSynthError):
    st.error(f"❌ {e}")
    st.stop()


@st.cache_resource
def get_descriptor(path: str) -> Tuple[DescriptorModel, GenerationPlan]:
    try:
        model = parse_descriptor(Path(path).read_bytes(), source=path)
        return model, build_plan(model)
    except OSError as e:
        st.error(f"❌ Не удалось прочитать дескриптор {path}: {e}")
        st.stop()
    except CensusSynthError as e:
        _fail(e)


@st.cache_resource
def get_plan_fixtures(root: str, descriptor: str) -> FixtureSet:
    model, plan = get_descriptor(descriptor)
    region = next((v.dataset_region for v in model.variables if v.dataset_region), model.dataset_region)
    try:
        return load_plan_fixtures(resolve_fixture_dir(root, region), plan)
    except CensusSynthError as e:
        _fail(e)


@st.cache_resource
def get_catalog_fixtures(root: str, region: str = "") -> FixtureSet:
    """Every table the person catalog can draw from."""
    try:
        return load_fixtures(resolve_fixture_dir(root, region), PERSON_CENSUS.values())
    except CensusSynthError as e:
        _fail(e)


@st.cache_data
def get_summaries(directory: str) -> Optional[List[TableSummary]]:
    try:
        return summarize_tables(directory)
    except CensusSynthError as e:
        _fail(e)
