import math
from pathlib import Path

import streamlit as st

from app.config import FidelityTolerances
from app.errors import CensusSynthError
from app.logic.catalog import PERSON_CENSUS
from app.logic.thresholds import status_icon
from app.services.report import column_fields, default_specs, fidelity_report, read_dataset
from app.services.workspace import get_catalog_fixtures
from app.utils.format import fmt_count, fmt_tv


def render_reports(root: str, region: str, dataset: str):
    st.subheader("Сверка с таблицами весов")

    if not dataset or not Path(dataset).is_file():
        st.info("Укажите путь к сгенерированному CSV в сайдбаре.")
        return

    fixtures = get_catalog_fixtures(root, region)
    tol = FidelityTolerances()
    try:
        df = read_dataset(dataset)
        specs = default_specs(column_fields(list(df.columns), PERSON_CENSUS))
        report = fidelity_report(df, fixtures, specs, PERSON_CENSUS, tol, source=dataset)
    except CensusSynthError as e:
        st.error(f"❌ {e}")
        return

    st.caption(
        f"Пороги заданы инструментом, а не переписью: TV < {tol.independent_tv} без групп, "
        f"< {tol.grouped_tv} по группам; группы с n < {tol.min_group_n} не оцениваются."
    )

    col1, col2 = st.columns(2)
    with col1:
        st.caption("Без групп:")
        rows = []
        for e in report.entries:
            if e.group is None:
                rows.append({"Атрибут": e.attribute, "n": fmt_count(e.n), "TV": fmt_tv(e.tv), "Статус": status_icon(e.status)})
        st.dataframe(rows, use_container_width=True, hide_index=True)

    with col2:
        st.caption("Проблемные группы (🔴):")
        bad = [e for e in report.entries if e.status == "fail"]
        if not bad:
            st.success("Все оцениваемые записи в пределах порога.")
        else:
            for e in bad:
                extra = f", неожиданные: {', '.join(e.unexpected_categories)}" if e.unexpected_categories else ""
                st.write(f"• {status_icon(e.status)} {e.attribute} [{e.group or '-'}] TV={fmt_tv(e.tv)} (n={e.n}){extra}")

    with st.expander("Все записи"):
        st.dataframe(
            [
                {
                    "Атрибут": e.attribute,
                    "Группа": e.group or "-",
                    "n": e.n,
                    "TV": fmt_tv(e.tv),
                    "χ²": "—" if math.isnan(e.chi2) else round(e.chi2, 2),
                    "dof": e.dof,
                    "Статус": f"{status_icon(e.status)} {e.status}",
                }
                for e in report.entries
            ],
            use_container_width=True,
            hide_index=True,
        )
