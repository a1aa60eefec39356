from pathlib import Path

import streamlit as st

from app.services.fixtures import load_distribution
from app.services.workspace import get_summaries
from app.utils.format import fmt_count, fmt_share


def render_fixtures(root: str):
    st.subheader("Таблицы весов")

    summaries = get_summaries(root)
    rows = []
    for s in summaries:
        rows.append({
            "Таблица": s.name,
            "Категорий": s.categories,
            "Нулевых": s.zero_weight,
            "Сумма весов": fmt_count(s.total_weight),
            "Топ-3": ", ".join(f"{c} ({fmt_share(w, s.total_weight)})" for c, w in s.top),
        })
    st.dataframe(rows, use_container_width=True, hide_index=True)

    with st.expander("🔎 Таблица целиком"):
        name = st.selectbox("Таблица", options=[s.name for s in summaries])
        dist = load_distribution(Path(root) / f"{name}.csv")
        total = dist.total_weight
        st.dataframe(
            [
                {"Категория": c, "Вес": w, "Доля": fmt_share(w, total)}
                for c, w in dist.as_dict().items()
            ],
            use_container_width=True,
            hide_index=True,
        )
        if dist.dropped:
            st.caption("Нулевой вес (никогда не генерируется): " + ", ".join(dist.dropped))
