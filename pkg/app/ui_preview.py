import streamlit as st

from app.config import parse_seed
from app.logic.engine import generate_record
from app.services.export import CsvLayout
from app.services.workspace import get_descriptor, get_plan_fixtures


def _ensure_state():
    if "preview" not in st.session_state:
        st.session_state.preview = {"seed": "0", "count": 20}


def render_preview(descriptor: str, root: str):
    _ensure_state()

    st.subheader("Предпросмотр записей")
    st.info("Записи считаются в памяти и никуда не пишутся. Для выгрузки используйте `census-synth generate`.")

    model, plan = get_descriptor(descriptor)
    fixtures = get_plan_fixtures(root, descriptor)

    left, right = st.columns([3, 9], gap="large")

    # -------- ЛЕВО --------
    with left:
        st.markdown("### Порядок генерации")
        for i, gen in enumerate(plan.generators, start=1):
            st.write(f"{i}. `{gen.node_id}` · {gen.kind.value}")

        st.markdown("---")
        seed_text = st.text_input("Seed", value=st.session_state.preview["seed"])
        count = st.number_input("Записей", 1, 500, int(st.session_state.preview["count"]))
        try:
            seed = parse_seed(seed_text)
        except ValueError as e:
            st.error(str(e))
            return
        st.session_state.preview = {"seed": seed_text, "count": int(count)}

    # -------- ПРАВО --------
    with right:
        st.markdown(f"### {model.entity_type}")
        rows = [generate_record(plan, i, seed, fixtures) for i in range(int(count))]
        layout = CsvLayout.bind(model.consumer.uri, model.consumer.columns, plan.attribute_names)
        st.dataframe(
            [{col: rec[attr] for col, attr in layout.binding} for rec in rows],
            use_container_width=True,
            hide_index=True,
        )
        st.caption(f"seed={seed} · индексы 0..{int(count) - 1} совпадают с первыми строками CSV с тем же seed.")
