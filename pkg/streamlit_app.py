import os
import sys

import streamlit as st

# корень репозитория рядом с этим файлом
HERE = os.path.dirname(os.path.abspath(__file__))
if HERE not in sys.path:
    sys.path.insert(0, HERE)

DEFAULT_DESCRIPTOR = os.path.join(HERE, "data", "PersonCensusDescriptor.xml")
DEFAULT_FIXTURES = os.path.join(HERE, "data", "fixtures")
DEFAULT_REGION = "IE"


def try_import_pages():
    try:
        from app.ui_fixtures import render_fixtures  # type: ignore
        from app.ui_preview import render_preview    # type: ignore
        from app.ui_reports import render_reports    # type: ignore
        from app.services.fixtures import resolve_fixture_dir  # type: ignore
        return render_fixtures, render_preview, render_reports, resolve_fixture_dir, None
    except ImportError as e:
        return None, None, None, None, e


# ---------- run ----------
def main():
    st.set_page_config(page_title="census-synth", layout="wide", initial_sidebar_state="expanded")
    st.title("census-synth — синтетические микроданные")

    render_fixtures, render_preview, render_reports, resolve_fixture_dir, import_err = try_import_pages()

    st.sidebar.header("Навигация")
    page = st.sidebar.radio("Раздел", ["Таблицы", "Предпросмотр", "Сверка"], index=0, label_visibility="collapsed")

    st.sidebar.markdown("---")
    descriptor = st.sidebar.text_input("Дескриптор", value=DEFAULT_DESCRIPTOR)
    root = st.sidebar.text_input("Каталог таблиц", value=DEFAULT_FIXTURES)
    region = st.sidebar.text_input("Набор данных", value=DEFAULT_REGION)
    dataset = st.sidebar.text_input("CSV для сверки", value="")

    if import_err:
        st.sidebar.error("⚠️ Не удалось импортировать модули.")
        st.sidebar.code(str(import_err))
        st.stop()

    st.divider()
    if page == "Таблицы":
        render_fixtures(str(resolve_fixture_dir(root, region)))
    elif page == "Предпросмотр":
        render_preview(descriptor, root)
    else:
        render_reports(root, region, dataset)


if __name__ == "__main__":
    main()
