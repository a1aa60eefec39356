from typing import Tuple

from app.config import FidelityTolerances

PASS = "pass"
FAIL = "fail"
EXCLUDED = "excluded"

_ICONS = {PASS: "🔵", FAIL: "🔴", EXCLUDED: "⚪"}


def entry_status(tv: float, n: int, grouped: bool, clean: bool, tol: FidelityTolerances) -> Tuple[str, float]:
    """(status, tolerance applied). Small groups are reported but never judged."""
    limit = tol.grouped_tv if grouped else tol.independent_tv
    if grouped and n < tol.min_group_n:
        return EXCLUDED, limit
    if clean and tv < limit:
        return PASS, limit
    return FAIL, limit


def status_icon(status: str) -> str:
    return _ICONS.get(status, "❔")
