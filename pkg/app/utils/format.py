from fractions import Fraction
from typing import Union


def fmt_count(v: int) -> str:
    return f"{v:,}".replace(",", " ")


def fmt_share(part: int, total: int) -> str:
    if total <= 0:
        return "—"
    return f"{float(Fraction(part, total)) * 100:.2f}%"


def fmt_tv(v: Union[float, None]) -> str:
    return "—" if v is None else f"{v:.4f}"
