import csv
import os
from contextlib import suppress
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Tuple, Union

from app.errors import IoFailure, UnboundColumn
from app.utils.log import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class CsvLayout:
    path: Path
    columns: Tuple[str, ...]
    # column -> attribute name, same order as columns
    binding: Tuple[Tuple[str, str], ...]

    @classmethod
    def bind(cls, path: Union[str, Path], columns: Sequence[str], attributes: Sequence[str]) -> "CsvLayout":
        """Resolve each column to exactly one attribute, case-insensitively."""
        binding = []
        for col in columns:
            key = col.strip().lower()
            hits = [a for a in attributes if a.lower() == key]
            if len(hits) != 1:
                what = "no attribute" if not hits else f"several attributes ({', '.join(hits)})"
                raise UnboundColumn(f"column {col!r} matches {what}", source=str(path))
            binding.append((col, hits[0]))
        return cls(Path(path), tuple(columns), tuple(binding))


@dataclass(frozen=True)
class ExportSummary:
    path: Path
    rows: int


def _part_path(path: Path) -> Path:
    return path.with_name(f".{path.name}.part")


def _discard(part: Path) -> None:
    with suppress(OSError):
        part.unlink()


def export_csv(records: Iterable[Mapping[str, str]], layout: CsvLayout) -> ExportSummary:
    """Header row verbatim, then one row per record; LF endings, minimal quoting, UTF-8.

    Rows go to a sibling `.part` file that replaces the target only once every record
    is written, so a failed run leaves any earlier output untouched.
    """
    attrs = [attr for _, attr in layout.binding]
    part = _part_path(layout.path)
    rows = 0
    try:
        layout.path.parent.mkdir(parents=True, exist_ok=True)
        with open(part, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
            writer.writerow(layout.columns)
            for rec in records:
                writer.writerow([rec[a] for a in attrs])
                rows += 1
        os.replace(part, layout.path)
    except OSError as e:
        _discard(part)
        raise IoFailure(f"cannot write output: {e.strerror or e}", source=str(layout.path)) from e
    except BaseException:
        _discard(part)
        raise
    logger.debug("export done path=%s rows=%d", layout.path, rows)
    return ExportSummary(layout.path, rows)

