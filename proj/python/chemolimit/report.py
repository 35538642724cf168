"""Reader for the rate-report CSV written by `chemo_limit pes-rates` / `ids-rates`."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

HEADER = ["abscissa", "metric", "value", "slope_group"]
SLOPE_MARKER = "# slopes:"
SLOPE_HEADER = ["metric", "slope", "stderr", "npoints"]


@dataclass
class Report:
    rows: list[tuple[float, str, float, str]] = field(default_factory=list)
    slopes: dict[str, tuple[float, float, int]] = field(default_factory=dict)

    def series(self, metric: str) -> tuple[list[float], list[float]]:
        """Abscissae and values of one metric, in file order (abscissa descending)."""
        xs = [r[0] for r in self.rows if r[1] == metric]
        vs = [r[2] for r in self.rows if r[1] == metric]
        return xs, vs

    def metrics(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r[1], None)
        return list(seen)


def parse_report(text: str) -> Report:
    """Parse report text; raises ValueError when it deviates from the schema."""
    lines = text.split("\n")
    if not lines or next(csv.reader([lines[0]])) != HEADER:
        raise ValueError(f"header must be {','.join(HEADER)!r}")
    report = Report()
    body, slopes = lines[1:], []
    if SLOPE_MARKER in body:
        at = body.index(SLOPE_MARKER)
        body, slopes = body[:at], body[at + 1 :]
        if not slopes or next(csv.reader([slopes[0]])) != SLOPE_HEADER:
            raise ValueError("slope block header must be " + ",".join(SLOPE_HEADER))
        slopes = slopes[1:]
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(body))), start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(row)}")
        report.rows.append((float(row[0]), row[1], float(row[2]), row[3]))
    for row in csv.reader(io.StringIO("\n".join(slopes))):
        if not row:
            continue
        if len(row) != 4:
            raise ValueError(f"slope row: expected 4 fields, got {len(row)}")
        report.slopes[row[0]] = (float(row[1]), float(row[2]), int(row[3]))
    return report


def read_report(path: str | Path) -> Report:
    return parse_report(Path(path).read_text(encoding="utf-8"))
