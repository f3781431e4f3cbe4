"""Table model and rendering (aligned text or delimiter-separated values).

Each column has a fixed format so that rendered numbers are stable:
integer percent for accuracies, three decimals for metrics, three decimals
with a ``<0.001`` floor for p-values. Rounding is half away from zero.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Sequence

MISSING = "n/a"


def _round(value: float, places: int, scale: int = 0) -> Decimal:
    # decimal from the shortest repr, so 0.285 scaled to percent rounds to 29
    d = Decimal(repr(float(value))).scaleb(scale)
    return d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def _plain(d: Decimal) -> str:
    s = format(d, "f")
    # "-0.000" would suggest a sign the value does not have
    return s[1:] if s.startswith("-") and d == 0 else s


def fmt_pct(value: float) -> str:
    """Proportion as integer percent: 0.7916 -> '79%'."""
    return _plain(_round(value, 0, scale=2)) + "%"


def fmt_metric(value: float, places: int = 3) -> str:
    return _plain(_round(value, places))


def fmt_signed(value: float, places: int = 3) -> str:
    s = fmt_metric(value, places)
    return s if s.startswith("-") else "+" + s


def fmt_pvalue(p: float) -> str:
    if p < 0.001:
        return "<0.001"
    return fmt_metric(p, 3)


def fmt_pp(delta_pp: float) -> str:
    return fmt_signed(delta_pp, 0) + "pp"


FORMATTERS = {
    "text": str,
    "int": lambda v: str(int(v)),
    "pct": fmt_pct,
    "metric": fmt_metric,
    "signed": fmt_signed,
    "p": fmt_pvalue,
    "pp": fmt_pp,
    "z": lambda v: fmt_signed(v, 2),
}


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "text"

    def __post_init__(self) -> None:
        if self.kind not in FORMATTERS:
            raise ValueError(f"unknown column kind {self.kind!r}")

    def format(self, value: Any) -> str:
        if value is None:
            return MISSING
        return FORMATTERS[self.kind](value)

    @property
    def numeric(self) -> bool:
        return self.kind != "text"


@dataclass
class ReportTable:
    title: str
    columns: Sequence[Column]
    rows: list[tuple] = field(default_factory=list)
    footnotes: list[str] = field(default_factory=list)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(tuple(values))

    @property
    def headers(self) -> list[str]:
        return [c.name for c in self.columns]

    def formatted_rows(self) -> list[list[str]]:
        return [[c.format(v) for c, v in zip(self.columns, row)] for row in self.rows]

    def render_text(self) -> str:
        body = self.formatted_rows()
        widths = [max([len(h)] + [len(r[i]) for r in body]) for i, h in enumerate(self.headers)]

        def line(cells: Sequence[str]) -> str:
            out = []
            for col, cell, w in zip(self.columns, cells, widths):
                out.append(cell.rjust(w) if col.numeric else cell.ljust(w))
            return "  ".join(out).rstrip()

        rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
        lines = [self.title, rule, line(self.headers), rule]
        lines += [line(r) for r in body]
        lines.append(rule)
        lines += self.footnotes
        return "\n".join(lines) + "\n"

    def render_dsv(self, delimiter: str = "\t") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow(self.headers)
        writer.writerows(self.formatted_rows())
        return buf.getvalue()

    def render(self, fmt: str = "text") -> str:
        if fmt == "text":
            return self.render_text()
        if fmt == "dsv":
            return self.render_dsv()
        raise ValueError(f"unknown format {fmt!r}")


def parse_dsv(text: str, delimiter: str = "\t") -> list[dict[str, str]]:
    """Read a rendered DSV table back into header-keyed rows."""
    return list(csv.DictReader(io.StringIO(text), delimiter=delimiter))


def parse_pct(cell: str) -> float:
    return float(cell.rstrip("%")) / 100.0
