"""CSV / JSON / JSONL writers with a provenance header.

Output is a pure function of its inputs: no timestamps, fixed column
order, and floats in CSV cells written with 17 significant digits.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from typing import TextIO

    from marginsim.models import SizeHistogram, TypeProbTable


def format_cell(value: Any) -> str:
    """Render one CSV cell.

    >>> format_cell(0.1)
    '0.10000000000000001'
    >>> format_cell(Fraction(1, 3))
    '1/3'
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (tuple, list)):
        return " ".join(format_cell(v) for v in value)
    if value is None:
        return ""
    return str(value)


def exact_value(value: Fraction) -> dict[str, Any]:
    """JSON form of an exact rational: ``{"exact": "1/3", "value": 0.333...}``."""
    return {"exact": format_cell(value), "value": float(value)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return exact_value(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    return value


def write_csv(
    stream: TextIO,
    columns: Sequence[str],
    rows: Iterable[Mapping[str, Any]],
    metadata: Mapping[str, Any],
) -> None:
    """Write ``# key: value`` provenance lines, a header row, then the rows."""
    for key, value in metadata.items():
        stream.write(f"# {key}: {format_cell(value)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])


def write_json(
    stream: TextIO, payload: Mapping[str, Any], metadata: Mapping[str, Any]
) -> None:
    """Write ``{"metadata": ..., **payload}`` as indented JSON."""
    document = {"metadata": dict(metadata), **_jsonable(dict(payload))}
    stream.write(json.dumps(document, ensure_ascii=False, indent=2))
    stream.write("\n")


def write_jsonl(
    stream: TextIO, records: Iterable[Mapping[str, Any]], metadata: Mapping[str, Any]
) -> int:
    """Write a metadata line followed by one compact JSON object per record.

    Returns:
        Number of records written.
    """
    stream.write(json.dumps({"metadata": dict(metadata)}) + "\n")
    count = 0
    for record in records:
        stream.write(json.dumps(_jsonable(dict(record))) + "\n")
        count += 1
    return count


# ---------------------------------------------------------------------------
# Row builders
# ---------------------------------------------------------------------------

TYPE_TABLE_COLUMNS = (
    "type_id",
    "score_sequence",
    "linearity",
    "num_labelings",
    "labeled_prob",
    "labeled_se",
    "type_prob",
    "type_se",
)

HISTOGRAM_COLUMNS = ("method", "ell", "set_size", "count", "fraction", "std_err")


def type_table_rows(table: TypeProbTable) -> list[dict[str, Any]]:
    """One row per tournament type."""
    return [
        {
            "type_id": r.type_id,
            "score_sequence": r.tournament_type.score_sequence,
            "linearity": r.tournament_type.linearity,
            "num_labelings": r.tournament_type.labelings,
            "labeled_prob": r.labeled_prob.p_hat,
            "labeled_se": r.labeled_prob.std_err,
            "type_prob": r.type_prob.p_hat,
            "type_se": r.type_prob.std_err,
        }
        for r in table.rows
    ]


def histogram_rows(hist: SizeHistogram) -> list[dict[str, Any]]:
    """One row per observed set size plus a ``multiple_winners`` summary row."""
    rows: list[dict[str, Any]] = []
    for size in sorted(hist.counts):
        est = hist.estimate(size)
        rows.append(
            {
                "method": hist.method.value,
                "ell": hist.ell,
                "set_size": size,
                "count": hist.counts[size],
                "fraction": est.p_hat,
                "std_err": est.std_err,
            }
        )
    multiple = hist.multiple_winners()
    rows.append(
        {
            "method": hist.method.value,
            "ell": hist.ell,
            "set_size": "multiple_winners",
            "count": sum(c for s, c in hist.counts.items() if s > 1),
            "fraction": multiple.p_hat,
            "std_err": multiple.std_err,
        }
    )
    return rows
