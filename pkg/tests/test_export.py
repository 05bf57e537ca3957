"""Tests for marginsim._export."""

from __future__ import annotations

import io
import json
from fractions import Fraction

from marginsim._export import (
    HISTOGRAM_COLUMNS,
    exact_value,
    format_cell,
    histogram_rows,
    type_table_rows,
    write_csv,
    write_json,
    write_jsonl,
)
from marginsim.models import (
    ProbEstimate,
    SizeHistogram,
    TypeProbRow,
    TypeProbTable,
    VotingMethod,
)
from marginsim.tournaments import enumerate_types


class TestFormatCell:
    def test_float_round_trips(self) -> None:
        for value in (0.1, 1 / 3, 0.0438701, 1e-12):
            assert float(format_cell(value)) == value

    def test_other_types(self) -> None:
        assert format_cell(Fraction(17, 18)) == "17/18"
        assert format_cell(True) == "true"
        assert format_cell(None) == ""
        assert format_cell((4, 2, 2, 2, 0)) == "4 2 2 2 0"
        assert format_cell(12) == "12"

    def test_exact_value(self) -> None:
        assert exact_value(Fraction(1, 4)) == {"exact": "1/4", "value": 0.25}


class TestWriters:
    def test_csv(self) -> None:
        buf = io.StringIO()
        write_csv(buf, ("a", "b"), [{"a": 1, "b": 0.5}, {"a": 2}], {"seed": 42})
        assert buf.getvalue() == "# seed: 42\na,b\n1,0.5\n2,\n"

    def test_json(self) -> None:
        buf = io.StringIO()
        write_json(buf, {"p": Fraction(1, 3), "rows": [1, 2]}, {"seed": 1})
        doc = json.loads(buf.getvalue())
        assert doc["metadata"] == {"seed": 1}
        assert doc["p"]["exact"] == "1/3"
        assert doc["rows"] == [1, 2]

    def test_jsonl(self) -> None:
        buf = io.StringIO()
        count = write_jsonl(buf, iter([{"x": 1}, {"x": 2}]), {"seed": 3})
        lines = buf.getvalue().splitlines()
        assert count == 2
        assert json.loads(lines[0]) == {"metadata": {"seed": 3}}
        assert [json.loads(line)["x"] for line in lines[1:]] == [1, 2]


class TestRows:
    def test_type_table_rows(self) -> None:
        est = ProbEstimate.from_counts(6, 10, seed=0)
        rows = [
            TypeProbRow(
                type_id=f"T{i + 1}", tournament_type=tt, labeled_prob=est, type_prob=est
            )
            for i, tt in enumerate(enumerate_types(3))
        ]
        out = type_table_rows(TypeProbTable(ell=3, rows=rows))
        assert [r["type_id"] for r in out] == ["T1", "T2"]
        assert out[1]["score_sequence"] == (1, 1, 1)
        assert out[1]["num_labelings"] == 2

    def test_histogram_rows(self) -> None:
        hist = SizeHistogram(
            method=VotingMethod.MINIMAX, ell=5, counts={1: 7, 2: 2, 3: 1},
            samples=10, seed=0,
        )
        rows = histogram_rows(hist)
        assert set(rows[0]) == set(HISTOGRAM_COLUMNS)
        assert [r["set_size"] for r in rows] == [1, 2, 3, "multiple_winners"]
        assert rows[-1]["count"] == 3
        assert rows[-1]["fraction"] == 0.3
