import io
import json
import math

import pandas as pd
import pytest

from src.numtheory.constants import CENSUS_COLUMNS, ORDER_COLUMNS
from src.sweeps.reports import (
    build_frame,
    fingerprint_report,
    render,
    to_significant,
    write_report,
)


@pytest.fixture
def order_rows():
    return [
        {"p": 7, "u": "2", "ord": 3, "index": 2},
        {"p": 11, "u": "1/2", "ord": 10, "index": 1},
    ]


class TestBuildFrame:
    def test_columns_in_schema_order(self, order_rows):
        shuffled = [{k: r[k] for k in reversed(ORDER_COLUMNS)} for r in order_rows]
        report = build_frame(shuffled, ORDER_COLUMNS)
        assert list(report.df.columns) == ORDER_COLUMNS
        assert report.warnings == []

    def test_missing_column(self, order_rows):
        rows = [{k: v for k, v in r.items() if k != "ord"} for r in order_rows]
        with pytest.raises(ValueError, match="ord"):
            build_frame(rows, ORDER_COLUMNS)

    def test_extra_column_dropped_with_warning(self, order_rows):
        rows = [dict(r, note="x") for r in order_rows]
        report = build_frame(rows, ORDER_COLUMNS)
        assert "note" not in report.df.columns
        assert len(report.warnings) == 1

    def test_empty_rows_keep_header(self):
        report = build_frame([], ORDER_COLUMNS)
        assert render(report, "csv") == "p,u,ord,index\n"

    def test_bool_columns(self):
        report = build_frame([{"a": 1}, {"a": 0}], ["a"], bool_columns=["a"])
        assert report.df["a"].tolist() == [True, False]


class TestRounding:
    def test_significant_digits(self):
        assert to_significant(1 / 3) == 0.333333333333
        assert to_significant(123456789.123456789) == 123456789.123
        assert math.isinf(to_significant(math.inf))

    def test_csv_and_json_carry_same_values(self):
        row = {c: 0 for c in CENSUS_COLUMNS}
        row.update({"specs": "3:1;2:2", "M": 2 / 3, "e3_abs": 1e-17, "lower_bound": math.pi, "ratio": 12.5})
        report = build_frame([row], CENSUS_COLUMNS)
        from_json = json.loads(render(report, "json"))[0]
        from_csv = pd.read_csv(io.StringIO(render(report, "csv"))).to_dict(orient="records")[0]
        for key in ("M", "e3_abs", "lower_bound", "ratio"):
            assert from_json[key] == from_csv[key]
        assert from_json["M"] == 0.666666666667


class TestRender:
    def test_csv(self, order_rows):
        assert render(build_frame(order_rows, ORDER_COLUMNS), "csv") == "p,u,ord,index\n7,2,3,2\n11,1/2,10,1\n"

    def test_json(self, order_rows):
        data = json.loads(render(build_frame(order_rows, ORDER_COLUMNS), "json"))
        assert data == [
            {"p": 7, "u": "2", "ord": 3, "index": 2},
            {"p": 11, "u": "1/2", "ord": 10, "index": 1},
        ]

    def test_missing_values_become_null(self):
        report = build_frame([{"a": 1.5}, {"a": None}], ["a"])
        assert json.loads(render(report, "json")) == [{"a": 1.5}, {"a": None}]

    def test_unknown_format(self, order_rows):
        with pytest.raises(ValueError):
            render(build_frame(order_rows, ORDER_COLUMNS), "xml")

    def test_write_to_file(self, order_rows, tmp_path):
        target = tmp_path / "nested" / "order.csv"
        write_report(build_frame(order_rows, ORDER_COLUMNS), "csv", target)
        assert target.read_text(encoding="utf-8").startswith("p,u,ord,index\n")

    def test_write_logs_dropped_columns(self, order_rows, caplog, capsys):
        rows = [dict(order_rows[0], note="scratch")]
        with caplog.at_level("WARNING", logger="src.sweeps.reports"):
            write_report(build_frame(rows, ORDER_COLUMNS), "csv", "-")
        assert "note" in caplog.text
        assert "note" not in capsys.readouterr().out

    def test_write_to_stdout(self, order_rows, capsys):
        write_report(build_frame(order_rows, ORDER_COLUMNS), "csv", "-")
        assert capsys.readouterr().out.startswith("p,u,ord,index\n")

    def test_fingerprint_is_stable(self, order_rows):
        a = fingerprint_report(build_frame(order_rows, ORDER_COLUMNS))
        b = fingerprint_report(build_frame(list(order_rows), ORDER_COLUMNS))
        assert a == b
        assert len(a) == 64
        assert a != fingerprint_report(build_frame(order_rows[:1], ORDER_COLUMNS))
