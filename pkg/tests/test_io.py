import json
import math

import numpy as np
import pytest

from hombeat.estimation import CountRecord
from hombeat.fringe import FringeScan
from hombeat.io import (
    ParseError,
    fmt,
    format_scan,
    parse_counts,
    parse_scan,
    read_table,
    render_report,
    render_table,
)

SCAN_TEXT = """# synthetic
tau_ps,coincidences,trials
-0.1,400,1000
0.0,900,1000

0.1,450,1000
"""


class TestScan:
    def test_parse(self):
        scan = parse_scan(SCAN_TEXT)
        np.testing.assert_array_equal(scan.tau, [-0.1, 0.0, 0.1])
        np.testing.assert_array_equal(scan.coincidences, [400, 900, 450])

    def test_round_trip(self):
        scan = FringeScan(np.array([-0.3, 1e-17, 0.123456789012345]), np.array([1, 2, 3]), np.array([5, 5, 5]))
        back = parse_scan(format_scan(scan))
        np.testing.assert_array_equal(back.tau, scan.tau)

    @pytest.mark.parametrize(
        "text,line",
        [
            ("tau,k,n\n0,1,2\n", 1),
            ("tau_ps,coincidences,trials\n0,1\n", 2),
            ("tau_ps,coincidences,trials\n0,1,2\nx,1,2\n", 3),
            ("tau_ps,coincidences,trials\n0,3,2\n", 2),
            ("tau_ps,coincidences,trials\n0,1.5,2\n", 2),
            ("tau_ps,coincidences,trials\n0.1,1,2\n0.1,1,2\n", 3),
        ],
    )
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError, match=f"<scan>:{line}:"):
            parse_scan(text)

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_scan("tau_ps,coincidences,trials\n")


class TestCounts:
    def test_parse(self):
        assert parse_counts("# counts\n0,5000,5000\n") == CountRecord(0, 5000, 5000)

    @pytest.mark.parametrize(
        "text,line", [("1,2\n", 1), ("\n1,2,x\n", 2), ("1,2,3\n4,5,6\n", 2), ("-1,2,3\n", 1)]
    )
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError, match=f"counts.csv:{line}:"):
            parse_counts(text, "counts.csv")


class TestTables:
    def test_fmt(self):
        assert fmt(None) == "" and fmt(math.nan) == ""
        assert fmt(True) == "true" and fmt(np.int64(3)) == "3"
        assert float(fmt(0.1 + 0.2)) == 0.1 + 0.2

    def test_csv_round_trip(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-9, 9, size=(50, 3))
        text = render_table({"seed": 1}, ["a_ps", "b", "c"], data.tolist())
        cols, rows = read_table(text)
        assert cols == ["a_ps", "b", "c"]
        np.testing.assert_allclose(rows, data, rtol=1e-12, atol=0)

    def test_holes_are_empty(self):
        text = render_table({}, ["x", "y"], [(1.0, math.nan), (2.0, 3.0)])
        assert "1.0,\n" in text
        assert math.isnan(read_table(text)[1][0, 1])

    def test_metadata(self):
        text = render_table({"hombeat": "0.1.0", "config": {"a": {"b": 1}}}, ["x"], [(1.0,)])
        assert text.startswith("# hombeat: 0.1.0\n# config: {\"a\": {\"b\": 1}}\n")

    def test_json_mirror(self):
        doc = json.loads(render_table({"k": 1}, ["x", "y"], [(1.0, math.nan)], as_json=True))
        assert doc == {"meta": {"k": 1}, "columns": ["x", "y"], "rows": [[1.0, None]]}

    def test_report(self):
        text = render_report({}, [("a", 1.5), ("b", None)])
        assert text == "quantity,value\na,1.5\nb,\n"
        assert json.loads(render_report({}, [("a", 1.5)], as_json=True))["report"] == {"a": 1.5}
