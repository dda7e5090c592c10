import csv
import math

import numpy as np
import orjson
import pytest

from logistic_harvest.errors import InvalidFormat
from logistic_harvest.format import CsvFormat, GnuplotFormat, JsonFormat, PlotFormat, get_format
from logistic_harvest.format.table import format_value, read_csv

@pytest.mark.parametrize("value, expected", [
    (None, ""),
    (True, "1"),
    (np.bool_(False), "0"),
    (3, "3"),
    (np.int64(7), "7"),
    (0.1, "0.1"),
    (np.float64(2.5), "2.5"),
    (math.nan, "nan"),
    ([1, 2.5], "1;2.5"),
    (np.array([0.5, 1.0]), "0.5;1.0"),
    ("a,b", "a;b"),
    ("neumann-state", "neumann-state"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected

def test_format_value_round_trips_floats():
    x = 1 / 3
    assert float(format_value(x)) == x

def test_csv_write(tmp_path):
    file = CsvFormat(tmp_path / "out").write("table", (["lambda", "sup"], [[0.0, 1.0], [0.5, 0.75]]))

    assert file.name == "table.csv"
    assert not list((tmp_path / "out").glob("*.temp"))
    assert file.read_text(encoding="utf-8") == "lambda,sup\n0.0,1.0\n0.5,0.75\n"

    header, rows = read_csv(file)
    assert header == ["lambda", "sup"]
    assert rows == [[0.0, 1.0], [0.5, 0.75]]

def test_csv_name_is_sanitized(tmp_path):
    file = CsvFormat(tmp_path).write("a/b:c", (["x"], [[1]]))
    assert file.parent == tmp_path
    assert file.suffix == ".csv"

def test_json_write(tmp_path):
    data = {"beta": 1.0, "residual": math.nan, "cap": math.inf, "levels": (1, 2), "ok": np.bool_(True)}
    file = JsonFormat(tmp_path).write("meta", data)

    loaded = orjson.loads(file.read_bytes())
    assert loaded == {"beta": 1.0, "residual": "nan", "cap": "inf", "levels": [1, 2], "ok": True}

def test_json_is_deterministic(tmp_path):
    data = {"b": 2, "a": [np.float64(0.25)]}
    first = JsonFormat(tmp_path / "1").write("meta", data).read_bytes()
    second = JsonFormat(tmp_path / "2").write("meta", dict(reversed(list(data.items())))).read_bytes()
    assert first == second

def test_plot_and_gnuplot(tmp_path):
    dat = PlotFormat(tmp_path).write("branch", (["lambda", "sup"], [[0.0, 1.0], [1.0, 0.5]]))
    assert dat.read_text(encoding="utf-8") == "# lambda sup\n0.0 1.0\n1.0 0.5\n"

    script = GnuplotFormat(tmp_path).write("branch", (dat.name, "lambda", "sup", "branch")).read_text(encoding="utf-8")
    assert "plot 'branch.dat' using 1:2" in script
    assert "set xlabel 'lambda'" in script

def test_get_format():
    assert get_format("csv") is CsvFormat
    assert get_format("gnuplot") is GnuplotFormat
    with pytest.raises(InvalidFormat):
        get_format("xlsx")

def test_csv_quotes_text_cells(tmp_path):
    rows = [["superlinear-order", 'lambda = 0.5: "minimal" <= maximal', True]]
    file = CsvFormat(tmp_path).write("verify", (["scenario", "check", "passed"], rows))

    with open(file, encoding="utf-8", newline="") as reader:
        header, row = list(csv.reader(reader))
    assert header == ["scenario", "check", "passed"]
    assert row == ["superlinear-order", 'lambda = 0.5: "minimal" <= maximal', "1"]
