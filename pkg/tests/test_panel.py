import numpy as np
import pytest

from ridgelet.errors import InvalidInput, ParseError
from ridgelet.panel import ReturnPanel, as_matrix, load_returns_csv, write_returns_csv


def _write(tmp_path, text, name="r.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_toy_file(tmp_path):
    p = _write(tmp_path, "date,A,B\n2020-01-02,0.01,0.02\n2020-01-03,-0.01,0.0\n2020-01-06,0.0,0.03\n")
    panel = load_returns_csv(p)
    assert panel.values.shape == (2, 3)
    assert panel.asset_ids == ("A", "B")
    assert panel.values[1, 2] == 0.03


def test_empty_cell_is_missing(tmp_path):
    p = _write(tmp_path, "date,A,B\n2020-01-02,0.01,\n2020-01-03,-0.01,0.0\n")
    panel = load_returns_csv(p)
    assert panel.missing[1, 0]
    assert panel.missing.sum() == 1
    with pytest.raises(InvalidInput):
        as_matrix(panel)


def test_round_trip(tmp_path, rng):
    values = rng.standard_normal((4, 7)) * 0.01
    values[2, 3] = np.nan
    panel = ReturnPanel.from_array(values)
    path = tmp_path / "out.csv"
    write_returns_csv(panel, path)
    back = load_returns_csv(path)
    assert back.asset_ids == panel.asset_ids
    assert np.array_equal(back.dates, panel.dates)
    assert np.array_equal(back.values, panel.values, equal_nan=True)


def test_malformed_row_reports_line(tmp_path):
    p = _write(tmp_path, "# comment\ndate,A\n2020-01-02,0.1\n2020-01-03,abc\n")
    with pytest.raises(ParseError, match="line 4"):
        load_returns_csv(p)


def test_wrong_field_count(tmp_path):
    p = _write(tmp_path, "date,A,B\n2020-01-02,0.1\n")
    with pytest.raises(ParseError, match="line 2"):
        load_returns_csv(p)


def test_header_must_start_with_date(tmp_path):
    with pytest.raises(ParseError):
        load_returns_csv(_write(tmp_path, "when,A\n2020-01-02,0.1\n"))


def test_duplicate_dates_rejected(tmp_path):
    p = _write(tmp_path, "date,A\n2020-01-02,0.1\n2020-01-02,0.2\n")
    with pytest.raises(InvalidInput):
        load_returns_csv(p)


def test_non_monotone_dates_rejected(tmp_path):
    p = _write(tmp_path, "date,A\n2020-01-03,0.1\n2020-01-02,0.2\n")
    with pytest.raises(InvalidInput):
        load_returns_csv(p)


def test_panel_validation():
    with pytest.raises(InvalidInput):
        ReturnPanel(np.zeros((2, 2)), ("a", "a"), np.array(["2020-01-01", "2020-01-02"], dtype="datetime64[D]"))
    with pytest.raises(InvalidInput):
        ReturnPanel(np.zeros((2, 3)), ("a", "b"), np.array(["2020-01-01", "2020-01-02"], dtype="datetime64[D]"))


def test_subset():
    panel = ReturnPanel.from_array(np.arange(12.0).reshape(3, 4))
    sub = panel.subset(assets=[0, 2], dates=slice(1, 3))
    assert sub.asset_ids == ("a0", "a2")
    assert np.array_equal(sub.values, [[1, 2], [9, 10]])
