import json

import pytest

from src.ui.report import (
    Report,
    format_percent,
    format_sig,
    format_si,
    format_usd,
    render_pairs,
    render_table,
)


@pytest.mark.parametrize(
    "value, expected",
    [
        (4.26e12, "4.26T"),
        (633e6, "633M"),
        (27.4e9, "27.4B"),
        (999.7e9, "1.00T"),
        (9999, "10.0K"),
        (950, "950"),
        (1.5, "1.50"),
        (float("nan"), "NA"),
        (None, "NA"),
    ],
)
def test_format_si(value, expected):
    assert format_si(value) == expected


def test_format_usd():
    assert format_usd(1.234e6) == "$1.23M"
    assert format_usd(float("inf")) == "NA"


@pytest.mark.parametrize(
    "fraction, expected",
    [(0.091, "9.1%"), (0.0, "0%"), (0.2777, "27.8%"), (None, "NA")],
)
def test_format_percent(fraction, expected):
    assert format_percent(fraction) == expected


def test_format_sig():
    assert format_sig(2.644e20) == "2.64e+20"
    assert format_sig(1.8923) == "1.89"
    assert format_sig(float("nan")) == "NA"


def test_render_table_keeps_row_order():
    text = render_table(["size", "loss"], [["7B", "2.13"], ["70B", "1.94"]], title="Plans")
    lines = text.splitlines()
    assert lines[0] == "Plans"
    assert lines[1].split() == ["size", "loss"]
    assert lines[2].split() == ["7B", "2.13"]
    assert lines[3].split() == ["70B", "1.94"]


def test_render_pairs_aligns_values():
    text = render_pairs([("loss", "2.13"), ("tokens/param", "20.0")])
    first, second = text.splitlines()
    assert first.index("2.13") == second.index("20.0")


def test_report_render():
    report = Report(text="hello", payload={"loss": 2.1299999999999999, "nested": {"n": 7e9}})
    assert report.render() == "hello"
    decoded = json.loads(report.render(as_json=True))
    assert decoded == {"loss": 2.13, "nested": {"n": 7e9}}


def test_report_refuses_non_finite_json():
    with pytest.raises(ValueError):
        Report(text="", payload={"x": float("nan")}).render(as_json=True)
