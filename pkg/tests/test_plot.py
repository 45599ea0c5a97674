import xml.etree.ElementTree as ET

from botsim.plot import render_plot

SVG = "{http://www.w3.org/2000/svg}"


def series(n):
    return {f"run{i}": [(t * 2400, (i + 1) * 10 / (1 + t)) for t in range(50)] for i in range(n)}


def polylines(svg):
    root = ET.fromstring(svg)
    return [el for el in root.iter(SVG + "polyline") if el.get("class") == "series"]


def test_single_series():
    lines = polylines(render_plot(series(1)))
    assert len(lines) == 1
    assert lines[0].get("data-label") == "run0"


def test_five_series_with_legend():
    svg = render_plot(series(5))
    assert [p.get("data-label") for p in polylines(svg)] == [f"run{i}" for i in range(5)]
    root = ET.fromstring(svg)
    legend = [g for g in root.iter(SVG + "g") if g.get("class") == "legend"]
    assert len(legend) == 5
    assert all(f"run{i}" in svg for i in range(5))


def test_plot_is_deterministic():
    assert render_plot(series(3)) == render_plot(series(3))


def test_axes_labelled_in_days():
    svg = render_plot(series(1))
    assert "days" in svg and "in-degree" in svg


def test_empty_series_renders():
    assert len(polylines(render_plot({"empty": []}))) == 1
