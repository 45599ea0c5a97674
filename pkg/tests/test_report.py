import io

from botsim.engine import BlacklistEvent, MetricsSample, RunSummary
from botsim.report import (
    EVENTS_HEADER,
    format_summary,
    metrics_header,
    read_events,
    read_metrics,
    write_events,
    write_metrics,
)


def sample(t, degrees):
    return MetricsSample(t, tuple(degrees), sum(degrees) / len(degrees), 3, 1, 240, 0, 0.995)


def test_metrics_header_layout():
    assert metrics_header([1000, 1001]) == [
        "time_s", "in_degree_1000", "in_degree_1001", "mean_in_degree", "blacklist_tp", "blacklist_fp",
        "online_bots", "coverage", "isolated_bots",
    ]


def test_metrics_round_trip():
    samples = [sample(0, [25, 24]), sample(2400, [3, 0])]
    buf = io.StringIO()
    write_metrics(buf, (1000, 1001), samples)
    buf.seek(0)
    ids, back = read_metrics(buf)
    assert ids == (1000, 1001)
    assert back == samples


def test_events_round_trip():
    events = [BlacklistEvent(3, 1000, 400, -3, True), BlacklistEvent(4, 9, 800, 0.125, False)]
    buf = io.StringIO()
    write_events(buf, events)
    assert buf.getvalue().splitlines()[0] == ",".join(EVENTS_HEADER)
    buf.seek(0)
    assert read_events(buf) == events


def test_summary_leaves_undefined_precision_empty():
    text = format_summary(RunSummary(12.5, None, None, 0, 1.0))
    assert "precision: \n" in text or "precision:\n" in text
