"""CSV and text outputs of a run.

``metrics.csv`` columns, in order::

    time_s, in_degree_<sensor id> (one per sensor), mean_in_degree,
    blacklist_tp, blacklist_fp, online_bots, coverage, isolated_bots

``events.csv`` columns: observer, target, time_s, score, target_is_sensor.
``sensors.csv`` columns: sensor, peer, first_seen_s.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .engine import BlacklistEvent, MetricsSample, RunResult, RunSummary

EVENTS_HEADER = ["observer", "target", "time_s", "score", "target_is_sensor"]
SENSOR_LOG_HEADER = ["sensor", "peer", "first_seen_s"]


def metrics_header(sensor_ids: Sequence[int]) -> List[str]:
    return (["time_s"] + [f"in_degree_{sid}" for sid in sensor_ids]
            + ["mean_in_degree", "blacklist_tp", "blacklist_fp", "online_bots", "coverage", "isolated_bots"])


def _fmt_score(score) -> str:
    if isinstance(score, int):
        return str(score)
    return f"{score:.6f}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_metrics(fh, sensor_ids: Sequence[int], samples: Iterable[MetricsSample]) -> None:
    w = _writer(fh)
    w.writerow(metrics_header(sensor_ids))
    for s in samples:
        w.writerow([s.time, *s.per_sensor_in_degree, f"{s.mean_sensor_in_degree:.4f}", s.blacklist_tp,
                    s.blacklist_fp, s.online_bots, f"{s.newest_command_coverage:.6f}", s.isolated_bots])


def read_metrics(fh) -> Tuple[Tuple[int, ...], List[MetricsSample]]:
    rows = csv.reader(fh)
    header = next(rows)
    degree_cols = [h for h in header if h.startswith("in_degree_")]
    if header != metrics_header([int(h[len("in_degree_"):]) for h in degree_cols]):
        raise ValueError("unexpected metrics.csv header")
    sensor_ids = tuple(int(h[len("in_degree_"):]) for h in degree_cols)
    n = len(sensor_ids)
    samples = []
    for row in rows:
        samples.append(MetricsSample(
            time=int(row[0]),
            per_sensor_in_degree=tuple(int(v) for v in row[1:1 + n]),
            mean_sensor_in_degree=float(row[1 + n]),
            blacklist_tp=int(row[2 + n]),
            blacklist_fp=int(row[3 + n]),
            online_bots=int(row[4 + n]),
            newest_command_coverage=float(row[5 + n]),
            isolated_bots=int(row[6 + n]),
        ))
    return sensor_ids, samples


def write_events(fh, events: Iterable[BlacklistEvent]) -> None:
    w = _writer(fh)
    w.writerow(EVENTS_HEADER)
    for e in events:
        w.writerow([e.observer, e.target, e.time, _fmt_score(e.score), int(e.target_is_sensor)])


def read_events(fh) -> List[BlacklistEvent]:
    rows = csv.reader(fh)
    if next(rows) != EVENTS_HEADER:
        raise ValueError("unexpected events.csv header")
    out = []
    for observer, target, t, score, is_sensor in rows:
        value = float(score) if "." in score else int(score)
        out.append(BlacklistEvent(int(observer), int(target), int(t), value, is_sensor == "1"))
    return out


def write_sensor_log(fh, logs: Dict[int, Dict[int, int]]) -> None:
    w = _writer(fh)
    w.writerow(SENSOR_LOG_HEADER)
    for sid in sorted(logs):
        for peer, first_seen in sorted(logs[sid].items(), key=lambda kv: (kv[1], kv[0])):
            w.writerow([sid, peer, first_seen])


def _opt(value: Optional[float], fmt: str = ".4f") -> str:
    return "" if value is None else format(value, fmt)


def format_summary(summary: RunSummary, result: Optional[RunResult] = None) -> str:
    lines = [
        f"final_mean_sensor_in_degree: {summary.final_mean_sensor_in_degree:.4f}",
        f"baseline_final_mean_in_degree: {_opt(summary.baseline_final_mean_in_degree)}",
        f"reduction_pct: {_opt(summary.reduction_pct, '.2f')}",
        f"precision: {_opt(summary.precision)}",
        f"recall: {_opt(summary.recall)}",
        f"total_blacklist_events: {summary.total_blacklist_events}",
    ]
    if result is not None:
        t = result.transport
        lines += [
            f"messages_sent: {t.sent}",
            f"messages_delivered: {t.delivered}",
            f"messages_lost: {t.lost}",
            f"messages_corrupted: {t.corrupted}",
            f"dropped_at_offline_receiver: {t.dropped_offline}",
            f"sensor_non_participation_violations: {result.non_participation_violations}",
        ]
        worst = min((c for _, c in result.coverage_checks), default=None)
        lines.append(f"min_coverage_after_window: {_opt(worst)}")
    lines.append(f"runtime_wall_clock_s: {summary.runtime_wall_clock:.2f}")
    return "\n".join(lines) + "\n"


def write_run(run_dir: Path, result: RunResult, summary: Optional[RunSummary] = None) -> None:
    """Write every per-run artifact into ``run_dir``."""
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        write_metrics(fh, result.sensor_ids, result.samples)
    with open(run_dir / "events.csv", "w", newline="", encoding="utf-8") as fh:
        write_events(fh, result.events)
    with open(run_dir / "sensors.csv", "w", newline="", encoding="utf-8") as fh:
        write_sensor_log(fh, result.sensor_logs)
    (run_dir / "summary.txt").write_text(format_summary(summary or result.summary, result), encoding="utf-8")


def metrics_text(result: RunResult) -> str:
    buf = io.StringIO()
    write_metrics(buf, result.sensor_ids, result.samples)
    return buf.getvalue()
