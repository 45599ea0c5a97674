"""Run sweeps of simulations (models x seeds, optional paired baselines)."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .engine import RunResult, RunSummary, SimConfig, run
from .plot import render_plot
from .report import write_run
from .trust import Model, TrustParams

log = logging.getLogger(__name__)

BASELINE = "baseline"

COMPARISON_HEADER = [
    "label", "seed", "final_mean_in_degree", "baseline_final_mean_in_degree", "reduction_pct",
    "precision", "recall", "blacklist_tp", "blacklist_fp", "total_blacklist_events",
]


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    base: SimConfig
    output_dir: Path
    seeds: Tuple[int, ...] = (0,)
    # None means "use the base config's model"; an empty tuple runs no trust models
    models: Optional[Tuple[Model, ...]] = None
    baseline: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list must not be empty")

    def runs(self) -> List[Tuple[str, int, SimConfig]]:
        """Every (label, seed, config) to execute, in a fixed order."""
        if self.models is None:
            models = () if self.base.trust is None else (self.base.trust.model,)
        else:
            models = self.models
        out = []
        if self.baseline or not models:
            for seed in self.seeds:
                out.append((BASELINE, seed, replace(self.base, seed=seed, trust=None)))
        for model in models:
            trust = self.base.trust.with_model(model) if self.base.trust else TrustParams.for_model(model)
            if self.base.trust is not None and self.base.trust.model is model:
                trust = self.base.trust
            for seed in self.seeds:
                out.append((model.value, seed, replace(self.base, seed=seed, trust=trust)))
        return out


@dataclass
class ExperimentResult:
    rows: List[Dict[str, object]] = field(default_factory=list)
    failures: List[Tuple[str, int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _execute(cfg: SimConfig) -> RunResult:
    return run(cfg)


def ensure_writable(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise ExperimentError(f"output directory {str(path)!r} is not writable: {exc}") from None


def _fmt(value, spec=".4f") -> str:
    return "" if value is None else format(value, spec)


def mean_series(results: Sequence[RunResult]) -> List[Tuple[int, float]]:
    """Average mean sensor in-degree across runs, sample by sample."""
    if not results:
        return []
    length = min(len(r.samples) for r in results)
    return [
        (results[0].samples[i].time, sum(r.samples[i].mean_sensor_in_degree for r in results) / len(results))
        for i in range(length)
    ]


def run_experiment(spec: ExperimentSpec, jobs: int = 1,
                   progress: Optional[Callable[[str, int, RunSummary], None]] = None) -> ExperimentResult:
    """Execute ``spec`` and write per-run directories, comparison.csv and plot.svg."""
    out_dir = Path(spec.output_dir)
    ensure_writable(out_dir)
    planned = spec.runs()
    configs = [cfg for _, _, cfg in planned]

    results: List[Optional[RunResult]] = [None] * len(planned)
    errors: List[Optional[str]] = [None] * len(planned)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_execute, cfg) for cfg in configs]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:  # reported per run, the sweep continues
                    errors[i] = f"{type(exc).__name__}: {exc}"
    else:
        for i, cfg in enumerate(configs):
            try:
                results[i] = _execute(cfg)
            except Exception as exc:
                errors[i] = f"{type(exc).__name__}: {exc}"

    baselines = {seed: res.summary for (label, seed, _), res in zip(planned, results)
                 if label == BASELINE and res is not None}
    outcome = ExperimentResult()
    by_label: Dict[str, List[RunResult]] = {}
    for (label, seed, _), res, err in zip(planned, results, errors):
        run_dir = out_dir / f"{label}_seed{seed}"
        if res is None:
            run_dir.mkdir(parents=True, exist_ok=True)
            (run_dir / "FAILED").write_text(err + "\n", encoding="utf-8")
            outcome.failures.append((label, seed, err))
            log.error("run %s seed %d failed: %s", label, seed, err)
            continue
        summary = res.summary
        if label != BASELINE and seed in baselines:
            summary = summary.paired_with(baselines[seed])
        write_run(run_dir, res, summary)
        by_label.setdefault(label, []).append(res)
        outcome.rows.append({
            "label": label,
            "seed": seed,
            "final_mean_in_degree": _fmt(summary.final_mean_sensor_in_degree),
            "baseline_final_mean_in_degree": _fmt(summary.baseline_final_mean_in_degree),
            "reduction_pct": _fmt(summary.reduction_pct, ".2f"),
            "precision": _fmt(summary.precision),
            "recall": _fmt(summary.recall),
            "blacklist_tp": sum(1 for e in res.events if e.target_is_sensor),
            "blacklist_fp": sum(1 for e in res.events if not e.target_is_sensor),
            "total_blacklist_events": summary.total_blacklist_events,
        })
        if progress is not None:
            progress(label, seed, summary)

    with open(out_dir / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(outcome.rows)
    series = {label: mean_series(runs) for label, runs in by_label.items()}
    (out_dir / "plot.svg").write_text(render_plot(series), encoding="utf-8")
    if outcome.failures:
        (out_dir / "PARTIAL").write_text(
            "".join(f"{label} seed={seed}: {err}\n" for label, seed, err in outcome.failures), encoding="utf-8")
    return outcome
