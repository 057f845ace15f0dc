"""Stage orchestration: harvest, fetch, annotate, quality and emit, followed by the reports."""
from __future__ import annotations

import logging
import time

from .config import ConfigError, PipelineConfig, config_from_dict, load_config
from .emit import emit_counts, emit_dataset, shard_digest, shard_sizes, verify_dataset
from .stages import (
    StageFailure,
    StagePrereqMissing,
    annotate_stage,
    fetch_stage,
    harvest_stage,
    quality_stage,
)
from .stats import STAGES, RunReport, collect_report, write_report

logger = logging.getLogger(__name__)


def emit_stage(cfg: PipelineConfig) -> dict:
    emit_dataset(cfg.out, cfg.filter_spec(), cfg.emit.shard_size, cfg.seed)
    counts = emit_counts(cfg.out)
    counts["executed"] = counts["pages"]
    return counts


def run_stage(name: str, cfg: PipelineConfig, **kwargs) -> dict:
    if name == "harvest":
        return harvest_stage(cfg)
    if name == "fetch":
        return fetch_stage(cfg, **kwargs)
    if name == "annotate":
        return annotate_stage(cfg)
    if name == "quality":
        return quality_stage(cfg)
    if name == "emit":
        return emit_stage(cfg)
    raise ValueError(f"unknown stage {name}")


def run_pipeline(cfg: PipelineConfig, only: list[str] | None = None, **fetch_kwargs) -> RunReport:
    """Run the enabled stages in order, then write the reports under <output>/reports."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    wall: dict[str, float] = {}
    executed: dict[str, int] = {}
    for name in STAGES:
        enabled = getattr(cfg.stages, name) if only is None else name in only
        if not enabled:
            continue
        t0 = time.monotonic()
        counts = run_stage(name, cfg, **(fetch_kwargs if name == "fetch" else {}))
        wall[name] = round(time.monotonic() - t0, 3)
        executed[name] = counts.get("executed", 0)
        logger.info("%s: %s", name, {k: v for k, v in counts.items() if k != "rejections"})
    report = collect_report(cfg.out)
    report.wall_time = wall
    report.executed = executed
    write_report(report, cfg.out)
    return report


__all__ = [
    "ConfigError", "PipelineConfig", "RunReport", "StageFailure", "StagePrereqMissing", "collect_report",
    "config_from_dict", "emit_dataset", "load_config", "run_pipeline", "run_stage", "shard_digest",
    "shard_sizes", "verify_dataset", "write_report",
]
