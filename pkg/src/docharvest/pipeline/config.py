"""Pipeline configuration: one YAML file, every field defaulted, unknown keys rejected."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..annotate.colors import ColorMap
from ..fetcher.types import FetchPolicy
from ..quality.filters import FilterSpec


class ConfigError(ValueError):
    pass


@dataclass
class Stages:
    harvest: bool = True
    fetch: bool = True
    annotate: bool = True
    quality: bool = True
    emit: bool = True


@dataclass
class Workers:
    harvest: int = 1
    fetch: int = 8
    annotate: int = 1


@dataclass
class Snapshot:
    id: str = ""
    manifest: str = ""  # text file listing WAT paths or URLs


@dataclass
class HarvestConfig:
    snapshots: list[Snapshot] = field(default_factory=list)  # processed in the listed order, newest first


@dataclass
class FetchConfig:
    url_list: str | None = None  # used instead of harvest output when given
    policy: dict = field(default_factory=dict)  # FetchPolicy fields


@dataclass
class AnnotateConfig:
    renderer: Any = "mock"  # "mock" or a command template list with {input} {outdir} {dpi}
    dpi: int = 150
    timeout: float = 120.0
    max_pages: int = 150
    min_chars: int = 200
    colors: dict = field(default_factory=dict)  # category name -> [r, g, b] overrides


@dataclass
class QualityConfig:
    kn_order: int = 5
    weight_by: str = "entities"  # or "characters"
    zero_text: str = "table_figure"  # or "empty_only"


@dataclass
class EmitConfig:
    shard_size: int = 1000


@dataclass
class PipelineConfig:
    output: str = "out"
    seed: int = 0
    stages: Stages = field(default_factory=Stages)
    workers: Workers = field(default_factory=Workers)
    harvest: HarvestConfig = field(default_factory=HarvestConfig)
    fetch: FetchConfig = field(default_factory=FetchConfig)
    annotate: AnnotateConfig = field(default_factory=AnnotateConfig)
    quality: QualityConfig = field(default_factory=QualityConfig)
    filter: dict = field(default_factory=dict)  # FilterSpec fields
    emit: EmitConfig = field(default_factory=EmitConfig)
    base_dir: Path = field(default=Path("."), metadata={"internal": True})

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out(self) -> Path:
        return self.resolve(self.output)

    def fetch_policy(self) -> FetchPolicy:
        return FetchPolicy.from_dict(self.fetch.policy)

    def filter_spec(self) -> FilterSpec:
        return FilterSpec.from_dict(self.filter)

    def colormap(self) -> ColorMap:
        return ColorMap.from_overrides(self.annotate.colors)

    def validate(self) -> None:
        try:
            self.fetch_policy()
            self.filter_spec()
            self.colormap()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        if self.emit.shard_size < 1:
            raise ConfigError("emit.shard_size must be at least 1")
        if self.quality.weight_by not in ("entities", "characters"):
            raise ConfigError("quality.weight_by must be entities or characters")
        if self.quality.zero_text not in ("table_figure", "empty_only"):
            raise ConfigError("quality.zero_text must be table_figure or empty_only")
        if self.quality.kn_order < 1:
            raise ConfigError("quality.kn_order must be at least 1")
        r = self.annotate.renderer
        if not (r == "mock" or (isinstance(r, list) and r and all(isinstance(a, str) for a in r))):
            raise ConfigError("annotate.renderer must be 'mock' or a command list")
        for name in ("harvest", "fetch", "annotate"):
            if getattr(self.workers, name) < 1:
                raise ConfigError(f"workers.{name} must be at least 1")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


def _build(cls, raw: Any, where: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls) if not f.metadata.get("internal")}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in raw.items():
        f = fields[name]
        sub = f"{where}.{name}" if where else name
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, sub)
        elif name == "snapshots":
            if not isinstance(value, list):
                raise ConfigError(f"{sub} must be a list")
            kwargs[name] = [_build(Snapshot, v, f"{sub}[{i}]") for i, v in enumerate(value)]
        else:
            kwargs[name] = _check_type(value, default, sub)
    return cls(**kwargs)


def _check_type(value, default, where: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
    elif isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        value = float(value)
    elif isinstance(default, dict) and not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping")
    return value


def config_from_dict(raw: dict | None, base_dir: Path = Path(".")) -> PipelineConfig:
    cfg = _build(PipelineConfig, raw or {}, "")
    cfg.base_dir = Path(base_dir)
    cfg.validate()
    return cfg


def load_config(path: Path | None) -> PipelineConfig:
    if path is None:
        return config_from_dict({})
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return config_from_dict(raw, path.parent)
