"""Run configuration (YAML).

Schema, with defaults::

    version: 1
    repos: [repos/alpha.json, /src/beta]   # studied projects: commit bundles or git checkouts
    history_repos: []                      # consulted only to find previous projects
    prs: {alpha: prs/alpha.json}           # PR bundle per studied project id (optional)
    profiles: [profiles.json]              # account profiles used for identity linking
    external_features:                     # extra per-pair matrices, e.g. an activity baseline
      - {path: baseline.csv, dimension: BASELINE}
    settings: [1, 2, 3]                    # LTC-T settings to label and evaluate
    seed: 0                                # root seed; every stage seed derives from it
    output_dir: run
    ruleset: null                          # YAML ruleset overriding the built-in KU rules
    include_merges: true
    window_days: 30
    year_days: 365
    percentile: 10
    repetitions: 100
    thresholds: {spearman: 0.7, vif: 5, skesd_alpha: 0.05, skesd_negligible: 0.147}
    model: {kind: RF, params: {}}
    dimension_models: true                 # also evaluate one model per dimension
    permutation_control: true              # also evaluate the full model on permuted labels
    grid_search: {enabled: false, classifiers: [KNN, NB, DT, RF, XGB, LGBM]}

Relative paths resolve against the directory holding the config file.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .labels import SETTINGS
from .learners.models import GRIDS, KINDS


class ConfigError(ValueError):
    pass


@dataclass
class Thresholds:
    spearman: float = 0.7
    vif: float = 5.0
    skesd_alpha: float = 0.05
    skesd_negligible: float = 0.147


@dataclass
class RunConfig:
    repos: list[str]
    base_dir: str = "."
    history_repos: list[str] = field(default_factory=list)
    prs: dict[str, str] = field(default_factory=dict)
    profiles: list[str] = field(default_factory=list)
    external_features: list[dict] = field(default_factory=list)
    settings: list[int] = field(default_factory=lambda: [1, 2, 3])
    seed: int = 0
    output_dir: str = "run"
    ruleset: str | None = None
    include_merges: bool = True
    window_days: int = 30
    year_days: int = 365
    percentile: float = 10.0
    repetitions: int = 100
    thresholds: Thresholds = field(default_factory=Thresholds)
    model: dict = field(default_factory=lambda: {"kind": "RF", "params": {}})
    dimension_models: bool = True
    permutation_control: bool = True
    grid_search: dict = field(default_factory=lambda: {"enabled": False, "classifiers": list(GRIDS)})

    def path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q

    @property
    def out(self) -> Path:
        return self.path(self.output_dir)

    def snapshot(self) -> dict:
        """Config as recorded in the manifest; the output location is left out on purpose."""
        d = asdict(self)
        d.pop("base_dir")
        d.pop("output_dir")
        return d

    def validate(self) -> None:
        if not self.repos:
            raise ConfigError("no studied repositories configured (repos)")
        paths = [*self.repos, *self.history_repos, *self.profiles, *self.prs.values(),
                 *(e.get("path", "") for e in self.external_features)]
        if self.ruleset:
            paths.append(self.ruleset)
        for p in paths:
            if not self.path(p).exists():
                raise ConfigError(f"path does not exist: {p}")
        for t in self.settings:
            if t not in SETTINGS:
                raise ConfigError(f"settings: T must be one of {sorted(SETTINGS)}, got {t!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        if self.window_days < 1 or self.year_days < 1:
            raise ConfigError("window_days and year_days must be positive")
        if not 0 < self.percentile <= 100:
            raise ConfigError("percentile must lie in (0, 100]")
        if self.model.get("kind") not in KINDS:
            raise ConfigError(f"model.kind must be one of {', '.join(KINDS)}")
        for e in self.external_features:
            if "path" not in e:
                raise ConfigError("external_features entries need a path")
        for name in self.grid_search.get("classifiers", []):
            if name not in GRIDS:
                raise ConfigError(f"grid_search: unknown classifier {name!r}")


_KEYS = {f for f in RunConfig.__dataclass_fields__ if f != "base_dir"} | {"version"}


def config_from_mapping(doc: Mapping, base_dir: str | Path = ".") -> RunConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if doc.get("version", 1) != 1:
        raise ConfigError(f"unsupported config version {doc.get('version')!r}")
    data = {k: v for k, v in doc.items() if k != "version"}
    if "repos" not in data:
        raise ConfigError("missing required key: repos")
    try:
        th = Thresholds(**(data.pop("thresholds", None) or {}))
        model = {"kind": "RF", "params": {}, **(data.pop("model", None) or {})}
        grid = {"enabled": False, "classifiers": list(GRIDS), **(data.pop("grid_search", None) or {})}
        cfg = RunConfig(base_dir=str(base_dir), thresholds=th, model=model, grid_search=grid, **data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.repos = [str(p) for p in cfg.repos]
    cfg.settings = [int(t) for t in cfg.settings]
    cfg.seed = int(cfg.seed)
    return cfg


def load_config(path: str | Path, overrides: Mapping | None = None) -> RunConfig:
    p = Path(path)
    try:
        doc = yaml.safe_load(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    doc = dict(doc or {})
    doc.update(overrides or {})
    cfg = config_from_mapping(doc, p.parent)
    cfg.validate()
    return cfg
