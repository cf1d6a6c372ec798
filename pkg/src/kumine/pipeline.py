"""End-to-end pipeline: stages communicate only through files in the run directory.

Run directory layout::

    mine/pairs.csv               developer-project pairs
    detect/projects.csv          KU vector of each studied project's latest snapshot
    features/matrix.csv (+ .meta.json)
    labels/labels.csv, labels/details.json
    select/selection.json        AutoSpearman result per feature set
    evaluate/<LTC-T>/aucs.csv    model, repetition, auc
    compare/<LTC-T>/stats.json
    train/<LTC-T>/model.pkl, model.json
    explain/<LTC-T>/shap.csv, ranks.json
    report/report.md, report/report.json
    manifest.json
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import zlib
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import dimension_importance, explain, scott_knott_esd
from .analysis.stats import cliffs_delta, normalized_auc_improvement, wilcoxon_signed_rank
from .config import RunConfig
from .features import DIMENSIONS, FeatureBuilder, FeatureMatrix, ProjectData, assemble_matrix
from .ku.detect import Detector, KuVector
from .ku.rules import load_ruleset
from .labels import SETTINGS, label_ltc
from .learners import GRIDS, SelectionResult, autospearman, bootstrap_plan, grid_search, run_experiment, train
from .learners.bootstrap import DegenerateSplit
from .learners.models import Model, SingleClassTraining, TooFewSamples
from .mining.history import build_pairs, link_identities
from .mining.prs import load_pr_bundle, load_profiles
from .mining.records import CommitRecord, DevProjectPair, IdentityLink, MiningError, format_timestamp
from .mining.repository import open_repository

log = logging.getLogger(__name__)

STAGES = ("mine", "detect", "features", "label", "select", "evaluate", "compare", "train", "explain", "report")
STAGE_DIRS = {"label": "labels"}
UPSTREAM = {
    "mine": (), "detect": (), "features": ("mine",), "label": ("mine",), "select": ("features",),
    "evaluate": ("features", "labels", "select"), "compare": ("evaluate",), "train": ("features", "labels", "select"),
    "explain": ("features", "labels", "select", "train"), "report": ("evaluate", "compare", "explain"),
}
FULL_SET = "KULTC"
PERMUTED = "KULTC_PERMUTED"


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage} failed: {message}")
        self.stage = stage


class MissingStageOutput(FileNotFoundError):
    pass


def stage_seed(root: int, name: str) -> int:
    """Per-stage seed expanded from the root seed."""
    return int(np.random.SeedSequence([root, zlib.crc32(name.encode())]).generate_state(1)[0])


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def dump_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path: Path) -> list[dict[str, str]]:
    if not path.exists():
        raise MissingStageOutput(str(path))
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _fmt(x: float) -> str:
    return repr(float(x))


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record):
        self.messages.append(record.getMessage())


@dataclass
class Workspace:
    """Inputs reopened from the config, shared by stages that need repository access."""

    config: RunConfig
    detector: Detector
    projects: dict[str, ProjectData] = field(default_factory=dict)
    studied: list[str] = field(default_factory=list)
    links: list[IdentityLink] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def open(cls, cfg: RunConfig) -> Workspace:
        rules = load_ruleset(cfg.path(cfg.ruleset)) if cfg.ruleset else None
        ws = cls(cfg, Detector(rules))
        commits: dict[str, list[CommitRecord]] = {}
        for group, paths in (("studied", cfg.repos), ("history", cfg.history_repos)):
            for p in paths:
                repo = open_repository(cfg.path(p))
                if repo.project_id in commits:
                    raise MiningError(f"duplicate project id {repo.project_id!r} ({p})")
                commits[repo.project_id] = repo.enumerate_commits(cfg.include_merges)
                ws.projects[repo.project_id] = ProjectData(repo.project_id, repo, commits[repo.project_id])
                if group == "studied":
                    ws.studied.append(repo.project_id)
        profiles = []
        for p in cfg.profiles:
            profiles.extend(load_profiles(cfg.path(p)))
        names = {c.author_name for cs in commits.values() for c in cs}
        ws.links = link_identities(names, profiles)
        accounts = {l.account_username: l.commit_author_name for l in ws.links}
        for pid in ws.studied:
            ws.projects[pid].accounts = accounts
            if pid in cfg.prs:
                ws.projects[pid].prs = load_pr_bundle(cfg.path(cfg.prs[pid]))
            else:
                ws.warnings.append(f"no PR bundle for project {pid}; its COLLAB_EXP features are zero")
        return ws

    def all_commits(self) -> dict[str, list[CommitRecord]]:
        return {pid: p.commits for pid, p in self.projects.items()}

    def pairs(self) -> list[DevProjectPair]:
        out = []
        for pid in self.studied:
            out.extend(build_pairs(pid, self.projects[pid].commits, self.links, self.all_commits()))
        return out

    def pairs_from_csv(self, path: Path) -> list[DevProjectPair]:
        out = []
        by_user = {l.account_username: l for l in self.links}
        for row in read_csv(path):
            pid = row["project_id"]
            commits = {c.id: c for c in self.projects[pid].commits}
            prev = tuple(p for p in row["previous_projects"].split(";") if p)
            out.append(DevProjectPair(pid, by_user[row["developer"]], commits[row["initial_commit"]], prev))
        return out


# -- feature sets ---------------------------------------------------------------

def load_matrix(out: Path) -> FeatureMatrix:
    path = out / "features" / "matrix.csv"
    if not path.exists():
        raise MissingStageOutput(str(path))
    meta = json.loads((out / "features" / "matrix.meta.json").read_text(encoding="utf-8"))
    return FeatureMatrix.from_csv(path.read_text(encoding="utf-8"), meta["dimension_map"])


def load_labels(out: Path) -> tuple[list[tuple[str, str]], dict[str, np.ndarray]]:
    """Pair keys in file order and one boolean vector per setting."""
    return labels_from_csv(out / "labels" / "labels.csv")


def labels_from_csv(path: Path) -> tuple[list[tuple[str, str]], dict[str, np.ndarray]]:
    keys: list[tuple[str, str]] = []
    values: dict[str, dict[tuple[str, str], bool]] = {}
    for r in read_csv(path):
        key = (r["project_id"], r["developer"])
        if key not in keys:
            keys.append(key)
        values.setdefault(r["setting"], {})[key] = r["is_ltc"] in ("1", "true", "True")
    settings = [s for s in SETTINGS.values() if s in values]
    return keys, {s: np.array([values[s][k] for k in keys], dtype=bool) for s in settings}


def feature_sets(cfg: RunConfig, out: Path, warnings: list[str]) -> dict[str, FeatureMatrix]:
    """Unselected matrices of every evaluated feature set, rows in pair order."""
    ku = load_matrix(out)
    sets = {FULL_SET: ku}
    if cfg.dimension_models:
        for dim in DIMENSIONS:
            sets[f"KULTC_{dim}"] = ku.select([ku.columns[i] for i in ku.dimension_map[dim]])
    for ext in cfg.external_features:
        dim = ext.get("dimension", "EXTERNAL")
        other = FeatureMatrix.from_csv(cfg.path(ext["path"]).read_text(encoding="utf-8"))
        other.dimension_map = {dim: list(range(len(other.columns)))}
        try:
            combined = ku.join(other, dim)
        except KeyError as exc:
            warnings.append(f"external features {ext['path']} lack pair {exc.args[0]}; skipped")
            continue
        base = combined.select(list(other.columns))
        sets[dim] = base
        sets[f"KULTC+{dim}"] = combined
    return sets


def load_selection(out: Path) -> dict[str, SelectionResult]:
    path = out / "select" / "selection.json"
    if not path.exists():
        raise MissingStageOutput(str(path))
    doc = json.loads(path.read_text(encoding="utf-8"))
    return {k: SelectionResult.from_json(v) for k, v in doc["feature_sets"].items()}


# -- stages --------------------------------------------------------------------

def stage_mine(cfg: RunConfig, out: Path, ws: Workspace) -> None:
    pairs = ws.pairs()
    write_csv(out / "mine" / "pairs.csv",
              ["project_id", "developer", "author_name", "initial_commit", "initial_time", "previous_projects"],
              [[p.project_id, p.developer.account_username, p.author_name, p.initial_commit.id,
                format_timestamp(p.initial_commit.author_time), ";".join(p.previous_projects)] for p in pairs])
    linked = {l.commit_author_name for l in ws.links}
    dump_json(out / "mine" / "summary.json", {
        "version": 1,
        "projects": {pid: {"commits": len(ws.projects[pid].commits),
                           "authors": len({c.author_name for c in ws.projects[pid].commits}),
                           "linked_authors": len({c.author_name for c in ws.projects[pid].commits} & linked),
                           "studied": pid in ws.studied}
                     for pid in sorted(ws.projects)},
        "pairs": len(pairs),
    })


def stage_detect(cfg: RunConfig, out: Path, ws: Workspace) -> None:
    rows = []
    for pid in ws.studied:
        proj = ws.projects[pid]
        head = max(proj.commits, key=lambda c: c.sort_key)
        vec = ws.detector.detect_snapshot(proj.repo.snapshot_files(head.id))
        rows.append([pid, head.id, *(_num(x) for x in vec.counts)])
    write_csv(out / "detect" / "projects.csv", ["project_id", "commit", *KuVector.csv_header().split(",")], rows)


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def stage_features(cfg: RunConfig, out: Path, ws: Workspace) -> None:
    pairs = ws.pairs_from_csv(out / "mine" / "pairs.csv")
    builder = FeatureBuilder(ws.projects, ws.detector, cfg.window_days)
    matrix = assemble_matrix(builder.row(p) for p in pairs)
    (out / "features").mkdir(parents=True, exist_ok=True)
    (out / "features" / "matrix.csv").write_text(matrix.to_csv(), encoding="utf-8")
    (out / "features" / "matrix.meta.json").write_text(
        matrix.sidecar({"window_days": cfg.window_days}), encoding="utf-8")


def stage_label(cfg: RunConfig, out: Path, ws: Workspace) -> None:
    pairs = ws.pairs_from_csv(out / "mine" / "pairs.csv")
    rows, details = [], {}
    for p in pairs:
        commits = ws.projects[p.project_id].commits
        labels = [label_ltc(p, commits, t, cfg.percentile, cfg.year_days) for t in cfg.settings]
        rows.extend([p.project_id, p.developer.account_username, l.setting, int(l.is_ltc),
                     repr(round(l.duration_days, 6))] for l in labels)
        details[f"{p.project_id}/{p.developer.account_username}"] = {
            l.setting: {"is_ltc": l.is_ltc, "duration_days": round(l.duration_days, 6),
                        "windows": [{"year": w.index, "commits": w.dev_commits, "threshold": w.threshold,
                                     "others": w.n_others} for w in l.yearly_counts]}
            for l in labels}
    write_csv(out / "labels" / "labels.csv", ["project_id", "developer", "setting", "is_ltc", "duration_days"], rows)
    dump_json(out / "labels" / "details.json", {"version": 1, "percentile": cfg.percentile,
                                                "year_days": cfg.year_days, "pairs": details})


def stage_select(cfg: RunConfig, out: Path, warnings: list[str]) -> None:
    sets = feature_sets(cfg, out, warnings)
    doc = {}
    for name, m in sets.items():
        if len(m.columns) < 2:
            res = SelectionResult(list(m.columns), [], cfg.thresholds.spearman, cfg.thresholds.vif)
        else:
            res = autospearman(m.values, m.columns, cfg.thresholds.spearman, cfg.thresholds.vif)
        doc[name] = res.to_json()
    dump_json(out / "select" / "selection.json", {"version": 1, "feature_sets": doc})


def _setting_data(cfg: RunConfig, out: Path, warnings: list[str]):
    sets = feature_sets(cfg, out, warnings)
    selection = load_selection(out)
    keys, labels = load_labels(out)
    if keys != sets[FULL_SET].keys:
        raise StageError("evaluate", "label rows do not match feature rows")
    selected = {n: sets[n].select(selection[n].kept_columns) for n in sets if n in selection}
    return selected, labels


def stage_evaluate(cfg: RunConfig, out: Path, warnings: list[str], seeds: dict[str, int]) -> None:
    selected, labels = _setting_data(cfg, out, warnings)
    kind, params = cfg.model["kind"], cfg.model.get("params") or {}
    for setting, y in labels.items():
        rows = []
        try:
            plan = bootstrap_plan(len(y), cfg.repetitions, seeds["bootstrap"], labels=y)
        except (DegenerateSplit, ValueError) as exc:
            warnings.append(f"{setting}: not evaluated ({int(y.sum())} positives of {len(y)}): {exc}")
            continue
        aucs = run_experiment({n: m.values for n, m in selected.items()}, y, plan, kind, params)
        if cfg.permutation_control:
            rng = np.random.default_rng(seeds["permutation"])
            y_perm = rng.permutation(y)
            perm_plan = bootstrap_plan(len(y), cfg.repetitions, seeds["bootstrap"], labels=y_perm)
            aucs[PERMUTED] = run_experiment({PERMUTED: selected[FULL_SET].values}, y_perm, perm_plan,
                                            kind, params)[PERMUTED]
        grid_doc = {}
        if cfg.grid_search.get("enabled"):
            X = selected[FULL_SET].values
            for name in cfg.grid_search.get("classifiers", list(GRIDS)):
                spec = GRIDS[name]
                try:
                    best, score = grid_search(spec, X, y, seeds["grid"])
                except TooFewSamples as exc:
                    warnings.append(f"{setting}: grid search for {name} skipped: {exc}")
                    continue
                grid_doc[name] = {"kind": spec.kind, "best_params": best, "cv_auc": score}
                aucs[f"{FULL_SET}[{name}]"] = run_experiment({name: X}, y, plan, spec.kind, best)[name]
            dump_json(out / "evaluate" / setting / "grid.json", {"version": 1, "folds": 10, "search": grid_doc})
        for model_name, values in aucs.items():
            rows.extend([model_name, i, _fmt(v)] for i, v in enumerate(values))
        write_csv(out / "evaluate" / setting / "aucs.csv", ["model", "repetition", "auc"], rows)


def read_aucs(path: Path) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    for r in read_csv(path):
        out.setdefault(r["model"], []).append(float(r["auc"]))
    return out


def compare_pairs(models: list[str]) -> list[tuple[str, str]]:
    pairs = []
    for m in models:
        if m.startswith("KULTC_") and m != PERMUTED:
            pairs.append((FULL_SET, m))
        elif m.startswith("KULTC+"):
            pairs.append((m, m.split("+", 1)[1]))
            pairs.append((FULL_SET, m.split("+", 1)[1]))
        elif m.startswith(f"{FULL_SET}[") or m == PERMUTED:
            pairs.append((FULL_SET, m))
    return [p for p in pairs if p[0] in models and p[1] in models]


def comparison(aucs: Mapping[str, list[float]], model: str, baseline: str) -> dict:
    a, b = aucs[model], aucs[baseline]
    w = wilcoxon_signed_rank(a, b)
    d = cliffs_delta(a, b)
    try:
        improvement = normalized_auc_improvement(a, b)
    except ValueError:
        improvement = None
    return {"model": model, "baseline": baseline, "p_value": w.p_value, "wilcoxon_method": w.method,
            "zero_differences": "dropped", "cliffs_delta": d.d, "magnitude": d.magnitude,
            "normalized_improvement_percent": improvement,
            "median_model": float(np.median(a)), "median_baseline": float(np.median(b))}


def stage_compare(cfg: RunConfig, out: Path) -> None:
    for setting in _evaluated_settings(out):
        aucs = read_aucs(out / "evaluate" / setting / "aucs.csv")
        comps = [comparison(aucs, m, b) for m, b in compare_pairs(list(aucs))]
        ranks = scott_knott_esd(aucs, cfg.thresholds.skesd_alpha, cfg.thresholds.skesd_negligible)
        dump_json(out / "compare" / setting / "stats.json",
                  {"version": 1, "setting": setting, "comparisons": comps, "model_ranks": ranks.to_json()})


def _evaluated_settings(out: Path) -> list[str]:
    base = out / "evaluate"
    if not base.exists():
        raise MissingStageOutput(str(base))
    return [s for s in SETTINGS.values() if (base / s / "aucs.csv").exists()]


def stage_train(cfg: RunConfig, out: Path, warnings: list[str], seeds: dict[str, int]) -> None:
    selected, labels = _setting_data(cfg, out, warnings)
    m = selected[FULL_SET]
    for setting, y in labels.items():
        try:
            model = train(cfg.model["kind"], cfg.model.get("params") or {}, m.values, y, seeds["train"])
        except SingleClassTraining:
            warnings.append(f"{setting}: no final model (single class)")
            continue
        d = out / "train" / setting
        model.save(d)
        dump_json(d / "model.json", {"version": 1, "setting": setting, "kind": model.kind,
                                     "params": model.params, "seed": model.seed, "columns": m.columns,
                                     "dimension_map": {k: [m.columns[i] for i in v]
                                                       for k, v in m.dimension_map.items()}})


def explain_model(model: Model, matrix: FeatureMatrix, dimension_map: Mapping[str, list[str]],
                  thresholds=None, seed: int = 0):
    shap = explain(model, matrix.values, matrix.columns, background=matrix.values[:50], seed=seed)
    kwargs = {} if thresholds is None else {"alpha": thresholds.skesd_alpha,
                                            "negligible": thresholds.skesd_negligible}
    dists, ranks = dimension_importance(shap, dimension_map, **kwargs)
    return shap, dists, ranks


def write_explanation(d: Path, keys, shap, dists, ranks, extra: Mapping | None = None) -> None:
    write_csv(d / "shap.csv", ["project_id", "developer", "base_value", *shap.columns],
              [[*k, _fmt(shap.base_value), *(_fmt(v) for v in row)] for k, row in zip(keys, shap.values)])
    doc = {"version": 1, "space": shap.space, **ranks.to_json(),
           "mean_abs": {dim: float(np.mean(v)) for dim, v in dists.items()}}
    doc.update(extra or {})
    dump_json(d / "ranks.json", doc)


def stage_explain(cfg: RunConfig, out: Path, warnings: list[str], seeds: dict[str, int]) -> None:
    selected, labels = _setting_data(cfg, out, warnings)
    m = selected[FULL_SET]
    for setting in labels:
        d = out / "train" / setting
        if not (d / "model.pkl").exists():
            continue
        model = Model.load(d)
        meta = json.loads((d / "model.json").read_text(encoding="utf-8"))
        shap, dists, ranks = explain_model(model, m, meta["dimension_map"], cfg.thresholds, seeds["explain"])
        error = float(np.max(np.abs(shap.totals() - (model.predict_proba(m.values) if shap.space == "probability"
                                                      else model.estimator.decision_function(m.values)))))
        write_explanation(out / "explain" / setting, m.keys, shap, dists, ranks,
                          {"setting": setting, "local_accuracy_max_error": error})


# -- report --------------------------------------------------------------------

def build_report(out: Path) -> tuple[str, dict]:
    settings = _evaluated_settings(out)
    if not settings:
        raise MissingStageOutput(str(out / "evaluate"))
    lines = ["# Long-time contributor prediction report", ""]
    summary = {"version": 1, "settings": {}}
    for s in settings:
        aucs = read_aucs(out / "evaluate" / s / "aucs.csv")
        stats_path = out / "compare" / s / "stats.json"
        if not stats_path.exists():
            raise MissingStageOutput(str(stats_path))
        stats = json.loads(stats_path.read_text(encoding="utf-8"))
        ranks = stats["model_ranks"]["ranks"]
        entry = {"median_auc": {m: float(np.median(v)) for m, v in aucs.items()},
                 "model_ranks": ranks, "comparisons": stats["comparisons"]}
        lines += [f"## {s}", "", "### Out-of-sample AUC", "",
                  "| model | median AUC | mean AUC | SK-ESD rank |", "|---|---|---|---|"]
        for m in sorted(aucs, key=lambda k: (ranks.get(k, 0), -np.median(aucs[k]), k)):
            lines.append(f"| {m} | {np.median(aucs[m]):.4f} | {np.mean(aucs[m]):.4f} | {ranks.get(m, '')} |")
        lines += ["", "### Pairwise comparisons", "",
                  "| model | baseline | Wilcoxon p | Cliff's d | magnitude | normalized improvement (%) |",
                  "|---|---|---|---|---|---|"]
        for c in stats["comparisons"]:
            imp = "n/a" if c["normalized_improvement_percent"] is None else f"{c['normalized_improvement_percent']:.2f}"
            lines.append(f"| {c['model']} | {c['baseline']} | {c['p_value']:.3g} | {c['cliffs_delta']:.3f} | "
                         f"{c['magnitude']} | {imp} |")
        rank_path = out / "explain" / s / "ranks.json"
        lines += ["", "### Dimension importance", ""]
        if rank_path.exists():
            imp_doc = json.loads(rank_path.read_text(encoding="utf-8"))
            entry["dimension_ranks"] = imp_doc["ranks"]
            entry["dimension_median_abs_shap"] = imp_doc["medians"]
            lines += ["| dimension | SK-ESD rank | median sum of abs SHAP |", "|---|---|---|"]
            for dim in imp_doc["order"]:
                lines.append(f"| {dim} | {imp_doc['ranks'][dim]} | {imp_doc['medians'][dim]:.4f} |")
        else:
            lines.append("Not available: the explain stage has not been run for this setting.")
            entry["dimension_ranks"] = None
        lines.append("")
        summary["settings"][s] = entry
    return "\n".join(lines), summary


def stage_report(cfg: RunConfig, out: Path) -> None:
    text, summary = build_report(out)
    (out / "report").mkdir(parents=True, exist_ok=True)
    (out / "report" / "report.md").write_text(text, encoding="utf-8")
    dump_json(out / "report" / "report.json", summary)


# -- orchestration -------------------------------------------------------------

def _snapshot_files(out: Path) -> dict[str, str]:
    return {str(p.relative_to(out)): sha256(p) for p in sorted(out.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


def run_pipeline(cfg: RunConfig, stages: tuple[str, ...] = STAGES,
                 progress: Callable[[str], None] | None = None) -> dict:
    """Run ``stages`` in order and write ``manifest.json``; returns the manifest."""
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    seeds = {name: stage_seed(cfg.seed, name) for name in ("bootstrap", "permutation", "grid", "train", "explain")}
    collector = _WarningCollector()
    pkg_log = logging.getLogger("kumine")
    pkg_log.addHandler(collector)
    warnings: list[str] = []
    records = []
    ws: Workspace | None = None
    inputs = {p: sha256(cfg.path(p)) for p in [*cfg.repos, *cfg.history_repos, *cfg.profiles,
                                              *cfg.prs.values(), *(e["path"] for e in cfg.external_features)]
              if cfg.path(p).is_file()}
    try:
        for stage in stages:
            if progress:
                progress(stage)
            before = _snapshot_files(out)
            try:
                if stage in ("mine", "detect", "features", "label") and ws is None:
                    ws = Workspace.open(cfg)
                    warnings.extend(ws.warnings)
                if stage == "mine":
                    stage_mine(cfg, out, ws)
                elif stage == "detect":
                    stage_detect(cfg, out, ws)
                elif stage == "features":
                    stage_features(cfg, out, ws)
                elif stage == "label":
                    stage_label(cfg, out, ws)
                elif stage == "select":
                    stage_select(cfg, out, warnings)
                elif stage == "evaluate":
                    stage_evaluate(cfg, out, warnings, seeds)
                elif stage == "compare":
                    stage_compare(cfg, out)
                elif stage == "train":
                    stage_train(cfg, out, warnings, seeds)
                elif stage == "explain":
                    stage_explain(cfg, out, warnings, seeds)
                elif stage == "report":
                    stage_report(cfg, out)
                else:
                    raise StageError(stage, "unknown stage")
            except StageError:
                raise
            except MissingStageOutput as exc:
                raise MissingStageOutput(f"stage {stage} needs {exc}") from None
            except Exception as exc:
                raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc
            after = _snapshot_files(out)
            own = STAGE_DIRS.get(stage, stage) + "/"
            written = {p: d for p, d in after.items() if before.get(p) != d or p.startswith(own)}
            used = {p: d for p, d in before.items() if p.split("/", 1)[0] in UPSTREAM[stage]}
            if stage not in ("compare", "report"):
                used.update(inputs)
            records.append({"name": stage, "inputs": used, "outputs": written})
    finally:
        pkg_log.removeHandler(collector)
    if ws is not None:
        warnings.extend(w for w in ws.detector.warnings if w not in warnings)
    warnings.extend(m for m in collector.messages if m not in warnings)
    previous = out / "manifest.json"
    if set(stages) != set(STAGES) and previous.exists():
        # a partial run keeps the records of stages it did not touch
        old = json.loads(previous.read_text(encoding="utf-8"))
        fresh = {r["name"] for r in records}
        records = sorted([r for r in old.get("stages", []) if r["name"] not in fresh] + records,
                         key=lambda r: STAGES.index(r["name"]))
    manifest = {"version": 1, "tool": "kumine", "tool_version": __version__, "config": cfg.snapshot(),
                "seeds": {"root": cfg.seed, **seeds}, "stages": records, "warnings": warnings,
                "outputs": _snapshot_files(out)}
    dump_json(out / "manifest.json", manifest)
    return manifest
