"""Command-line entry point.

Stage subcommands given ``--config`` run that stage inside the configured run
directory. ``train``, ``evaluate``, ``compare`` and ``explain`` also work on
explicit files, and ``detect --path`` reports KU vectors of Java sources.
Exit codes: 0 success, 1 fatal stage error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import ConfigError, load_config
from .features import DIMENSIONS, FeatureMatrix
from .ku.detect import Detector, KuVector
from .ku.rules import RulesetError, load_ruleset
from .learners import bootstrap_plan, run_experiment, train
from .learners.models import KINDS, Model
from .mining.records import MiningError
from .pipeline import (STAGES, MissingStageOutput, StageError, comparison, explain_model, labels_from_csv,
                       read_aucs, run_pipeline, write_csv, write_explanation)
from .synth import synth_corpus

log = logging.getLogger("kumine")


def _config(args):
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["output_dir"] = str(Path(args.out).resolve())
    return load_config(args.config, overrides)


def _run_stages(args, stages) -> int:
    cfg = _config(args)
    manifest = run_pipeline(cfg, stages, progress=lambda s: log.info("stage %s", s))
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(cfg.out)
    return 0


def _labels_for(path: str, keys, setting: str | None) -> tuple[np.ndarray, str]:
    label_keys, labels = labels_from_csv(Path(path))
    if not labels:
        raise ValueError(f"{path}: no labels")
    setting = setting or next(iter(labels))
    if setting not in labels:
        raise ValueError(f"{path}: no labels for {setting}")
    by_key = dict(zip(label_keys, labels[setting]))
    return np.array([by_key[k] for k in keys], dtype=bool), setting


def _matrix(path: str, sidecar: str | None = None) -> FeatureMatrix:
    dmap = None
    if sidecar:
        dmap = json.loads(Path(sidecar).read_text(encoding="utf-8"))["dimension_map"]
    return FeatureMatrix.from_csv(Path(path).read_text(encoding="utf-8"), dmap)


def _feature_set(matrix: FeatureMatrix, name: str, selection: dict | None) -> FeatureMatrix:
    if name in ("KULTC", "ALL"):
        m = matrix
    else:
        dim = name.removeprefix("KULTC_")
        if dim not in matrix.dimension_map:
            raise ValueError(f"unknown feature set {name!r}")
        m = matrix.select([matrix.columns[i] for i in matrix.dimension_map[dim]])
    if selection and name in selection:
        m = m.select([c for c in selection[name]["kept_columns"] if c in m.columns])
    return m


def _selection(path: str | None) -> dict | None:
    if not path:
        return None
    return json.loads(Path(path).read_text(encoding="utf-8"))["feature_sets"]


def cmd_mine(args) -> int:
    if args.config:
        return _run_stages(args, ("mine",))
    if not (args.repo and args.out):
        raise ConfigError("mine needs --config, or --repo and --out")
    out = Path(args.out).resolve()
    out.mkdir(parents=True, exist_ok=True)
    prs = {}
    for item in args.prs or []:
        pid, sep, path = item.partition("=")
        if not sep:
            pid, path = Path(item).stem, item
        prs[pid] = str(Path(path).resolve())
    doc = {"version": 1, "repos": [str(Path(r).resolve()) for r in args.repo],
           "history_repos": [str(Path(r).resolve()) for r in args.history_repo or []],
           "prs": prs, "profiles": [str(Path(p).resolve()) for p in args.profiles or []],
           "include_merges": not args.no_merges, "output_dir": "."}
    if args.seed is not None:
        doc["seed"] = args.seed
    (out / "config.yaml").write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    cfg = load_config(out / "config.yaml")
    run_pipeline(cfg, ("mine",))
    print(out / "config.yaml")
    return 0


def _pairs_config(args, stage: str):
    if args.config:
        return _config(args)
    if not args.pairs:
        raise ConfigError(f"{stage} needs --config or --pairs <mine output directory>")
    return load_config(Path(args.pairs) / "config.yaml")


def cmd_features(args) -> int:
    cfg = _pairs_config(args, "features")
    run_pipeline(cfg, ("features",))
    if args.out and not args.config:
        shutil.copyfile(cfg.out / "features" / "matrix.csv", args.out)
    print(cfg.out / "features" / "matrix.csv")
    return 0


def cmd_label(args) -> int:
    cfg = _pairs_config(args, "label")
    if args.T:
        cfg.settings = [args.T]
    run_pipeline(cfg, ("label",))
    if args.out and not args.config:
        shutil.copyfile(cfg.out / "labels" / "labels.csv", args.out)
    print(cfg.out / "labels" / "labels.csv")
    return 0


def cmd_detect(args) -> int:
    if args.config:
        return _run_stages(args, ("detect",))
    if not args.path:
        raise ConfigError("detect needs --config or --path")
    rules = load_ruleset(args.ruleset) if args.ruleset else None
    det = Detector(rules)
    root = Path(args.path)
    files = ({str(p.relative_to(root)): p.read_text(encoding="utf-8", errors="surrogateescape")
              for p in sorted(root.rglob("*.java"))} if root.is_dir()
             else {root.name: root.read_text(encoding="utf-8", errors="surrogateescape")})
    index = det.index_for(files)
    rows = [[p, *det.detect_text(files[p], index, p).counts] for p in sorted(files)]
    total = KuVector.zeros()
    for r in rows:
        total = total + KuVector(tuple(r[1:]))
    rows.append(["TOTAL", *total.counts])
    out = sys.stdout if not args.out else open(args.out, "w", encoding="utf-8")
    try:
        out.write("path," + KuVector.csv_header() + "\n")
        for r in rows:
            out.write(",".join([r[0], *(str(int(x)) for x in r[1:])]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    for w in det.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    if args.config:
        return _run_stages(args, ("train",))
    matrix = _feature_set(_matrix(args.matrix), args.feature_set, _selection(args.selection))
    y, setting = _labels_for(args.labels, matrix.keys, args.setting)
    params = json.loads(args.params) if args.params else {}
    model = train(args.model.upper(), params, matrix.values, y, args.seed or 0)
    model.save(args.out)
    (Path(args.out) / "model.json").write_text(json.dumps({
        "version": 1, "setting": setting, "kind": model.kind, "params": model.params, "seed": model.seed,
        "columns": matrix.columns,
        "dimension_map": {k: [matrix.columns[i] for i in v] for k, v in matrix.dimension_map.items()},
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def _parse_plan(text: str) -> dict:
    out = {"seed": 0, "reps": 100}
    for part in filter(None, text.split(",")):
        key, _, value = part.partition("=")
        if key not in out:
            raise ValueError(f"unknown plan key {key!r}")
        out[key] = int(value)
    return out


def cmd_evaluate(args) -> int:
    if args.config:
        return _run_stages(args, ("evaluate",))
    if not (args.matrix and args.labels and args.out):
        raise ConfigError("evaluate needs --config, or --matrix, --labels and --out")
    base = _matrix(args.matrix)
    selection = _selection(args.selection)
    names = [m for m in args.models.split(",") if m]
    sets = {n: _feature_set(base, n, selection).values for n in names}
    y, _ = _labels_for(args.labels, base.keys, args.setting)
    plan_args = _parse_plan(args.plan)
    plan = bootstrap_plan(len(y), plan_args["reps"], plan_args["seed"], labels=y)
    aucs = run_experiment(sets, y, plan, args.model.upper())
    write_csv(Path(args.out), ["model", "repetition", "auc"],
              [[n, i, repr(float(v))] for n in names for i, v in enumerate(aucs[n])])
    return 0


def cmd_compare(args) -> int:
    if args.config:
        return _run_stages(args, ("compare",))
    if not (args.aucs and args.pairs and args.out):
        raise ConfigError("compare needs --config, or --aucs, --pairs and --out")
    aucs = read_aucs(Path(args.aucs))
    comps = []
    for pair in args.pairs.split(","):
        model, _, baseline = pair.partition(":")
        if model not in aucs or baseline not in aucs:
            raise ValueError(f"pair {pair!r} names a model missing from {args.aucs}")
        comps.append(comparison(aucs, model, baseline))
    Path(args.out).write_text(json.dumps({"version": 1, "comparisons": comps}, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")
    return 0


def cmd_explain(args) -> int:
    if args.config:
        return _run_stages(args, ("explain",))
    if not (args.model and args.matrix and args.out):
        raise ConfigError("explain needs --config, or --model, --matrix and --out")
    model = Model.load(args.model)
    meta = json.loads((Path(args.model) / "model.json").read_text(encoding="utf-8"))
    matrix = _matrix(args.matrix, args.dimension_map).select(meta["columns"])
    if args.dimension_map:
        dmap = {d: [matrix.columns[i] for i in idx] for d, idx in matrix.dimension_map.items()}
    else:
        dmap = meta["dimension_map"]
    dmap = {d: cols for d, cols in dmap.items() if cols or d in DIMENSIONS}
    shap, dists, ranks = explain_model(model, matrix, dmap)
    outs = args.out.split(",")
    shap_path = Path(outs[0])
    write_explanation(shap_path.parent, matrix.keys, shap, dists, ranks)
    produced = shap_path.parent / "shap.csv", shap_path.parent / "ranks.json"
    for src, dst in zip(produced, [shap_path, Path(outs[1]) if len(outs) > 1 else produced[1]]):
        if src.resolve() != dst.resolve():
            src.replace(dst)
    return 0


def cmd_synth(args) -> int:
    corpus = synth_corpus(args.out, args.seed, args.projects, args.devs, args.ltc_fraction,
                          history=not args.no_history, baseline=not args.no_baseline)
    print(corpus.config_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kumine", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"kumine {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, required=False):
        sp.add_argument("--config", required=required, help="run configuration (YAML)")
        sp.add_argument("--seed", type=int, help="override the root seed")
        return sp

    sp = with_config(sub.add_parser("mine", help="mine pairs from repositories"))
    sp.add_argument("--repo", action="append", help="studied repository or commit bundle (repeatable)")
    sp.add_argument("--history-repo", action="append", help="repository consulted for previous projects only")
    sp.add_argument("--prs", action="append", help="PR bundle, optionally as project_id=path (repeatable)")
    sp.add_argument("--profiles", action="append", help="account profile file (repeatable)")
    sp.add_argument("--no-merges", action="store_true", help="drop merge commits")
    sp.add_argument("--out", help="output directory (run directory with --config)")
    sp.set_defaults(func=cmd_mine)

    sp = with_config(sub.add_parser("features", help="compute the KU feature matrix"))
    sp.add_argument("--pairs", help="directory written by mine")
    sp.add_argument("--out", help="copy matrix.csv here (run directory with --config)")
    sp.set_defaults(func=cmd_features)

    sp = with_config(sub.add_parser("label", help="label pairs as LTC or not"))
    sp.add_argument("--pairs", help="directory written by mine")
    sp.add_argument("--T", type=int, choices=[1, 2, 3], help="label a single setting")
    sp.add_argument("--out", help="copy labels.csv here (run directory with --config)")
    sp.set_defaults(func=cmd_label)

    for name in ("select", "report"):
        sp = with_config(sub.add_parser(name, help=f"run the {name} stage"), required=True)
        sp.add_argument("--out", help="override the run directory")
        sp.set_defaults(func=lambda a, n=name: _run_stages(a, (n,)))

    sp = with_config(sub.add_parser("run-all", help="run every stage"), required=True)
    sp.add_argument("--out", help="override the run directory")
    sp.set_defaults(func=lambda a: _run_stages(a, STAGES))

    sp = with_config(sub.add_parser("detect", help="KU vectors of a source tree, or the detect stage"))
    sp.add_argument("--path", help="Java file or directory")
    sp.add_argument("--ruleset", help="YAML ruleset")
    sp.add_argument("--out", help="CSV output (default stdout); run directory with --config")
    sp.set_defaults(func=cmd_detect)

    sp = with_config(sub.add_parser("train", help="train a classifier"))
    sp.add_argument("--matrix")
    sp.add_argument("--labels")
    sp.add_argument("--setting", help="label column, default the first")
    sp.add_argument("--model", default="rf", type=str.lower, choices=[k.lower() for k in KINDS])
    sp.add_argument("--params", help="JSON object of hyper-parameters")
    sp.add_argument("--selection", help="selection.json of the select stage")
    sp.add_argument("--feature-set", default="KULTC")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_train)

    sp = with_config(sub.add_parser("evaluate", help="paired out-of-sample bootstrap evaluation"))
    sp.add_argument("--matrix")
    sp.add_argument("--labels")
    sp.add_argument("--setting")
    sp.add_argument("--plan", default="seed=0,reps=100")
    sp.add_argument("--models", default="KULTC", help="comma-separated feature sets, e.g. KULTC,DEV_EXP")
    sp.add_argument("--model", default="rf", type=str.lower, choices=[k.lower() for k in KINDS])
    sp.add_argument("--selection")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_evaluate)

    sp = with_config(sub.add_parser("compare", help="Wilcoxon, Cliff's delta and normalized improvement"))
    sp.add_argument("--aucs")
    sp.add_argument("--pairs", help="comma-separated model:baseline pairs")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_compare)

    sp = with_config(sub.add_parser("explain", help="SHAP attributions and dimension ranks"))
    sp.add_argument("--model", help="model directory")
    sp.add_argument("--matrix")
    sp.add_argument("--dimension-map", help="matrix sidecar JSON")
    sp.add_argument("--out", help="shap.csv,ranks.json")
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("synth", help="write a synthetic corpus and config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--projects", type=int, default=4)
    sp.add_argument("--devs", type=int, default=40)
    sp.add_argument("--ltc-fraction", type=float, default=0.5)
    sp.add_argument("--no-history", action="store_true")
    sp.add_argument("--no-baseline", action="store_true")
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, RulesetError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MiningError, MissingStageOutput, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
