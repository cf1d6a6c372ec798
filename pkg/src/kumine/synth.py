"""Synthetic corpus with planted long-time contributors and a planted KU signal.

Every developer belongs to exactly one studied project. Planted LTCs stay for
more than a year, commit steadily, and the Java files they add during their
first 30 days lean on concurrency, streams, generics and exception handling;
the others leave within a year and their early files stick to basic
constructs. The KU signal therefore lives in the DEV_EXP dimension.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import yaml

from .labels import label_ltc
from .mining.records import CommitRecord, DevProjectPair, IdentityLink, format_timestamp
from .mining.repository import write_bundle

EPOCH = datetime(2015, 1, 1, tzinfo=timezone.utc)
DAY = timedelta(days=1)

PLAIN_IMPORTS = ""
RICH_IMPORTS = (
    "import java.util.List;\nimport java.util.ArrayList;\nimport java.util.Map;\nimport java.util.HashMap;\n"
    "import java.util.Optional;\nimport java.util.concurrent.ExecutorService;\n"
    "import java.util.concurrent.Executors;\nimport java.util.concurrent.atomic.AtomicInteger;\n"
    "import java.util.function.Function;\nimport java.util.stream.Collectors;\n"
)


def _plain_block(rng: np.random.Generator, tag: str) -> str:
    choice = int(rng.integers(0, 5))
    if choice == 0:
        return (f"    public int sum{tag}(int n) {{\n        int total = 0;\n"
                f"        for (int i = 0; i < n; i++) {{\n            total += i * {int(rng.integers(1, 9))};\n"
                f"        }}\n        return total;\n    }}\n")
    if choice == 1:
        return (f"    public String grade{tag}(int score) {{\n        if (score > {int(rng.integers(10, 90))}) {{\n"
                f"            return \"pass\";\n        }} else {{\n            return \"fail\";\n        }}\n    }}\n")
    if choice == 2:
        return (f"    private int value{tag};\n\n    public int getValue{tag}() {{\n        return value{tag};\n    }}\n\n"
                f"    public void setValue{tag}(int value) {{\n        this.value{tag} = value;\n    }}\n")
    if choice == 3:
        return (f"    public int countdown{tag}(int start) {{\n        int steps = 0;\n        while (start > 0) {{\n"
                f"            start -= {int(rng.integers(1, 4))};\n            steps++;\n        }}\n        return steps;\n    }}\n")
    return (f"    public double average{tag}() {{\n        int[] values = new int[{int(rng.integers(2, 9))}];\n"
            f"        double sum = 0;\n        for (int v : values) {{\n            sum += v;\n        }}\n"
            f"        return sum / values.length;\n    }}\n")


def _rich_block(rng: np.random.Generator, tag: str) -> str:
    choice = int(rng.integers(0, 6))
    if choice == 0:
        return (f"    private final AtomicInteger counter{tag} = new AtomicInteger();\n\n"
                f"    public void launch{tag}(int jobs) {{\n"
                f"        ExecutorService pool = Executors.newFixedThreadPool({int(rng.integers(2, 9))});\n"
                f"        for (int i = 0; i < jobs; i++) {{\n            pool.submit(() -> counter{tag}.incrementAndGet());\n"
                f"        }}\n        pool.shutdown();\n    }}\n")
    if choice == 1:
        return (f"    public List<String> upper{tag}(List<String> words) {{\n"
                f"        return words.stream().filter(w -> w.length() > {int(rng.integers(1, 5))})"
                f".map(String::toUpperCase).collect(Collectors.toList());\n    }}\n")
    if choice == 2:
        return (f"    public <T extends Comparable<T>> Optional<T> largest{tag}(List<T> items) {{\n"
                f"        T best = null;\n        for (T item : items) {{\n"
                f"            if (best == null || item.compareTo(best) > 0) {{\n                best = item;\n"
                f"            }}\n        }}\n        return Optional.ofNullable(best);\n    }}\n")
    if choice == 3:
        return (f"    public synchronized int parse{tag}(String text) {{\n        try {{\n"
                f"            return Integer.parseInt(text.trim());\n        }} catch (NumberFormatException e) {{\n"
                f"            throw new IllegalStateException(\"bad input\", e);\n        }} finally {{\n"
                f"            counter{tag}++;\n        }}\n    }}\n\n    private int counter{tag};\n")
    if choice == 4:
        return (f"    public Map<String, Integer> index{tag}(List<String> keys) {{\n"
                f"        Map<String, Integer> out = new HashMap<>();\n"
                f"        Function<String, Integer> weight = k -> k.length() * {int(rng.integers(2, 7))};\n"
                f"        keys.forEach(k -> out.put(k, weight.apply(k)));\n        return out;\n    }}\n")
    return (f"    public List<Integer> squares{tag}(int n) {{\n        List<Integer> out = new ArrayList<>();\n"
            f"        Runnable fill = () -> {{\n            for (int i = 0; i < n; i++) {{\n"
            f"                out.add(i * i);\n            }}\n        }};\n"
            f"        Thread worker = new Thread(fill);\n        worker.start();\n        try {{\n"
            f"            worker.join();\n        }} catch (InterruptedException e) {{\n"
            f"            Thread.currentThread().interrupt();\n        }}\n        return out;\n    }}\n")


def java_file(rng: np.random.Generator, package: str, cls: str, rich_share: float, blocks: int) -> str:
    body = []
    rich_any = False
    for b in range(blocks):
        if rng.random() < rich_share:
            body.append(_rich_block(rng, f"{cls}{b}"))
            rich_any = True
        else:
            body.append(_plain_block(rng, f"{cls}{b}"))
    imports = RICH_IMPORTS if rich_any else PLAIN_IMPORTS
    return f"package {package};\n\n{imports}\npublic class {cls} {{\n\n" + "\n".join(body) + "}\n"


@dataclass
class _Dev:
    index: int
    username: str
    author: str
    project: str
    is_ltc: bool
    join: datetime


@dataclass
class SynthCorpus:
    root: Path
    config_path: Path
    planted: dict[tuple[str, str], bool]


def _commit_id(*parts) -> str:
    return hashlib.sha1(":".join(map(str, parts)).encode()).hexdigest()


def synth_corpus(out_dir: str | Path, seed: int = 0, n_projects: int = 4, n_devs: int = 40,
                 ltc_fraction: float = 0.5, history: bool = True, baseline: bool = True) -> SynthCorpus:
    """Write a corpus plus a ready-to-run config under ``out_dir``."""
    if n_projects < 1 or n_devs < 1:
        raise ValueError("n_projects and n_devs must be positive")
    if not 0 < ltc_fraction < 1:
        raise ValueError("ltc_fraction must lie in (0, 1)")
    root = Path(out_dir)
    for sub in ("repos", "prs", "history"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    n_ltc = int(np.floor(ltc_fraction * n_devs + 0.5))
    ltc_mask = np.zeros(n_devs, dtype=bool)
    ltc_mask[rng.permutation(n_devs)[:n_ltc]] = True
    projects = [f"proj{p:02d}" for p in range(n_projects)]
    founded = {pid: EPOCH + p * 30 * DAY for p, pid in enumerate(projects)}
    devs = []
    for i in range(n_devs):
        pid = projects[i % n_projects]
        join = founded[pid] + DAY + timedelta(seconds=int(rng.integers(0, 500 * 86400)))
        devs.append(_Dev(i, f"dev{i:03d}", f"Dev {i:03d}", pid, bool(ltc_mask[i]), join))

    commits: dict[str, list[dict]] = {pid: [] for pid in projects}
    prs: dict[str, list[dict]] = {pid: [] for pid in projects}
    activity: dict[str, dict[str, float]] = {}

    for pid in projects:
        t0 = founded[pid]
        text = java_file(rng, f"org.{pid}.core", "Core", 0.3, 4)
        commits[pid].append({"author_name": "Project Bot", "when": t0, "message": "initial import",
                             "files": {f"src/main/java/org/{pid}/core/Core.java": text}})

    for dev in devs:
        pid = dev.project
        pkg = f"org.{pid}.{dev.username}"
        base = f"src/main/java/org/{pid}/{dev.username}"
        n_window = int(rng.integers(3, 7)) if dev.is_ltc else int(rng.integers(1, 5))
        offsets = sorted([0.0] + list(rng.uniform(0.1, 29.0, size=n_window - 1)))
        rich_share = 0.8 if dev.is_ltc else 0.1
        peers = [d for d in devs if d.project == pid and d.join < dev.join]
        for k, off in enumerate(offsets):
            when = dev.join + timedelta(seconds=int(off * 86400))
            path = f"{base}/Part{k}.java"
            commits[pid].append({"author_name": dev.author, "when": when, "message": f"add part {k}",
                                 "files": {path: java_file(rng, pkg, f"Part{k}", rich_share, int(rng.integers(2, 5)))}})
            comments = []
            if peers:
                for reviewer in rng.choice(len(peers), size=min(len(peers), int(rng.integers(0, 3))), replace=False):
                    comments.append({"author": peers[int(reviewer)].username,
                                     "created_at": format_timestamp(when + timedelta(hours=2 + int(reviewer) % 5)),
                                     "body": "looks good"})
            if rng.random() < 0.3:
                comments.append({"author": "outside-reviewer", "created_at": format_timestamp(when + timedelta(hours=1)),
                                 "body": "nit"})
            prs[pid].append({"author": dev.username, "created_at": format_timestamp(when + timedelta(minutes=30)),
                             "changed_files": [path], "comments": comments})
        if dev.is_ltc:
            stay = float(rng.uniform(400, 1300))
            t = 30.0 + float(rng.uniform(0, 5))
            step = 0
            while t < stay:
                commits[pid].append(_maintenance(rng, dev, pkg, base, dev.join + timedelta(seconds=int(t * 86400)), step))
                step += 1
                t += float(rng.uniform(4, 9))
            commits[pid].append(_maintenance(rng, dev, pkg, base, dev.join + timedelta(seconds=int(stay * 86400)), step))
        else:
            extra = int(rng.integers(0, 4))
            stay = float(rng.uniform(offsets[-1], 300))
            for step in range(extra):
                t = float(rng.uniform(offsets[-1], stay))
                commits[pid].append(_maintenance(rng, dev, pkg, base, dev.join + timedelta(seconds=int(t * 86400)), step))
        gap = offsets[1] if len(offsets) > 1 else 30.0
        activity[dev.username] = {"window_commits": n_window, "window_prs": n_window, "first_gap": float(gap)}

    records = {pid: _finalize(pid, commits[pid]) for pid in projects}
    _enforce_labels(rng, devs, commits, records)

    for pid in projects:
        write_bundle(root / "repos" / f"{pid}.json", pid, records[pid])
        ordered = sorted(prs[pid], key=lambda pr: (pr["created_at"], pr["author"]))
        for n, pr in enumerate(ordered, start=1):
            pr["pr_id"] = n
        (root / "prs" / f"{pid}.json").write_text(
            json.dumps({"format": "kumine-pr-bundle", "version": 1, "pull_requests": ordered}, indent=1,
                       sort_keys=True) + "\n", encoding="utf-8")

    history_paths = []
    if history:
        history_paths.append(_write_history(rng, root, devs))

    profiles = [{"username": d.username, "display_name": d.author} for d in devs]
    profiles.append({"username": "outside-reviewer", "display_name": "Outside Reviewer"})
    (root / "profiles.json").write_text(json.dumps(profiles, indent=1) + "\n", encoding="utf-8")

    planted = {(d.project, d.username): d.is_ltc for d in devs}
    (root / "planted.json").write_text(json.dumps({
        "version": 1, "seed": seed, "setting": "LTC-1", "driving_dimension": "DEV_EXP",
        "labels": {f"{p}/{u}": v for (p, u), v in sorted(planted.items())}}, indent=1) + "\n", encoding="utf-8")

    external = []
    if baseline:
        with open(root / "baseline.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["project_id", "developer", "BASE_window_commits", "BASE_window_prs", "BASE_first_gap_days"])
            for d in devs:
                a = activity[d.username]
                w.writerow([d.project, d.username, a["window_commits"], a["window_prs"], round(a["first_gap"], 3)])
        external.append({"path": "baseline.csv", "dimension": "BASELINE"})

    config = {
        "version": 1,
        "repos": [f"repos/{pid}.json" for pid in projects],
        "history_repos": history_paths,
        "prs": {pid: f"prs/{pid}.json" for pid in projects},
        "profiles": ["profiles.json"],
        "external_features": external,
        "settings": [1, 2, 3],
        "seed": seed,
        "output_dir": "run",
    }
    config_path = root / "config.yaml"
    config_path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    return SynthCorpus(root, config_path, planted)


def _maintenance(rng, dev: _Dev, pkg: str, base: str, when: datetime, step: int) -> dict:
    if rng.random() < 0.15:
        files = {f"{base}/Notes.java": java_file(rng, pkg, "Notes", 0.0, 1)}
    else:
        files = {f"docs/{dev.username}.md": f"# notes of {dev.author}\n\nrevision {step}\n"}
    return {"author_name": dev.author, "when": when, "message": f"maintenance {step}", "files": files}


def _finalize(pid: str, raw: list[dict]) -> list[dict]:
    ordered = sorted(raw, key=lambda c: (c["when"], c["author_name"], c["message"]))
    out, parent = [], None
    for n, c in enumerate(ordered):
        cid = _commit_id(pid, n, c["author_name"], c["when"].isoformat())
        out.append({"id": cid, "author_name": c["author_name"], "author_time": format_timestamp(c["when"]),
                    "message": c["message"], "parents": [parent] if parent else [], "files": c["files"]})
        parent = cid
    return out


def _records(bundle: list[dict]) -> list[CommitRecord]:
    return [CommitRecord.from_json({**c, "changed_paths": list(c["files"])}) for c in bundle]


def _enforce_labels(rng, devs: list[_Dev], commits: dict[str, list[dict]], records: dict[str, list[dict]],
                    max_rounds: int = 20) -> None:
    """Top up planted LTCs whose first-year activity is not above the peer threshold."""
    for _ in range(max_rounds):
        changed = False
        for pid in records:
            recs = _records(records[pid])
            for dev in (d for d in devs if d.project == pid and d.is_ltc):
                first = min((r for r in recs if r.author_name == dev.author), key=lambda r: r.sort_key)
                pair = DevProjectPair(pid, IdentityLink(dev.author, dev.username, dev.author), first, ())
                label = label_ltc(pair, recs, 1)
                if not label.is_ltc:
                    window = label.yearly_counts[0]
                    need = int(window.threshold - window.dev_commits) + 2
                    base = f"src/main/java/org/{pid}/{dev.username}"
                    for step in range(need):
                        when = first.author_time + timedelta(days=float(rng.uniform(31, 360)))
                        commits[pid].append(_maintenance(rng, dev, f"org.{pid}.{dev.username}", base, when,
                                                         1000 + step))
                    changed = True
            records[pid] = _finalize(pid, commits[pid])
        if not changed:
            return
    raise RuntimeError("could not make planted labels consistent")


def _write_history(rng, root: Path, devs: list[_Dev]) -> str:
    """A non-studied project where some developers committed before joining."""
    start = EPOCH - 400 * DAY
    raw = [{"author_name": "Legacy Bot", "when": start, "message": "import",
            "files": {"src/main/java/org/legacy/Base.java": java_file(rng, "org.legacy", "Base", 0.5, 3)}}]
    for dev in devs:
        if rng.random() >= 0.3:
            continue
        for k in range(int(rng.integers(2, 6))):
            when = start + DAY + timedelta(seconds=int(rng.uniform(0, (dev.join - start).total_seconds() - 2 * 86400)))
            raw.append({"author_name": dev.author, "when": when, "message": f"legacy {k}",
                        "files": {f"src/main/java/org/legacy/{dev.username}/L{k}.java":
                                  java_file(rng, f"org.legacy.{dev.username}", f"L{k}", 0.5, 2)}})
    write_bundle(root / "history" / "legacy.json", "legacy", _finalize("legacy", raw))
    return "history/legacy.json"
