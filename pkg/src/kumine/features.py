"""KU feature dimensions per developer-project pair."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np

from .ku.detect import Detector, KuVector, vector_sum
from .ku.rules import KU_IDS, N_KUS
from .ku.symbols import SymbolIndex
from .mining.history import commits_in_window
from .mining.records import CommitRecord, DevProjectPair, PullRequest
from .mining.repository import Repository, is_java

DIMENSIONS = ("DEV_EXP", "PREV_EXP", "COLLAB_EXP", "PROJ", "PREV_PROJ")
COLUMNS = tuple(f"{d}_{k}" for d in DIMENSIONS for k in KU_IDS)


class DuplicatePairKey(ValueError):
    pass


def elementwise_median(vectors: Sequence[KuVector]) -> KuVector:
    """Per-KU sample median; even counts average the two middle values; empty gives zeros."""
    if not vectors:
        return KuVector.zeros()
    arr = np.array([v.counts for v in vectors], dtype=float)
    med = np.median(arr, axis=0)
    return KuVector(tuple(float(x) for x in med))


@dataclass
class ProjectData:
    project_id: str
    repo: Repository
    commits: list[CommitRecord]
    prs: list[PullRequest] = field(default_factory=list)
    # account username -> commit author name
    accounts: dict[str, str] = field(default_factory=dict)


class FeatureBuilder:
    """Computes the five dimensions, sharing parse/detect/index caches across pairs."""

    def __init__(self, projects: Mapping[str, ProjectData], detector: Detector | None = None,
                 window_days: int = 30):
        self.projects = projects
        self.detector = detector or Detector()
        self.window_days = window_days
        self._indexes: dict[tuple[str, str], SymbolIndex] = {}
        self._changed: dict[tuple[str, str], KuVector] = {}
        self._full: dict[tuple[str, str], KuVector] = {}

    # -- snapshot helpers -------------------------------------------------------
    def _snapshot(self, pid: str, commit_id: str) -> tuple[dict[str, str], SymbolIndex]:
        files = self.projects[pid].repo.snapshot_files(commit_id)
        key = (pid, commit_id)
        if key not in self._indexes:
            self._indexes[key] = self.detector.index_for(files)
        return files, self._indexes[key]

    def changed_files_vector(self, pid: str, commit: CommitRecord) -> KuVector:
        """KU sum over the .java files a commit changed, measured at its own snapshot."""
        key = (pid, commit.id)
        if key not in self._changed:
            paths = [p for p in commit.changed_paths if is_java(p)]
            if not paths:
                self._changed[key] = KuVector.zeros()
            else:
                files, index = self._snapshot(pid, commit.id)
                # deleted paths are absent from the snapshot and contribute nothing
                self._changed[key] = self.detector.detect_snapshot(files, paths, index)
        return self._changed[key]

    def snapshot_vector(self, pid: str, commit: CommitRecord) -> KuVector:
        key = (pid, commit.id)
        if key not in self._full:
            files, index = self._snapshot(pid, commit.id)
            self._full[key] = self.detector.detect_snapshot(files, None, index)
        return self._full[key]

    @staticmethod
    def latest_before(commits: Sequence[CommitRecord], when) -> CommitRecord | None:
        before = [c for c in commits if c.author_time < when]
        return max(before, key=lambda c: c.sort_key) if before else None

    # -- dimensions ----------------------------------------------------------------
    def dev_exp(self, pair: DevProjectPair) -> KuVector:
        proj = self.projects[pair.project_id]
        window = commits_in_window(proj.commits, pair.author_name, pair.initial_commit.author_time,
                                   self.window_days)
        return vector_sum(self.changed_files_vector(pair.project_id, c) for c in window)

    def _prior_sum(self, pid: str, author: str, when) -> KuVector:
        proj = self.projects[pid]
        return vector_sum(self.changed_files_vector(pid, c) for c in proj.commits
                          if c.author_name == author and c.author_time < when)

    def prev_exp(self, pair: DevProjectPair) -> KuVector:
        when = pair.initial_commit.author_time
        return elementwise_median([self._prior_sum(pid, pair.author_name, when)
                                   for pid in pair.previous_projects if pid in self.projects])

    def collaborators(self, pair: DevProjectPair) -> list[str]:
        """Commit author names of linked comment authors on the developer's in-window PRs."""
        proj = self.projects[pair.project_id]
        start = pair.initial_commit.author_time
        end = start + timedelta(days=self.window_days)
        me = pair.developer.account_username
        users = set()
        for pr in proj.prs:
            if pr.author == me and start <= pr.created_at < end:
                users.update(c.author for c in pr.comments if c.author != me)
        return sorted({proj.accounts[u] for u in users if u in proj.accounts} - {pair.author_name})

    def collab_exp(self, pair: DevProjectPair) -> KuVector:
        when = pair.initial_commit.author_time
        return elementwise_median([self._prior_sum(pair.project_id, name, when)
                                   for name in self.collaborators(pair)])

    def proj(self, pair: DevProjectPair) -> KuVector:
        proj = self.projects[pair.project_id]
        prior = self.latest_before(proj.commits, pair.initial_commit.author_time)
        return self.snapshot_vector(pair.project_id, prior) if prior else KuVector.zeros()

    def prev_proj(self, pair: DevProjectPair) -> KuVector:
        when = pair.initial_commit.author_time
        sums = []
        for pid in pair.previous_projects:
            if pid not in self.projects:
                continue
            prior = self.latest_before(self.projects[pid].commits, when)
            sums.append(self.snapshot_vector(pid, prior) if prior else KuVector.zeros())
        return elementwise_median(sums)

    def row(self, pair: DevProjectPair) -> FeatureRow:
        return FeatureRow(pair.key, {
            "DEV_EXP": self.dev_exp(pair),
            "PREV_EXP": self.prev_exp(pair),
            "COLLAB_EXP": self.collab_exp(pair),
            "PROJ": self.proj(pair),
            "PREV_PROJ": self.prev_proj(pair),
        })


@dataclass(frozen=True)
class FeatureRow:
    key: tuple[str, str]
    dims: Mapping[str, KuVector]

    def values(self) -> list[float]:
        out = []
        for d in DIMENSIONS:
            out.extend(self.dims.get(d, KuVector.zeros()).counts)
        return out


@dataclass
class FeatureMatrix:
    keys: list[tuple[str, str]]
    values: np.ndarray
    columns: list[str]
    dimension_map: dict[str, list[int]]
    labels: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.keys), len(self.columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column_dimension(self) -> dict[str, str]:
        return {self.columns[i]: d for d, idx in self.dimension_map.items() for i in idx}

    def select(self, names: Sequence[str]) -> FeatureMatrix:
        pos = {c: i for i, c in enumerate(self.columns)}
        idx = [pos[n] for n in names]
        col_dim = self.column_dimension()
        dmap: dict[str, list[int]] = {d: [] for d in self.dimension_map}
        for j, n in enumerate(names):
            dmap.setdefault(col_dim.get(n, "OTHER"), []).append(j)
        return FeatureMatrix(list(self.keys), self.values[:, idx], list(names), dmap, dict(self.labels))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["project_id", "developer", *self.columns])
        for key, row in zip(self.keys, self.values):
            w.writerow([*key, *(_num(x) for x in row)])
        return buf.getvalue()

    def sidecar(self, knobs: Mapping | None = None) -> str:
        doc = {"version": 1, "columns": self.columns, "dimension_map": self.dimension_map,
               "knobs": dict(knobs or {})}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_csv(cls, text: str, dimension_map: Mapping[str, list[int]] | None = None) -> FeatureMatrix:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty feature CSV")
        header, body = rows[0], rows[1:]
        columns = header[2:]
        keys = [(r[0], r[1]) for r in body]
        values = np.array([[float(x) for x in r[2:]] for r in body], dtype=float).reshape(len(body), len(columns))
        if dimension_map is None:
            dmap: dict[str, list[int]] = {}
            for j, c in enumerate(columns):
                dim = c.rsplit("_K", 1)[0] if c.rsplit("_K", 1)[0] in DIMENSIONS else "OTHER"
                dmap.setdefault(dim, []).append(j)
            dimension_map = dmap
        return cls(keys, values, columns, {k: list(v) for k, v in dimension_map.items()})

    def join(self, other: FeatureMatrix, dimension: str = "EXTERNAL") -> FeatureMatrix:
        """Append ``other``'s columns (matched by pair key); missing rows raise KeyError."""
        pos = {k: i for i, k in enumerate(other.keys)}
        extra = np.array([other.values[pos[k]] for k in self.keys]).reshape(len(self.keys), len(other.columns))
        dmap = {d: list(v) for d, v in self.dimension_map.items()}
        base = len(self.columns)
        dmap.setdefault(dimension, []).extend(base + j for j in range(len(other.columns)))
        return FeatureMatrix(list(self.keys), np.hstack([self.values, extra]),
                             self.columns + list(other.columns), dmap, dict(self.labels))


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def assemble_matrix(rows: Iterable[FeatureRow],
                    labels: Mapping[str, Mapping[tuple[str, str], bool]] | None = None) -> FeatureMatrix:
    """Stack rows into a matrix with columns DEV_EXP_K1 .. PREV_PROJ_K28."""
    rows = list(rows)
    seen = set()
    for r in rows:
        if r.key in seen:
            raise DuplicatePairKey(f"duplicate pair key {r.key}")
        seen.add(r.key)
    values = np.array([r.values() for r in rows], dtype=float).reshape(len(rows), len(COLUMNS))
    dmap = {d: list(range(i * N_KUS, (i + 1) * N_KUS)) for i, d in enumerate(DIMENSIONS)}
    keys = [r.key for r in rows]
    lab = {}
    for setting, mapping in (labels or {}).items():
        lab[setting] = np.array([bool(mapping[k]) for k in keys], dtype=bool)
    return FeatureMatrix(keys, values, list(COLUMNS), dmap, lab)
