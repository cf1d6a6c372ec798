"""Repository backends: self-contained commit bundles and local git checkouts.

Commit-bundle format (JSON, version 1)::

    {
      "format": "kumine-commit-bundle",
      "version": 1,
      "project_id": "alpha",
      "commits": [
        {"id": "c1", "author_name": "Ada L", "author_time": "2020-01-01T00:00:00Z",
         "message": "init", "parents": [],
         "changed_paths": ["src/A.java"],            # optional, defaults to keys of files
         "files": {"src/A.java": "class A {}"}}      # null content deletes the path
      ]
    }

Commits are listed in history order; the snapshot at a commit is obtained by
replaying ``files`` of every commit up to and including it.
"""

from __future__ import annotations

import json
import logging
import subprocess
from collections.abc import Mapping
from datetime import datetime, timezone
from pathlib import Path

from .records import (CommitRecord, EmptyRepository, RepoUnreadable, SchemaError, UnknownCommit,
                      parse_timestamp)

log = logging.getLogger(__name__)

BUNDLE_FORMAT = "kumine-commit-bundle"
BUNDLE_VERSION = 1


def is_java(path: str) -> bool:
    return path.endswith(".java")


def sort_commits(commits) -> list[CommitRecord]:
    return sorted(commits, key=lambda c: c.sort_key)


class Repository:
    """Common interface of the two backends."""

    project_id: str

    def enumerate_commits(self, include_merges: bool = True) -> list[CommitRecord]:
        raise NotImplementedError

    def snapshot_files(self, commit_id: str) -> dict[str, str]:
        raise NotImplementedError


class BundleRepository(Repository):
    def __init__(self, path: str | Path | None = None, document: Mapping | None = None):
        if document is None:
            try:
                with open(path, encoding="utf-8") as fh:
                    document = json.load(fh)
            except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise RepoUnreadable(f"{path}: {exc}") from exc
        if not isinstance(document, Mapping) or document.get("format") != BUNDLE_FORMAT:
            raise RepoUnreadable(f"{path}: not a commit bundle")
        if document.get("version") != BUNDLE_VERSION:
            raise RepoUnreadable(f"{path}: unsupported bundle version {document.get('version')!r}")
        self.path = path
        self.project_id = str(document.get("project_id") or (Path(path).stem if path else "project"))
        self._records: list[CommitRecord] = []
        self._changes: list[dict[str, str | None]] = []
        self._position: dict[str, int] = {}
        for i, raw in enumerate(document.get("commits") or []):
            try:
                files = raw.get("files") or {}
                changed = raw.get("changed_paths")
                rec = CommitRecord(
                    id=str(raw["id"]),
                    author_name=str(raw["author_name"]),
                    author_time=parse_timestamp(raw["author_time"]),
                    message=str(raw.get("message", "")),
                    changed_paths=tuple(changed if changed is not None else files.keys()),
                    parents=tuple(raw.get("parents") or ()),
                )
            except KeyError as exc:
                raise SchemaError(i + 1, f"commits[{i}].{exc.args[0]}", "missing") from None
            except (ValueError, TypeError) as exc:
                raise SchemaError(i + 1, f"commits[{i}]", str(exc)) from None
            if rec.id in self._position:
                raise SchemaError(i + 1, f"commits[{i}].id", f"duplicate id {rec.id}")
            self._position[rec.id] = i
            self._records.append(rec)
            self._changes.append(dict(files))
        self._snapshots: dict[int, dict[str, str]] = {}

    def enumerate_commits(self, include_merges: bool = True) -> list[CommitRecord]:
        if not self._records:
            raise EmptyRepository(f"{self.path or self.project_id}: no commits")
        return sort_commits(c for c in self._records if include_merges or not c.is_merge)

    def _state(self, pos: int) -> dict[str, str]:
        if pos in self._snapshots:
            return self._snapshots[pos]
        start = max((p for p in self._snapshots if p < pos), default=-1)
        state = dict(self._snapshots[start]) if start >= 0 else {}
        for i in range(start + 1, pos + 1):
            for path, content in self._changes[i].items():
                if content is None:
                    state.pop(path, None)
                else:
                    state[path] = content
        self._snapshots[pos] = state
        return state

    def snapshot_files(self, commit_id: str) -> dict[str, str]:
        pos = self._position.get(commit_id)
        if pos is None:
            raise UnknownCommit(commit_id)
        return {p: c for p, c in self._state(pos).items() if is_java(p)}


class GitRepository(Repository):
    """Read history and blobs through the ``git`` executable."""

    def __init__(self, path: str | Path, project_id: str | None = None):
        self.path = Path(path)
        self.project_id = project_id or self.path.resolve().name
        try:
            self._git("rev-parse", "--git-dir")
        except RepoUnreadable:
            raise
        self._snapshots: dict[str, dict[str, str]] = {}

    def _git(self, *args: str, input: bytes | None = None) -> bytes:
        try:
            proc = subprocess.run(["git", "-C", str(self.path), *args], input=input,
                                  capture_output=True, check=False)
        except OSError as exc:
            raise RepoUnreadable(f"{self.path}: {exc}") from exc
        if proc.returncode != 0:
            raise RepoUnreadable(f"{self.path}: git {' '.join(args)}: {proc.stderr.decode(errors='replace').strip()}")
        return proc.stdout

    def enumerate_commits(self, include_merges: bool = True) -> list[CommitRecord]:
        try:
            self._git("rev-parse", "--verify", "HEAD")
        except RepoUnreadable as exc:
            raise EmptyRepository(f"{self.path}: no commits") from exc
        out = self._git("log", "HEAD", "--no-renames", "--diff-merges=first-parent", "--name-only",
                        "--format=%x1e%H%x1f%an%x1f%at%x1f%P%x1f%B%x1f")
        records = []
        for chunk in out.decode("utf-8", errors="replace").split("\x1e")[1:]:
            h, name, at, parents, body, names = chunk.split("\x1f", 5)
            rec = CommitRecord(
                id=h, author_name=name,
                author_time=datetime.fromtimestamp(int(at), tz=timezone.utc),
                message=body.strip(),
                changed_paths=tuple(p for p in names.splitlines() if p.strip()),
                parents=tuple(parents.split()),
            )
            if include_merges or not rec.is_merge:
                records.append(rec)
        if not records:
            raise EmptyRepository(f"{self.path}: no commits")
        return sort_commits(records)

    def snapshot_files(self, commit_id: str) -> dict[str, str]:
        if commit_id in self._snapshots:
            return dict(self._snapshots[commit_id])
        try:
            self._git("cat-file", "-e", f"{commit_id}^{{commit}}")
        except RepoUnreadable:
            raise UnknownCommit(commit_id) from None
        listing = self._git("ls-tree", "-r", "-z", commit_id).split(b"\0")
        wanted = []
        for entry in listing:
            if not entry:
                continue
            meta, _, path = entry.partition(b"\t")
            mode, kind, sha = meta.split()
            p = path.decode("utf-8", errors="surrogateescape")
            if kind == b"blob" and is_java(p):
                wanted.append((p, sha.decode()))
        files: dict[str, str] = {}
        if wanted:
            blob = self._git("cat-file", "--batch", input="".join(f"{s}\n" for _, s in wanted).encode())
            pos = 0
            for p, _ in wanted:
                header_end = blob.index(b"\n", pos)
                size = int(blob[pos:header_end].split()[2])
                data = blob[header_end + 1: header_end + 1 + size]
                pos = header_end + 1 + size + 1
                try:
                    files[p] = data.decode("utf-8")
                except UnicodeDecodeError:
                    log.warning("skipping non-UTF-8 file %s at %s", p, commit_id)
        self._snapshots[commit_id] = files
        return dict(files)


def open_repository(path: str | Path, project_id: str | None = None) -> Repository:
    """Open a commit bundle (a file) or a git working tree (a directory)."""
    p = Path(path)
    if p.is_dir():
        return GitRepository(p, project_id)
    if p.is_file():
        repo = BundleRepository(p)
        if project_id:
            repo.project_id = project_id
        return repo
    raise RepoUnreadable(f"{path}: no such file or directory")


def enumerate_commits(repo: Repository, include_merges: bool = True) -> list[CommitRecord]:
    return repo.enumerate_commits(include_merges)


def snapshot_files(repo: Repository, commit_id: str) -> dict[str, str]:
    return repo.snapshot_files(commit_id)


def write_bundle(path: str | Path, project_id: str, commits: list[dict]) -> None:
    doc = {"format": BUNDLE_FORMAT, "version": BUNDLE_VERSION, "project_id": project_id, "commits": commits}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
