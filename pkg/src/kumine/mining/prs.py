"""Pull-request bundles and account-profile files.

A PR bundle is either a bare JSON list of pull requests or a mapping
``{"format": "kumine-pr-bundle", "version": 1, "pull_requests": [...]}``.
Each pull request::

    {"pr_id": 7, "author": "ada", "created_at": "2020-01-02T10:00:00Z",
     "changed_files": ["src/A.java"],
     "comments": [{"author": "bob", "created_at": "2020-01-03T08:00:00Z", "body": "lgtm"}]}

A profile file is a JSON list of ``{"username": ..., "display_name": ...}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .records import Comment, PullRequest, SchemaError, format_timestamp, parse_timestamp

PR_FORMAT = "kumine-pr-bundle"


def _elements(text: str, key: str | None) -> list[tuple[int, object]]:
    """Decode the top-level list element by element, remembering each one's line."""
    dec = json.JSONDecoder()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.lineno, "<document>", exc.msg) from None
    if isinstance(doc, dict):
        if key is None or key not in doc:
            raise SchemaError(1, key or "<document>", "expected a list")
        if doc.get("version", 1) != 1:
            raise SchemaError(1, "version", f"unsupported version {doc.get('version')!r}")
        # locate the list inside the mapping to keep line numbers meaningful
        start = text.index("[", text.index(f'"{key}"'))
    elif isinstance(doc, list):
        start = text.index("[")
    else:
        raise SchemaError(1, "<document>", "expected a list")
    out = []
    pos = start + 1
    n = len(text)
    while True:
        while pos < n and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= n or text[pos] == "]":
            break
        value, end = dec.raw_decode(text, pos)
        out.append((text.count("\n", 0, pos) + 1, value))
        pos = end
    return out


def _require(obj: dict, field: str, line: int, prefix: str, kind=None):
    if not isinstance(obj, dict) or field not in obj:
        raise SchemaError(line, f"{prefix}{field}", "missing")
    value = obj[field]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(line, f"{prefix}{field}", f"expected {kind.__name__}")
    return value


def _timestamp(obj: dict, field: str, line: int, prefix: str):
    raw = _require(obj, field, line, prefix)
    try:
        return parse_timestamp(raw)
    except (ValueError, TypeError):
        raise SchemaError(line, f"{prefix}{field}", f"malformed timestamp {raw!r}") from None


def load_pr_bundle(path: str | Path) -> list[PullRequest]:
    text = Path(path).read_text(encoding="utf-8")
    prs = []
    seen = set()
    for idx, (line, raw) in enumerate(_elements(text, "pull_requests")):
        pre = f"[{idx}]."
        pr_id = _require(raw, "pr_id", line, pre)
        if isinstance(pr_id, bool) or not isinstance(pr_id, int):
            raise SchemaError(line, f"{pre}pr_id", "expected integer")
        if pr_id in seen:
            raise SchemaError(line, f"{pre}pr_id", f"duplicate pr_id {pr_id}")
        seen.add(pr_id)
        author = _require(raw, "author", line, pre, str)
        created = _timestamp(raw, "created_at", line, pre)
        files = raw.get("changed_files", [])
        if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
            raise SchemaError(line, f"{pre}changed_files", "expected list of paths")
        comments = []
        raw_comments = raw.get("comments", [])
        if not isinstance(raw_comments, list):
            raise SchemaError(line, f"{pre}comments", "expected list")
        for j, c in enumerate(raw_comments):
            cpre = f"{pre}comments[{j}]."
            comments.append(Comment(_require(c, "author", line, cpre, str),
                                    _timestamp(c, "created_at", line, cpre),
                                    str(c.get("body", ""))))
        prs.append(PullRequest(pr_id, author, created, tuple(files), tuple(comments)))
    return prs


def load_profiles(path: str | Path) -> list[tuple[str, str]]:
    text = Path(path).read_text(encoding="utf-8")
    out = []
    for idx, (line, raw) in enumerate(_elements(text, "profiles")):
        pre = f"[{idx}]."
        out.append((_require(raw, "username", line, pre, str), _require(raw, "display_name", line, pre, str)))
    return out


def pr_to_json(pr: PullRequest) -> dict:
    return {
        "pr_id": pr.pr_id,
        "author": pr.author,
        "created_at": format_timestamp(pr.created_at),
        "changed_files": list(pr.changed_files),
        "comments": [{"author": c.author, "created_at": format_timestamp(c.created_at), "body": c.body}
                     for c in pr.comments],
    }
