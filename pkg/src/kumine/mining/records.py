"""Record types shared by the mining backends."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone


class MiningError(Exception):
    pass


class RepoUnreadable(MiningError):
    pass


class EmptyRepository(MiningError):
    pass


class UnknownCommit(MiningError):
    pass


class NoCommitsForAuthor(MiningError):
    pass


class SchemaError(MiningError):
    def __init__(self, line: int, field: str, message: str = "invalid value"):
        self.line = line
        self.field = field
        super().__init__(f"line {line}: {field}: {message}")


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime (naive input is read as UTC)."""
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, order=False)
class CommitRecord:
    id: str
    author_name: str
    author_time: datetime
    message: str = ""
    changed_paths: tuple[str, ...] = ()
    parents: tuple[str, ...] = ()

    def __post_init__(self):
        if self.author_time.tzinfo is None:
            raise ValueError("author_time must be timezone-aware")
        object.__setattr__(self, "changed_paths", tuple(dict.fromkeys(self.changed_paths)))

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.author_time, self.id)

    @property
    def is_merge(self) -> bool:
        return len(self.parents) > 1

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "author_name": self.author_name,
            "author_time": format_timestamp(self.author_time),
            "message": self.message,
            "changed_paths": list(self.changed_paths),
            "parents": list(self.parents),
        }

    @classmethod
    def from_json(cls, d: dict) -> CommitRecord:
        return cls(d["id"], d["author_name"], parse_timestamp(d["author_time"]), d.get("message", ""),
                   tuple(d.get("changed_paths", ())), tuple(d.get("parents", ())))


@dataclass(frozen=True)
class Comment:
    author: str
    created_at: datetime
    body: str = ""


@dataclass(frozen=True)
class PullRequest:
    pr_id: int
    author: str
    created_at: datetime
    changed_files: tuple[str, ...] = ()
    comments: tuple[Comment, ...] = ()


@dataclass(frozen=True)
class IdentityLink:
    commit_author_name: str
    account_username: str
    display_name: str


@dataclass(frozen=True)
class DevProjectPair:
    project_id: str
    developer: IdentityLink
    initial_commit: CommitRecord
    previous_projects: tuple[str, ...] = field(default=())

    @property
    def key(self) -> tuple[str, str]:
        return (self.project_id, self.developer.account_username)

    @property
    def author_name(self) -> str:
        return self.developer.commit_author_name
