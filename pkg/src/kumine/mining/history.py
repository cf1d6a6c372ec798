"""Commit-history queries: initial commits, windows, identity links, previous projects."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timedelta

from .records import CommitRecord, DevProjectPair, IdentityLink, NoCommitsForAuthor

log = logging.getLogger(__name__)


def commits_by(commits: Iterable[CommitRecord], author_name: str) -> list[CommitRecord]:
    return sorted((c for c in commits if c.author_name == author_name), key=lambda c: c.sort_key)


def initial_commit(commits: Iterable[CommitRecord], author_name: str) -> CommitRecord:
    mine = [c for c in commits if c.author_name == author_name]
    if not mine:
        raise NoCommitsForAuthor(author_name)
    return min(mine, key=lambda c: c.sort_key)


def commits_in_window(commits: Iterable[CommitRecord], author_name: str, start: datetime,
                      days: int) -> list[CommitRecord]:
    """Author's commits with ``start <= author_time < start + days``."""
    if days <= 0:
        raise ValueError("days must be positive")
    end = start + timedelta(days=days)
    return sorted((c for c in commits if c.author_name == author_name and start <= c.author_time < end),
                  key=lambda c: c.sort_key)


def link_identities(author_names: Iterable[str],
                    profiles: Iterable[tuple[str, str]]) -> list[IdentityLink]:
    """Link commit author names to accounts whose display name matches exactly.

    An author name matching more than one account is ambiguous and left unlinked.
    """
    by_display: dict[str, set[str]] = {}
    for username, display in profiles:
        by_display.setdefault(display, set()).add(username)
    links = []
    for name in sorted(set(author_names)):
        users = by_display.get(name)
        if not users:
            continue
        if len(users) > 1:
            log.warning("ambiguous identity for author %r: %s", name, ", ".join(sorted(users)))
            continue
        links.append(IdentityLink(name, next(iter(users)), name))
    return links


def previous_projects(author_name: str, initial: CommitRecord,
                      other_repos: Mapping[str, Sequence[CommitRecord]],
                      exclude: str | None = None) -> list[str]:
    """Projects where the author committed strictly before ``initial``."""
    out = []
    for pid in sorted(other_repos):
        if pid == exclude:
            continue
        if any(c.author_name == author_name and c.author_time < initial.author_time for c in other_repos[pid]):
            out.append(pid)
    return out


def build_pairs(project_id: str, commits: Sequence[CommitRecord], links: Iterable[IdentityLink],
                all_repos: Mapping[str, Sequence[CommitRecord]]) -> list[DevProjectPair]:
    """One pair per linked developer with at least one commit in the project."""
    pairs = []
    authors = {c.author_name for c in commits}
    for link in sorted(links, key=lambda l: l.account_username):
        if link.commit_author_name not in authors:
            continue
        first = initial_commit(commits, link.commit_author_name)
        prev = previous_projects(link.commit_author_name, first, all_repos, exclude=project_id)
        pairs.append(DevProjectPair(project_id, link, first, tuple(prev)))
    return pairs
