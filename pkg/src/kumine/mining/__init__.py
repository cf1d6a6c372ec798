"""Offline repository mining: commits, snapshots, pull requests, identities."""

from .history import (build_pairs, commits_by, commits_in_window, initial_commit, link_identities,
                      previous_projects)
from .prs import load_pr_bundle, load_profiles
from .records import (CommitRecord, Comment, DevProjectPair, EmptyRepository, IdentityLink,
                      MiningError, NoCommitsForAuthor, PullRequest, RepoUnreadable, SchemaError,
                      UnknownCommit, format_timestamp, parse_timestamp)
from .repository import (BundleRepository, GitRepository, Repository, enumerate_commits,
                         open_repository, snapshot_files, write_bundle)

__all__ = [
    "BundleRepository", "Comment", "CommitRecord", "DevProjectPair", "EmptyRepository",
    "GitRepository", "IdentityLink", "MiningError", "NoCommitsForAuthor", "PullRequest",
    "RepoUnreadable", "Repository", "SchemaError", "UnknownCommit", "build_pairs", "commits_by",
    "commits_in_window", "enumerate_commits", "format_timestamp", "initial_commit",
    "link_identities", "load_pr_bundle", "load_profiles", "open_repository", "parse_timestamp",
    "previous_projects", "snapshot_files", "write_bundle",
]
