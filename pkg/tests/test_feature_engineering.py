from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from kumine.features import (COLUMNS, DIMENSIONS, DuplicatePairKey, FeatureBuilder, FeatureMatrix, FeatureRow,
                             ProjectData, assemble_matrix, elementwise_median)
from kumine.ku import KuVector
from kumine.mining import build_pairs, link_identities, open_repository, write_bundle
from kumine.mining.records import Comment, PullRequest

T0 = datetime(2022, 1, 1, tzinfo=timezone.utc)
ABSTRACT = "abstract class Abs { abstract void m(); }"  # K6 = 2


def sync(n):
    return "class S%d { Object o; void m() { %s } }" % (n, " ".join("synchronized(o) { }" for _ in range(n)))


def stamp(day):
    return (T0 + timedelta(days=day)).strftime("%Y-%m-%dT%H:%M:%SZ")


def commit(cid, author, day, files):
    return {"id": cid, "author_name": author, "author_time": stamp(day), "files": files}


PROFILES = [("ada", "Ada L"), ("bo", "Bo"), ("cy", "Cy"), ("dz", "Dz"), ("ed", "Ed")]


@pytest.fixture
def world(tmp_path):
    main = [
        commit("m0", "Bo", 0, {"docs/x.md": "hi"}),
        commit("m1", "Cy", 1, {"cy/S5.java": sync(5)}),
        commit("m2", "Dz", 2, {"dz/S7.java": sync(7), "dz/Abs.java": ABSTRACT}),
        commit("m3", "Ada L", 10, {"ada/Abs.java": ABSTRACT}),
        commit("m4", "Ada L", 20, {"ada/Abs.java": ABSTRACT + "\n"}),
        commit("m5", "Ada L", 40, {"ada/Late.java": ABSTRACT}),
        commit("m6", "Ed", 50, {"notes.txt": "x"}),
    ]
    olds = {
        "old1": [commit("a1", "Ada L", -30, {"A.java": "class A { int a; int b; }"}),
                 commit("a2", "Bo", -20, {"B.java": sync(2)})],
        "old2": [commit("b1", "Ada L", -60, {"A.java": sync(4)})],
    }
    write_bundle(tmp_path / "main.json", "main", main)
    for pid, cs in olds.items():
        write_bundle(tmp_path / f"{pid}.json", pid, cs)
    projects = {}
    for pid in ["main", *olds]:
        repo = open_repository(tmp_path / f"{pid}.json")
        projects[pid] = ProjectData(pid, repo, repo.enumerate_commits(), accounts={u: n for u, n in PROFILES})
    projects["main"].prs = [PullRequest(1, "ada", T0 + timedelta(days=12), comments=(
        Comment("bo", T0 + timedelta(days=13)), Comment("cy", T0 + timedelta(days=13)),
        Comment("dz", T0 + timedelta(days=14)), Comment("ada", T0 + timedelta(days=14)),
        Comment("stranger", T0 + timedelta(days=14))))]
    all_commits = {pid: p.commits for pid, p in projects.items()}
    links = link_identities({c.author_name for cs in all_commits.values() for c in cs}, PROFILES)
    pairs = {p.developer.account_username: p for p in build_pairs("main", projects["main"].commits, links, all_commits)}
    return FeatureBuilder(projects), pairs


def test_dev_exp_sums_over_commit_file_occurrences(world):
    fb, pairs = world
    dev = fb.dev_exp(pairs["ada"])
    assert dev["K6"] == 4  # two in-window commits touching a file with K6=2; day 40 is outside
    assert fb.dev_exp(pairs["ed"]) == KuVector.zeros()  # no .java files in the window


def test_collab_exp_is_median_of_prior_sums(world):
    fb, pairs = world
    assert fb.collaborators(pairs["ada"]) == ["Bo", "Cy", "Dz"]
    # K16 prior sums: Bo 0 (only a markdown commit in this project), Cy 5, Dz 7 -> median 5
    assert fb.collab_exp(pairs["ada"])["K16"] == 5
    assert fb.collab_exp(pairs["bo"]) == KuVector.zeros()


def test_proj_is_prior_snapshot_sum(world):
    fb, pairs = world
    assert fb.proj(pairs["bo"]) == KuVector.zeros()  # joined with the first commit
    proj = fb.proj(pairs["ada"])
    assert proj["K16"] == 12 and proj["K6"] == 2


def test_previous_project_dimensions(world):
    fb, pairs = world
    assert pairs["ada"].previous_projects == ("old1", "old2")
    # PREV_EXP: Ada's own prior K16 sums in old1 (0) and old2 (4) -> median 2
    assert fb.prev_exp(pairs["ada"])["K16"] == 2
    # PREV_PROJ: snapshot sums before joining main: old1 holds B.java (2), old2 holds A.java (4) -> 3
    assert fb.prev_proj(pairs["ada"])["K16"] == 3
    assert fb.prev_exp(pairs["cy"]) == KuVector.zeros()
    assert fb.prev_proj(pairs["cy"]) == KuVector.zeros()


def test_median_examples():
    v = lambda k1: KuVector.from_mapping({"K1": k1})  # noqa: E731
    assert elementwise_median([]) == KuVector.zeros()
    assert elementwise_median([v(6)])["K1"] == 6
    assert elementwise_median([v(2), v(4), v(10)])["K1"] == 4
    assert elementwise_median([v(2), v(4)])["K1"] == 3
    assert elementwise_median([v(1), v(2), v(100)])["K1"] == 2


def test_assemble_shapes_and_names():
    empty = assemble_matrix([])
    assert empty.shape == (0, 140) and empty.columns == list(COLUMNS)
    assert empty.columns[0] == "DEV_EXP_K1" and empty.columns[-1] == "PREV_PROJ_K28"
    rows = [FeatureRow(("p", "a"), {"DEV_EXP": KuVector.from_mapping({"K2": 1})}),
            FeatureRow(("p", "b"), {"PROJ": KuVector.from_mapping({"K28": 3})})]
    m = assemble_matrix(rows, {"LTC-1": {("p", "a"): True, ("p", "b"): False}})
    assert m.shape == (2, 140)
    assert {d: len(ix) for d, ix in m.dimension_map.items()} == {d: 28 for d in DIMENSIONS}
    assert m.values[0, 1] == 1 and m.values[1, m.columns.index("PROJ_K28")] == 3 == m.values[1, 111]
    assert m.labels["LTC-1"].tolist() == [True, False]
    with pytest.raises(DuplicatePairKey):
        assemble_matrix(rows + rows[:1])


def test_csv_round_trip_and_join():
    rows = [FeatureRow(("p", "a"), {"DEV_EXP": KuVector.from_mapping({"K2": 1.5})})]
    m = assemble_matrix(rows)
    again = FeatureMatrix.from_csv(m.to_csv())
    assert again.keys == m.keys and again.columns == m.columns
    assert np.array_equal(again.values, m.values)
    assert again.dimension_map == m.dimension_map
    extra = FeatureMatrix([("p", "a")], [[7.0]], ["BASE_x"], {"BASELINE": [0]})
    joined = m.join(extra, "BASELINE")
    assert joined.dimension_map["BASELINE"] == [140] and joined.values[0, 140] == 7
    sub = joined.select(["DEV_EXP_K2", "BASE_x"])
    assert sub.dimension_map["DEV_EXP"] == [0] and sub.dimension_map["BASELINE"] == [1]


def test_row_has_all_dimensions(world):
    fb, pairs = world
    row = fb.row(pairs["ada"])
    assert set(row.dims) == set(DIMENSIONS) and len(row.values()) == 140
