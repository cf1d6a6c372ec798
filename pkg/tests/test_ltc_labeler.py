import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kumine.labels import label_ltc, nearest_rank
from kumine.mining.records import CommitRecord, DevProjectPair, IdentityLink

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)
DEV = "Dana"


def c(cid, author, day):
    return CommitRecord(cid, author, T0 + timedelta(days=day))


def pair_for(commits):
    first = min((x for x in commits if x.author_name == DEV), key=lambda x: x.sort_key)
    return DevProjectPair("p", IdentityLink(DEV, "dana", DEV), first)


def test_short_stay_fails_duration():
    commits = [c("a", DEV, 0), c("b", DEV, 10)]
    label = label_ltc(pair_for(commits), commits, 1)
    assert not label.duration_ok and not label.is_ltc
    assert label.duration_days == 10


def test_sole_committer_has_zero_threshold():
    commits = [c("a", DEV, 0), c("b", DEV, 400)]
    label = label_ltc(pair_for(commits), commits, 1)
    window = label.yearly_counts[0]
    assert window.n_others == 0 and window.threshold == 0 and window.dev_commits == 1
    assert label.is_ltc


def test_nearest_rank():
    assert nearest_rank([], 10) == 0
    assert nearest_rank(list(range(1, 12)), 10) == 2
    assert nearest_rank([5], 10) == 5
    assert nearest_rank([3, 1, 2], 100) == 3
    with pytest.raises(ValueError):
        nearest_rank([1], 0)


def test_one_entry_per_year_and_setting_name():
    commits = [c("a", DEV, 0), c("b", DEV, 1200)]
    for t in (1, 2, 3):
        label = label_ltc(pair_for(commits), commits, t)
        assert label.setting == f"LTC-{t}" and len(label.yearly_counts) == t


def test_empty_middle_year_fails_productivity():
    commits = [c("a", DEV, 0), c("b", DEV, 800), c("o1", "Other", 400)]
    label = label_ltc(pair_for(commits), commits, 2)
    assert label.duration_ok
    assert label.yearly_counts[1].dev_commits == 0 and not label.yearly_counts[1].passed
    assert not label.is_ltc


def test_windows_are_join_anchored_and_half_open():
    commits = [c("a", DEV, 0), c("b", DEV, 365), c("x", DEV, 800)]
    label = label_ltc(pair_for(commits), commits, 2)
    assert [w.dev_commits for w in label.yearly_counts] == [1, 1]


def test_invalid_setting():
    commits = [c("a", DEV, 0)]
    with pytest.raises(ValueError):
        label_ltc(pair_for(commits), commits, 4)


def _history(dev_days, others):
    commits = [c(f"d{i}", DEV, d) for i, d in enumerate(dev_days)]
    for name, days in others.items():
        commits += [c(f"{name}{i}", name, d) for i, d in enumerate(days)]
    return commits


days = st.lists(st.integers(0, 1200), min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(days, st.dictionaries(st.sampled_from(["o1", "o2", "o3", "o4"]), days, max_size=4),
       st.lists(st.integers(0, 1200), min_size=1, max_size=5))
def test_more_developer_commits_never_unlabel(dev_days, others, extra):
    dev_days = [0] + dev_days
    commits = _history(dev_days, others)
    more = commits + [c(f"x{i}", DEV, d) for i, d in enumerate(extra)]
    for t in (1, 2, 3):
        if label_ltc(pair_for(commits), commits, t).is_ltc:
            assert label_ltc(pair_for(more), more, t).is_ltc


@settings(max_examples=60, deadline=None)
@given(days, st.dictionaries(st.sampled_from(["o1", "o2", "o3"]), days, max_size=3), st.randoms())
def test_label_ignores_commit_order(dev_days, others, rnd):
    commits = _history([0] + dev_days, others)
    shuffled = list(commits)
    rnd.shuffle(shuffled)
    for t in (1, 2, 3):
        assert label_ltc(pair_for(commits), commits, t) == label_ltc(pair_for(commits), shuffled, t)


def test_monotone_in_t_when_thresholds_shared():
    rng = random.Random(9)
    for _ in range(200):
        dev = [0] + [rng.randint(0, 1200) for _ in range(rng.randint(0, 10))]
        others = {f"o{k}": [rng.randint(0, 1200) for _ in range(rng.randint(1, 8))] for k in range(3)}
        commits = _history(dev, others)
        l1, l2, l3 = (label_ltc(pair_for(commits), commits, t).is_ltc for t in (1, 2, 3))
        assert (not l3 or l2) and (not l2 or l1)
