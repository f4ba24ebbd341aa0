from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from statefuzz.engine.minimize import NotReproducible, ddmin, minimize_history, replay
from statefuzz.targets import get_target
from statefuzz.targets.leaky import LeakyParser

valid_input = LeakyParser.valid_input


def is_one_minimal(items, test):
    return all(not test(items[:i] + items[i + 1:]) for i in range(len(items)))


def smallest_subsequence(items, test):
    for k in range(len(items) + 1):
        for idx in combinations(range(len(items)), k):
            sub = [items[i] for i in idx]
            if test(sub):
                return sub
    return None


@given(st.lists(st.integers(0, 5), min_size=1, max_size=8), st.data())
def test_ddmin_is_one_minimal(items, data):
    # the property: contains a given multiset of values
    picks = data.draw(st.lists(st.integers(0, len(items) - 1), unique=True, max_size=3))
    need = [items[i] for i in picks]

    def test(xs):
        return all(xs.count(v) >= need.count(v) for v in set(need))

    out = ddmin(list(items), test)
    assert test(out)
    assert is_one_minimal(out, test)
    # monotone property: 1-minimal is globally minimal, check exhaustively
    assert len(out) == len(smallest_subsequence(items, test))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=7))
def test_ddmin_preserves_order(items):
    def test(xs):
        # needs a 1 somewhere before a 2
        return any(a == 1 and 2 in xs[i + 1:] for i, a in enumerate(xs))

    if not test(items):
        return
    out = ddmin(list(items), test)
    assert out == [1, 2]


def test_replay_implicit_vs_reset():
    t = get_target("leaky_parser")
    history = [valid_input()] * 32
    assert replay(history, t, implicit=True).bug_id == "leak-overflow"
    assert replay(history, t, implicit=False) is None


def test_minimize_leaky_history_to_threshold():
    t = get_target("leaky_parser")
    junk = [b"", b"\x00\x01", b"garbage"]
    history = []
    for i in range(100):
        history.append(valid_input() if i % 3 == 0 or i > 90 else junk[i % 3])
    assert sum(h == valid_input() for h in history) >= 32
    out = minimize_history(history, t)
    assert len(out) == 32 and all(x == valid_input() for x in out)
    assert is_one_minimal(out, lambda xs: replay(xs, t) is not None)


def test_minimize_already_minimal():
    t = get_target("leaky_parser")
    history = [valid_input()] * 32
    assert minimize_history(history, t) == history


def test_minimize_non_crashing_raises():
    with pytest.raises(NotReproducible):
        minimize_history([b"nothing"], get_target("leaky_parser"))
