import numpy as np
import pytest
from hypothesis import given, strategies as st

from ciulevels.coalitions import Game
from ciulevels.levels import (
    MissingGrandCoalition,
    MissingSingletonLevel,
    NotAPartition,
    NotCoarsening,
    canonical_partition,
    immediate_players,
    induced_game,
    quotient_levels,
    singletons,
    validate_levels_structure,
)

SIX = [
    [[1], [2], [3], [4], [5], [6]],
    [[1, 2], [3, 4], [5, 6]],
    [[1, 2, 3, 4], [5, 6]],
    [[1, 2, 3, 4, 5, 6]],
]


@st.composite
def structures(draw, max_n=7):
    """Random chains of coarsenings from singletons to the grand coalition."""
    n = draw(st.integers(1, max_n))
    level = [frozenset({i}) for i in range(n)]
    levels = [level]
    while len(level) > 1:
        k = draw(st.integers(1, len(level) - 1))
        idx = draw(st.permutations(range(len(level))))
        merged = frozenset().union(*(level[i] for i in idx[: k + 1]))
        level = [merged] + [level[i] for i in idx[k + 1 :]]
        levels.append(level)
    if len(levels) == 1:
        levels.append(level)
    return validate_levels_structure(levels)


def test_six_player_structure_is_valid():
    ls = validate_levels_structure(SIX)
    assert ls.degree == 3
    assert ls.union_containing(1, {3}) == frozenset({3, 4})
    assert ls.union_containing(2, {1, 4}) == frozenset({1, 2, 3, 4})


def test_trivial_structure():
    ls = validate_levels_structure([[[0], [1]], [[0, 1]]])
    assert ls.degree == 1


def test_not_coarsening_names_level():
    with pytest.raises(NotCoarsening) as err:
        validate_levels_structure([[[1], [2], [3], [4]], [[1, 3], [2, 4]], [[1, 2], [3, 4]], [[1, 2, 3, 4]]])
    assert err.value.level == 2


def test_validation_errors():
    with pytest.raises(NotAPartition):
        validate_levels_structure([[[1], [2]], [[1, 2], [2]], [[1, 2]]])
    with pytest.raises(MissingSingletonLevel):
        validate_levels_structure([[[1, 2]], [[1, 2]]])
    with pytest.raises(MissingGrandCoalition):
        validate_levels_structure([[[1], [2]]])


def test_six_player_quotient():
    q = quotient_levels(validate_levels_structure(SIX), 1)
    a, b, c = frozenset({1, 2}), frozenset({3, 4}), frozenset({5, 6})
    assert q.levels[0] == (frozenset({a}), frozenset({b}), frozenset({c}))
    assert q.levels[1] == (frozenset({a, b}), frozenset({c}))
    assert q.levels[2] == (frozenset({a, b, c}),)


def test_quotient_endpoints():
    ls = validate_levels_structure(SIX)
    assert quotient_levels(ls, 0) == ls.map_players(lambda p: frozenset({p}))
    top = quotient_levels(ls, 3)
    assert top.degree == 0 and len(top.players) == 1
    with pytest.raises(IndexError):
        quotient_levels(ls, 4)


@given(structures())
def test_quotient_properties(ls):
    assert quotient_levels(ls, 0) == ls.map_players(lambda p: frozenset({p}))
    for k in range(ls.degree + 1):
        q = quotient_levels(ls, k)
        assert q.degree == ls.degree - k
        assert set(q.players) == set(ls.levels[k])
        # each level of the quotient groups exactly the level-k unions inside one coarser block
        for r, level in enumerate(q.levels):
            assert {frozenset().union(*g) for g in level} == set(ls.levels[k + r])


def test_immediate_players_examples():
    b = canonical_partition([[1, 2], [3, 4], [5, 6]])
    assert immediate_players({1, 2, 3, 4}, b) == (frozenset({1, 2}), frozenset({3, 4}))
    assert immediate_players({5, 6}, b) == (frozenset({5, 6}),)
    assert immediate_players(range(1, 7), b) == b
    with pytest.raises(ValueError):
        immediate_players({1, 3}, b)


def _pairs():
    return Game.from_function(3, lambda s: 1.0 if len(s) >= 2 else 0.0)


def test_induced_game_examples():
    g = induced_game(_pairs(), [[0, 1], [2]])
    assert list(g.worth) == [0.0, 1.0, 0.0, 1.0]
    h = induced_game(Game.from_function(6, len), [[0, 1], [2, 3], [4, 5]])
    assert all(h.worth[m] == 2 * bin(m).count("1") for m in range(8))
    with pytest.raises(ValueError):
        induced_game(_pairs(), [[0, 1]])


@given(st.integers(1, 6), st.data())
def test_induced_game_identity_and_grand(n, data):
    vals = data.draw(st.lists(st.floats(-5, 5), min_size=(1 << n) - 1, max_size=(1 << n) - 1))
    g = Game(n, np.array([0.0] + vals))
    assert induced_game(g, singletons(range(n))) == g
    one = induced_game(g, [range(n)])
    assert one.n_players == 1 and one.worth[1] == g.worth[-1]


@given(structures(max_n=6), st.data())
def test_induced_worth_is_worth_of_union(ls, data):
    n = len(ls.players)
    vals = data.draw(st.lists(st.floats(-5, 5), min_size=(1 << n) - 1, max_size=(1 << n) - 1))
    g = Game(n, np.array([0.0] + vals))
    for level in ls.levels:
        h = induced_game(g, level)
        for m in range(1 << len(level)):
            union = frozenset().union(*(level[i] for i in range(len(level)) if m >> i & 1))
            assert h.worth[m] == g(union)
