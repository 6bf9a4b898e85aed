import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from ciulevels import datasets
from ciulevels.ciu import SamplerConfig, explain_concepts
from ciulevels.coalitions import CapacityError, Game, unanimity_game
from ciulevels.models import FunctionModel, LinearModel, SplitSpec, numeric_schema, split_indices
from ciulevels.shapley import exact_shapley_game, group_attribution, linear_shapley, monte_carlo_shapley


@st.composite
def games(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    vals = draw(st.lists(st.floats(-10, 10), min_size=(1 << n) - 1, max_size=(1 << n) - 1))
    return Game(n, np.array([0.0] + vals))


def test_linear_examples():
    np.testing.assert_allclose(linear_shapley([2, 3], [1, 1], [[0.5, 0.5]]), [1.0, 1.5])
    bg = np.array([[0.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(linear_shapley([2, 3], bg.mean(axis=0), bg), [0.0, 0.0])
    assert linear_shapley([1, 0], [0.3, 0.9], bg)[1] == 0.0
    with pytest.raises(ValueError):
        linear_shapley([1, 0], [0.3], bg)
    with pytest.raises(ValueError):
        linear_shapley([1, 0], [0.3, 0.9], np.empty((0, 2)))


def test_exact_examples():
    np.testing.assert_allclose(exact_shapley_game(unanimity_game({0, 1, 2}, 3)), [1 / 3] * 3)
    c = [1.0, -2.0, 4.5]
    np.testing.assert_allclose(exact_shapley_game(Game.from_function(3, lambda s: sum(c[i] for i in s))), c)
    pairs = Game.from_function(3, lambda s: 1.0 if len(s) >= 2 else 0.0)
    np.testing.assert_allclose(exact_shapley_game(pairs), [1 / 3] * 3)
    with pytest.raises(CapacityError):
        exact_shapley_game(Game(13, np.zeros(1 << 13)))


@given(games())
def test_exact_matches_all_permutations(g):
    np.testing.assert_allclose(exact_shapley_game(g), oracles.shapley_by_permutations(g.worth, g.n_players), atol=1e-9)


@given(games(max_n=8))
def test_efficiency(g):
    assert abs(exact_shapley_game(g).sum() - g.worth[-1]) <= 1e-9


@given(games(max_n=5), st.floats(-3, 3), st.floats(-3, 3), st.data())
def test_linearity(g, a, b, data):
    vals = data.draw(st.lists(st.floats(-10, 10), min_size=g.worth.size - 1, max_size=g.worth.size - 1))
    h = Game(g.n_players, np.array([0.0] + vals))
    lhs = exact_shapley_game(g.scale(a) + h.scale(b))
    np.testing.assert_allclose(lhs, a * exact_shapley_game(g) + b * exact_shapley_game(h), atol=1e-8)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.data())
def test_linear_formula_matches_on_off_game(w, data):
    """Game where absent features sit at their background mean."""
    n = len(w)
    x = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    bg = np.array(data.draw(st.lists(st.lists(st.floats(0, 1), min_size=n, max_size=n), min_size=1, max_size=5)))
    mean = bg.mean(axis=0)
    w = np.array(w)
    f = lambda z: float(w @ z)
    g = Game.from_function(n, lambda s: f(np.where(np.isin(np.arange(n), list(s)), x, mean)) - f(mean))
    np.testing.assert_allclose(exact_shapley_game(g), linear_shapley(w, x, bg), atol=1e-9)


@given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=5), st.floats(0.2, 0.8), st.data())
def test_influence_matches_linear_shapley_on_utilities(w, phi0, data):
    """With normalized weights and every utility averaging phi0, contextual
    influence equals the linear Shapley value computed on utilities."""
    n = len(w)
    w = np.array(w) / np.sum(w)
    model = LinearModel(numeric_schema(n), w)
    x = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    blocks = [(f"x{i + 1}", [i]) for i in range(n)]
    rs = {r.concept: r for r in explain_concepts(model, x, blocks, baseline=phi0, sampler=SamplerConfig(grid_points=3, lhs=False))}
    phi = linear_shapley(w, model.utility_values(x[None, :])[0], np.full((1, n), phi0))
    for i in range(n):
        assert rs[f"x{i + 1}"].influence == pytest.approx(phi[i], abs=1e-9)


def test_monte_carlo_linear_within_three_stderr():
    rng = np.random.default_rng(2)
    n = 5
    w = rng.uniform(0.1, 2.0, n)
    model = LinearModel(numeric_schema(n), w)
    bg = rng.random((200, n))
    x = rng.random(n)
    afa = monte_carlo_shapley(model, x, bg, n_permutations=2000, seed=3)
    exact = linear_shapley(w, x, bg)
    assert np.all(np.abs(afa.attributions - exact) <= 3 * afa.stderr)
    # local accuracy of the additive form: baseline plus attributions is f(x)
    assert afa.value() == pytest.approx(float(model.predict_batch(x[None, :])[0, 0]), abs=1e-9)


def test_monte_carlo_dummy_feature():
    model = FunctionModel(numeric_schema(3), lambda X: X[:, 0] * X[:, 1])
    rng = np.random.default_rng(0)
    afa = monte_carlo_shapley(model, [0.9, 0.8, 0.1], rng.random((50, 3)), n_permutations=500, seed=1)
    assert afa.attributions[2] == 0.0 and afa.stderr[2] == 0.0


def test_monte_carlo_is_seeded():
    model = FunctionModel(numeric_schema(3), lambda X: np.sin(X).sum(axis=1))
    bg = np.random.default_rng(0).random((30, 3))
    a = monte_carlo_shapley(model, [0.1, 0.5, 0.9], bg, n_permutations=100, seed=9, chunk=7)
    b = monte_carlo_shapley(model, [0.1, 0.5, 0.9], bg, n_permutations=100, seed=9)
    np.testing.assert_array_equal(a.attributions, b.attributions)


def test_monte_carlo_errors():
    model = FunctionModel(numeric_schema(2), lambda X: X[:, 0])
    with pytest.raises(ValueError):
        monte_carlo_shapley(model, [0.5, 0.5], np.empty((0, 2)))
    with pytest.raises(ValueError):
        monte_carlo_shapley(model, [0.5, 0.5], np.zeros((3, 2)), n_permutations=0)
    with pytest.raises(ValueError):
        monte_carlo_shapley(model, [0.5, 0.5], np.zeros((3, 3)))


def test_group_attribution():
    phi = [0.1, -0.2, 0.3, 0.4]
    names = ["a", "b", "c", "d"]
    out = group_attribution(phi, [("AB", [0, 1]), ("CD", [2, 3])], names)
    assert out == pytest.approx({"AB": -0.1, "CD": 0.7})
    assert sum(out.values()) == pytest.approx(sum(phi))
    assert group_attribution(phi, [(n, [i]) for i, n in enumerate(names)], names) == dict(zip(names, phi))
    assert group_attribution(phi, [("AB", [0, 1])], names) == pytest.approx({"AB": -0.1, "c": 0.3, "d": 0.4})
    with pytest.raises(ValueError, match="overlap"):
        group_attribution(phi, [("AB", [0, 1]), ("BC", [1, 2])], names)


def test_titanic_family_is_sum_of_members(titanic):
    data, model, _ = titanic
    train, _ = split_indices(len(data), SplitSpec(seed=0))
    afa = monte_carlo_shapley(model, datasets.JOHNNY_D, data.X[train], n_permutations=300, seed=0, j=1)
    grouped = group_attribution(afa.attributions, [("FAMILY", [3, 4]), ("WEALTH", [0, 5])], model.schema.names)
    assert grouped["FAMILY"] == pytest.approx(afa.attributions[3] + afa.attributions[4])
    assert afa.value() == pytest.approx(model.predict_batch(model.schema.encode(datasets.JOHNNY_D)[None])[0, 1])
