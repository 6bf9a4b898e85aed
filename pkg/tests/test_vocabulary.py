import pytest
from hypothesis import given, strategies as st

from ciulevels import datasets
from ciulevels.vocabfile import dump_levels, dump_vocabulary, load_levels, parse_vocabulary, parse_vocabulary_text
from ciulevels.vocabulary import Vocabulary, VocabularyError

TITANIC = ("class", "gender", "age", "sibsp", "parch", "fare", "embarked")
CARS = ("buying", "maint", "doors", "persons", "lug_boot", "safety")


def test_cars_file_expansion():
    v = parse_vocabulary(datasets.data_path("cars.voc"), CARS)
    assert v["PRICE"] == {0, 1}
    assert v["COMFORT"] == {2, 3, 4}
    assert v["TECH"] == {2, 3, 4, 5}
    assert v["CAR"] == set(range(6))


def test_titanic_file_expansion():
    v = parse_vocabulary(datasets.data_path("titanic.voc"), TITANIC)
    assert v["WEALTH"] == {0, 5}
    assert v["FAMILY"] == {3, 4}
    assert v["Gender"] == {1} and v["Age"] == {2} and v["Embarkment port"] == {6}


def test_self_reference_is_a_cycle():
    with pytest.raises(VocabularyError, match="cyclic") as err:
        parse_vocabulary_text("A = [1]\nB = [B, 2]\n", ("x", "y"))
    assert err.value.line == 2


def test_indirect_cycle():
    with pytest.raises(VocabularyError, match="A -> B -> A|B -> A -> B"):
        parse_vocabulary_text("A = [B]\nB = [A]\n", ("x",))


def test_unknown_reference_and_range_errors_carry_positions():
    with pytest.raises(VocabularyError, match="unknown concept") as err:
        parse_vocabulary_text("# comment\nA = [1, NOPE]\n", ("x",))
    assert (err.value.line, err.value.column) == (2, 1)
    with pytest.raises(VocabularyError, match="outside 1..2") as err:
        parse_vocabulary_text("A = [3]\n", ("x", "y"))
    with pytest.raises(VocabularyError, match="outside"):
        parse_vocabulary_text("A = [0]\n", ("x", "y"))


def test_syntax_errors():
    with pytest.raises(VocabularyError, match="expected '='"):
        parse_vocabulary_text("A [1]\n", ("x",))
    with pytest.raises(VocabularyError, match="unterminated"):
        parse_vocabulary_text("A = [1, 2\n", ("x", "y"))
    with pytest.raises(VocabularyError, match="duplicate"):
        parse_vocabulary_text("A = [1]\nA = [2]\n", ("x", "y"))
    with pytest.raises(VocabularyError, match="unexpected character") as err:
        parse_vocabulary_text("A = [1; 2]\n", ("x", "y"))
    assert err.value.column == 7
    with pytest.raises(VocabularyError, match="empty"):
        parse_vocabulary_text("A = []\n", ("x",))


def test_names_are_case_sensitive():
    v = parse_vocabulary_text("a = [1]\nA = [2]\n", ("x", "y"))
    assert v["a"] == {0} and v["A"] == {1}


def test_dump_round_trip():
    v = parse_vocabulary(datasets.data_path("cars.voc"), CARS)
    again = parse_vocabulary_text(dump_vocabulary(v), CARS)
    assert again == v


def test_levels_structure_of_cars():
    v = parse_vocabulary(datasets.data_path("cars.voc"), CARS)
    ls = v.levels_structure()
    assert ls.degree == 3
    assert [n for n, _ in v.level("top")] == ["PRICE", "TECH"]
    assert [n for n, _ in v.level(1)] == ["PRICE", "COMFORT", "safety"]
    assert [n for n, _ in v.constituents("TECH")] == ["COMFORT", "safety"]
    assert [n for n, _ in v.constituents("CAR")] == ["PRICE", "TECH"]
    for name in ("PRICE", "COMFORT", "TECH", "CAR"):
        assert v.check_immediate(name)


def test_levels_structure_of_titanic():
    v = parse_vocabulary(datasets.data_path("titanic.voc"), TITANIC)
    assert sorted(n for n, _ in v.level("top")) == sorted(["WEALTH", "FAMILY", "Gender", "Age", "Embarkment port"])
    # single-feature concepts name their block even at the feature level
    assert [n for n, _ in v.level("features")] == ["class", "Gender", "Age", "sibsp", "parch", "fare", "Embarkment port"]
    assert [n for n, _ in v.constituents("FAMILY")] == ["sibsp", "parch"]


def test_overlapping_concepts_rejected():
    v = parse_vocabulary_text("A = [1, 2]\nB = [2, 3]\n", ("x", "y", "z"))
    with pytest.raises(VocabularyError, match="overlap"):
        v.levels_structure()


def test_level_out_of_range():
    v = Vocabulary.singletons(("x", "y"))
    with pytest.raises(VocabularyError):
        v.level(5)


def test_levels_file_round_trip():
    text = "B0 = [[1], [2], [3], [4], [5], [6]]\nB1 = [[1, 2], [3, 4], [5, 6]]\nB2 = [[1, 2, 3, 4], [5, 6]]\nB3 = [[1, 2, 3, 4, 5, 6]]\n"
    ls = load_levels(text)
    assert ls.degree == 3 and ls.levels[1][0] == frozenset({0, 1})
    assert dump_levels(ls) == text


@st.composite
def nested_vocab(draw):
    """Random laminar vocabularies built by merging disjoint groups."""
    n = draw(st.integers(2, 8))
    groups = [[i + 1] for i in range(n)]
    defs = {}
    k = 0
    while len(groups) > 1 and draw(st.booleans()):
        a, b = draw(st.lists(st.integers(0, len(groups) - 1), min_size=2, max_size=2, unique=True))
        name = f"C{k}"
        k += 1
        defs[name] = [groups[a], groups[b]]
        merged = [name]
        groups = [g for i, g in enumerate(groups) if i not in (a, b)] + [merged]
    if not defs:
        defs["C0"] = [[1]]
    flat = {}
    for name, parts in defs.items():
        flat[name] = [p for part in parts for p in part]
    return flat, tuple(f"f{i}" for i in range(n))


@given(nested_vocab())
def test_expansion_is_union_of_parts(case):
    defs, names = case
    v = Vocabulary.from_definitions(defs, names)
    for name, items in defs.items():
        expect = set()
        for it in items:
            expect |= {it - 1} if isinstance(it, int) else set(v[it])
        assert v[name] == expect
    ls = v.levels_structure()
    assert ls.levels[0] == tuple(frozenset({i}) for i in range(len(names)))
    assert ls.levels[-1] == (frozenset(range(len(names))),)
    assert parse_vocabulary_text(dump_vocabulary(v), names) == v
