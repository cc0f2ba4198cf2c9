import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from formlang.core import Alphabet, shortlex_enumerate
from formlang.errors import BudgetExceeded, FormatError, InvalidPath, SemiringMismatch
from formlang.generators import random_nfa, random_rational_wfa
from formlang.regular import Nfa, nfa_accepts
from formlang.wfa import (
    BOOLEAN,
    MAXPLUS,
    NEG_INF,
    RATIONAL,
    Path,
    Wfa,
    builtin_binary_value,
    builtin_ngram_counter,
    compile_unigram_recurrence,
    nfa_to_wfa,
    path_score,
    score,
    score_bruteforce,
    wfa_from_json,
    wfa_to_json,
    wfa_to_nfa,
)
from oracles import count_occurrences, wfa_matrix_score

AB = Alphabet(("a", "b"))
seeds = st.integers(0, 2**32 - 1)


def digits(s):
    return tuple(s)


# -- semirings --------------------------------------------------------------------

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=6)
elements = {
    "boolean": st.booleans(),
    "rational": fractions,
    "maxplus": st.one_of(st.just(NEG_INF), fractions),
}
semirings = {"boolean": BOOLEAN, "rational": RATIONAL, "maxplus": MAXPLUS}


@pytest.mark.parametrize("name", sorted(semirings))
def test_semiring_laws(name):
    K = semirings[name]

    @given(elements[name], elements[name], elements[name])
    def laws(a, b, c):
        assert K.plus(K.plus(a, b), c) == K.plus(a, K.plus(b, c))
        assert K.plus(a, b) == K.plus(b, a)
        assert K.plus(a, K.zero) == a
        assert K.times(K.times(a, b), c) == K.times(a, K.times(b, c))
        assert K.times(a, K.one) == a == K.times(K.one, a)
        assert K.times(a, K.plus(b, c)) == K.plus(K.times(a, b), K.times(a, c))
        assert K.times(K.plus(a, b), c) == K.plus(K.times(a, c), K.times(b, c))
        assert K.times(a, K.zero) == K.zero == K.times(K.zero, a)

    laws()


# -- builtins ----------------------------------------------------------------------


def test_binary_value_examples():
    w = builtin_binary_value(2)
    assert len(w.states) == 2
    assert score(w, digits("101")) == 5
    assert score(w, digits("0")) == 0
    assert score(w, digits("1111")) == 15
    assert score(w, ()) == 0
    assert score(builtin_binary_value(3), digits("12")) == 5


@pytest.mark.parametrize("base", [2, 3, 10])
def test_binary_value_matches_int(base):
    w = builtin_binary_value(base)
    for x in shortlex_enumerate(w.alphabet, 4 if base < 10 else 2):
        assert score(w, x) == (int("".join(x), base) if x else 0)


def test_ngram_examples():
    assert score(builtin_ngram_counter(("a",)), digits("aba")) == 2
    assert score(builtin_ngram_counter(("a", "b")), digits("abab")) == 2
    assert score(builtin_ngram_counter(("a",)), digits("bbb")) == 0
    assert len(builtin_ngram_counter(("a", "b", "a")).states) == 4


@pytest.mark.parametrize("pattern", [("a",), ("a", "b"), ("a", "a"), ("b", "a", "b")])
def test_ngram_matches_sliding_window(pattern):
    w = builtin_ngram_counter(pattern)
    for x in shortlex_enumerate(AB, 8):
        assert score(w, x) == count_occurrences(x, pattern)


# -- paths ---------------------------------------------------------------------------


def test_path_scores():
    w = builtin_ngram_counter(("a",))
    assert path_score(w, Path((0,), ())) == w.lam(0) * w.rho(0)
    # stays in q0 on b, crosses on a, stays in q1 on b
    assert path_score(w, Path((0, 0, 1, 1), digits("bab"))) == 1
    # a missing transition has weight zero
    assert path_score(w, Path((1, 0), digits("a"))) == 0
    with pytest.raises(InvalidPath):
        path_score(w, Path((0, 1), ()))
    with pytest.raises(InvalidPath):
        path_score(w, Path((0, 7), digits("a")))


@settings(max_examples=40)
@given(seeds)
def test_forward_equals_bruteforce_and_matrix_product(seed):
    w = random_rational_wfa(random.Random(seed), 3)
    for x in shortlex_enumerate(AB, 4):
        fwd = score(w, x)
        assert fwd == score_bruteforce(w, x)
        assert fwd == wfa_matrix_score(w, x)


def test_empty_string_score():
    w = random_rational_wfa(random.Random(5), 3)
    expected = sum((w.lam(q) * w.rho(q) for q in w.states), Fraction(0))
    assert score(w, ()) == score_bruteforce(w, ()) == expected


def test_bruteforce_budget():
    with pytest.raises(BudgetExceeded):
        score_bruteforce(builtin_binary_value(2), digits("1" * 12), limit=1000)


def test_maxplus_scores_are_best_paths():
    w = Wfa(AB, (0, 1), MAXPLUS, {0: Fraction(0)},
            {(0, "a", 0): Fraction(1), (0, "a", 1): Fraction(3), (1, "a", 1): Fraction(-1)},
            {0: Fraction(0), 1: Fraction(0)})
    assert score(w, digits("aa")) == 4  # 0 -a-> 0 -a-> 1
    assert score(w, digits("b")) == NEG_INF
    for x in shortlex_enumerate(AB, 4):
        assert score(w, x) == score_bruteforce(w, x)


# -- boolean bridge -------------------------------------------------------------------


def abstar_nfa():
    return Nfa(AB, (0, 1), {0}, {(0, "a", 1), (1, "b", 1)}, {1})


def test_abstar_bridge():
    n = abstar_nfa()
    w = nfa_to_wfa(n)
    back = wfa_to_nfa(w)
    for x in shortlex_enumerate(AB, 6):
        assert score(w, x) == nfa_accepts(n, x) == nfa_accepts(back, x)


def test_empty_boolean_wfa():
    n = wfa_to_nfa(Wfa(AB, (0,), BOOLEAN, {}, {}, {}))
    assert not any(nfa_accepts(n, x) for x in shortlex_enumerate(AB, 3))
    with pytest.raises(SemiringMismatch):
        wfa_to_nfa(builtin_binary_value())


@settings(max_examples=40)
@given(seeds)
def test_random_nfa_round_trip(seed):
    n = random_nfa(random.Random(seed), 4)
    w = nfa_to_wfa(n)
    back = wfa_to_nfa(w)
    for x in shortlex_enumerate(AB, 5):
        assert nfa_accepts(back, x) == nfa_accepts(n, x) == score(w, x)
        if len(x) <= 3:
            assert score_bruteforce(w, x) == score(w, x)


# -- recurrence -----------------------------------------------------------------------


def test_unigram_recurrence():
    h = compile_unigram_recurrence("a")
    assert h(digits("aba")) == 2
    assert h(()) == 0
    w = builtin_ngram_counter(("a",))
    for x in shortlex_enumerate(AB, 6):
        assert h(x) == score(w, x)
        assert list(h.states(x)) == [x[: i + 1].count("a") for i in range(len(x))]


# -- JSON ------------------------------------------------------------------------------


@settings(max_examples=30)
@given(seeds)
def test_json_round_trip(seed):
    w = random_rational_wfa(random.Random(seed), 3)
    data = json.loads(json.dumps(wfa_to_json(w)))
    assert all("/" in t["weight"] or t["weight"].lstrip("-").isdigit() for t in data["transitions"])
    assert wfa_from_json(data) == w


def test_json_other_semirings_and_errors():
    for w in (nfa_to_wfa(abstar_nfa()),
              Wfa(AB, ("s",), MAXPLUS, {"s": Fraction(0)}, {("s", "a", "s"): Fraction(2)}, {"s": Fraction(1, 2)})):
        assert wfa_from_json(json.loads(json.dumps(wfa_to_json(w)))) == w
    with pytest.raises(FormatError):
        wfa_from_json(dict(wfa_to_json(builtin_binary_value()), semiring="tropical"))
    with pytest.raises(FormatError):
        wfa_from_json({"type": "dfa"})
