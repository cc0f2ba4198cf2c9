import json
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from formlang.core import Alphabet, shortlex_enumerate
from formlang.errors import BudgetExceeded, DimensionMismatch, FormatError, StateBudgetExceeded, UndefinedLimit
from formlang.regular import compile_regex, dfa_accepts, equivalent, minimize, parse_regex, Equal
from formlang.saturation import (
    SIGMOID,
    TANH,
    AttentionInstance,
    CellSpec,
    LstmState,
    astar_b_accepting,
    astar_b_cell,
    cell_from_json,
    cell_to_json,
    constant_cell,
    count_anbn_with_attention,
    counting_lstm_cell,
    extract_dfa_from_srnn,
    last_symbol_cell,
    numeric_saturation_check,
    parity_cell,
    parity_even,
    probe_cell,
    saturate_step,
    saturated_attention,
    saturated_run,
    space_complexity_probe,
    state_from_json,
    state_to_json,
)
from oracles import is_anbn

AB = Alphabet(("a", "b"))
EMB = {"a": (1, 0), "b": (0, 1)}


def neuron(activation, U=((1, -1),), b=(0,)):
    return CellSpec("simple_rnn", 1, 2, {"W": [[0]], "U": U, "b": b}, EMB, (activation,))


# -- single steps -------------------------------------------------------------------------


def test_single_neuron_limits():
    assert saturate_step(neuron(SIGMOID), (0,), "a") == (1,)
    assert saturate_step(neuron(SIGMOID), (0,), "b") == (0,)
    assert saturate_step(neuron(TANH), (0,), "a") == (1,)
    assert saturate_step(neuron(TANH), (0,), "b") == (-1,)


def test_zero_preactivation_is_undefined():
    cell = neuron(SIGMOID, U=((0, 0),))
    with pytest.raises(UndefinedLimit) as info:
        saturate_step(cell, (0,), "a")
    assert info.value.coordinate == ("h", 0)


def test_unknown_symbol():
    with pytest.raises(DimensionMismatch):
        saturate_step(parity_cell(), (0, 0), "c")


def test_lstm_counts():
    cell = counting_lstm_cell()
    s = saturate_step(cell, cell.initial_state(), "a")
    assert s == LstmState((1,), (1,))
    trace = saturated_run(cell, tuple("aabb"))
    assert [state.c[0] for state in trace] == [1, 2, 1, 0]
    assert [state.h[0] for state in trace] == [1, 1, 1, 0]
    assert saturated_run(cell, tuple("bb"))[-1].c == (-2,)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.fractions(min_value=Fraction(1, 8), max_value=1000))
def test_saturated_run_is_scale_invariant(seed, factor):
    rng = random.Random(seed)
    d = rng.randint(1, 3)
    cell = CellSpec(
        "simple_rnn", d, 2,
        {"W": [[rng.choice((-2, -1, 1, 2)) for _ in range(d)] for _ in range(d)],
         "U": [[rng.randint(-2, 2) for _ in range(2)] for _ in range(d)],
         "b": [Fraction(rng.choice((-1, 1)), 2) for _ in range(d)]},
        EMB, tuple(rng.choice((SIGMOID, TANH)) for _ in range(d)),
    )
    x = tuple(rng.choice("ab") for _ in range(6))
    try:
        expected = saturated_run(cell, x)
    except UndefinedLimit:
        assume(False)
    assert saturated_run(cell.scaled(factor), x) == expected


# -- numeric check ---------------------------------------------------------------------------


RHOS = [2.0 ** k for k in range(11)]


def test_numeric_check_on_empty_string():
    assert numeric_saturation_check(counting_lstm_cell(), (), RHOS).converged


@pytest.mark.parametrize("make", [counting_lstm_cell, parity_cell, astar_b_cell])
def test_numeric_runs_converge(make):
    cell = make()
    for x in shortlex_enumerate(AB, 5):
        result = numeric_saturation_check(cell, x, RHOS)
        assert result.converged, (x, result.deviations)
        # deviations shrink as the scale grows
        assert result.deviations[-1] <= result.deviations[0] + 1e-12


def test_numeric_check_flags_undefined_coordinate():
    result = numeric_saturation_check(neuron(SIGMOID, U=((1, 0),), b=(-1,)), ("a",), RHOS)
    assert not result.converged
    assert result.flagged == ("h", 0)


# -- extraction -------------------------------------------------------------------------------


def parity_oracle(x):
    return x.count("a") % 2 == 0


def test_parity_cell_extracts_to_two_state_dfa():
    dfa = extract_dfa_from_srnn(parity_cell(), accept=parity_even)
    assert len(dfa.states) == 3
    small = minimize(dfa)
    assert len(small.states) == 2
    for x in shortlex_enumerate(AB, 10):
        assert dfa_accepts(small, x) == parity_oracle(x)


def test_constant_cell_single_state():
    dfa = extract_dfa_from_srnn(constant_cell())
    assert dfa.states == (0,)


def test_astar_b_cell():
    dfa = extract_dfa_from_srnn(astar_b_cell(), accept=astar_b_accepting)
    assert equivalent(minimize(dfa), compile_regex(parse_regex("a*b", AB), AB)) == Equal()


@pytest.mark.parametrize("make", [parity_cell, astar_b_cell, last_symbol_cell])
def test_extracted_transitions_follow_saturated_steps(make):
    cell = make()
    dfa = extract_dfa_from_srnn(cell)
    codes = {}
    for x in shortlex_enumerate(AB, 8):
        run = saturated_run(cell, x)
        h = run[-1] if run else cell.initial_state()
        q = dfa.initial
        for a in x:
            q = dfa.delta[(q, a)]
        # one code per state and one state per code
        assert codes.setdefault(q, h) == h
    assert len(set(codes.values())) == len(codes)


def test_extraction_limits():
    with pytest.raises(StateBudgetExceeded):
        extract_dfa_from_srnn(parity_cell(), max_states=2)
    with pytest.raises(ValueError):
        extract_dfa_from_srnn(counting_lstm_cell())


# -- probes ------------------------------------------------------------------------------------


def brute_force_count(cell, n):
    return len({saturated_run(cell, x)[-1] for x in shortlex_enumerate(AB, n) if len(x) == n})


@pytest.mark.parametrize("make", [parity_cell, last_symbol_cell, counting_lstm_cell])
def test_probe_matches_enumeration(make):
    cell = make()
    rows = probe_cell(cell, range(1, 9))
    assert [r.count for r in rows] == [brute_force_count(cell, n) for n in range(1, 9)]


def test_probe_shapes():
    assert [r.count for r in probe_cell(counting_lstm_cell(), range(1, 13))] == list(range(2, 14))
    assert {r.count for r in probe_cell(last_symbol_cell(), range(1, 13))} == {2}
    # bounded by the 2^d saturated codes
    assert max(r.count for r in probe_cell(parity_cell(), range(1, 13))) <= 4
    row = probe_cell(counting_lstm_cell(), [3])[0]
    assert row.n == 3 and row.bits == pytest.approx(2.0)


def test_probe_budget():
    with pytest.raises(BudgetExceeded):
        space_complexity_probe(lambda s, a: s + a, "", AB, [12], limit=100)


# -- attention ------------------------------------------------------------------------------------


def test_attention_examples():
    unique = AttentionInstance((1, 0), ((1, 0), (0, 1), (2, 0)), ((1,), (2,), (3,)))
    assert saturated_attention(unique) == (3,)
    tie = AttentionInstance((1,), ((1,), (1,), (1,)), ((1,), (2,), (6,)))
    assert saturated_attention(tie) == (3,)
    with pytest.raises(DimensionMismatch):
        AttentionInstance((1,), ((1,),), ((1,), (2,)))


vectors = st.lists(st.integers(-3, 3), min_size=2, max_size=2)


@settings(max_examples=80)
@given(vectors, st.lists(st.tuples(vectors, vectors), min_size=1, max_size=6), st.randoms(),
       st.integers(1, 50))
def test_attention_invariances(query, pairs, rnd, scale):
    keys, values = zip(*pairs)
    base = saturated_attention(AttentionInstance(query, keys, values))
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    k2, v2 = zip(*shuffled)
    assert saturated_attention(AttentionInstance(query, k2, v2)) == base
    assert saturated_attention(AttentionInstance([scale * q for q in query], keys, values)) == base
    # output lies in the box spanned by the values
    for i, coord in enumerate(base):
        assert min(v[i] for v in values) <= coord <= max(v[i] for v in values)


def test_anbn_attention_recognizer():
    assert count_anbn_with_attention(tuple("aabb"))
    assert not count_anbn_with_attention(tuple("abab"))
    assert count_anbn_with_attention(())
    for x in shortlex_enumerate(AB, 10):
        assert count_anbn_with_attention(x) == is_anbn(x)


# -- JSON -------------------------------------------------------------------------------------------


@pytest.mark.parametrize("make", [parity_cell, astar_b_cell, constant_cell, counting_lstm_cell])
def test_cell_json_round_trip(make):
    cell = make()
    data = json.loads(json.dumps(cell_to_json(cell)))
    assert data["type"] == "cell"
    assert cell_from_json(data) == cell
    state = saturate_step(cell, cell.initial_state(), "a")
    assert state_from_json(cell, json.loads(json.dumps(state_to_json(state)))) == state


def test_cell_json_errors():
    data = cell_to_json(parity_cell())
    with pytest.raises(FormatError):
        cell_from_json(dict(data, type="dfa"))
    with pytest.raises(DimensionMismatch):
        cell_from_json(dict(data, dims={"hidden": 3, "input": 2}))
    with pytest.raises(DimensionMismatch):
        state_from_json(parity_cell(), [0, 0, 0])
