"""Saturated recurrent cells, automaton extraction, saturated attention and
space-complexity probes.

Saturating a network scales every parameter by ``ρ`` and lets ``ρ → ∞``.
Each squashing unit then becomes a step function of the sign of its
preactivation: a logistic unit goes to 1 or 0 and a tanh unit to +1 or -1.
A preactivation of exactly zero has no limit and raises
:class:`~formlang.errors.UndefinedLimit`.

Saturated LSTM semantics used here: gates are in {0, 1}, the candidate is in
{-1, +1}, the cell state is updated with exact integer arithmetic
``c' = f*c + i*g``, and the hidden output is ``o * sign(c')``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, NamedTuple, Optional, Sequence, Tuple

from .core import Alphabet, Str, budget, format_fraction, parse_fraction
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    FormatError,
    StateBudgetExceeded,
    UndefinedLimit,
)
from .regular import Dfa

SIGMOID, TANH = "sigmoid", "tanh"
LSTM_GATES = ("i", "f", "o", "g")

Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]


def _vec(values) -> Vector:
    return tuple(parse_fraction(v) for v in values)


def _mat(rows) -> Matrix:
    return tuple(_vec(r) for r in rows)


@dataclass(frozen=True)
class CellSpec:
    """A simple RNN or LSTM cell with exact rational parameters.

    Simple RNN: ``h' = act(W h + U e(x) + b)`` with per-unit activations.
    LSTM: one ``W_k, U_k, b_k`` triple per gate ``k`` in ``i f o g``.
    """

    kind: str
    hidden: int
    input_dim: int
    weights: Dict[str, object]
    embedding: Dict[str, Vector]
    activations: Tuple[str, ...] = ()
    initial_h: Optional[Vector] = None
    initial_c: Optional[Vector] = None

    def __post_init__(self):
        if self.kind not in ("simple_rnn", "lstm"):
            raise ValueError(f"unknown cell kind {self.kind!r}")
        d, m = self.hidden, self.input_dim
        weights = {}
        prefixes = [""] if self.kind == "simple_rnn" else [f"_{g}" for g in LSTM_GATES]
        for p in prefixes:
            W, U, b = self.weights[f"W{p}"], self.weights[f"U{p}"], self.weights[f"b{p}"]
            W, U, b = _mat(W), _mat(U), _vec(b)
            if len(W) != d or any(len(r) != d for r in W):
                raise DimensionMismatch(f"W{p} must be {d}x{d}")
            if len(U) != d or any(len(r) != m for r in U):
                raise DimensionMismatch(f"U{p} must be {d}x{m}")
            if len(b) != d:
                raise DimensionMismatch(f"b{p} must have length {d}")
            weights[f"W{p}"], weights[f"U{p}"], weights[f"b{p}"] = W, U, b
        object.__setattr__(self, "weights", weights)
        embedding = {s: _vec(v) for s, v in self.embedding.items()}
        for s, v in embedding.items():
            if len(v) != m:
                raise DimensionMismatch(f"embedding of {s!r} must have length {m}")
        object.__setattr__(self, "embedding", embedding)
        acts = tuple(self.activations) or (SIGMOID,) * d
        if self.kind == "simple_rnn" and (len(acts) != d or set(acts) - {SIGMOID, TANH}):
            raise ValueError("need one activation (sigmoid or tanh) per hidden unit")
        object.__setattr__(self, "activations", acts)
        h0 = _vec(self.initial_h) if self.initial_h is not None else (Fraction(0),) * d
        c0 = _vec(self.initial_c) if self.initial_c is not None else (Fraction(0),) * d
        if len(h0) != d or len(c0) != d:
            raise DimensionMismatch("initial state has the wrong size")
        object.__setattr__(self, "initial_h", h0)
        object.__setattr__(self, "initial_c", c0)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(tuple(self.embedding))

    def initial_state(self):
        if self.kind == "simple_rnn":
            return tuple(int(v) for v in self.initial_h)
        return LstmState(tuple(int(v) for v in self.initial_c), tuple(int(v) for v in self.initial_h))

    def scaled(self, factor) -> "CellSpec":
        factor = Fraction(factor)
        weights = {}
        for name, value in self.weights.items():
            if name.startswith("b"):
                weights[name] = tuple(v * factor for v in value)
            else:
                weights[name] = tuple(tuple(v * factor for v in row) for row in value)
        return CellSpec(self.kind, self.hidden, self.input_dim, weights, self.embedding,
                        self.activations, self.initial_h, self.initial_c)


class LstmState(NamedTuple):
    c: Tuple[int, ...]
    h: Tuple[int, ...]


def _preactivation(cell: CellSpec, suffix: str, h, e) -> List[Fraction]:
    W, U, b = cell.weights[f"W{suffix}"], cell.weights[f"U{suffix}"], cell.weights[f"b{suffix}"]
    return [
        sum((w * x for w, x in zip(W[i], h)), Fraction(0))
        + sum((u * x for u, x in zip(U[i], e)), Fraction(0))
        + b[i]
        for i in range(cell.hidden)
    ]


def _limit(z: Fraction, activation: str, coordinate) -> int:
    if z == 0:
        raise UndefinedLimit(coordinate)
    if activation == SIGMOID:
        return 1 if z > 0 else 0
    return 1 if z > 0 else -1


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _embed(cell: CellSpec, symbol: str) -> Vector:
    try:
        return cell.embedding[symbol]
    except KeyError:
        raise DimensionMismatch(f"no embedding for symbol {symbol!r}")


def saturate_step(cell: CellSpec, state, symbol: str):
    """One step of the saturated cell."""
    e = _embed(cell, symbol)
    if cell.kind == "simple_rnn":
        z = _preactivation(cell, "", state, e)
        return tuple(_limit(v, cell.activations[i], ("h", i)) for i, v in enumerate(z))
    c, h = state
    gates = {}
    for g in LSTM_GATES:
        z = _preactivation(cell, f"_{g}", h, e)
        act = TANH if g == "g" else SIGMOID
        gates[g] = [_limit(v, act, (g, i)) for i, v in enumerate(z)]
    new_c = tuple(gates["f"][k] * c[k] + gates["i"][k] * gates["g"][k] for k in range(cell.hidden))
    new_h = tuple(gates["o"][k] * _sign(new_c[k]) for k in range(cell.hidden))
    return LstmState(new_c, new_h)


def saturated_run(cell: CellSpec, string: Str) -> list:
    """States after each token (the initial state is not included)."""
    state = cell.initial_state()
    out = []
    for symbol in string:
        state = saturate_step(cell, state, symbol)
        out.append(state)
    return out


# -- numeric check ------------------------------------------------------------------------


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    if z < -745:
        return 0.0
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _float_pre(cell: CellSpec, suffix: str, h, e, rho: float) -> List[float]:
    W, U, b = cell.weights[f"W{suffix}"], cell.weights[f"U{suffix}"], cell.weights[f"b{suffix}"]
    return [
        rho * (sum(float(w) * x for w, x in zip(W[i], h)) + sum(float(u) * float(x) for u, x in zip(U[i], e)) + float(b[i]))
        for i in range(cell.hidden)
    ]


def numeric_run(cell: CellSpec, string: Str, rho: float) -> list:
    """Floating-point run of the unsaturated cell with parameters scaled by ``rho``."""
    if cell.kind == "simple_rnn":
        h = [float(v) for v in cell.initial_h]
        out = []
        for symbol in string:
            z = _float_pre(cell, "", h, _embed(cell, symbol), rho)
            h = [_sigmoid(v) if cell.activations[i] == SIGMOID else math.tanh(v) for i, v in enumerate(z)]
            out.append(tuple(h))
        return out
    c = [float(v) for v in cell.initial_c]
    h = [float(v) for v in cell.initial_h]
    out = []
    for symbol in string:
        e = _embed(cell, symbol)
        gate = {g: _float_pre(cell, f"_{g}", h, e, rho) for g in LSTM_GATES}
        i = [_sigmoid(v) for v in gate["i"]]
        f = [_sigmoid(v) for v in gate["f"]]
        o = [_sigmoid(v) for v in gate["o"]]
        g = [math.tanh(v) for v in gate["g"]]
        c = [f[k] * c[k] + i[k] * g[k] for k in range(cell.hidden)]
        h = [o[k] * math.tanh(c[k]) for k in range(cell.hidden)]
        out.append((tuple(c), tuple(h)))
    return out


def _limit_targets(cell: CellSpec, trajectory: list) -> list:
    """Values the unsaturated run converges to along a saturated trajectory.

    For the LSTM the numeric output ``o * tanh(c)`` tends to ``o * tanh(c)``
    evaluated at the integer cell state, which is what gets compared.
    """
    if cell.kind == "simple_rnn":
        return [tuple(float(v) for v in h) for h in trajectory]
    # with c != 0 the output gate is |h|; with c == 0 the target is 0 either way
    return [
        (tuple(float(c) for c in s.c), tuple(abs(h) * math.tanh(c) for c, h in zip(s.c, s.h)))
        for s in trajectory
    ]


def _flatten(state) -> List[float]:
    if state and isinstance(state[0], tuple):
        return [v for part in state for v in part]
    return list(state)


@dataclass
class SaturationCheck:
    converged: bool
    trajectory: list
    deviations: List[float] = field(default_factory=list)
    flagged: Optional[tuple] = None


def numeric_saturation_check(cell: CellSpec, string: Str, rho_schedule: Sequence[float],
                             tol: float = 1e-3) -> SaturationCheck:
    """Compare unsaturated runs at increasing scales against the saturated run.

    Converged when the maximum deviation at each of the last two scales is
    within ``tol``.
    """
    if not rho_schedule:
        raise ValueError("rho_schedule must be nonempty")
    try:
        trajectory = saturated_run(cell, string)
    except UndefinedLimit as exc:
        return SaturationCheck(False, [], [], exc.coordinate)
    targets = _limit_targets(cell, trajectory)
    deviations = []
    for rho in rho_schedule:
        run = numeric_run(cell, string, float(rho))
        dev = 0.0
        for got, want in zip(run, targets):
            for a, b in zip(_flatten(got), _flatten(want)):
                dev = max(dev, abs(a - b))
        deviations.append(dev)
    converged = all(d <= tol for d in deviations[-2:])
    return SaturationCheck(converged, trajectory, deviations)


# -- extraction and probes ------------------------------------------------------------------


def extract_dfa_from_srnn(cell: CellSpec, alphabet: Optional[Alphabet] = None,
                          max_states: int = 1 << 16,
                          accept: Callable[[tuple], bool] = lambda h: False) -> Dfa:
    """Breadth-first exploration of the saturated state space.

    Each distinct saturated hidden vector becomes one DFA state, numbered in
    discovery order.
    """
    if cell.kind != "simple_rnn":
        raise ValueError("extraction needs a simple_rnn cell (finite saturated state space)")
    alphabet = alphabet or cell.alphabet
    start = cell.initial_state()
    index = {start: 0}
    order = [start]
    queue = deque([start])
    delta = {}
    while queue:
        h = queue.popleft()
        for symbol in alphabet:
            nxt = saturate_step(cell, h, symbol)
            if nxt not in index:
                if len(index) >= max_states:
                    raise StateBudgetExceeded(f"more than {max_states} saturated states")
                index[nxt] = len(index)
                order.append(nxt)
                queue.append(nxt)
            delta[(index[h], symbol)] = index[nxt]
    accepting = {index[h] for h in order if accept(h)}
    return Dfa(alphabet, tuple(range(len(order))), 0, delta, accepting)


class ProbeRow(NamedTuple):
    n: int
    count: int
    bits: float


def space_complexity_probe(step: Callable[[Hashable, str], Hashable], initial: Hashable,
                           alphabet: Alphabet, n_values: Sequence[int],
                           limit: Optional[int] = None) -> List[ProbeRow]:
    """Distinct states reached after exactly ``n`` steps, over every input of length ``n``.

    The step function is deterministic, so propagating the set of distinct
    states one symbol at a time yields the same counts as running every
    string separately.
    """
    limit = budget() if limit is None else limit
    targets = sorted(set(n_values))
    rows = {}
    frontier = {initial}
    for n in range(0, (targets[-1] if targets else 0) + 1):
        if n > 0:
            frontier = {step(s, a) for s in frontier for a in alphabet}
            if len(frontier) > limit:
                raise BudgetExceeded(f"{len(frontier)} states at length {n} exceed budget {limit}")
        if n in targets:
            rows[n] = ProbeRow(n, len(frontier), math.log2(len(frontier)) if frontier else 0.0)
    return [rows[n] for n in n_values]


def probe_cell(cell: CellSpec, n_values: Sequence[int], alphabet: Optional[Alphabet] = None,
               limit: Optional[int] = None) -> List[ProbeRow]:
    return space_complexity_probe(lambda s, a: saturate_step(cell, s, a), cell.initial_state(),
                                  alphabet or cell.alphabet, n_values, limit)


# -- saturated attention ---------------------------------------------------------------------


@dataclass(frozen=True)
class AttentionInstance:
    query: Vector
    keys: Tuple[Vector, ...]
    values: Tuple[Vector, ...]

    def __post_init__(self):
        object.__setattr__(self, "query", _vec(self.query))
        object.__setattr__(self, "keys", tuple(_vec(k) for k in self.keys))
        object.__setattr__(self, "values", tuple(_vec(v) for v in self.values))
        if len(self.keys) != len(self.values):
            raise DimensionMismatch("keys and values must have the same length")
        if any(len(k) != len(self.query) for k in self.keys):
            raise DimensionMismatch("every key must match the query dimension")
        if len({len(v) for v in self.values}) > 1:
            raise DimensionMismatch("values must share one dimension")


def saturated_attention(inst: AttentionInstance) -> Vector:
    """Mean of the values whose keys maximize ``q · k``."""
    if not inst.keys:
        raise ValueError("attention needs at least one key")
    scores = [sum((q * k for q, k in zip(inst.query, key)), Fraction(0)) for key in inst.keys]
    best = max(scores)
    chosen = [v for s, v in zip(scores, inst.values) if s == best]
    dim = len(chosen[0])
    return tuple(sum((v[i] for v in chosen), Fraction(0)) / len(chosen) for i in range(dim))


def count_anbn_with_attention(string: Str) -> bool:
    """Recognize aⁿbⁿ with two uniform-attention heads and a finite-state check.

    A beginning-of-sequence position with zero values is prepended, so both
    heads always have keys.  Constant keys make each head average its
    indicator values, giving ``#a / (n + 1)`` and ``#b / (n + 1)``; the
    feedforward comparison accepts when these agree and no ``b`` precedes an
    ``a``.
    """
    tokens = ("<s>",) + tuple(string)
    keys = tuple((Fraction(1),) for _ in tokens)
    query = (Fraction(1),)
    count_a = AttentionInstance(query, keys, tuple((Fraction(int(t == "a")),) for t in tokens))
    count_b = AttentionInstance(query, keys, tuple((Fraction(int(t == "b")),) for t in tokens))
    mean_a = saturated_attention(count_a)[0]
    mean_b = saturated_attention(count_b)[0]
    in_astar_bstar = all(not (x == "b" and y == "a") for x, y in zip(string, string[1:]))
    return mean_a == mean_b and in_astar_bstar


# -- builtin cells --------------------------------------------------------------------------------

_AB_EMBEDDING = {"a": (1, 0), "b": (0, 1)}


def parity_cell() -> CellSpec:
    """Two threshold units tracking the parity of ``a``.

    ``(0, 0)`` is the even state; unit 1 fires on ``a`` from the even state,
    unit 2 on ``b`` from an odd state.  The codes ``(1, 0)`` and ``(0, 1)``
    both mean odd.
    """
    return CellSpec(
        "simple_rnn", 2, 2,
        {"W": [[-2, -2], [2, 2]], "U": [[2, 0], [0, 2]], "b": [-1, -3]},
        _AB_EMBEDDING, (SIGMOID, SIGMOID),
    )


def parity_even(h) -> bool:
    return sum(h) == 0


def astar_b_cell() -> CellSpec:
    """Detector for ``a*b``: unit 1 marks "just read the b", unit 2 is a dead latch."""
    return CellSpec(
        "simple_rnn", 2, 2,
        {"W": [[-2, -2], [2, 2]], "U": [[0, 2], [0, 0]], "b": [-1, -1]},
        _AB_EMBEDDING, (SIGMOID, SIGMOID),
    )


def astar_b_accepting(h) -> bool:
    return h[0] == 1


def last_symbol_cell() -> CellSpec:
    """One-hot code of the most recent symbol."""
    return CellSpec(
        "simple_rnn", 2, 2,
        {"W": [[0, 0], [0, 0]], "U": [[2, -2], [-2, 2]], "b": [0, 0]},
        _AB_EMBEDDING, (SIGMOID, SIGMOID),
    )


def constant_cell() -> CellSpec:
    return CellSpec("simple_rnn", 1, 2, {"W": [[0]], "U": [[0, 0]], "b": [1]},
                    _AB_EMBEDDING, (SIGMOID,), initial_h=(1,))


def counting_lstm_cell() -> CellSpec:
    """One LSTM unit with gates always open; the candidate is +1 on ``a`` and -1 on ``b``."""
    zero_w, zero_u = [[0]], [[0, 0]]
    weights = {}
    for gate in ("i", "f", "o"):
        weights[f"W_{gate}"], weights[f"U_{gate}"], weights[f"b_{gate}"] = zero_w, zero_u, [1]
    weights["W_g"], weights["U_g"], weights["b_g"] = zero_w, [[1, -1]], [0]
    return CellSpec("lstm", 1, 2, weights, _AB_EMBEDDING)


BUILTIN_CELLS = {
    "parity": parity_cell,
    "astar-b": astar_b_cell,
    "last-symbol": last_symbol_cell,
    "constant": constant_cell,
    "counting-lstm": counting_lstm_cell,
}


# -- JSON --------------------------------------------------------------------------------------------


def cell_to_json(cell: CellSpec) -> dict:
    def dump(value):
        if value and isinstance(value[0], tuple):
            return [[format_fraction(v) for v in row] for row in value]
        return [format_fraction(v) for v in value]

    data = {
        "type": "cell",
        "kind": cell.kind,
        "dims": {"hidden": cell.hidden, "input": cell.input_dim},
        "weights": {name: dump(value) for name, value in cell.weights.items()},
        "embedding": {s: dump(v) for s, v in cell.embedding.items()},
    }
    if cell.kind == "simple_rnn":
        data["activations"] = list(cell.activations)
        data["initial"] = dump(cell.initial_h)
    else:
        data["initial"] = {"c": dump(cell.initial_c), "h": dump(cell.initial_h)}
    return data


def cell_from_json(data: dict) -> CellSpec:
    if data.get("type") != "cell":
        raise FormatError(f"unknown type {data.get('type')!r}")
    try:
        kind = data["kind"]
        initial = data.get("initial")
        h0 = c0 = None
        if kind == "lstm" and initial is not None:
            c0, h0 = initial.get("c"), initial.get("h")
        elif initial is not None:
            h0 = initial
        return CellSpec(
            kind,
            int(data["dims"]["hidden"]),
            int(data["dims"]["input"]),
            dict(data["weights"]),
            dict(data["embedding"]),
            tuple(data.get("activations", ())),
            h0,
            c0,
        )
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed cell JSON: {exc}")


def load_cell(path) -> CellSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            return cell_from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")


def state_to_json(state):
    if isinstance(state, LstmState):
        return {"c": list(state.c), "h": list(state.h)}
    return list(state)


def state_from_json(cell: CellSpec, data):
    try:
        if cell.kind == "lstm":
            c, h = tuple(int(v) for v in data["c"]), tuple(int(v) for v in data["h"])
            if len(c) != cell.hidden or len(h) != cell.hidden:
                raise DimensionMismatch("state size does not match the cell")
            return LstmState(c, h)
        h = tuple(int(v) for v in data)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed state: {exc}")
    if len(h) != cell.hidden:
        raise DimensionMismatch("state size does not match the cell")
    return h
