"""Weighted finite automata over semirings.

A WFA scores a string by summing (⊕) over every path the string induces the
product (⊗) of the initial weight, the transition weights and the final
weight.  :func:`score` uses the forward algorithm; :func:`score_bruteforce`
enumerates state sequences and is kept as an independent oracle.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .core import Alphabet, Str, budget, format_fraction, parse_fraction
from .errors import BudgetExceeded, FormatError, InvalidPath, SemiringMismatch
from .regular import Nfa

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Semiring:
    name: str
    zero: Any
    one: Any
    plus: Callable[[Any, Any], Any]
    times: Callable[[Any, Any], Any]
    parse: Callable[[Any], Any] = field(repr=False)
    dump: Callable[[Any], Any] = field(repr=False)

    def sum(self, values):
        total = self.zero
        for v in values:
            total = self.plus(total, v)
        return total

    def product(self, values):
        total = self.one
        for v in values:
            total = self.times(total, v)
        return total


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    if value in (0, 1, "0", "1"):
        return bool(int(value))
    if value in ("true", "false"):
        return value == "true"
    raise FormatError(f"not a boolean weight: {value!r}")


def _maxplus_times(a, b):
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def _parse_maxplus(value):
    if value in ("-inf", "−∞") or value == NEG_INF:
        return NEG_INF
    return parse_fraction(value)


def _dump_maxplus(value):
    return "-inf" if value == NEG_INF else format_fraction(value)


def _parse_real(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return float(parse_fraction(value))


BOOLEAN = Semiring("boolean", False, True, lambda a, b: a or b, lambda a, b: a and b,
                   _parse_bool, lambda v: bool(v))
RATIONAL = Semiring("rational", Fraction(0), Fraction(1), lambda a, b: a + b, lambda a, b: a * b,
                    parse_fraction, format_fraction)
MAXPLUS = Semiring("maxplus", NEG_INF, Fraction(0), max, _maxplus_times,
                   _parse_maxplus, _dump_maxplus)
# floating-point field, used for spectral learning in float mode
REAL = Semiring("real", 0.0, 1.0, lambda a, b: a + b, lambda a, b: a * b, _parse_real, float)

SEMIRINGS = {s.name: s for s in (BOOLEAN, RATIONAL, MAXPLUS, REAL)}


@dataclass(frozen=True)
class Wfa:
    alphabet: Alphabet
    states: Tuple[Hashable, ...]
    semiring: Semiring
    initial: Mapping[Hashable, Any]
    transitions: Mapping[Tuple[Hashable, str, Hashable], Any]
    final: Mapping[Hashable, Any]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial", dict(self.initial))
        object.__setattr__(self, "final", dict(self.final))
        object.__setattr__(self, "transitions", dict(self.transitions))
        declared = set(self.states)
        if len(declared) != len(self.states):
            raise ValueError("duplicate states")
        for q in list(self.initial) + list(self.final):
            if q not in declared:
                raise ValueError(f"weight on undeclared state {q!r}")
        arcs: Dict[str, List[Tuple[Hashable, Hashable, Any]]] = {s: [] for s in self.alphabet}
        for (src, symbol, dst), w in self.transitions.items():
            if src not in declared or dst not in declared:
                raise ValueError(f"transition {src!r} -> {dst!r} uses undeclared state")
            if symbol not in self.alphabet:
                raise ValueError(f"symbol {symbol!r} not in alphabet")
            arcs[symbol].append((src, dst, w))
        object.__setattr__(self, "_arcs", arcs)

    def lam(self, q):
        return self.initial.get(q, self.semiring.zero)

    def rho(self, q):
        return self.final.get(q, self.semiring.zero)

    def tau(self, src, symbol, dst):
        return self.transitions.get((src, symbol, dst), self.semiring.zero)

    @classmethod
    def from_matrices(cls, alphabet: Alphabet, alpha: Sequence, matrices: Mapping[str, Sequence[Sequence]],
                      omega: Sequence, semiring: Semiring = None) -> "Wfa":
        """States ``0..n-1``; ``alpha`` initial row, ``matrices[σ][i][j]`` the
        weight of ``i -σ-> j``, ``omega`` final column."""
        semiring = semiring or RATIONAL
        n = len(alpha)
        transitions = {}
        for symbol, m in matrices.items():
            for i in range(n):
                for j in range(n):
                    if m[i][j] != semiring.zero:
                        transitions[(i, symbol, j)] = m[i][j]
        return cls(alphabet, tuple(range(n)), semiring,
                   {i: alpha[i] for i in range(n) if alpha[i] != semiring.zero},
                   transitions,
                   {i: omega[i] for i in range(n) if omega[i] != semiring.zero})


def forward(w: Wfa, string: Str) -> Dict[Hashable, Any]:
    """Forward weights after reading ``string`` (before final weights)."""
    K = w.semiring
    vec = {q: v for q, v in w.initial.items() if v != K.zero}
    for symbol in string:
        nxt: Dict[Hashable, Any] = {}
        for src, dst, weight in w._arcs[symbol]:
            if src in vec:
                contribution = K.times(vec[src], weight)
                nxt[dst] = K.plus(nxt[dst], contribution) if dst in nxt else contribution
        vec = nxt
    return vec


def score(w: Wfa, string: Str):
    K = w.semiring
    for symbol in string:
        if symbol not in w.alphabet:
            raise ValueError(f"symbol {symbol!r} not in alphabet")
    return K.sum(K.times(v, w.rho(q)) for q, v in forward(w, string).items())


@dataclass(frozen=True)
class Path:
    """``states[0] -symbols[0]-> states[1] ... -> states[-1]``."""

    states: Tuple[Hashable, ...]
    symbols: Tuple[str, ...]


def path_score(w: Wfa, path: Path):
    if len(path.states) != len(path.symbols) + 1:
        raise InvalidPath("a path has one more state than symbols")
    declared = set(w.states)
    for q in path.states:
        if q not in declared:
            raise InvalidPath(f"undeclared state {q!r}")
    for symbol in path.symbols:
        if symbol not in w.alphabet:
            raise InvalidPath(f"symbol {symbol!r} not in alphabet")
    K = w.semiring
    total = w.lam(path.states[0])
    for i, symbol in enumerate(path.symbols):
        total = K.times(total, w.tau(path.states[i], symbol, path.states[i + 1]))
    return K.times(total, w.rho(path.states[-1]))


def score_bruteforce(w: Wfa, string: Str, limit: Optional[int] = None):
    """⊕ of :func:`path_score` over every state sequence of length ``|x| + 1``."""
    limit = budget() if limit is None else limit
    n_paths = len(w.states) ** (len(string) + 1)
    if n_paths > limit:
        raise BudgetExceeded(f"{n_paths} paths exceed budget {limit}")
    string = tuple(string)
    return w.semiring.sum(
        path_score(w, Path(seq, string))
        for seq in itertools.product(w.states, repeat=len(string) + 1)
    )


# -- builtin machines ----------------------------------------------------------


def builtin_binary_value(base: int = 2) -> Wfa:
    """Two states mapping a digit string to its value in ``base``.

    ``q0`` loops with weight 1, crosses to ``q1`` on digit ``d`` with weight
    ``d``, and ``q1`` loops with weight ``base``.
    """
    if base < 2:
        raise ValueError("base must be at least 2")
    digits = tuple(str(d) for d in range(base))
    transitions = {}
    for d, symbol in enumerate(digits):
        transitions[(0, symbol, 0)] = Fraction(1)
        if d:
            transitions[(0, symbol, 1)] = Fraction(d)
        transitions[(1, symbol, 1)] = Fraction(base)
    return Wfa(Alphabet(digits), (0, 1), RATIONAL, {0: Fraction(1)}, transitions, {1: Fraction(1)})


def builtin_ngram_counter(pattern: Sequence[str], alphabet: Optional[Alphabet] = None) -> Wfa:
    """``len(pattern) + 1`` states counting (overlapping) occurrences of ``pattern``."""
    pattern = tuple(pattern)
    if not pattern:
        raise ValueError("pattern must be nonempty")
    if alphabet is None:
        symbols = ["a", "b"]
        symbols += [s for s in dict.fromkeys(pattern) if s not in symbols]
        alphabet = Alphabet(tuple(symbols))
    n = len(pattern)
    one = Fraction(1)
    transitions = {}
    for symbol in alphabet:
        transitions[(0, symbol, 0)] = one
        transitions[(n, symbol, n)] = one
    for i, symbol in enumerate(pattern):
        transitions[(i, symbol, i + 1)] = one
    return Wfa(alphabet, tuple(range(n + 1)), RATIONAL, {0: one}, transitions, {n: one})


# -- boolean WFAs and NFAs ---------------------------------------------------------


def wfa_to_nfa(w: Wfa) -> Nfa:
    if w.semiring is not BOOLEAN:
        raise SemiringMismatch(f"expected boolean weights, got {w.semiring.name}")
    return Nfa(
        w.alphabet,
        w.states,
        {q for q, v in w.initial.items() if v},
        {(s, a, d) for (s, a, d), v in w.transitions.items() if v},
        {q for q, v in w.final.items() if v},
    )


def nfa_to_wfa(nfa: Nfa) -> Wfa:
    """Boolean WFA for ``nfa``; epsilon moves are folded into the weights."""
    transitions = {}
    for q in nfa.states:
        for symbol in nfa.alphabet:
            for target in nfa.step(frozenset({q}), symbol):
                transitions[(q, symbol, target)] = True
    initial = {q: True for q in nfa.closure(nfa.initial)}
    return Wfa(nfa.alphabet, nfa.states, BOOLEAN, initial, transitions,
               {q: True for q in nfa.accepting})


# -- rational recurrences ------------------------------------------------------------


class UnigramRecurrence:
    """Gated recurrence ``h_t = f_t * h_{t-1} + i_t`` compiled from the unigram
    counter WFA.

    The forget gate is the weight of the accepting state's self loop and the
    input gate the weight of the crossing transition, both read off the WFA
    for the current token.
    """

    def __init__(self, symbol: str, alphabet: Optional[Alphabet] = None):
        self.symbol = symbol
        self.wfa = builtin_ngram_counter((symbol,), alphabet)
        self.forget = {s: self.wfa.tau(1, s, 1) for s in self.wfa.alphabet}
        # the start state's self loop has weight one, so its forward weight stays one
        self.input = {s: self.wfa.tau(0, s, 1) for s in self.wfa.alphabet}

    def step(self, h: Fraction, token: str) -> Fraction:
        return self.forget[token] * h + self.input[token]

    def states(self, string: Str):
        h = Fraction(0)
        for token in string:
            h = self.step(h, token)
            yield h

    def __call__(self, string: Str) -> Fraction:
        h = Fraction(0)
        for h in self.states(string):
            pass
        return h


def compile_unigram_recurrence(symbol: str, alphabet: Optional[Alphabet] = None) -> UnigramRecurrence:
    return UnigramRecurrence(symbol, alphabet)


# -- JSON ------------------------------------------------------------------------------


def wfa_to_json(w: Wfa) -> dict:
    dump = w.semiring.dump
    order = {q: i for i, q in enumerate(w.states)}
    sym = {s: i for i, s in enumerate(w.alphabet.symbols)}
    transitions = [
        {"from": s, "on": a, "to": d, "weight": dump(v)}
        for (s, a, d), v in sorted(w.transitions.items(),
                                   key=lambda kv: (order[kv[0][0]], sym[kv[0][1]], order[kv[0][2]]))
    ]
    return {
        "type": "wfa",
        "semiring": w.semiring.name,
        "alphabet": list(w.alphabet.symbols),
        "states": list(w.states),
        "initial": {str(q): dump(w.initial[q]) for q in w.states if q in w.initial},
        "final": {str(q): dump(w.final[q]) for q in w.states if q in w.final},
        "transitions": transitions,
    }


def wfa_from_json(data: dict) -> Wfa:
    if data.get("type") != "wfa":
        raise FormatError(f"unknown automaton type {data.get('type')!r}")
    try:
        semiring = SEMIRINGS[data["semiring"]]
    except KeyError:
        raise FormatError(f"unknown semiring {data.get('semiring')!r}")
    try:
        states = tuple(data["states"])
        # JSON object keys are strings; map them back onto declared states
        by_name = {str(q): q for q in states}

        def state(key):
            if key not in by_name:
                raise FormatError(f"undeclared state {key!r}")
            return by_name[key]

        parse = semiring.parse
        return Wfa(
            Alphabet(tuple(data["alphabet"])),
            states,
            semiring,
            {state(str(k)): parse(v) for k, v in data.get("initial", {}).items()},
            {(t["from"], t["on"], t["to"]): parse(t["weight"]) for t in data.get("transitions", [])},
            {state(str(k)): parse(v) for k, v in data.get("final", {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed WFA JSON: {exc}")


def load_wfa(path) -> Wfa:
    with open(path, encoding="utf-8") as fh:
        try:
            return wfa_from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")


def format_weight(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return repr(value)
    return format_fraction(value)
