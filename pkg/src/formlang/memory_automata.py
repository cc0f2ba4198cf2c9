"""Finite control over a pluggable data structure (stacks, counters).

A data structure is a triple ``(c0, U, r)``: a null configuration, a finite
set of named update operations and a readout with a finite range.  A
D-automaton reads one symbol per step; the symbol, the current readout and
the control state select both an update operation and a successor state.
Machines run in real time: exactly one step per input token.

Undefined entries of the update or transition maps reject, as does a
:class:`~formlang.errors.MemoryFault` (e.g. popping an empty stack).
"""

from __future__ import annotations

import itertools
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import FrozenSet, Hashable, List, Mapping, NamedTuple, Tuple

from .core import Alphabet, Str
from .errors import FormatError, FrontierCapExceeded, MemoryFault

BOTTOM = "⊥"


class DataStructure(ABC):
    kind: str

    @property
    @abstractmethod
    def initial(self) -> Hashable:
        """The null configuration ``c0``."""

    @property
    @abstractmethod
    def ops(self) -> Tuple[str, ...]:
        """Names of the update operations."""

    @abstractmethod
    def apply(self, op: str, config):
        """Apply a named update; raises MemoryFault when undefined."""

    @abstractmethod
    def readout(self, config) -> Hashable:
        ...

    @abstractmethod
    def readout_range(self) -> list:
        ...

    @abstractmethod
    def to_json(self) -> dict:
        ...

    def readout_from_json(self, value):
        return tuple(value)

    def readout_to_json(self, value):
        return list(value)


@dataclass(frozen=True)
class StackStructure(DataStructure):
    """Stack over ``gamma``; configurations are tuples with the top first.

    The readout is the top ``window`` symbols, padded with ``⊥``.
    """

    gamma: Tuple[str, ...]
    window: int = 1
    kind = "stack"

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(self.gamma))
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if BOTTOM in self.gamma or len(set(self.gamma)) != len(self.gamma):
            raise ValueError("stack alphabet must be distinct and must not contain ⊥")

    @property
    def initial(self):
        return ()

    @property
    def ops(self):
        return ("noop", "pop") + tuple(f"push_{g}" for g in self.gamma)

    def apply(self, op, config):
        if op == "noop":
            return config
        if op == "pop":
            if not config:
                raise MemoryFault("pop on empty stack")
            return config[1:]
        if op.startswith("push_") and op[5:] in self.gamma:
            return (op[5:],) + config
        raise ValueError(f"unknown stack operation {op!r}")

    def readout(self, config):
        top = config[: self.window]
        return top + (BOTTOM,) * (self.window - len(top))

    def readout_range(self):
        out = []
        for depth in range(self.window + 1):
            for top in itertools.product(self.gamma, repeat=depth):
                out.append(top + (BOTTOM,) * (self.window - depth))
        return out

    def to_json(self):
        return {"kind": "stack", "alphabet": list(self.gamma), "window": self.window}


_COUNTER_OPS = ("-1", "+0", "+1", "x0")


@dataclass(frozen=True)
class CounterStructure(DataStructure):
    """``k`` integer counters with per-coordinate ``-1 +0 +1 x0`` updates and
    a zero-check readout (0 when a counter is zero, 1 otherwise).

    Operation names join the per-counter codes with commas, e.g. ``"+1,-1"``.
    """

    k: int
    kind = "counter"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one counter")

    @property
    def initial(self):
        return (0,) * self.k

    @property
    def ops(self):
        return tuple(",".join(c) for c in itertools.product(_COUNTER_OPS, repeat=self.k))

    def apply(self, op, config):
        codes = op.split(",")
        if len(codes) != self.k or any(c not in _COUNTER_OPS for c in codes):
            raise ValueError(f"unknown counter operation {op!r}")
        out = []
        for code, value in zip(codes, config):
            if code == "x0":
                out.append(0)
            else:
                out.append(value + int(code))
        return tuple(out)

    def readout(self, config):
        return tuple(0 if v == 0 else 1 for v in config)

    def readout_range(self):
        return list(itertools.product((0, 1), repeat=self.k))

    def to_json(self):
        return {"kind": "counter", "k": self.k}


def structure_from_json(data: dict) -> DataStructure:
    kind = data.get("kind")
    if kind == "stack":
        return StackStructure(tuple(data["alphabet"]), int(data.get("window", 1)))
    if kind == "counter":
        return CounterStructure(int(data["k"]))
    raise FormatError(f"unknown memory kind {kind!r}")


Key = Tuple[str, Hashable, Hashable]  # (symbol, readout, state)


@dataclass(frozen=True)
class DAutomaton:
    alphabet: Alphabet
    states: Tuple[Hashable, ...]
    initial: Hashable
    structure: DataStructure
    upsilon: Mapping[Key, str]
    delta: Mapping[Key, Hashable]
    accept: FrozenSet[Tuple[Hashable, Hashable]]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "upsilon", dict(self.upsilon))
        object.__setattr__(self, "delta", dict(self.delta))
        object.__setattr__(self, "accept", frozenset(self.accept))
        _validate(self, [(k, [v]) for k, v in self.upsilon.items()],
                  [(k, [v]) for k, v in self.delta.items()])


@dataclass(frozen=True)
class NondetDAutomaton:
    """As :class:`DAutomaton`, but ``upsilon`` and ``delta`` are relations,
    stored as maps to sets.  Any allowed update may combine with any allowed
    successor state."""

    alphabet: Alphabet
    states: Tuple[Hashable, ...]
    initial: Hashable
    structure: DataStructure
    upsilon: Mapping[Key, FrozenSet[str]]
    delta: Mapping[Key, FrozenSet[Hashable]]
    accept: FrozenSet[Tuple[Hashable, Hashable]]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "upsilon", {k: frozenset(v) for k, v in self.upsilon.items()})
        object.__setattr__(self, "delta", {k: frozenset(v) for k, v in self.delta.items()})
        object.__setattr__(self, "accept", frozenset(self.accept))
        _validate(self, self.upsilon.items(), self.delta.items())


def _validate(m, upsilon_items, delta_items):
    states = set(m.states)
    readouts = set(m.structure.readout_range())
    ops = set(m.structure.ops)
    if m.initial not in states:
        raise ValueError(f"initial state {m.initial!r} not declared")
    for (symbol, read, state), values in upsilon_items:
        _check_key(m, symbol, read, state, states, readouts)
        for op in values:
            if op not in ops:
                raise ValueError(f"unknown update operation {op!r}")
    for (symbol, read, state), values in delta_items:
        _check_key(m, symbol, read, state, states, readouts)
        for target in values:
            if target not in states:
                raise ValueError(f"undeclared target state {target!r}")
    for read, state in m.accept:
        if read not in readouts or state not in states:
            raise ValueError(f"accept entry {(read, state)!r} is not a readout/state pair")


def _check_key(m, symbol, read, state, states, readouts):
    if symbol not in m.alphabet:
        raise ValueError(f"symbol {symbol!r} not in alphabet")
    if read not in readouts:
        raise ValueError(f"{read!r} is not a readout value")
    if state not in states:
        raise ValueError(f"undeclared state {state!r}")


class TraceStep(NamedTuple):
    config: Hashable
    state: Hashable
    readout: Hashable


class Run(NamedTuple):
    accepted: bool
    trace: List[TraceStep]


def run_deterministic(m: DAutomaton, string: Str) -> Run:
    """Run ``m`` on ``string``; the trace records the configuration after each step."""
    structure = m.structure
    config, state = structure.initial, m.initial
    trace = []
    for symbol in string:
        key = (symbol, structure.readout(config), state)
        op = m.upsilon.get(key)
        nxt = m.delta.get(key)
        if op is None or nxt is None:
            return Run(False, trace)
        try:
            config = structure.apply(op, config)
        except MemoryFault:
            return Run(False, trace)
        state = nxt
        trace.append(TraceStep(config, state, structure.readout(config)))
    return Run((structure.readout(config), state) in m.accept, trace)


def accepts(m: DAutomaton, string: Str) -> bool:
    return run_deterministic(m, string).accepted


def _successors(m: NondetDAutomaton, config, state, symbol):
    structure = m.structure
    key = (symbol, structure.readout(config), state)
    targets = m.delta.get(key, ())
    if not targets:
        return
    for op in m.upsilon.get(key, ()):
        try:
            new_config = structure.apply(op, config)
        except MemoryFault:
            continue
        for target in targets:
            yield new_config, target


def run_nondeterministic(m: NondetDAutomaton, string: Str, frontier_cap: int = 10**6) -> bool:
    """Breadth-wise simulation of the set of reachable (config, state) pairs."""
    frontier = {(m.structure.initial, m.initial)}
    for step, symbol in enumerate(string, 1):
        nxt = set()
        for config, state in frontier:
            nxt.update(_successors(m, config, state, symbol))
            if len(nxt) > frontier_cap:
                raise FrontierCapExceeded(step, len(nxt))
        frontier = nxt
        if not frontier:
            return False
    readout = m.structure.readout
    return any((readout(c), q) in m.accept for c, q in frontier)


def as_relation(m: DAutomaton) -> NondetDAutomaton:
    """View a deterministic machine as a (functional) nondeterministic one."""
    return NondetDAutomaton(
        m.alphabet, m.states, m.initial, m.structure,
        {k: {v} for k, v in m.upsilon.items()},
        {k: {v} for k, v in m.delta.items()},
        m.accept,
    )


def reachable_configurations(m, n: int, cap: int = 10**7) -> set:
    """All (config, state) pairs reached after exactly ``n`` steps, over every
    input of length ``n`` whose run does not reject early."""
    if isinstance(m, DAutomaton):
        m = as_relation(m)
    frontier = {(m.structure.initial, m.initial)}
    for step in range(1, n + 1):
        nxt = set()
        for config, state in frontier:
            for symbol in m.alphabet:
                nxt.update(_successors(m, config, state, symbol))
        if len(nxt) > cap:
            raise FrontierCapExceeded(step, len(nxt))
        frontier = nxt
    return frontier


def memory_configuration_count(m, n: int) -> int:
    """Number of distinct memory configurations after exactly ``n`` steps."""
    return len({config for config, _ in reachable_configurations(m, n)})


# -- builtin machines ----------------------------------------------------------


def builtin_anbn_counter() -> DAutomaton:
    """One counter: +1 per ``a``, -1 per ``b``; state ``b`` forbids further ``a``."""
    s = CounterStructure(1)
    upsilon, delta = {}, {}
    for r in s.readout_range():
        upsilon[("a", r, "a")], delta[("a", r, "a")] = "+1", "a"
    upsilon[("b", (1,), "a")], delta[("b", (1,), "a")] = "-1", "b"
    upsilon[("b", (1,), "b")], delta[("b", (1,), "b")] = "-1", "b"
    accept = {((0,), "a"), ((0,), "b")}
    return DAutomaton(Alphabet(("a", "b")), ("a", "b"), "a", s, upsilon, delta, accept)


def builtin_anbn_stack() -> DAutomaton:
    """Push each ``a``; each ``b`` pops a matching ``a``."""
    s = StackStructure(("a",), 1)
    top, empty = ("a",), (BOTTOM,)
    upsilon = {
        ("a", top, "a"): "push_a",
        ("a", empty, "a"): "push_a",
        ("b", top, "a"): "pop",
        ("b", top, "b"): "pop",
    }
    delta = {("a", top, "a"): "a", ("a", empty, "a"): "a", ("b", top, "a"): "b", ("b", top, "b"): "b"}
    accept = {(empty, "a"), (empty, "b")}
    return DAutomaton(Alphabet(("a", "b")), ("a", "b"), "a", s, upsilon, delta, accept)


def dyck_alphabet(k: int) -> Alphabet:
    """``( )`` for a single bracket type, else ``(1 )1 ... (k )k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return Alphabet(("(", ")"))
    return Alphabet(tuple(itertools.chain.from_iterable((f"({i}", f"){i}") for i in range(1, k + 1))))


def dyck_pairs(k: int) -> List[Tuple[str, str]]:
    symbols = dyck_alphabet(k).symbols
    return [(symbols[2 * i], symbols[2 * i + 1]) for i in range(k)]


def builtin_dyck_stack(k: int, window: int = 1) -> DAutomaton:
    """Push every open bracket; a close bracket pops its own type off the top."""
    pairs = dyck_pairs(k)
    s = StackStructure(tuple(o for o, _ in pairs), window)
    upsilon, delta = {}, {}
    for r in s.readout_range():
        for opener, closer in pairs:
            upsilon[(opener, r, "q")] = f"push_{opener}"
            delta[(opener, r, "q")] = "q"
            if r[0] == opener:
                upsilon[(closer, r, "q")] = "pop"
                delta[(closer, r, "q")] = "q"
    accept = {((BOTTOM,) * window, "q")}
    return DAutomaton(dyck_alphabet(k), ("q",), "q", s, upsilon, delta, accept)


def builtin_anbncn_counter() -> DAutomaton:
    """Two counters: the first counts up on ``a`` and down on ``b``, the
    second up on ``b`` and down on ``c``."""
    s = CounterStructure(2)
    upsilon, delta = {}, {}

    def rule(symbol, read, state, op, target):
        upsilon[(symbol, read, state)] = op
        delta[(symbol, read, state)] = target

    for r in s.readout_range():
        rule("a", r, "a", "+1,+0", "a")
    for r2 in (0, 1):
        rule("b", (1, r2), "a", "-1,+1", "b")
        rule("b", (1, r2), "b", "-1,+1", "b")
    rule("c", (0, 1), "b", "+0,-1", "c")
    rule("c", (0, 1), "c", "+0,-1", "c")
    accept = {((0, 0), "a"), ((0, 0), "c")}
    return DAutomaton(Alphabet(("a", "b", "c")), ("a", "b", "c"), "a", s, upsilon, delta, accept)


def builtin_palindrome_stack() -> NondetDAutomaton:
    """Nondeterministic stack machine for even palindromes ``w wᴿ`` over {a, b}.

    The only guess is in the transition relation: after pushing a symbol the
    machine may move to ``m``, committing that the next symbol starts the
    reversed half.
    """
    gamma = ("a", "b")
    s = StackStructure(gamma, 1)
    upsilon, delta = {}, {}
    for r in s.readout_range():
        for x in gamma:
            upsilon[(x, r, "push")] = {f"push_{x}"}
            delta[(x, r, "push")] = {"push", "mid"}
    for x in gamma:
        for state in ("mid", "pop"):
            upsilon[(x, (x,), state)] = {"pop"}
            delta[(x, (x,), state)] = {"pop"}
    accept = {((BOTTOM,), "push"), ((BOTTOM,), "pop")}
    return NondetDAutomaton(Alphabet(gamma), ("push", "mid", "pop"), "push", s, upsilon, delta, accept)


BUILTINS = {
    "anbn-counter": lambda **kw: builtin_anbn_counter(),
    "anbn-stack": lambda **kw: builtin_anbn_stack(),
    "anbncn-counter": lambda **kw: builtin_anbncn_counter(),
    "dyck-stack": lambda k=1, window=1, **kw: builtin_dyck_stack(k, window),
    "palindrome-stack": lambda **kw: builtin_palindrome_stack(),
}


# -- JSON ------------------------------------------------------------------------


def dautomaton_to_json(m) -> dict:
    s = m.structure
    nondet = isinstance(m, NondetDAutomaton)

    def entries(mapping, field):
        out = []
        for (symbol, read, state), value in mapping.items():
            values = sorted(value, key=str) if nondet else [value]
            for v in values:
                out.append({"on": symbol, "read": s.readout_to_json(read), "state": state, field: v})
        out.sort(key=lambda e: json.dumps(e, sort_keys=True, ensure_ascii=False))
        return out

    accept = [{"read": s.readout_to_json(r), "state": q} for r, q in m.accept]
    accept.sort(key=lambda e: json.dumps(e, sort_keys=True, ensure_ascii=False))
    data = {
        "type": "dautomaton",
        "memory": s.to_json(),
        "alphabet": list(m.alphabet.symbols),
        "states": list(m.states),
        "initial": m.initial,
        "upsilon": entries(m.upsilon, "op"),
        "delta": entries(m.delta, "to"),
        "accept": accept,
    }
    if nondet:
        data["nondeterministic"] = True
    return data


def dautomaton_from_json(data: dict):
    if data.get("type") != "dautomaton":
        raise FormatError(f"unknown automaton type {data.get('type')!r}")
    try:
        s = structure_from_json(data["memory"])
        nondet = bool(data.get("nondeterministic", False))
        upsilon, delta = {}, {}
        for mapping, field, name in ((upsilon, "op", "upsilon"), (delta, "to", "delta")):
            for e in data[name]:
                key = (e["on"], s.readout_from_json(e["read"]), e["state"])
                if key in mapping and not nondet:
                    raise FormatError(f"repeated {name} entry {key!r} in a deterministic machine")
                mapping.setdefault(key, set()).add(e[field])
        accept = {(s.readout_from_json(e["read"]), e["state"]) for e in data["accept"]}
        alphabet = Alphabet(tuple(data["alphabet"]))
        states = tuple(data["states"])
        if nondet:
            return NondetDAutomaton(alphabet, states, data["initial"], s, upsilon, delta, accept)
        return DAutomaton(
            alphabet, states, data["initial"], s,
            {k: next(iter(v)) for k, v in upsilon.items()},
            {k: next(iter(v)) for k, v in delta.items()},
            accept,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed D-automaton JSON: {exc}")


def load_dautomaton(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return dautomaton_from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")
