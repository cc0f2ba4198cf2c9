"""Regular expressions, NFAs and DFAs, and the conversions among them.

Concrete regex syntax: ``|`` for union, juxtaposition for concatenation,
postfix ``*``, parentheses for grouping, ``%e`` for the empty string and
``%0`` for the empty language.  Symbols longer than one character are
written in single quotes, e.g. ``'(1' ')1'``.  Whitespace is ignored.

DFAs are partial: a missing transition rejects the input.  The dead state is
only ever materialized internally by :func:`minimize`.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Hashable, Iterable, Mapping, Optional, Tuple

from .core import EPSILON_TEXT, Alphabet, LabeledSample, Str, check_symbol
from .errors import (
    AlphabetMismatch,
    ConflictingLabels,
    FormatError,
    RegexSyntaxError,
    StateBudgetExceeded,
    UnknownSymbol,
)

State = Hashable

# -- regex AST ---------------------------------------------------------------


class Regex:
    """Base class of regex AST nodes."""

    __slots__ = ()

    def __str__(self):
        return regex_to_text(self)


@dataclass(frozen=True)
class EmptySet(Regex):
    pass


@dataclass(frozen=True)
class Epsilon(Regex):
    pass


@dataclass(frozen=True)
class Sym(Regex):
    symbol: str


@dataclass(frozen=True)
class Union(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class Concat(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class Star(Regex):
    inner: Regex


def node_count(ast: Regex) -> int:
    if isinstance(ast, (EmptySet, Epsilon, Sym)):
        return 1
    if isinstance(ast, Star):
        return 1 + node_count(ast.inner)
    return 1 + node_count(ast.left) + node_count(ast.right)


def symbols_of(ast: Regex) -> set:
    if isinstance(ast, Sym):
        return {ast.symbol}
    if isinstance(ast, Star):
        return symbols_of(ast.inner)
    if isinstance(ast, (Union, Concat)):
        return symbols_of(ast.left) | symbols_of(ast.right)
    return set()


# smart constructors used by state elimination; they only apply identities
# that preserve the language


def union(a: Regex, b: Regex) -> Regex:
    if isinstance(a, EmptySet):
        return b
    if isinstance(b, EmptySet) or a == b:
        return a
    return Union(a, b)


def concat(a: Regex, b: Regex) -> Regex:
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return EmptySet()
    if isinstance(a, Epsilon):
        return b
    if isinstance(b, Epsilon):
        return a
    return Concat(a, b)


def star(a: Regex) -> Regex:
    if isinstance(a, (EmptySet, Epsilon)):
        return Epsilon()
    if isinstance(a, Star):
        return a
    return Star(a)


_SPECIAL = set("|()*%' \t\n")


def _symbol_text(symbol: str) -> str:
    if len(symbol) == 1 and symbol not in _SPECIAL:
        return symbol
    return f"'{symbol}'"


def regex_to_text(ast: Regex) -> str:
    """Render an AST in the concrete syntax accepted by :func:`parse_regex`."""

    def go(node, prec):
        # prec: 0 union context, 1 concat context, 2 star operand
        if isinstance(node, EmptySet):
            return "%0"
        if isinstance(node, Epsilon):
            return "%e"
        if isinstance(node, Sym):
            return _symbol_text(node.symbol)
        if isinstance(node, Star):
            return go(node.inner, 2) + "*"
        if isinstance(node, Concat):
            left, right = go(node.left, 1), go(node.right, 1)
            sep = " " if left.endswith("'") and right.startswith("'") else ""
            text = left + sep + right
            return f"({text})" if prec > 1 else text
        text = go(node.left, 0) + "|" + go(node.right, 0)
        return f"({text})" if prec > 0 else text

    return go(ast, 0)


def parse_regex(text: str, alphabet: Alphabet) -> Regex:
    """Parse ``text`` into an AST; ``*`` binds tighter than concatenation,
    which binds tighter than ``|``."""
    tokens = []  # (kind, value, position)
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "|()*":
            tokens.append((ch, ch, i))
            i += 1
        elif ch == "%":
            code = text[i + 1 : i + 2]
            if code == "e":
                tokens.append(("eps", None, i))
            elif code == "0":
                tokens.append(("empty", None, i))
            else:
                raise RegexSyntaxError(i, "expected %e or %0")
            i += 2
        elif ch == "'":
            end = text.find("'", i + 1)
            if end < 0:
                raise RegexSyntaxError(i, "unterminated quoted symbol")
            symbol = text[i + 1 : end]
            if symbol not in alphabet:
                raise UnknownSymbol(symbol, i)
            tokens.append(("sym", symbol, i))
            i = end + 1
        else:
            if ch not in alphabet:
                raise UnknownSymbol(ch, i)
            tokens.append(("sym", ch, i))
            i += 1
    tokens.append(("end", None, len(text)))

    pos = 0
    open_parens = []

    def peek():
        return tokens[pos]

    def parse_union():
        nonlocal pos
        node = parse_concat()
        while peek()[0] == "|":
            pos += 1
            node = Union(node, parse_concat())
        return node

    def parse_concat():
        items = []
        while peek()[0] in ("sym", "eps", "empty", "("):
            items.append(parse_repeat())
        if not items:
            kind, _, where = peek()
            if kind == "end" and open_parens:
                raise RegexSyntaxError(open_parens[-1], "unclosed parenthesis")
            raise RegexSyntaxError(where, "expected an expression")
        node = items[0]
        for item in items[1:]:
            node = Concat(node, item)
        return node

    def parse_repeat():
        nonlocal pos
        node = parse_atom()
        while peek()[0] == "*":
            pos += 1
            node = Star(node)
        return node

    def parse_atom():
        nonlocal pos
        kind, value, where = peek()
        pos += 1
        if kind == "sym":
            return Sym(value)
        if kind == "eps":
            return Epsilon()
        if kind == "empty":
            return EmptySet()
        # kind == "("
        open_parens.append(where)
        node = parse_union()
        if peek()[0] != ")":
            raise RegexSyntaxError(where, "unclosed parenthesis")
        open_parens.pop()
        pos += 1
        return node

    ast = parse_union()
    kind, _, where = peek()
    if kind != "end":
        raise RegexSyntaxError(where, f"unexpected {kind!r}")
    return ast


# -- machines ----------------------------------------------------------------


def _state_key(state):
    return (0, state, "") if isinstance(state, int) else (1, 0, str(state))


def _sorted_states(states):
    return tuple(sorted(states, key=_state_key))


@dataclass(frozen=True)
class Nfa:
    """Nondeterministic automaton; transition labels are symbols or ``None`` (epsilon)."""

    alphabet: Alphabet
    states: Tuple[State, ...]
    initial: FrozenSet[State]
    transitions: FrozenSet[Tuple[State, Optional[str], State]]
    accepting: FrozenSet[State]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        declared = set(self.states)
        if len(declared) != len(self.states):
            raise ValueError("duplicate states")
        if not self.initial <= declared or not self.accepting <= declared:
            raise ValueError("initial and accepting states must be declared")
        succ: Dict[Tuple[State, Optional[str]], set] = {}
        for src, label, dst in self.transitions:
            if src not in declared or dst not in declared:
                raise ValueError(f"transition {src!r} -> {dst!r} uses undeclared state")
            if label is not None and label not in self.alphabet:
                raise UnknownSymbol(label, 0)
            succ.setdefault((src, label), set()).add(dst)
        # adjacency index, computed once at construction
        object.__setattr__(self, "_succ", {k: frozenset(v) for k, v in succ.items()})

    def successors(self, state, label) -> FrozenSet[State]:
        return self._succ.get((state, label), frozenset())

    def closure(self, states: Iterable[State]) -> FrozenSet[State]:
        seen = set(states)
        todo = list(seen)
        while todo:
            for nxt in self.successors(todo.pop(), None):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return frozenset(seen)

    def step(self, states: FrozenSet[State], symbol: str) -> FrozenSet[State]:
        moved = set()
        for state in states:
            moved |= self.successors(state, symbol)
        return self.closure(moved)


@dataclass(frozen=True)
class Dfa:
    """Deterministic automaton with a partial transition map."""

    alphabet: Alphabet
    states: Tuple[State, ...]
    initial: State
    delta: Mapping[Tuple[State, str], State]
    accepting: FrozenSet[State]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "delta", dict(self.delta))
        declared = set(self.states)
        if len(declared) != len(self.states):
            raise ValueError("duplicate states")
        if self.initial not in declared:
            raise ValueError(f"initial state {self.initial!r} not declared")
        if not self.accepting <= declared:
            raise ValueError("accepting states must be declared")
        for (src, symbol), dst in self.delta.items():
            if src not in declared or dst not in declared:
                raise ValueError(f"transition {src!r} -> {dst!r} uses undeclared state")
            if symbol not in self.alphabet:
                raise UnknownSymbol(symbol, 0)

    def __len__(self):
        return len(self.states)

    def run(self, string: Str) -> Optional[State]:
        """State reached after ``string``, or ``None`` if a transition is undefined."""
        state = self.initial
        for symbol in string:
            state = self.delta.get((state, symbol))
            if state is None:
                return None
        return state

    def accepts(self, string: Str) -> bool:
        return dfa_accepts(self, string)


Machine = (Dfa, Nfa)


def thompson(ast: Regex, alphabet: Alphabet) -> Nfa:
    """Thompson construction; at most two states per AST node."""
    transitions = set()
    counter = [0]

    def fresh():
        counter[0] += 1
        return counter[0] - 1

    def build(node):
        if isinstance(node, Union):
            s, e = fresh(), fresh()
            for child in (node.left, node.right):
                cs, ce = build(child)
                transitions.add((s, None, cs))
                transitions.add((ce, None, e))
            return s, e
        if isinstance(node, Concat):
            s1, e1 = build(node.left)
            s2, e2 = build(node.right)
            transitions.add((e1, None, s2))
            return s1, e2
        if isinstance(node, Star):
            s, e = fresh(), fresh()
            cs, ce = build(node.inner)
            transitions.update({(s, None, cs), (s, None, e), (ce, None, cs), (ce, None, e)})
            return s, e
        s, e = fresh(), fresh()
        if isinstance(node, Sym):
            if node.symbol not in alphabet:
                raise UnknownSymbol(node.symbol, 0)
            transitions.add((s, node.symbol, e))
        elif isinstance(node, Epsilon):
            transitions.add((s, None, e))
        return s, e

    start, end = build(ast)
    return Nfa(alphabet, tuple(range(counter[0])), {start}, transitions, {end})


def nfa_accepts(nfa: Nfa, string: Str) -> bool:
    current = nfa.closure(nfa.initial)
    for symbol in string:
        if not current:
            return False
        current = nfa.step(current, symbol)
    return bool(current & nfa.accepting)


def dfa_accepts(dfa: Dfa, string: Str) -> bool:
    state = dfa.run(string)
    return state is not None and state in dfa.accepting


def accepts(machine: "Dfa | Nfa", string: Str) -> bool:
    if isinstance(machine, Dfa):
        return dfa_accepts(machine, string)
    return nfa_accepts(machine, string)


def subset_name(states: Iterable[State]) -> str:
    return "{" + ",".join(str(s) for s in _sorted_states(states)) + "}"


def determinize(nfa: Nfa, max_states: int = 1 << 20) -> Dfa:
    """Subset construction over reachable, nonempty subsets."""
    start = nfa.closure(nfa.initial)
    names = {start: subset_name(start)}
    delta = {}
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        for symbol in nfa.alphabet:
            target = nfa.step(subset, symbol)
            if not target:
                continue
            if target not in names:
                if len(names) >= max_states:
                    raise StateBudgetExceeded(f"more than {max_states} reachable subsets")
                names[target] = subset_name(target)
                queue.append(target)
            delta[(names[subset], symbol)] = names[target]
    accepting = {name for subset, name in names.items() if subset & nfa.accepting}
    return Dfa(nfa.alphabet, tuple(names.values()), names[start], delta, accepting)


def reachable_states(dfa: Dfa) -> list:
    seen = {dfa.initial}
    order = [dfa.initial]
    for state in order:
        for symbol in dfa.alphabet:
            nxt = dfa.delta.get((state, symbol))
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
    return order


_DEAD = object()


def minimize(dfa: Dfa) -> Dfa:
    """Minimal partial DFA with states renamed ``0..n-1`` in BFS order.

    Unreachable states and the dead state are removed, so two DFAs for the
    same language minimize to equal objects.
    """
    symbols = dfa.alphabet.symbols
    states = reachable_states(dfa) + [_DEAD]

    def succ(state, symbol):
        if state is _DEAD:
            return _DEAD
        return dfa.delta.get((state, symbol), _DEAD)

    # Moore partition refinement
    block = {s: int(s is not _DEAD and s in dfa.accepting) for s in states}
    n_blocks = len(set(block.values()))
    while True:
        signatures = {}
        new_block = {}
        for s in states:
            sig = (block[s],) + tuple(block[succ(s, a)] for a in symbols)
            new_block[s] = signatures.setdefault(sig, len(signatures))
        block = new_block
        if len(signatures) == n_blocks:
            break
        n_blocks = len(signatures)

    # blocks from which no accepting block is reachable are dead
    rev: Dict[int, set] = {}
    for s in states:
        for a in symbols:
            rev.setdefault(block[succ(s, a)], set()).add(block[s])
    live = {block[s] for s in states if s is not _DEAD and s in dfa.accepting}
    todo = list(live)
    while todo:
        for prev in rev.get(todo.pop(), ()):
            if prev not in live:
                live.add(prev)
                todo.append(prev)

    representative = {}
    for s in states:
        representative.setdefault(block[s], s)
    start = block[dfa.initial]
    if start not in live:
        return Dfa(dfa.alphabet, (0,), 0, {}, frozenset())
    names = {start: 0}
    order = [start]
    delta = {}
    for b in order:
        for a in symbols:
            target = block[succ(representative[b], a)]
            if target not in live:
                continue
            if target not in names:
                names[target] = len(names)
                order.append(target)
            delta[(names[b], a)] = names[target]
    accepting = {names[b] for b in order if representative[b] in dfa.accepting}
    return Dfa(dfa.alphabet, tuple(range(len(order))), 0, delta, accepting)


def compile_regex(ast: Regex, alphabet: Alphabet) -> Dfa:
    """regex -> NFA -> DFA -> minimal DFA."""
    return minimize(determinize(thompson(ast, alphabet)))


def _check_same_alphabet(a: Dfa, b: Dfa):
    if set(a.alphabet.symbols) != set(b.alphabet.symbols):
        raise AlphabetMismatch(f"{a.alphabet.symbols} vs {b.alphabet.symbols}")


def counterexample(a: Dfa, b: Dfa) -> Optional[Str]:
    """Shortlex-least string accepted by exactly one of ``a`` and ``b``.

    Returns ``None`` when the languages are equal.  Breadth-first search over
    the product visits pairs in shortlex order of their access strings, so the
    first disagreeing pair dequeued yields the least counterexample.
    """
    _check_same_alphabet(a, b)
    start = (a.initial, b.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        pa, pb = pair
        in_a = pa is not None and pa in a.accepting
        in_b = pb is not None and pb in b.accepting
        if in_a != in_b:
            out = []
            while parent[pair] is not None:
                pair, symbol = parent[pair]
                out.append(symbol)
            return tuple(reversed(out))
        for symbol in a.alphabet:
            na = a.delta.get((pa, symbol)) if pa is not None else None
            nb = b.delta.get((pb, symbol)) if pb is not None else None
            if na is None and nb is None:
                continue
            nxt = (na, nb)
            if nxt not in parent:
                parent[nxt] = (pair, symbol)
                queue.append(nxt)
    return None


@dataclass(frozen=True)
class Equal:
    """The two languages coincide."""


@dataclass(frozen=True)
class Counterexample:
    """A string accepted by exactly one of the two machines."""

    string: Str


def equivalent(a: Dfa, b: Dfa) -> "Equal | Counterexample":
    cex = counterexample(a, b)
    return Equal() if cex is None else Counterexample(cex)


def to_regex(dfa: Dfa) -> Regex:
    """State elimination, removing states in reverse declared order."""
    start, final = object(), object()
    edges: Dict[Tuple[object, object], Regex] = {}

    def add(u, v, r):
        edges[(u, v)] = union(edges.get((u, v), EmptySet()), r)

    add(start, dfa.initial, Epsilon())
    for (src, symbol), dst in dfa.delta.items():
        add(src, dst, Sym(symbol))
    for state in dfa.accepting:
        add(state, final, Epsilon())

    for k in reversed(dfa.states):
        loop = star(edges.pop((k, k), EmptySet()))
        incoming = [(u, r) for (u, v), r in edges.items() if v == k]
        outgoing = [(v, r) for (u, v), r in edges.items() if u == k]
        for key in [e for e in edges if k in e]:
            del edges[key]
        for u, r_in in incoming:
            for v, r_out in outgoing:
                add(u, v, concat(concat(r_in, loop), r_out))
    return edges.get((start, final), EmptySet())


def build_trie(samples: Iterable[LabeledSample], alphabet: Alphabet) -> Dfa:
    """Prefix-tree DFA accepting exactly the positive sample strings."""
    labels: Dict[Str, bool] = {}
    for string, label in samples:
        string = tuple(string)
        if labels.get(string, label) != label:
            raise ConflictingLabels(string)
        labels[string] = label
    prefixes = {()}
    for string in labels:
        for i in range(1, len(string) + 1):
            prefixes.add(string[:i])
    order = sorted(prefixes, key=alphabet.sort_key)
    index = {p: i for i, p in enumerate(order)}
    delta = {(index[p[:-1]], p[-1]): index[p] for p in order if p}
    accepting = {index[s] for s, label in labels.items() if label}
    return Dfa(alphabet, tuple(range(len(order))), 0, delta, accepting)


# -- JSON and DOT ------------------------------------------------------------


def _label_out(label):
    return EPSILON_TEXT if label is None else label


def automaton_to_json(machine: "Dfa | Nfa") -> dict:
    if isinstance(machine, Dfa):
        transitions = [
            {"from": src, "on": symbol, "to": dst}
            for (src, symbol), dst in machine.delta.items()
        ]
        initial = [machine.initial]
        kind = "dfa"
    else:
        transitions = [
            {"from": src, "on": _label_out(label), "to": dst}
            for src, label, dst in machine.transitions
        ]
        initial = list(_sorted_states(machine.initial))
        kind = "nfa"
    order = {s: i for i, s in enumerate(machine.states)}
    sym_order = {s: i for i, s in enumerate(machine.alphabet.symbols)}
    transitions.sort(
        key=lambda t: (order[t["from"]], sym_order.get(t["on"], -1), order[t["to"]])
    )
    return {
        "type": kind,
        "alphabet": list(machine.alphabet.symbols),
        "states": list(machine.states),
        "initial": initial,
        "accepting": [s for s in machine.states if s in machine.accepting],
        "transitions": transitions,
    }


def _hashable_state(value):
    if isinstance(value, (list, dict)) or value is None:
        raise FormatError(f"state must be a string or integer, got {value!r}")
    return value


def automaton_from_json(data: dict) -> "Dfa | Nfa":
    try:
        kind = data["type"]
        if kind not in ("dfa", "nfa"):
            raise FormatError(f"unknown automaton type {kind!r}")
        alphabet = Alphabet(tuple(check_symbol(s) for s in data["alphabet"]))
        states = tuple(_hashable_state(s) for s in data["states"])
        initial = [_hashable_state(s) for s in data["initial"]]
        accepting = frozenset(_hashable_state(s) for s in data["accepting"])
        raw = [(t["from"], t["on"], t["to"]) for t in data["transitions"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed automaton JSON: {exc}")
    try:
        if kind == "nfa":
            transitions = {(s, None if on == EPSILON_TEXT else on, d) for s, on, d in raw}
            return Nfa(alphabet, states, initial, transitions, accepting)
        if len(initial) != 1:
            raise FormatError("a DFA needs exactly one initial state")
        delta = {}
        for src, on, dst in raw:
            if on == EPSILON_TEXT:
                raise FormatError("epsilon transition in a DFA")
            if delta.get((src, on), dst) != dst:
                raise FormatError(f"two transitions from {src!r} on {on!r}")
            delta[(src, on)] = dst
        return Dfa(alphabet, states, initial[0], delta, accepting)
    except ValueError as exc:
        raise FormatError(str(exc))


def load_automaton(path) -> "Dfa | Nfa":
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")
    return automaton_from_json(data)


def dump_automaton(machine: "Dfa | Nfa") -> str:
    return json.dumps(automaton_to_json(machine), indent=2, ensure_ascii=False)


def to_dot(machine: "Dfa | Nfa") -> str:
    lines = ["digraph automaton {", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for state in machine.states:
        shape = "doublecircle" if state in machine.accepting else "circle"
        lines.append(f'  "{state}" [shape={shape}];')
    initial = [machine.initial] if isinstance(machine, Dfa) else _sorted_states(machine.initial)
    for state in initial:
        lines.append(f'  __start -> "{state}";')
    for t in automaton_to_json(machine)["transitions"]:
        label = "ε" if t["on"] == EPSILON_TEXT else t["on"]
        lines.append(f'  "{t["from"]}" -> "{t["to"]}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines)


def nth_from_end_nfa(n: int, alphabet: Alphabet = Alphabet(("a", "b")), symbol: str = "a") -> Nfa:
    """NFA with ``n + 1`` states for "the n-th symbol from the end is ``symbol``"."""
    transitions = {(0, s, 0) for s in alphabet}
    transitions.add((0, symbol, 1))
    for i in range(1, n):
        transitions.update((i, s, i + 1) for s in alphabet)
    return Nfa(alphabet, tuple(range(n + 1)), {0}, transitions, {n})

