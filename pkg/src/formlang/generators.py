"""Seeded random machines and expressions for sweeps and property tests."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .core import Alphabet
from .regular import Concat, Dfa, EmptySet, Epsilon, Nfa, Regex, Star, Sym, Union, minimize
from .wfa import RATIONAL, Wfa

AB = Alphabet(("a", "b"))


def random_regex(rng: random.Random, depth: int, alphabet: Alphabet = AB) -> Regex:
    """Random AST of depth at most ``depth`` (a leaf has depth 0)."""
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.06:
            return EmptySet()
        if roll < 0.14:
            return Epsilon()
        return Sym(rng.choice(alphabet.symbols))
    op = rng.choice(("union", "concat", "concat", "star"))
    if op == "star":
        return Star(random_regex(rng, depth - 1, alphabet))
    left = random_regex(rng, depth - 1, alphabet)
    right = random_regex(rng, depth - 1, alphabet)
    return Union(left, right) if op == "union" else Concat(left, right)


def random_nfa(rng: random.Random, n_states: int, alphabet: Alphabet = AB,
               density: float = 0.3, epsilon_density: float = 0.1) -> Nfa:
    states = tuple(range(n_states))
    transitions = set()
    for s in states:
        for d in states:
            for a in alphabet:
                if rng.random() < density:
                    transitions.add((s, a, d))
            if s != d and rng.random() < epsilon_density:
                transitions.add((s, None, d))
    initial = {q for q in states if rng.random() < 0.3} or {0}
    accepting = {q for q in states if rng.random() < 0.4}
    return Nfa(alphabet, states, initial, transitions, accepting)


def random_dfa(rng: random.Random, n_states: int, alphabet: Alphabet = AB,
               completeness: float = 1.0) -> Dfa:
    states = tuple(range(n_states))
    delta = {
        (s, a): rng.randrange(n_states)
        for s in states
        for a in alphabet
        if rng.random() < completeness
    }
    accepting = {q for q in states if rng.random() < 0.5}
    return Dfa(alphabet, states, 0, delta, accepting)


def random_minimal_dfa(rng: random.Random, max_states: int, alphabet: Alphabet = AB) -> Dfa:
    """Minimize a random complete DFA with up to ``max_states`` states."""
    return minimize(random_dfa(rng, rng.randint(1, max_states), alphabet))


def random_fraction(rng: random.Random, span: int = 3, denominators=(1, 1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.choice(denominators))


def random_rational_wfa(rng: random.Random, n_states: int, alphabet: Alphabet = AB,
                        density: Optional[float] = None) -> Wfa:
    """Random WFA over the rationals; ``density`` drops transitions when given."""
    states = tuple(range(n_states))
    transitions = {}
    for s in states:
        for a in alphabet:
            for d in states:
                if density is None or rng.random() < density:
                    w = random_fraction(rng)
                    if w:
                        transitions[(s, a, d)] = w
    initial = {q: w for q in states if (w := random_fraction(rng))}
    final = {q: w for q in states if (w := random_fraction(rng))}
    return Wfa(alphabet, states, RATIONAL, initial, transitions, final)
