"""Reference implementations used only by the tests.

Each routine takes a different route from the library code it checks:
Python's ``re`` for regex semantics, explicit run search for NFAs, string
rewriting for Dyck membership, sympy matrices for WFA scores and rank.
"""

from __future__ import annotations

import itertools
import re

import sympy

from formlang.regular import Concat, EmptySet, Epsilon, Star, Sym, Union


def regex_to_python(ast) -> str:
    if isinstance(ast, EmptySet):
        return "(?!)"
    if isinstance(ast, Epsilon):
        return "(?:)"
    if isinstance(ast, Sym):
        return re.escape(ast.symbol)
    if isinstance(ast, Union):
        return f"(?:{regex_to_python(ast.left)}|{regex_to_python(ast.right)})"
    if isinstance(ast, Concat):
        return f"(?:{regex_to_python(ast.left)}{regex_to_python(ast.right)})"
    if isinstance(ast, Star):
        return f"(?:{regex_to_python(ast.inner)})*"
    raise TypeError(ast)


def python_regex_accepts(ast, string) -> bool:
    return re.fullmatch(regex_to_python(ast), "".join(string)) is not None


def nfa_runs_accept(nfa, string) -> bool:
    """Depth-first search over (state, position) pairs, one transition at a time."""
    seen = set()
    stack = [(q, 0) for q in nfa.initial]
    while stack:
        q, i = stack.pop()
        if (q, i) in seen:
            continue
        seen.add((q, i))
        if i == len(string) and q in nfa.accepting:
            return True
        for src, label, dst in nfa.transitions:
            if src != q:
                continue
            if label is None:
                stack.append((dst, i))
            elif i < len(string) and label == string[i]:
                stack.append((dst, i + 1))
    return False


def all_strings(symbols, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(symbols, repeat=n)


def dyck_by_rewriting(string, pairs) -> bool:
    """Cancel adjacent matched pairs until nothing changes."""
    tokens = list(string)
    matched = set(pairs)
    changed = True
    while changed and tokens:
        changed = False
        for i in range(len(tokens) - 1):
            if (tokens[i], tokens[i + 1]) in matched:
                del tokens[i : i + 2]
                changed = True
                break
    return not tokens


def is_anbn(string) -> bool:
    text = "".join(string)
    m = re.fullmatch(r"(a*)(b*)", text)
    return bool(m) and len(m.group(1)) == len(m.group(2))


def is_anbncn(string) -> bool:
    text = "".join(string)
    m = re.fullmatch(r"(a*)(b*)(c*)", text)
    return bool(m) and len(m.group(1)) == len(m.group(2)) == len(m.group(3))


def count_occurrences(string, pattern) -> int:
    k = len(pattern)
    return sum(1 for i in range(len(string) - k + 1) if tuple(string[i : i + k]) == tuple(pattern))


def wfa_matrix_score(w, string):
    """``λᵀ A_{x1} ⋯ A_{xn} ρ`` with sympy rationals."""
    states = list(w.states)
    idx = {q: i for i, q in enumerate(states)}
    n = len(states)
    vec = sympy.zeros(1, n)
    for q, v in w.initial.items():
        vec[0, idx[q]] = sympy.Rational(v.numerator, v.denominator)
    for symbol in string:
        A = sympy.zeros(n, n)
        for (s, a, d), v in w.transitions.items():
            if a == symbol:
                A[idx[s], idx[d]] = sympy.Rational(v.numerator, v.denominator)
        vec = vec * A
    final = sympy.zeros(n, 1)
    for q, v in w.final.items():
        final[idx[q], 0] = sympy.Rational(v.numerator, v.denominator)
    return (vec * final)[0, 0]


def sympy_rank(entries) -> int:
    if not entries or not entries[0]:
        return 0
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in entries]).rank()
