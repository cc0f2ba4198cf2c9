"""Benchmark languages, exact membership oracles and labeled datasets.

The oracles here are written directly from each language's definition and
share no code with the automata in :mod:`formlang.memory_automata`, so the
two can be checked against each other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .core import (
    Alphabet,
    LabeledDataset,
    LabeledSample,
    Str,
    budget,
    count_strings,
    shortlex_enumerate,
)
from .errors import BudgetExceeded, FormatError, InfeasibleRequest
from .memory_automata import dyck_alphabet, dyck_pairs
from .regular import Dfa, Regex, compile_regex, dfa_accepts, parse_regex, regex_to_text

KINDS = ("dyck", "anbn", "anbncn", "regex", "astar_b_astar")


@dataclass(frozen=True)
class LanguageSpec:
    kind: str
    k: int = 1
    regex: Optional[Regex] = None
    regex_alphabet: Optional[Alphabet] = None
    # compiled once at construction for regex languages
    dfa: Optional[Dfa] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown language kind {self.kind!r}")
        if self.kind == "dyck" and self.k < 1:
            raise ValueError("dyck needs k >= 1")
        if self.kind == "regex":
            if self.regex is None or self.regex_alphabet is None:
                raise ValueError("regex languages need an AST and an alphabet")
            if self.dfa is None:
                object.__setattr__(self, "dfa", compile_regex(self.regex, self.regex_alphabet))

    @classmethod
    def dyck(cls, k: int) -> "LanguageSpec":
        return cls("dyck", k=k)

    @classmethod
    def anbn(cls) -> "LanguageSpec":
        return cls("anbn")

    @classmethod
    def anbncn(cls) -> "LanguageSpec":
        return cls("anbncn")

    @classmethod
    def astar_b_astar(cls) -> "LanguageSpec":
        return cls("astar_b_astar")

    @classmethod
    def from_regex(cls, text: str, alphabet: Alphabet) -> "LanguageSpec":
        return cls("regex", regex=parse_regex(text, alphabet), regex_alphabet=alphabet)

    @property
    def alphabet(self) -> Alphabet:
        if self.kind == "dyck":
            return dyck_alphabet(self.k)
        if self.kind == "anbncn":
            return Alphabet(("a", "b", "c"))
        if self.kind == "regex":
            return self.regex_alphabet
        return Alphabet(("a", "b"))

    def describe(self) -> str:
        if self.kind == "dyck":
            return f"dyck:{self.k}"
        if self.kind == "regex":
            return f"regex:{regex_to_text(self.regex)}"
        return self.kind


def parse_language(text: str, alphabet: Optional[Alphabet] = None) -> LanguageSpec:
    """Parse ``dyck:K``, ``anbn``, ``anbncn``, ``astar_b_astar`` or ``regex:EXPR``."""
    kind, _, arg = text.partition(":")
    if kind == "dyck":
        try:
            return LanguageSpec.dyck(int(arg or 1))
        except ValueError:
            raise FormatError(f"bad dyck spec {text!r}")
    if kind == "regex":
        if alphabet is None:
            raise FormatError("regex languages need an alphabet")
        return LanguageSpec.from_regex(arg, alphabet)
    if kind in ("anbn", "anbncn", "astar_b_astar") and not arg:
        return LanguageSpec(kind)
    raise FormatError(f"unknown language {text!r}")


def _is_dyck(string: Str, k: int) -> bool:
    closer_of = dict(dyck_pairs(k))
    openers = set(closer_of)
    stack = []
    for token in string:
        if token in openers:
            stack.append(closer_of[token])
        elif not stack or stack.pop() != token:
            return False
    return not stack


def _is_blocks(string: Str, letters: str) -> bool:
    # letters[0]^n letters[1]^n ... with equal n
    n, rem = divmod(len(string), len(letters))
    if rem:
        return False
    return all(string[i * n : (i + 1) * n] == (c,) * n for i, c in enumerate(letters))


def membership_oracle(spec: LanguageSpec, string: Str) -> bool:
    string = tuple(string)
    if spec.kind == "dyck":
        return _is_dyck(string, spec.k)
    if spec.kind == "anbn":
        return _is_blocks(string, "ab")
    if spec.kind == "anbncn":
        return _is_blocks(string, "abc")
    if spec.kind == "astar_b_astar":
        return string.count("b") == 1 and all(t in ("a", "b") for t in string)
    return dfa_accepts(spec.dfa, string)


def enumerate_labeled(spec: LanguageSpec, max_len: int, limit: Optional[int] = None) -> LabeledDataset:
    """Every string up to ``max_len`` with its exact label, in shortlex order."""
    limit = budget() if limit is None else limit
    total = count_strings(len(spec.alphabet), max_len)
    if total > limit:
        raise BudgetExceeded(f"{total} strings exceed budget {limit}")
    samples = tuple(
        LabeledSample(s, membership_oracle(spec, s))
        for s in shortlex_enumerate(spec.alphabet, max_len, limit)
    )
    provenance = {"language": spec.describe(), "max_len": max_len, "mode": "enumerate"}
    return LabeledDataset(spec.alphabet, samples, provenance)


def sample_labeled(
    spec: LanguageSpec,
    count: int,
    max_len: int,
    positive_fraction: float,
    seed: int,
    limit: Optional[int] = None,
) -> LabeledDataset:
    """Distinct strings drawn uniformly from the positives and negatives up to
    ``max_len``; deterministic given ``seed``."""
    if not 0.0 <= positive_fraction <= 1.0:
        raise InfeasibleRequest("positive_fraction must lie in [0, 1]")
    pool = enumerate_labeled(spec, max_len, limit)
    positives, negatives = pool.positives, pool.negatives
    n_pos = round(count * positive_fraction)
    n_neg = count - n_pos
    if n_pos > len(positives) or n_neg > len(negatives):
        raise InfeasibleRequest(
            f"requested {n_pos} positives / {n_neg} negatives, only "
            f"{len(positives)} / {len(negatives)} exist up to length {max_len}"
        )
    rng = random.Random(seed)
    chosen = [LabeledSample(s, True) for s in rng.sample(positives, n_pos)]
    chosen += [LabeledSample(s, False) for s in rng.sample(negatives, n_neg)]
    rng.shuffle(chosen)
    provenance = {
        "language": spec.describe(),
        "max_len": max_len,
        "mode": "sample",
        "count": count,
        "positive_fraction": positive_fraction,
        "seed": seed,
    }
    return LabeledDataset(spec.alphabet, tuple(chosen), provenance)
