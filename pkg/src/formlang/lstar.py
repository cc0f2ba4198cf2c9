"""Angluin's L* with an observation table and a DFA-backed teacher."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .core import Alphabet, Str
from .errors import QueryBudgetExceeded
from .regular import Counterexample, Dfa, Equal, dfa_accepts, equivalent, minimize


class Teacher(ABC):
    """Answers membership and equivalence queries for one fixed language."""

    def __init__(self):
        self.membership_count = 0
        self.equivalence_count = 0

    def membership(self, string: Str) -> bool:
        self.membership_count += 1
        return self._membership(tuple(string))

    def equivalence(self, hypothesis: Dfa) -> "Equal | Counterexample":
        self.equivalence_count += 1
        return self._equivalence(hypothesis)

    @abstractmethod
    def _membership(self, string: Str) -> bool:
        ...

    @abstractmethod
    def _equivalence(self, hypothesis: Dfa) -> "Equal | Counterexample":
        ...


class DfaTeacher(Teacher):
    def __init__(self, target: Dfa):
        super().__init__()
        self.target = target

    def _membership(self, string):
        return dfa_accepts(self.target, string)

    def _equivalence(self, hypothesis):
        return equivalent(self.target, hypothesis)


def make_teacher_from_dfa(target: Dfa) -> DfaTeacher:
    return DfaTeacher(target)


@dataclass
class ObservationTable:
    alphabet: Alphabet
    teacher: Teacher
    S: List[Str] = field(default_factory=lambda: [()])
    E: List[Str] = field(default_factory=lambda: [()])
    T: Dict[Str, bool] = field(default_factory=dict)

    def query(self, string: Str) -> bool:
        if string not in self.T:
            self.T[string] = self.teacher.membership(string)
        return self.T[string]

    def row(self, prefix: Str) -> Tuple[bool, ...]:
        return tuple(self.query(prefix + e) for e in self.E)

    def extensions(self) -> List[Str]:
        in_s = set(self.S)
        out = []
        for s in self.S:
            for a in self.alphabet:
                t = s + (a,)
                if t not in in_s and t not in out:
                    out.append(t)
        return out

    def _sorted_s(self):
        return sorted(self.S, key=self.alphabet.sort_key)

    def find_unclosed(self) -> Optional[Str]:
        rows = {self.row(s) for s in self.S}
        for t in sorted(self.extensions(), key=self.alphabet.sort_key):
            if self.row(t) not in rows:
                return t
        return None

    def find_inconsistency(self) -> Optional[Str]:
        """First new suffix ``a·e`` separating two equal rows, scanning S pairs in shortlex order."""
        ordered = self._sorted_s()
        for i, s1 in enumerate(ordered):
            for s2 in ordered[i + 1 :]:
                if self.row(s1) != self.row(s2):
                    continue
                for a in self.alphabet:
                    for e in self.E:
                        if self.query(s1 + (a,) + e) != self.query(s2 + (a,) + e):
                            return (a,) + e
        return None

    def add_prefixes_of(self, string: Str):
        for i in range(len(string) + 1):
            if string[:i] not in self.S:
                self.S.append(string[:i])

    def hypothesis(self) -> Dfa:
        """Total DFA whose states are the distinct rows of S."""
        names: Dict[Tuple[bool, ...], int] = {}
        for s in self._sorted_s():
            names.setdefault(self.row(s), len(names))
        delta = {}
        accepting = set()
        for s in self.S:
            q = names[self.row(s)]
            if self.query(s):
                accepting.add(q)
            for a in self.alphabet:
                delta[(q, a)] = names[self.row(s + (a,))]
        return Dfa(self.alphabet, tuple(range(len(names))), names[self.row(())], delta, accepting)


@dataclass
class LStarResult:
    dfa: Dfa
    membership_queries: int
    equivalence_queries: int
    hypothesis_sizes: List[int]


def lstar_learn(teacher: Teacher, alphabet: Alphabet, max_equivalence_queries: int = 1000) -> LStarResult:
    """Learn the minimal DFA of the teacher's language.

    Counterexamples are handled by adding all their prefixes to S.  The
    returned DFA is minimized (dead state dropped, canonical naming).
    """
    table = ObservationTable(alphabet, teacher)
    sizes = []
    while True:
        while True:
            t = table.find_unclosed()
            if t is not None:
                table.S.append(t)
                continue
            suffix = table.find_inconsistency()
            if suffix is not None:
                table.E.append(suffix)
                continue
            break
        hypothesis = table.hypothesis()
        sizes.append(len(hypothesis.states))
        if teacher.equivalence_count >= max_equivalence_queries:
            raise QueryBudgetExceeded(f"no answer after {max_equivalence_queries} equivalence queries")
        answer = teacher.equivalence(hypothesis)
        if isinstance(answer, Equal):
            return LStarResult(minimize(hypothesis), teacher.membership_count,
                               teacher.equivalence_count, sizes)
        table.add_prefixes_of(tuple(answer.string))
