"""Alphabets, token strings, shortlex enumeration and labeled datasets.

A string is represented as a plain ``tuple`` of symbol tokens; the empty
tuple is the empty string.  Symbols are arbitrary non-whitespace unicode
tokens, so indexed brackets such as ``(2`` and ``)2`` are ordinary symbols.
"""

from __future__ import annotations

import io
import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO, Tuple, Union

from .errors import BudgetExceeded, FormatError, UnknownSymbol

Symbol = str
Str = Tuple[str, ...]

EPSILON_TEXT = "%e"
DEFAULT_BUDGET = 1 << 22


def check_symbol(text: str) -> str:
    if not isinstance(text, str) or not text:
        raise ValueError(f"symbol must be a nonempty string, got {text!r}")
    if any(ch.isspace() for ch in text):
        raise ValueError(f"symbol {text!r} contains whitespace")
    if text == EPSILON_TEXT:
        raise ValueError(f"{EPSILON_TEXT!r} is reserved for the empty string")
    return text


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of symbols.  The declared order drives every enumeration."""

    symbols: Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(check_symbol(s) for s in self.symbols)
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate symbols in alphabet {symbols}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def of(cls, symbols: Union[str, Iterable[str]]) -> "Alphabet":
        """Build from an iterable of tokens or a comma/space separated string."""
        if isinstance(symbols, str):
            if "," in symbols:
                parts = [p.strip() for p in symbols.split(",")]
            elif " " in symbols.strip():
                parts = symbols.split()
            else:
                parts = list(symbols)
            return cls(tuple(p for p in parts if p))
        return cls(tuple(symbols))

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self.symbols

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def sort_key(self, string: Sequence[str]):
        """Shortlex key: length first, then lexicographic by declared order."""
        return (len(string), tuple(self.symbols.index(s) for s in string))


class LabeledSample(NamedTuple):
    string: Str
    label: bool


@dataclass(frozen=True)
class LabeledDataset:
    alphabet: Alphabet
    samples: Tuple[LabeledSample, ...]
    provenance: dict = field(default_factory=dict, compare=True)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def positives(self):
        return [s.string for s in self.samples if s.label]

    @property
    def negatives(self):
        return [s.string for s in self.samples if not s.label]


def budget(default: int = DEFAULT_BUDGET) -> int:
    """Enumeration budget, overridable through ``AUTOMATA_BUDGET``."""
    value = os.environ.get("AUTOMATA_BUDGET")
    if value:
        try:
            return int(value)
        except ValueError:
            raise FormatError(f"AUTOMATA_BUDGET must be an integer, got {value!r}")
    return default


def count_strings(alphabet_size: int, max_len: int) -> int:
    return sum(alphabet_size ** i for i in range(max_len + 1))


def strings_of_length(alphabet: Alphabet, n: int) -> Iterator[Str]:
    # itertools.product walks the alphabet in declared order, i.e. lexicographically
    return itertools.product(alphabet.symbols, repeat=n)


def shortlex_enumerate(alphabet: Alphabet, max_len: int, limit: int | None = None) -> list:
    """All strings of length at most ``max_len`` in shortlex order."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    limit = budget() if limit is None else limit
    total = count_strings(len(alphabet), max_len)
    if total > limit:
        raise BudgetExceeded(f"{total} strings exceed enumeration budget {limit}")
    out = []
    for n in range(max_len + 1):
        out.extend(strings_of_length(alphabet, n))
    return out


def parse_tokens(text: str, alphabet: Alphabet) -> Str:
    """Split ``text`` into symbols of ``alphabet``.

    Tokens are separated by whitespace.  Without whitespace, and when every
    symbol is a single character, each character is a token.  ``%e`` and the
    empty string denote the empty string.
    """
    stripped = text.strip()
    if stripped in ("", EPSILON_TEXT):
        return ()
    if any(ch.isspace() for ch in stripped) or not alphabet.single_char:
        tokens = stripped.split()
    else:
        tokens = list(stripped)
    for position, token in enumerate(tokens):
        if token not in alphabet:
            raise UnknownSymbol(token, position)
    return tuple(tokens)


def format_tokens(string: Sequence[str], empty: str = "") -> str:
    return " ".join(string) if string else empty


def parse_fraction(value) -> Fraction:
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational number: {value!r}")


def format_fraction(value) -> str:
    """``p/q``, or ``p`` when the denominator is one."""
    if isinstance(value, float):
        return repr(value)
    return str(Fraction(value))


# -- dataset files ---------------------------------------------------------
#
# One sample per line: ``<label>\t<space separated tokens>``.  Lines starting
# with ``#`` carry optional metadata (alphabet, provenance) and are otherwise
# ignored by readers.


def write_dataset(dataset: LabeledDataset, out: Union[str, os.PathLike, TextIO]) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8") as fh:
            write_dataset(dataset, fh)
        return
    out.write("#alphabet\t" + " ".join(dataset.alphabet.symbols) + "\n")
    if dataset.provenance:
        out.write("#provenance\t" + json.dumps(dataset.provenance, sort_keys=True) + "\n")
    for sample in dataset.samples:
        out.write(f"{int(sample.label)}\t{format_tokens(sample.string)}\n")


def read_dataset(
    source: Union[str, os.PathLike, TextIO], alphabet: Alphabet | None = None
) -> LabeledDataset:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_dataset(fh, alphabet)
    samples = []
    provenance = {}
    declared = None
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("\t")
            if key == "alphabet":
                declared = Alphabet(tuple(value.split()))
            elif key == "provenance":
                provenance = json.loads(value)
            continue
        label, tab, tokens = line.partition("\t")
        if not tab or label not in ("0", "1"):
            raise FormatError(f"line {lineno}: expected '<0|1>\\t<tokens>'")
        samples.append(LabeledSample(tuple(tokens.split()), label == "1"))
    alphabet = alphabet or declared
    if alphabet is None:
        seen = []
        for sample in samples:
            for token in sample.string:
                if token not in seen:
                    seen.append(token)
        alphabet = Alphabet(tuple(seen))
    for sample in samples:
        for position, token in enumerate(sample.string):
            if token not in alphabet:
                raise UnknownSymbol(token, position)
    return LabeledDataset(alphabet, tuple(samples), provenance)


def read_valued_pairs(source: Union[str, os.PathLike, TextIO]) -> dict:
    """Read ``<value>\\t<tokens>`` lines with rational values into a dict."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_valued_pairs(fh)
    values = {}
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n").rstrip("\r")
        if not line or line.startswith("#"):
            continue
        value, tab, tokens = line.partition("\t")
        if not tab:
            raise FormatError(f"line {lineno}: expected '<value>\\t<tokens>'")
        values[tuple(tokens.split())] = parse_fraction(value)
    return values


def dataset_to_text(dataset: LabeledDataset) -> str:
    buf = io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()
