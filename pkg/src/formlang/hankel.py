"""Hankel sub-blocks, exact rank, and spectral WFA learning.

Entries are exact :class:`~fractions.Fraction` values.  Rank is computed by
fraction-pivot Gaussian elimination, never in floating point.

Spectral learning factors the block as ``H = F B`` and sets
``A_σ = F⁺ H_σ B⁺``, with the initial weights read from the ε row of ``F``
and the final weights from the ε column of ``B``.  In rational mode the
factorization is the skeleton ``F = H[:, J]``, ``B = H[I, J]⁻¹ H[I, :]``
over independent rows ``I`` and columns ``J``; the pseudo-inverses reduce to
row/column selection, so the learned WFA is exact.  Float mode uses a
truncated SVD instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import (
    Alphabet,
    Str,
    budget,
    count_strings,
    format_fraction,
    format_tokens,
    parse_fraction,
    shortlex_enumerate,
)
from .errors import BudgetExceeded, FormatError, InvalidRankHint, MissingValue, RankDeficientBasis
from .wfa import REAL, RATIONAL, Wfa, score

Matrix = List[List[Fraction]]

SVD_CUTOFF = 1e-9


@dataclass(frozen=True)
class BlackboxFn:
    alphabet: Alphabet
    evaluator: Callable[[Str], Fraction]

    def __call__(self, string: Str) -> Fraction:
        return Fraction(self.evaluator(tuple(string)))

    @classmethod
    def from_wfa(cls, w: Wfa) -> "BlackboxFn":
        return cls(w.alphabet, lambda x: score(w, x))

    @classmethod
    def from_values(cls, values: Mapping[Str, Fraction], alphabet: Alphabet,
                    default_zero: bool = False) -> "BlackboxFn":
        """Look values up in a table; missing strings are zero only with ``default_zero``."""
        table = {tuple(k): Fraction(v) for k, v in values.items()}

        def evaluate(x):
            if x in table:
                return table[x]
            if default_zero:
                return Fraction(0)
            raise MissingValue(f"no value for {format_tokens(x, '%e')!r}")

        return cls(alphabet, evaluate)


@dataclass(frozen=True)
class HankelBlock:
    alphabet: Alphabet
    prefixes: Tuple[Str, ...]
    suffixes: Tuple[Str, ...]
    entries: Tuple[Tuple[Fraction, ...], ...]
    shifts: Optional[Mapping[str, Tuple[Tuple[Fraction, ...], ...]]] = field(default=None)

    @property
    def shape(self):
        return len(self.prefixes), len(self.suffixes)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "HankelBlock":
        pick = lambda m: tuple(tuple(m[i][j] for j in cols) for i in rows)
        shifts = None if self.shifts is None else {s: pick(m) for s, m in self.shifts.items()}
        return HankelBlock(self.alphabet, tuple(self.prefixes[i] for i in rows),
                           tuple(self.suffixes[j] for j in cols), pick(self.entries), shifts)


def build_block_on(f: BlackboxFn, prefixes: Sequence[Str], suffixes: Sequence[Str],
                   with_shifts: bool = True) -> HankelBlock:
    cache: Dict[Str, Fraction] = {}

    def value(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    prefixes = tuple(tuple(p) for p in prefixes)
    suffixes = tuple(tuple(s) for s in suffixes)
    entries = tuple(tuple(value(p + s) for s in suffixes) for p in prefixes)
    shifts = None
    if with_shifts:
        shifts = {
            a: tuple(tuple(value(p + (a,) + s) for s in suffixes) for p in prefixes)
            for a in f.alphabet
        }
    return HankelBlock(f.alphabet, prefixes, suffixes, entries, shifts)


def build_block(f: BlackboxFn, max_prefix_len: int, max_suffix_len: int,
                with_shifts: bool = True, limit: Optional[int] = None) -> HankelBlock:
    """Block over shortlex prefixes and suffixes up to the given lengths."""
    limit = budget() if limit is None else limit
    k = len(f.alphabet)
    cells = count_strings(k, max_prefix_len) * count_strings(k, max_suffix_len)
    if with_shifts:
        cells *= k + 1
    if cells > limit:
        raise BudgetExceeded(f"{cells} evaluations exceed budget {limit}")
    return build_block_on(f, shortlex_enumerate(f.alphabet, max_prefix_len),
                          shortlex_enumerate(f.alphabet, max_suffix_len), with_shifts)


# -- exact linear algebra -------------------------------------------------------------


def pivot_columns(matrix: Sequence[Sequence[Fraction]]) -> List[int]:
    """Pivot columns of the reduced row echelon form: the first maximal set of
    linearly independent columns, scanning left to right."""
    rows = [list(map(Fraction, r)) for r in matrix]
    if not rows:
        return []
    n_cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        for i in range(r + 1, len(rows)):
            if rows[i][c] != 0:
                factor = rows[i][c] / lead
                row_i, row_r = rows[i], rows[r]
                for j in range(c, n_cols):
                    row_i[j] -= factor * row_r[j]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def transpose(matrix):
    return [list(col) for col in zip(*matrix)]


def rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    return len(pivot_columns(matrix))


def exact_rank(block: HankelBlock) -> int:
    return rank(block.entries)


def states_lower_bound(block: HankelBlock) -> int:
    """Lower bound on the state count of any WFA computing the underlying function.

    Every sub-block of the full Hankel matrix has rank at most the full rank,
    which equals the minimal WFA size.
    """
    return exact_rank(block)


def inverse(matrix: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        lead = aug[c][c]
        aug[c] = [v / lead for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)] for row in a]


# -- spectral learning ---------------------------------------------------------------------


def _check_basis(block: HankelBlock):
    if () not in block.prefixes or () not in block.suffixes:
        raise RankDeficientBasis("the empty string must be both a prefix and a suffix")
    if block.shifts is None:
        raise FormatError("spectral learning needs the symbol-shifted blocks")


def _target_rank(block: HankelBlock, rank_hint: Optional[int], full: int) -> int:
    if rank_hint is None:
        return full
    if rank_hint > full:
        raise InvalidRankHint(f"rank hint {rank_hint} exceeds block rank {full}")
    if rank_hint < 0:
        raise InvalidRankHint("rank hint must be nonnegative")
    return rank_hint


def spectral_learn(block: HankelBlock, rank_hint: Optional[int] = None,
                   mode: str = "rational") -> Wfa:
    """Recover a WFA from a Hankel block with shifts.

    If the block has the same rank as the full Hankel matrix, the result
    computes the underlying function exactly (rational mode) or up to float
    rounding (float mode).
    """
    _check_basis(block)
    if mode == "rational":
        return _learn_rational(block, rank_hint)
    if mode == "float":
        return _learn_float(block, rank_hint)
    raise ValueError(f"unknown mode {mode!r}")


def _learn_rational(block: HankelBlock, rank_hint: Optional[int]) -> Wfa:
    H = block.entries
    rows = pivot_columns(transpose(H))
    r = _target_rank(block, rank_hint, len(rows))
    rows = rows[:r]
    cols = pivot_columns([H[i] for i in rows])
    eps_row, eps_col = block.prefixes.index(()), block.suffixes.index(())
    if r == 0:
        return Wfa.from_matrices(block.alphabet, [], {a: [] for a in block.alphabet}, [])
    M_inv = inverse([[H[i][j] for j in cols] for i in rows])
    alpha = [H[eps_row][j] for j in cols]
    omega = [row[0] for row in matmul(M_inv, [[H[i][eps_col]] for i in rows])]
    matrices = {
        a: matmul(M_inv, [[Ha[i][j] for j in cols] for i in rows])
        for a, Ha in block.shifts.items()
    }
    return Wfa.from_matrices(block.alphabet, alpha, matrices, omega, RATIONAL)


def _learn_float(block: HankelBlock, rank_hint: Optional[int]) -> Wfa:
    H = np.array(block.entries, dtype=float)
    if H.size:
        singular = np.linalg.svd(H, compute_uv=False)
        full = int(np.sum(singular > SVD_CUTOFF * max(singular[0], 1.0))) if singular.size else 0
    else:
        full = 0
    r = _target_rank(block, rank_hint, full)
    eps_row, eps_col = block.prefixes.index(()), block.suffixes.index(())
    if r == 0:
        return Wfa.from_matrices(block.alphabet, [], {a: [] for a in block.alphabet}, [], REAL)
    _, _, vt = np.linalg.svd(H)
    V = vt[:r].T
    F = H @ V
    F_pinv = np.linalg.pinv(F)
    alpha = H[eps_row] @ V
    omega = F_pinv @ H[:, eps_col]
    matrices = {a: F_pinv @ np.array(Ha, dtype=float) @ V for a, Ha in block.shifts.items()}
    to_list = lambda m: [[float(v) for v in row] for row in m]
    return Wfa.from_matrices(block.alphabet, [float(v) for v in alpha],
                             {a: to_list(m) for a, m in matrices.items()},
                             [float(v) for v in omega], REAL)


# -- JSON --------------------------------------------------------------------------------


def block_to_json(block: HankelBlock) -> dict:
    dump = lambda m: [[format_fraction(v) for v in row] for row in m]
    data = {
        "type": "hankel",
        "alphabet": list(block.alphabet.symbols),
        "prefixes": [format_tokens(p) for p in block.prefixes],
        "suffixes": [format_tokens(s) for s in block.suffixes],
        "entries": dump(block.entries),
    }
    if block.shifts is not None:
        data["shifts"] = {a: dump(m) for a, m in block.shifts.items()}
    return data


def block_from_json(data: dict) -> HankelBlock:
    if data.get("type", "hankel") != "hankel":
        raise FormatError(f"unknown block type {data.get('type')!r}")
    try:
        load = lambda m: tuple(tuple(parse_fraction(v) for v in row) for row in m)
        shifts = data.get("shifts")
        return HankelBlock(
            Alphabet(tuple(data["alphabet"])),
            tuple(tuple(p.split()) for p in data["prefixes"]),
            tuple(tuple(s.split()) for s in data["suffixes"]),
            load(data["entries"]),
            None if shifts is None else {a: load(m) for a, m in shifts.items()},
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed Hankel block JSON: {exc}")


def load_block(path) -> HankelBlock:
    with open(path, encoding="utf-8") as fh:
        try:
            return block_from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}")
