"""Ground types and exact counting for t-intersecting permutation families.

A permutation sigma of [n] is handled as the cell set
{(1, sigma(1)), ..., (n, sigma(n))} inside the n x n grid; a partial
permutation is any cell set with pairwise-distinct rows and columns.  All
counts are exact arbitrary-precision integers and every inequality involving
e is certified through :mod:`permfam.exact`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb, factorial
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from .exact import compare_with_exp, e_bounds

ENUMERATION_CAP = 9


class HypothesisError(ValueError):
    """An operation was called outside its stated hypothesis."""


class BudgetError(RuntimeError):
    """A combinatorial safety valve tripped before the operation finished."""


class FamilyFormatError(ValueError):
    """A family document failed validation; ``index`` is the offending member."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class Cell(NamedTuple):
    row: int
    col: int


CellLike = Union[Cell, tuple[int, int]]


@dataclass(frozen=True)
class PartialPermutation:
    """A matching in the grid: distinct rows and distinct columns."""

    cells: frozenset[Cell]

    def __post_init__(self) -> None:
        cells = frozenset(Cell(int(r), int(c)) for r, c in self.cells)
        object.__setattr__(self, "cells", cells)
        rows = [c.row for c in cells]
        cols = [c.col for c in cells]
        if any(r < 1 for r in rows) or any(c < 1 for c in cols):
            raise ValueError("cell coordinates are 1-based and must be >= 1")
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("rows and columns of a partial permutation must be distinct")

    @staticmethod
    def of(pairs: Iterable[CellLike]) -> "PartialPermutation":
        return PartialPermutation(frozenset(Cell(r, c) for r, c in pairs))

    @cached_property
    def sorted_cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(self.cells))

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def max_coordinate(self) -> int:
        return max((max(c.row, c.col) for c in self.cells), default=0)

    def issubset(self, other: "PartialPermutation") -> bool:
        return self.cells <= other.cells

    def union(self, other: "PartialPermutation") -> frozenset[Cell]:
        """Raw cell union; the result need not be a valid partial permutation."""
        return self.cells | other.cells

    def minus(self, other: "PartialPermutation") -> "PartialPermutation":
        return PartialPermutation(self.cells - other.cells)

    def with_cell(self, cell: CellLike) -> "PartialPermutation":
        return PartialPermutation(self.cells | {Cell(*cell)})

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell: object) -> bool:
        return cell in self.cells

    def __repr__(self) -> str:
        body = ",".join(f"({c.row},{c.col})" for c in self.sorted_cells)
        return f"pp[{body}]"


EMPTY_PP = PartialPermutation(frozenset())


def pperm(pairs: Iterable[CellLike]) -> PartialPermutation:
    """Shorthand constructor: ``pperm([(1, 1), (2, 3)])``."""
    return PartialPermutation.of(pairs)


def full_permutation(word: Sequence[int]) -> PartialPermutation:
    """The cell set of the permutation given in one-line notation (1-based).

    >>> full_permutation([2, 1, 3]).sorted_cells
    ((1, 2), (2, 1), (3, 3))
    """
    n = len(word)
    if sorted(word) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation word: {word!r}")
    return PartialPermutation.of((i + 1, word[i]) for i in range(n))


def identity_permutation(n: int) -> PartialPermutation:
    return PartialPermutation.of((i, i) for i in range(1, n + 1))


def transposition_permutation(n: int, i: int, j: int) -> PartialPermutation:
    word = list(range(1, n + 1))
    word[i - 1], word[j - 1] = word[j - 1], word[i - 1]
    return full_permutation(word)


def cycle_permutation(n: int, cycle: Sequence[int]) -> PartialPermutation:
    word = list(range(1, n + 1))
    for pos, entry in enumerate(cycle):
        word[entry - 1] = cycle[(pos + 1) % len(cycle)]
    return full_permutation(word)


def is_full_permutation(pp: PartialPermutation, n: int) -> bool:
    return pp.size == n and pp.max_coordinate <= n


def word_of(pp: PartialPermutation, n: int) -> tuple[int, ...]:
    if not is_full_permutation(pp, n):
        raise ValueError("not a full permutation of the given ground size")
    mapping = {c.row: c.col for c in pp.cells}
    return tuple(mapping[i] for i in range(1, n + 1))


@dataclass(frozen=True)
class Parameters:
    """Ground parameters: n, the threshold t, and optional analysis constants."""

    n: int
    t: Optional[int] = None
    q: Optional[int] = None
    eps: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    M: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.t is not None and not 1 <= self.t <= self.n:
            raise ValueError("need 1 <= t <= n")
        if self.q is not None:
            if self.t is None or not self.t <= self.q <= self.n:
                raise ValueError("need t <= q <= n when q is present")

    @property
    def u(self) -> Optional[int]:
        return None if self.t is None else self.n - self.t


@dataclass(frozen=True)
class Family:
    """An ordered duplicate-free collection of partial permutations."""

    ground: Parameters
    members: tuple[PartialPermutation, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        seen: set[frozenset[Cell]] = set()
        for i, m in enumerate(members):
            if m.max_coordinate > self.ground.n:
                raise FamilyFormatError(
                    f"member {i} has a cell outside the {self.ground.n}x{self.ground.n} grid", i
                )
            if m.cells in seen:
                raise FamilyFormatError(f"member {i} duplicates an earlier member", i)
            seen.add(m.cells)

    @staticmethod
    def of(n: int, members: Iterable[PartialPermutation], t: Optional[int] = None) -> "Family":
        return Family(Parameters(n=n, t=t), tuple(members))

    @property
    def n(self) -> int:
        return self.ground.n

    @property
    def t(self) -> Optional[int]:
        return self.ground.t

    def replace_members(self, members: Iterable[PartialPermutation]) -> "Family":
        return Family(self.ground, tuple(members))

    def canonical(self) -> "Family":
        """Members re-ordered by (size, cell list); the determinism anchor."""
        return self.replace_members(sorted(self.members, key=lambda m: (m.size, m.sorted_cells)))

    def member_set(self) -> frozenset[frozenset[Cell]]:
        return frozenset(m.cells for m in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[PartialPermutation]:
        return iter(self.members)

    def __contains__(self, pp: object) -> bool:
        return isinstance(pp, PartialPermutation) and pp.cells in self.member_set()


# ---------------------------------------------------------------------------
# Family operations
# ---------------------------------------------------------------------------

def intersection_size(a: PartialPermutation, b: PartialPermutation) -> int:
    """Number of shared cells.

    >>> intersection_size(identity_permutation(4), transposition_permutation(4, 1, 2))
    2
    """
    return len(a.cells & b.cells)


def is_t_intersecting(f: Family, t: int) -> bool:
    """True iff every unordered pair of distinct members shares >= t cells.

    Vacuously true for families with at most one member.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ms = f.members
    for i in range(len(ms)):
        ci = ms[i].cells
        for j in range(i + 1, len(ms)):
            if len(ci & ms[j].cells) < t:
                return False
    return True


def select(f: Family, x: PartialPermutation) -> Family:
    """The sub-family of members containing x."""
    return f.replace_members(m for m in f.members if x.cells <= m.cells)


def restrict(f: Family, x: PartialPermutation) -> Family:
    """Members containing x, each with x removed."""
    return f.replace_members(
        PartialPermutation(m.cells - x.cells) for m in f.members if x.cells <= m.cells
    )


def select_many(f: Family, s: Family | Iterable[PartialPermutation]) -> Family:
    """Members of f containing at least one member of s, deduplicated."""
    pieces = list(s)
    out = []
    seen: set[frozenset[Cell]] = set()
    for m in f.members:
        if m.cells in seen:
            continue
        if any(p.cells <= m.cells for p in pieces):
            out.append(m)
            seen.add(m.cells)
    return f.replace_members(out)


# ---------------------------------------------------------------------------
# Family JSON document
# ---------------------------------------------------------------------------

def family_to_json(f: Family) -> dict:
    return {
        "n": f.n,
        "t": f.t,
        "sets": [[[c.row, c.col] for c in m.sorted_cells] for m in f.members],
    }


def family_from_json(doc: object) -> Family:
    if not isinstance(doc, dict):
        raise FamilyFormatError("family document must be a JSON object")
    try:
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError):
        raise FamilyFormatError("missing or malformed field 'n'") from None
    if n < 1:
        raise FamilyFormatError("'n' must be a positive integer")
    t_raw = doc.get("t")
    t = None if t_raw is None else int(t_raw)
    sets = doc.get("sets")
    if not isinstance(sets, list):
        raise FamilyFormatError("missing or malformed field 'sets'")
    members = []
    for i, raw in enumerate(sets):
        try:
            cells = [(int(r), int(c)) for r, c in raw]
        except (TypeError, ValueError):
            raise FamilyFormatError(f"member {i}: cells must be [row, col] pairs", i) from None
        if any(not 1 <= r <= n or not 1 <= c <= n for r, c in cells):
            raise FamilyFormatError(f"member {i}: cell out of the [1,{n}] range", i)
        if len(set(cells)) != len(cells):
            raise FamilyFormatError(f"member {i}: repeated cell", i)
        try:
            members.append(PartialPermutation.of(cells))
        except ValueError as exc:
            raise FamilyFormatError(f"member {i}: {exc}", i) from None
    try:
        return Family.of(n, members, t=t)
    except FamilyFormatError:
        raise
    except ValueError as exc:
        raise FamilyFormatError(str(exc)) from None


def load_family(path: str) -> Family:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FamilyFormatError(f"invalid JSON: {exc}") from None
    return family_from_json(doc)


# ---------------------------------------------------------------------------
# The extremal families: permutations fixing >= t+k of the first t+2k points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalFamily:
    """Membership test (any n) and enumerator (n <= cap) for E(n, t, k)."""

    n: int
    t: int
    k: int
    cap: int = ENUMERATION_CAP

    def __post_init__(self) -> None:
        _check_extremal_args(self.n, self.t, self.k)

    @property
    def window(self) -> int:
        return self.t + 2 * self.k

    def contains(self, pp: PartialPermutation) -> bool:
        if not is_full_permutation(pp, self.n):
            raise ValueError("membership test expects a full permutation")
        fixed = sum(1 for c in pp.cells if c.row == c.col and c.row <= self.window)
        return fixed >= self.t + self.k

    def enumerate(self) -> tuple[PartialPermutation, ...]:
        if self.n > self.cap:
            raise BudgetError(f"enumeration refused for n={self.n} > cap={self.cap}")
        need, m = self.t + self.k, self.window
        out = []
        for word in itertools.permutations(range(1, self.n + 1)):
            fixed = sum(1 for i in range(m) if word[i] == i + 1)
            if fixed >= need:
                out.append(full_permutation(word))
        return tuple(out)

    def as_family(self) -> Family:
        return Family.of(self.n, self.enumerate(), t=self.t)


def _check_extremal_args(n: int, t: int, k: int) -> None:
    if not 1 <= t <= n:
        raise HypothesisError("need 1 <= t <= n")
    if not 0 <= k <= (n - t) // 2:
        raise HypothesisError(f"k={k} outside [0, (n-t)//2]")


def extremal_family(n: int, t: int, k: int, cap: int = ENUMERATION_CAP) -> ExtremalFamily:
    return ExtremalFamily(n, t, k, cap)


def extremal_family_size(n: int, t: int, k: int) -> int:
    """Exact size of E(n, t, k) by inclusion-exclusion over exact fix counts.

    >>> extremal_family_size(5, 2, 0)
    6
    >>> extremal_family_size(4, 1, 1)
    4
    """
    _check_extremal_args(n, t, k)
    m, need = t + 2 * k, t + k
    total = 0
    for j in range(need, m + 1):
        # exactly-j fixed points inside the window, the rest unconstrained
        inner = sum(
            (-1) ** i * comb(m - j, i) * factorial(n - j - i) for i in range(m - j + 1)
        )
        total += comb(m, j) * inner
    return total


def extremal_family_size_bounds(n: int, t: int, k: int) -> tuple[int, int]:
    """Exact evaluation of the sandwich bounds; lower may be negative."""
    _check_extremal_args(n, t, k)
    m = t + 2 * k
    upper = comb(m, k) * factorial(n - t - k)
    lower = upper
    if comb(m, t + k + 1) > 0:
        lower = upper - (t + k + 1) * comb(m, t + k + 1) * factorial(n - t - k - 1)
    return lower, upper


def max_extremal_size(n: int, t: int) -> tuple[int, int]:
    """(argmax k, max size) of E(n, t, k) over the valid k range."""
    best_k, best = 0, extremal_family_size(n, t, 0)
    for k in range(1, (n - t) // 2 + 1):
        v = extremal_family_size(n, t, k)
        if v > best:
            best_k, best = k, v
    return best_k, best


# ---------------------------------------------------------------------------
# Weight table binom(t, j) * (u - j)! and derangements
# ---------------------------------------------------------------------------

def weight(t: int, u: int, j: int) -> int:
    return comb(t, j) * factorial(u - j)


def weight_argmax(t: int, u: int) -> tuple[int, list[tuple[int, int]]]:
    """Exhaustive argmax of binom(t,j)*(u-j)! over j in [0, u//2].

    Smallest index wins ties.  Returns (argmax, full table).
    """
    if t < 1 or u < 1:
        raise HypothesisError("need t >= 1 and u >= 1")
    table = [(j, weight(t, u, j)) for j in range(u // 2 + 1)]
    j0 = max(table, key=lambda e: (e[1], -e[0]))[0]
    return j0, table


def weight_sum_ratio_squared(t: int, u: int) -> Fraction:
    """Exact square of (sum_{j<=u//10} w(j)) / (sqrt(t/u) * max_j w(j)).

    The normalizer sqrt(t/u) is irrational in general, so the squared ratio is
    returned to stay inside exact rationals.  The cutoff is floor(u/10).
    """
    if u < 10:
        raise HypothesisError("need u >= 10")
    s = sum(weight(t, u, j) for j in range(u // 10 + 1))
    fmax = max(weight(t, u, j) for j in range(u + 1))
    return Fraction(s * s * u, t * fmax * fmax)


def derangement_count(m: int) -> int:
    """Exact number of fixed-point-free permutations of [m].

    >>> [derangement_count(m) for m in range(6)]
    [1, 0, 1, 2, 9, 44]
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    return sum((-1) ** j * (factorial(m) // factorial(j)) for j in range(m + 1))


def derangement_lower_check(m: int) -> bool:
    """Certified check of D(m) >= m!/e - 1."""
    d = derangement_count(m)
    # holds iff m!/(D(m)+1) <= e
    return compare_with_exp(Fraction(factorial(m), d + 1), 1) <= 0


# ---------------------------------------------------------------------------
# Elementary bound checks (certified)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    which: str
    holds: bool
    lhs: Fraction
    rhs_low: Fraction
    rhs_high: Fraction
    note: str = ""


@dataclass(frozen=True)
class RatioChainCheck:
    which: str
    holds: bool
    lower: Fraction
    middle: Fraction
    upper: Fraction


def check_binomial_upper(n: int, k: int) -> BoundCheck:
    """binom(n, k) <= (e*n/k)**k, with the k = 0 side read as 1."""
    if not 0 <= k <= n:
        raise HypothesisError("need 0 <= k <= n")
    lhs = Fraction(comb(n, k))
    if k == 0:
        return BoundCheck("binom_bound", lhs <= 1, lhs, Fraction(1), Fraction(1))
    lo, hi = e_bounds()
    scale = Fraction(n, k) ** k
    holds = compare_with_exp(lhs / scale, k) < 0
    return BoundCheck("binom_bound", holds, lhs, lo**k * scale, hi**k * scale)


def check_factorial_lower(n: int, k: int) -> BoundCheck:
    """n!/k! >= (n/e)**(n-k)."""
    if not 1 <= k <= n:
        raise HypothesisError("need 1 <= k <= n")
    lhs = Fraction(factorial(n), factorial(k))
    d = n - k
    # holds iff n**d * k!/n! <= e**d
    holds = compare_with_exp(Fraction(n**d) / lhs, d) <= 0
    lo, hi = e_bounds()
    return BoundCheck(
        "factorial_bound", holds, lhs, Fraction(n**d) / hi**d, Fraction(n**d) / lo**d
    )


def check_binomial_ratio_chain(a: int, b: int, x: int) -> RatioChainCheck:
    """Exact two-sided chain around binom(x, b) relative to binom(x, a).

    For a > b >= 1 and x >= 2b the certified chain is

        (x/b - 1)**(b-a) * binom(x, a)  <  binom(x, b)
                                        <= ((x+1)/a - 1)**(b-a) * binom(x, a),

    each factor of binom(x,b)/binom(x,a) lying in (b/(x-b), a/(x-a+1)].
    All three quantities are returned exactly.
    """
    if not (a > b >= 1) or x < 2 * b:
        raise HypothesisError("need a > b >= 1 and x >= 2b")
    middle = Fraction(comb(x, b))
    base = Fraction(comb(x, a))
    lower = (Fraction(x, b) - 1) ** (b - a) * base
    upper = (Fraction(x + 1, a) - 1) ** (b - a) * base
    holds = lower < middle <= upper
    return RatioChainCheck("binom_ratio", holds, lower, middle, upper)


def check_binomial_shift(a: int, b: int) -> BoundCheck:
    """binom(a+b, b) / binom(a, b) < exp(b*b/(a-b+1)).

    The exponent is rational, so the certificate compares ratio**(a-b+1)
    against an exact enclosure of e**(b*b); the reported sides are those
    integer-power quantities.
    """
    if not (a >= b >= 1):
        raise HypothesisError("need a >= b >= 1")
    ratio = Fraction(comb(a + b, b), comb(a, b))
    p, q = b * b, a - b + 1
    holds = compare_with_exp(ratio, p, q) < 0
    lo, hi = e_bounds()
    return BoundCheck(
        "close_binomial",
        holds,
        ratio**q,
        lo**p,
        hi**p,
        note=f"sides shown are ratio^{q} against an enclosure of e^{p}",
    )


def elementary_bound_check(which: str, **kw: int) -> BoundCheck | RatioChainCheck:
    """Dispatch over the four elementary estimates by name."""
    if which == "binom_bound":
        return check_binomial_upper(kw["n"], kw["k"])
    if which == "factorial_bound":
        return check_factorial_lower(kw["n"], kw["k"])
    if which == "binom_ratio":
        return check_binomial_ratio_chain(kw["a"], kw["b"], kw["x"])
    if which == "close_binomial":
        return check_binomial_shift(kw["a"], kw["b"])
    raise ValueError(f"unknown check {which!r}")
