"""Directed-rounding rational arithmetic for inequalities that involve e.

Every comparison against a power of e is decided through an exact rational
enclosure (Taylor partial sum plus a tail bound), widened until the answer is
certain.  A returned True therefore constitutes a proof, not a float estimate.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial

_START_TERMS = 20
_MAX_TERMS = 1280


def e_bounds(terms: int = _START_TERMS) -> tuple[Fraction, Fraction]:
    """Exact rational enclosure (lo, hi) of e with lo < e < hi.

    The tail of the series past index N is below 2/(N+1)!.
    """
    lo = Fraction(0)
    for i in range(terms + 1):
        lo += Fraction(1, factorial(i))
    hi = lo + Fraction(2, factorial(terms + 1))
    return lo, hi


def exp_int_bounds(p: int, terms: int = _START_TERMS) -> tuple[Fraction, Fraction]:
    """Exact rational enclosure of e**p for an integer p >= 0."""
    if p < 0:
        raise ValueError("negative exponent not supported")
    if p == 0:
        one = Fraction(1)
        return one, one
    lo, hi = e_bounds(terms)
    return lo**p, hi**p


def compare_with_exp(c: Fraction, p: int, q: int = 1) -> int:
    """Sign of c - e**(p/q) for rational c and integers p >= 0, q >= 1.

    Returns -1, 0 or +1.  Zero is only possible at p == 0, since e**(p/q)
    is irrational for p >= 1.
    """
    if q < 1 or p < 0:
        raise ValueError("need p >= 0 and q >= 1")
    c = Fraction(c)
    if p == 0:
        return (c > 1) - (c < 1)
    if c <= 0:
        return -1
    cq = c**q
    terms = _START_TERMS
    while terms <= _MAX_TERMS:
        lo, hi = exp_int_bounds(p, terms)
        if cq < lo:
            return -1
        if cq > hi:
            return 1
        terms *= 2
    raise ArithmeticError(f"comparison of {c} with e^({p}/{q}) undecided at precision cap")


def exceeds_exp(c: Fraction, p: int, q: int = 1) -> bool:
    """True iff c > e**(p/q), decided rigorously."""
    return compare_with_exp(c, p, q) > 0


def below_exp(c: Fraction, p: int, q: int = 1) -> bool:
    """True iff c < e**(p/q), decided rigorously."""
    return compare_with_exp(c, p, q) < 0
