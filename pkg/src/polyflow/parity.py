"""e/o parity bookkeeping for boundary terms of products of curvature derivatives.

An E factor has every odd derivative vanishing at the boundary; an O factor
vanishes there itself.  Differentiating a product flips the parity of one
factor per term (Leibniz), and a boundary term is zero when every term
keeps at least one O factor.  Coefficients are dropped, so sums are sets.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product as cartesian

import numpy as np

from .exceptions import ClaimFailure, InvalidArgument


class Parity(enum.Enum):
    E = "e"
    O = "o"

    def flip(self) -> "Parity":
        return Parity.O if self is Parity.E else Parity.E


E, O = Parity.E, Parity.O


@dataclass(frozen=True, order=True)
class ParityTerm:
    """A product, stored as its (number of E factors, number of O factors)."""

    n_e: int
    n_o: int

    def __post_init__(self):
        if self.n_e < 0 or self.n_o < 0 or self.n_e + self.n_o < 1:
            raise InvalidArgument("a term needs at least one factor")

    @classmethod
    def of(cls, factors) -> "ParityTerm":
        fs = [_parse(f) for f in factors]
        return cls(sum(f is E for f in fs), sum(f is O for f in fs))

    @property
    def size(self) -> int:
        return self.n_e + self.n_o

    def has_odd_factor(self) -> bool:
        return self.n_o > 0

    def derivative_terms(self) -> frozenset:
        out = set()
        if self.n_e:
            out.add(ParityTerm(self.n_e - 1, self.n_o + 1))
        if self.n_o:
            out.add(ParityTerm(self.n_e + 1, self.n_o - 1))
        return frozenset(out)

    def __str__(self):
        return "e" * self.n_e + "o" * self.n_o


def _parse(f) -> Parity:
    if isinstance(f, Parity):
        return f
    try:
        return Parity(str(f).lower())
    except ValueError:
        raise InvalidArgument(f"not a parity: {f!r}") from None


class ParitySum(frozenset):
    """Set of ParityTerms."""

    @classmethod
    def of(cls, *terms) -> "ParitySum":
        return cls(t if isinstance(t, ParityTerm) else ParityTerm.of(t) for t in terms)

    def __or__(self, other):
        return ParitySum(frozenset.__or__(self, other))

    def __str__(self):
        return "{" + ", ".join(sorted(map(str, self))) + "}"


def differentiate(s: ParitySum, n: int) -> ParitySum:
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    cur = frozenset(s)
    for _ in range(n):
        cur = frozenset().union(*(t.derivative_terms() for t in cur)) if cur else cur
    return ParitySum(cur)


def vanishes_on_boundary(term, n: int) -> bool:
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    if not isinstance(term, ParityTerm):
        term = ParityTerm.of(term)
    terms = {term} if n == 0 else differentiate(ParitySum({term}), n)
    return all(t.has_odd_factor() for t in terms)


# -- numeric oracle --------------------------------------------------------------

DEGREE = 8


def _random_factor(parity: Parity, rng) -> np.ndarray:
    """Exponential coefficients c_{-D..D} of a real even (cos) or odd (sin) trig polynomial."""
    a = rng.standard_normal(DEGREE + 1)
    c = np.zeros(2 * DEGREE + 1, dtype=complex)
    if parity is E:
        c[DEGREE] = a[0]
        c[DEGREE + 1:] = 0.5 * a[1:]
        c[:DEGREE] = 0.5 * a[1:][::-1]
    else:
        c[DEGREE + 1:] = -0.5j * a[1:]
        c[:DEGREE] = 0.5j * a[1:][::-1]
    return c


def numeric_oracle(parities, n: int, trials: int = 100, seed: int = 0) -> bool:
    """True when the n-th derivative at 0 of random products with these parities is zero.

    E factors are random cosine polynomials and O factors random sine
    polynomials of degree <= 8, i.e. even and odd about the boundary point.
    """
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    fs = [_parse(p) for p in parities]
    if not fs:
        raise InvalidArgument("need at least one factor")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        coeffs = np.ones(1, dtype=complex)
        scale = 1.0
        for f in fs:
            c = _random_factor(f, rng)
            coeffs = np.convolve(coeffs, c)
            scale *= float(np.sum(np.abs(c)))
        D = (coeffs.size - 1) // 2
        j = np.arange(-D, D + 1)
        value = np.sum(coeffs * (1j * j) ** n)
        if abs(value) > 1e-9 * scale * max(D, 1) ** n:
            return False
    return True


# -- claims ----------------------------------------------------------------------

@dataclass(frozen=True)
class ClaimResult:
    name: str
    factors: str
    n: int
    passed: bool


def _claims():
    odd = range(1, 10, 2)
    even = range(0, 9, 2)
    yield "(eee) odd derivatives", "eee", odd
    yield "(eoo) odd derivatives", "eoo", odd
    yield "(eeo) even derivatives", "eeo", even
    yield "(ee) odd derivatives", "ee", odd
    yield "(oo) odd derivatives", "oo", odd
    yield "(eeooe) odd derivatives", "eeooe", odd
    yield "(eeeee) odd derivatives", "eeeee", odd


def check_paper_claims(raise_on_failure: bool = True) -> list[ClaimResult]:
    """Evaluate every boundary-vanishing claim; raise ClaimFailure on the first counterexample."""
    results = []
    for name, factors, orders in _claims():
        for n in orders:
            ok = vanishes_on_boundary(ParityTerm.of(factors), n)
            results.append(ClaimResult(name, factors, n, ok))
            if not ok and raise_on_failure:
                raise ClaimFailure(f"{name}: ({factors}) differentiated {n} times keeps an all-e term")
    return results


def enumerate_cases(max_factors: int = 5, max_order: int = 8):
    """Every ordered parity list of 1..max_factors factors, paired with every n <= max_order."""
    for size in range(1, max_factors + 1):
        for factors in cartesian((E, O), repeat=size):
            for n in range(max_order + 1):
                yield factors, n


def cross_check(max_factors: int = 5, max_order: int = 8, trials: int = 100, seed: int = 0):
    """Cases where the symbolic and numeric answers differ (empty when they agree)."""
    bad = []
    for i, (factors, n) in enumerate(enumerate_cases(max_factors, max_order)):
        sym = vanishes_on_boundary(ParityTerm.of(factors), n)
        num = numeric_oracle(factors, n, trials, seed + i)
        if sym != num:
            bad.append(("".join(f.value for f in factors), n, sym, num))
    return bad


__all__ = [
    "Parity", "E", "O", "ParityTerm", "ParitySum", "differentiate", "vanishes_on_boundary",
    "numeric_oracle", "check_paper_claims", "ClaimResult", "cross_check", "enumerate_cases",
]
