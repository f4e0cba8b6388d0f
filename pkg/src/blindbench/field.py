"""Prime-field arithmetic and dense univariate polynomials.

Hot paths (the arithmetized formula, prover and verifier) work on plain
``int`` residues for speed; :class:`FieldElement` and :class:`UnivariatePoly`
are the typed surface used at module boundaries and on the wire.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from sympy import isprime, nextprime

MIN_FIELD_SIZE = 17


class FieldError(ArithmeticError):
    pass


def smallest_session_prime(n: int) -> int:
    """Smallest prime ``>= max(n**4, 17)`` for a formula with ``n`` variables."""
    if n < 1:
        raise ValueError(f"variable count must be >= 1, got {n}")
    floor = max(n**4, MIN_FIELD_SIZE)
    return int(nextprime(floor - 1))


def check_prime(p: int) -> int:
    if p < 2 or not isprime(p):
        raise FieldError(f"field modulus {p} is not prime")
    return p


def inverse(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise FieldError(f"mixed moduli {self.modulus} and {other.modulus}")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        return NotImplemented

    def _make(self, v: int) -> FieldElement:
        return FieldElement(v % self.modulus, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._make(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._make(self.value * inverse(o, self.modulus))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._make(o * inverse(self.value, self.modulus))

    def __neg__(self):
        return self._make(-self.value)

    def inverse(self) -> FieldElement:
        return self._make(inverse(self.value, self.modulus))

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def field_arith(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, inv, div}; ``inv`` ignores ``b``.

    Division by zero raises :class:`ZeroDivisionError`.
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "div":
        return a / b
    raise ValueError(f"unknown field operation {op!r}")


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    end = len(coeffs)
    while end > 0 and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[:end])


@dataclass(frozen=True)
class UnivariatePoly:
    """Dense polynomial over GF(p); ``coeffs[i]`` multiplies ``x**i``.

    Trailing zero coefficients are stripped, so the zero polynomial has an
    empty coefficient tuple and degree -1.
    """

    coeffs: tuple[int, ...]
    modulus: int

    def __init__(self, coeffs: Iterable[int], modulus: int):
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "coeffs", _trim([int(c) % modulus for c in coeffs]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        acc = 0
        p = self.modulus
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % p
        return acc

    def to_payload(self) -> tuple[str, ...]:
        return tuple(str(c) for c in self.coeffs) or ("0",)

    @classmethod
    def from_payload(cls, payload: Sequence[str], modulus: int) -> UnivariatePoly:
        return cls((int(s) for s in payload), modulus)


def poly_eval(poly: UnivariatePoly, x: FieldElement | int) -> FieldElement:
    return FieldElement(poly(int(x)), poly.modulus)


def interpolate_values(xs: Sequence[int], ys: Sequence[int], p: int) -> list[int]:
    """Lagrange interpolation returning dense coefficients (low degree first)."""
    if len(xs) != len(ys):
        raise ValueError("xs and ys differ in length")
    if not xs:
        raise ValueError("need at least one point")
    xs = [x % p for x in xs]
    if len(set(xs)) != len(xs):
        raise ValueError(f"duplicate x coordinates in {xs}")
    k = len(xs)
    result = [0] * k
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if yi % p == 0:
            continue
        # basis numerator prod_{j != i} (x - xj), built one factor at a time
        basis = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            nxt = [0] * (len(basis) + 1)
            for d, c in enumerate(basis):
                nxt[d] = (nxt[d] - c * xj) % p
                nxt[d + 1] = (nxt[d + 1] + c) % p
            basis = nxt
            denom = denom * (xi - xj) % p
        scale = yi * inverse(denom, p) % p
        for d, c in enumerate(basis):
            result[d] = (result[d] + scale * c) % p
    return result


def poly_interpolate(points: Sequence[tuple[int, int]], modulus: int) -> UnivariatePoly:
    xs = [int(x) for x, _ in points]
    ys = [int(y) for _, y in points]
    return UnivariatePoly(interpolate_values(xs, ys, modulus), modulus)
