"""Exact coefficients of the form ``(a + b i) * sqrt(r)`` with rational a, b.

Anything that leaves this family (sums of different radicals, ``pi``,
oversized rationals) degrades to a plain complex double.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Optional

MAX_BITS = 256
MAX_RAD = 10 ** 12
_SMALL_PRIMES = [p for p in range(2, 200) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


def _split_square(n: int) -> tuple[int, int]:
    """n = k^2 * r with the small square factors pulled into k."""
    k = 1
    for p in _SMALL_PRIMES:
        pp = p * p
        if pp > n:
            break
        while n % pp == 0:
            n //= pp
            k *= p
    s = math.isqrt(n)
    if s * s == n:
        return k * s, 1
    return k, n


def _small(q: Fraction) -> bool:
    return q.numerator.bit_length() <= MAX_BITS and q.denominator.bit_length() <= MAX_BITS


class Exact:
    __slots__ = ("re", "im", "rad", "approx")

    def __init__(self, re=Fraction(0), im=Fraction(0), rad: int = 1, approx: Optional[complex] = None):
        self.re = Fraction(re)
        self.im = Fraction(im)
        self.rad = rad
        self.approx = approx
        if approx is None:
            if not (_small(self.re) and _small(self.im) and rad <= MAX_RAD):
                self.approx = self._to_complex()
            elif self.re == 0 and self.im == 0:
                self.rad = 1

    @classmethod
    def float(cls, z: complex) -> "Exact":
        return cls(approx=complex(z))

    @property
    def is_exact(self) -> bool:
        return self.approx is None

    def _to_complex(self) -> complex:
        try:
            r = math.sqrt(self.rad)
            return complex(float(self.re) * r, float(self.im) * r)
        except OverflowError:
            return complex(math.inf, 0)

    def __complex__(self) -> complex:
        return self.approx if self.approx is not None else self._to_complex()

    def is_zero(self) -> bool:
        if self.approx is None:
            return self.re == 0 and self.im == 0
        return self.approx == 0

    def __add__(self, other: "Exact") -> "Exact":
        if self.approx is None and other.approx is None:
            if self.is_zero():
                return other
            if other.is_zero():
                return self
            if self.rad == other.rad:
                return Exact(self.re + other.re, self.im + other.im, self.rad)
        return Exact.float(complex(self) + complex(other))

    def __neg__(self) -> "Exact":
        if self.approx is None:
            return Exact(-self.re, -self.im, self.rad)
        return Exact.float(-self.approx)

    def __sub__(self, other: "Exact") -> "Exact":
        return self + (-other)

    def __mul__(self, other: "Exact") -> "Exact":
        if self.approx is None and other.approx is None:
            if self.rad * other.rad <= MAX_RAD * MAX_RAD:
                k, r = _split_square(self.rad * other.rad)
                re = (self.re * other.re - self.im * other.im) * k
                im = (self.re * other.im + self.im * other.re) * k
                return Exact(re, im, r)
        return Exact.float(complex(self) * complex(other))

    def __truediv__(self, other: "Exact") -> "Exact":
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        if self.approx is None and other.approx is None:
            # 1 / ((c + d i) sqrt(r)) = (c - d i) sqrt(r) / ((c^2 + d^2) r)
            den = (other.re ** 2 + other.im ** 2) * other.rad
            inv = Exact(other.re / den, -other.im / den, other.rad)
            return self * inv
        return Exact.float(complex(self) / complex(other))

    def sqrt(self) -> "Exact":
        if self.approx is None and self.im == 0 and self.rad == 1 and self.re >= 0:
            p, q = self.re.numerator, self.re.denominator
            if p * q <= MAX_RAD:
                # sqrt(p/q) = sqrt(p q) / q
                k, r = _split_square(p * q)
                return Exact(Fraction(k, q), 0, r)
        return Exact.float(cmath.sqrt(complex(self)))

    def __repr__(self):
        if self.approx is not None:
            return f"Exact~{self.approx!r}"
        return f"Exact(({self.re}) + ({self.im})i, sqrt {self.rad})"


ZERO = Exact(0)
ONE = Exact(1)
I = Exact(0, 1)
PI = Exact.float(math.pi)
