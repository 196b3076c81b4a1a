"""Capped relative precision arithmetic in Q_p.

A non-zero element is stored as ``p**valuation * unit`` where ``unit`` is a
residue modulo ``p**precision`` prime to ``p``.  Values whose digits have all
cancelled become a *zero class* ``O(p**k)`` that only remembers the bound
``k``.  Exact integers and fractions mix freely with p-adic operands; they
are embedded at whatever precision the other operand can use.

Precision semantics follow the usual capped-relative model: products keep
the smaller relative precision, sums keep the smaller absolute precision and
lose relative digits to cancellation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import gmpy2

from .errors import DomainError, PrecisionError, PrecisionLossError

__all__ = [
    "Prime",
    "PadicNumber",
    "PadicQ",
    "from_rational",
    "padic",
    "integer_representative",
    "q_power",
    "rational_reconstruction",
    "vp",
]


@lru_cache(maxsize=1024)
def _is_prime(n: int) -> bool:
    # Deterministic below 2**64, BPSW above.
    from sympy import isprime

    return bool(isprime(n))


class Prime(int):
    """A rational prime, checked once at construction."""

    def __new__(cls, value):
        if isinstance(value, Prime):
            return value
        if isinstance(value, bool) or not isinstance(value, (int, Rational)) or int(value) != value:
            raise DomainError(f"prime must be an integer, got {value!r}")
        n = int(value)
        if n < 2 or not _is_prime(n):
            raise DomainError(f"{n} is not prime")
        return super().__new__(cls, n)

    def __repr__(self):
        return f"Prime({int(self)})"


def vp(n, p: int) -> int:
    """p-adic valuation of a non-zero integer or fraction."""
    if isinstance(n, Fraction):
        return vp(n.numerator, p) - vp(n.denominator, p)
    if n == 0:
        raise DomainError("valuation of 0 is +infinity")
    return int(gmpy2.remove(gmpy2.mpz(n), p)[1])


def _split(n: int, p: int) -> tuple[int, int]:
    rest, k = gmpy2.remove(gmpy2.mpz(n), p)
    return int(rest), int(k)


@dataclass(frozen=True, eq=False)
class PadicNumber:
    """An element of Q_p known to ``precision`` significant digits.

    For a zero class ``unit`` is 0, ``precision`` is 0 and ``valuation`` is
    the bound ``k`` of ``O(p**k)``.
    """

    p: int
    valuation: int
    unit: int
    precision: int

    def __post_init__(self):
        if self.unit == 0:
            if self.precision != 0:
                raise DomainError("zero class carries no digits")
            return
        if self.precision < 1:
            raise DomainError("precision must be at least 1")
        if not 0 < self.unit < self.p**self.precision or self.unit % self.p == 0:
            raise DomainError(f"unit {self.unit} is not a unit residue mod {self.p}^{self.precision}")

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, p: int, bound: int) -> PadicNumber:
        return cls(p, bound, 0, 0)

    @classmethod
    def _normalized(cls, p: int, v: int, s: int, rel: int) -> PadicNumber:
        """Build ``p**v * s + O(p**(v+rel))``, stripping p from ``s``."""
        if rel <= 0:
            return cls.zero(p, v + max(rel, 0))
        s %= p**rel
        if s == 0:
            return cls.zero(p, v + rel)
        s, k = _split(s, p)
        return cls(p, v + k, s, rel - k)

    # -- basic properties -------------------------------------------------

    @property
    def is_zero_class(self) -> bool:
        return self.unit == 0

    @property
    def abs_precision(self) -> int:
        return self.valuation + self.precision

    @property
    def digits(self) -> list[int]:
        """Little-endian base-p digits of the unit part."""
        out = []
        u = self.unit
        for _ in range(self.precision):
            u, d = divmod(u, self.p)
            out.append(d)
        return out

    def is_integral(self) -> bool:
        return self.valuation >= 0

    def is_unit(self) -> bool:
        return not self.is_zero_class and self.valuation == 0

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise DomainError(f"cannot mix {self.p}-adic and {other.p}-adic numbers")
            return other
        if isinstance(other, bool):
            return NotImplemented
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            if q == 0:
                return PadicNumber.zero(self.p, max(self.abs_precision, 0) + max(self.precision, 1))
            rel = max(self.precision, self.abs_precision - vp(q, self.p), 1)
            return from_rational(q.numerator, q.denominator, self.p, rel)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> PadicNumber:
        if self.is_zero_class:
            return self
        return PadicNumber(self.p, self.valuation, (-self.unit) % self.p**self.precision, self.precision)

    def __pos__(self) -> PadicNumber:
        return self

    def __add__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        p = self.p
        absprec = min(self.abs_precision, y.abs_precision)
        if self.is_zero_class and y.is_zero_class:
            return PadicNumber.zero(p, absprec)
        if self.is_zero_class:
            return y.truncate(absprec)
        if y.is_zero_class:
            return self.truncate(absprec)
        v = min(self.valuation, y.valuation)
        s = self.unit * p ** (self.valuation - v) + y.unit * p ** (y.valuation - v)
        return PadicNumber._normalized(p, v, s, absprec - v)

    __radd__ = __add__

    def __sub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return y + (-self)

    def __mul__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        p = self.p
        if self.is_zero_class or y.is_zero_class:
            return PadicNumber.zero(p, self.valuation + y.valuation)
        n = min(self.precision, y.precision)
        return PadicNumber(p, self.valuation + y.valuation, self.unit * y.unit % p**n, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        if y.is_zero_class:
            raise DomainError(f"division by O({y.p}^{y.valuation})")
        if self.is_zero_class:
            return PadicNumber.zero(self.p, self.valuation - y.valuation)
        n = min(self.precision, y.precision)
        m = self.p**n
        return PadicNumber(self.p, self.valuation - y.valuation, self.unit * pow(y.unit, -1, m) % m, n)

    def __rtruediv__(self, other):
        y = self._coerce(other)
        if y is NotImplemented:
            return NotImplemented
        return y / self

    def __pow__(self, n):
        return pow_int(self, n)

    def inverse(self) -> PadicNumber:
        return 1 / self

    def truncate(self, abs_bound: int) -> PadicNumber:
        """Forget every digit at or beyond ``p**abs_bound``."""
        if self.is_zero_class:
            return PadicNumber.zero(self.p, min(self.valuation, abs_bound))
        if abs_bound >= self.abs_precision:
            return self
        rel = abs_bound - self.valuation
        if rel <= 0:
            return PadicNumber.zero(self.p, abs_bound)
        return PadicNumber(self.p, self.valuation, self.unit % self.p**rel, rel)

    def with_precision(self, n: int) -> PadicNumber:
        """Reduce to ``n`` significant digits."""
        if n < 1:
            raise PrecisionLossError("cannot keep fewer than one significant digit")
        if self.is_zero_class:
            return self
        if n > self.precision:
            raise PrecisionLossError(f"only {self.precision} digits are known, {n} requested", achieved=self.precision)
        return PadicNumber(self.p, self.valuation, self.unit % self.p**n, n)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        y = self._coerce(other) if not isinstance(other, PadicNumber) else other
        if y is NotImplemented:
            return NotImplemented
        if y.p != self.p:
            return False
        return (self - y).is_zero_class

    __hash__ = None

    def agrees_with(self, other, k: int) -> bool:
        """True when ``self - other`` has valuation at least the common valuation plus ``k``."""
        y = self._coerce(other)
        common = min(self.valuation, y.valuation)
        return (self - y).valuation >= common + k

    def agreement_digits(self, other) -> int:
        """Number of leading digits on which the two values provably agree."""
        y = self._coerce(other)
        common = min(self.valuation, y.valuation)
        return max((self - y).valuation - common, 0)

    # -- conversion -------------------------------------------------------

    def lift(self) -> int:
        """Integer representative in ``[0, p**abs_precision)``; needs valuation >= 0."""
        return integer_representative(self, max(self.abs_precision, 0))

    def to_fraction(self) -> Fraction:
        return rational_reconstruction(self)

    def __str__(self):
        p = self.p
        if self.is_zero_class:
            return f"O({p}^{self.valuation})"
        terms = []
        for i, d in enumerate(self.digits):
            if i == 0:
                terms.append(str(d))
            elif i == 1:
                terms.append(f"{d}*{p}")
            else:
                terms.append(f"{d}*{p}^{i}")
        return f"{p}^{self.valuation} * ({' + '.join(terms)}) + O({p}^{self.abs_precision})"

    def __repr__(self):
        return f"PadicNumber({self})"

    def to_json(self) -> dict:
        return {"p": int(self.p), "valuation": self.valuation, "digits": self.digits, "precision": self.precision}

    @classmethod
    def from_json(cls, data: dict) -> PadicNumber:
        p = int(Prime(data["p"]))
        digits = list(data["digits"])
        if len(digits) != data["precision"]:
            raise DomainError("digit count does not match precision")
        if not digits:
            return cls.zero(p, int(data["valuation"]))
        if any(not 0 <= d < p for d in digits):
            raise DomainError(f"digits must lie in [0, {p})")
        unit = sum(d * p**i for i, d in enumerate(digits))
        return cls(p, int(data["valuation"]), unit, len(digits))

    _ZERO_RE = re.compile(r"^\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$")
    _FULL_RE = re.compile(
        r"^\s*(\d+)\s*\^\s*(-?\d+)\s*\*\s*\((?P<body>[^)]*)\)\s*\+\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$"
    )
    _TERM_RE = re.compile(r"^(\d+)(?:\*(\d+)(?:\^(\d+))?)?$")

    @classmethod
    def parse(cls, text: str) -> PadicNumber:
        """Inverse of ``str``: ``p^v * (d0 + d1*p + ...) + O(p^(v+N))``."""
        m = cls._ZERO_RE.match(text)
        if m:
            return cls.zero(int(Prime(int(m.group(1)))), int(m.group(2)))
        m = cls._FULL_RE.match(text)
        if not m:
            raise DomainError(f"not a p-adic literal: {text!r}")
        p = int(Prime(int(m.group(1))))
        v = int(m.group(2))
        if int(m.group(4)) != p:
            raise DomainError("prime in O-term differs from leading prime")
        digits = []
        for i, raw in enumerate(m.group("body").split("+")):
            t = cls._TERM_RE.match(raw.replace(" ", ""))
            if not t:
                raise DomainError(f"bad digit term {raw.strip()!r}")
            d, base, exp = t.groups()
            expected = 0 if i == 0 else 1 if exp is None else int(exp)
            if (base is None) != (i == 0) or (base is not None and int(base) != p) or (i > 0 and expected != i):
                raise DomainError(f"digit term {raw.strip()!r} out of place")
            digits.append(int(d))
        if int(m.group(5)) != v + len(digits):
            raise DomainError("O-term does not match digit count")
        if digits[0] == 0:
            raise DomainError("leading digit must be non-zero")
        return cls.from_json({"p": p, "valuation": v, "digits": digits, "precision": len(digits)})


def from_rational(a: int, b: int, p: int, N: int) -> PadicNumber:
    """Embed ``a/b`` in Q_p with ``N`` significant digits.

    Zero becomes the class ``O(p**N)``.
    """
    p = int(Prime(p))
    if b == 0:
        raise DomainError("denominator is zero")
    if N < 1:
        raise DomainError("precision must be at least 1")
    if a == 0:
        return PadicNumber.zero(p, N)
    ua, va = _split(a, p)
    ub, vb = _split(b, p)
    m = p**N
    return PadicNumber(p, va - vb, ua * pow(ub, -1, m) % m, N)


def padic(value, p: int, N: int) -> PadicNumber:
    """Coerce ints, fractions, ``"a/b"`` strings and p-adic literals."""
    if isinstance(value, PadicNumber):
        if value.p != p:
            raise DomainError(f"expected a {p}-adic number, got a {value.p}-adic one")
        return value
    if isinstance(value, str):
        if "O(" in value:
            return padic(PadicNumber.parse(value), p, N)
        value = Fraction(value)
    if isinstance(value, bool) or not isinstance(value, (int, Rational)):
        raise DomainError(f"cannot embed {value!r} in Q_{p}")
    q = Fraction(value)
    return from_rational(q.numerator, q.denominator, p, N)


def pow_int(x: PadicNumber, n: int) -> PadicNumber:
    """``x**n`` for an integer exponent (negative allowed for non-zero x)."""
    if isinstance(n, bool) or int(n) != n:
        raise DomainError("exponent must be an integer")
    n = int(n)
    if n == 0:
        return PadicNumber(x.p, 0, 1, max(x.precision, 1))
    if x.is_zero_class:
        if n < 0:
            raise DomainError("negative power of a zero class")
        return PadicNumber.zero(x.p, n * x.valuation)
    m = x.p**x.precision
    return PadicNumber(x.p, n * x.valuation, pow(x.unit, n, m), x.precision)


def integer_representative(x: PadicNumber, k: int) -> int:
    """The unique ``n`` in ``[0, p**k)`` with ``n == x (mod p**k)``."""
    if k < 0:
        raise DomainError("digit count must be non-negative")
    if x.valuation < 0 and not x.is_zero_class:
        raise DomainError(f"{x} is not in Z_{x.p}")
    if k > x.abs_precision:
        raise PrecisionLossError(
            f"only {x.abs_precision} digits of the argument are known, {k} requested", achieved=x.abs_precision
        )
    if x.is_zero_class or x.valuation >= k:
        return 0
    return x.unit * x.p**x.valuation % x.p**k


def rational_reconstruction(x: PadicNumber) -> Fraction:
    """Smallest-height fraction ``a/b`` congruent to ``x`` at its precision.

    Uses the half extended Euclid algorithm with bound ``sqrt(p**N / 2)``.
    """
    if x.is_zero_class:
        return Fraction(0)
    m = x.p**x.precision
    bound = math.isqrt(m // 2)
    r0, r1 = m, x.unit
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        raise PrecisionError(f"{x} has no rational reconstruction at {x.precision} digits")
    return Fraction(r1, s1) * Fraction(x.p) ** x.valuation


@dataclass(frozen=True, eq=False)
class PadicQ:
    """Deformation parameter ``q`` with ``0 < |q - 1|_p < 1``.

    ``exact`` keeps the rational source when there is one, so residues
    modulo any power of ``p`` are available without precision loss.
    """

    q: PadicNumber
    exact: Fraction | None = None

    def __post_init__(self):
        d = self.q - 1
        if d.is_zero_class:
            raise DomainError("q equals 1 to working precision; need 0 < |q-1|_p < 1")
        if d.valuation < 1:
            raise DomainError(f"|q-1|_{self.q.p} = {self.q.p}^{-d.valuation} is not < 1")

    @classmethod
    def from_rational(cls, value, p: int, precision: int = 64) -> PadicQ:
        r = Fraction(value)
        if r == 1:
            raise DomainError("q = 1 is excluded; need 0 < |q-1|_p < 1")
        return cls(padic(r, p, precision), r)

    @property
    def p(self) -> int:
        return self.q.p

    @property
    def delta_valuation(self) -> int:
        return (self.q - 1).valuation

    @property
    def precision(self) -> int | None:
        """Known digits of q, or None when q is an exact rational."""
        return None if self.exact is not None else self.q.precision

    def residue(self, k: int) -> int:
        """q modulo ``p**k``."""
        if self.exact is not None:
            m = self.p**k
            return self.exact.numerator * pow(self.exact.denominator, -1, m) % m
        return integer_representative(self.q, k)

    def padic(self, k: int) -> PadicNumber:
        if self.exact is not None:
            return padic(self.exact, self.p, k)
        return self.q.with_precision(k)

    def __str__(self):
        return str(self.exact) if self.exact is not None else str(self.q)


def q_power(q: PadicQ, x, prec: int | None = None) -> PadicNumber:
    """``q**x`` for ``x`` in Z_p via the binomial series ``sum C(x,n) (q-1)**n``.

    The result has ``min(prec, abs_precision(x) + v_p(q-1))`` digits, further
    capped by the digits known for ``q``.  Terms stop once ``n * v_p(q-1)``
    reaches that precision; every ``C(x, n)`` lies in Z_p so the tail is
    exactly negligible.
    """
    p = q.p
    e = q.delta_valuation
    if isinstance(x, int) and not isinstance(x, bool):
        n = prec if prec is not None else (q.precision or 64)
        return pow_int(q.padic(n), x)
    x = padic(x, p, prec or 64) if not isinstance(x, PadicNumber) else x
    if x.p != p:
        raise DomainError("exponent and base live over different primes")
    if not x.is_zero_class and x.valuation < 0:
        raise DomainError(f"exponent {x} is not in Z_{p}")
    target = x.abs_precision + e
    if q.precision is not None:
        target = min(target, q.precision)
    if prec is not None:
        target = min(target, prec)
    if target < 1:
        raise PrecisionLossError("no digits of q^x are determined", achieved=0)
    n_max = -(-target // e)
    # v_p(n!) <= n/(p-1): guard digits so the reduced argument still fixes C(x, n).
    guard = -(-n_max // (p - 1)) + 2
    work = min(target + guard, x.abs_precision)
    X = integer_representative(x, max(work, 0))
    mod = p**target
    t = (q.residue(target + guard) - 1) % p ** (target + guard)
    total = 0
    c = 1
    tn = 1
    for n in range(n_max + 1):
        if n:
            c = c * (X - n + 1) // n
            tn = tn * t
        total = (total + c * tn) % mod
    return PadicNumber._normalized(p, 0, total, target)
