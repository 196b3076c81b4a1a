"""Classical q-series: q-Pochhammer symbols, Gamma_q, and the p-restricted symbols.

Scalars are exact :class:`~fractions.Fraction` objects when every input is
rational and the computation is finite, and ``gmpy2.mpfr`` values at the
deformation parameter's decimal precision otherwise.  Infinite products and
series are truncated adaptively: the term count doubles until two successive
truncations agree to the policy's relative tolerance, and the value at the
larger truncation is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, PoleError, TruncationError
from .padic import Prime

__all__ = [
    "DEFAULT_DPS",
    "DEFAULT_POLICY",
    "IdentityReport",
    "QReal",
    "RestrictedSymbol",
    "TruncationPolicy",
    "gamma_pq_symbol_form",
    "gamma_q",
    "gamma_q_shifted",
    "nu_p",
    "q_factorial",
    "q_integer",
    "q_pochhammer",
    "q_pochhammer_p",
    "ratio_identity_finite",
    "ratio_restricted",
    "render",
    "verify_q_binomial",
    "verify_ratio_identity",
]

DEFAULT_DPS = 50


def _bits(dps: int) -> int:
    return int(math.ceil(dps * math.log2(10))) + 16


def _context(dps: int):
    return gmpy2.context(gmpy2.get_context(), precision=_bits(dps))


def _exact(x) -> Fraction | None:
    """Exact rational value of ``x`` if it has one we can trust."""
    if isinstance(x, bool):
        raise DomainError("boolean scalar")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        # Shortest repr, so 0.3 means 3/10 rather than its binary neighbour.
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return None
    return None


def _num(x, dps: int):
    """``x`` as an mpfr at ``dps`` digits."""
    with _context(dps):
        if isinstance(x, type(mpfr(0))):
            return mpfr(x)
        e = _exact(x)
        if e is not None:
            return mpfr(gmpy2.mpq(e.numerator, e.denominator))
        try:
            return mpfr(x)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"not a real scalar: {x!r}") from exc


@dataclass(frozen=True)
class QReal:
    """A classical deformation parameter.

    ``exact`` holds the rational value when ``q`` was given as an integer,
    fraction, decimal string or float, which keeps finite products exact.
    """

    raw: object
    dps: int = DEFAULT_DPS
    exact: Fraction | None = field(default=None, init=False)

    def __post_init__(self):
        if isinstance(self.raw, QReal):
            object.__setattr__(self, "exact", self.raw.exact)
            object.__setattr__(self, "raw", self.raw.raw)
        else:
            object.__setattr__(self, "exact", _exact(self.raw))
        if self.dps < 5:
            raise DomainError("decimal precision must be at least 5")

    @property
    def value(self):
        return _num(self.exact if self.exact is not None else self.raw, self.dps)

    def require_unit_interval(self) -> None:
        v = self.value
        if not 0 < v < 1:
            raise DomainError(f"infinite q-products need 0 < q < 1, got q = {render(v)}")

    def power(self, alpha):
        """``q**alpha``; exact when both are rational and alpha is an integer."""
        e = _exact(alpha)
        if self.exact is not None and e is not None and e.denominator == 1:
            if self.exact == 0 and e < 0:
                raise PoleError("0 raised to a negative power")
            return self.exact ** int(e)
        with _context(self.dps):
            return self.value ** _num(alpha, self.dps)

    def __str__(self):
        return str(self.exact) if self.exact is not None else render(self.value)


def _as_q(q, dps: int | None = None) -> QReal:
    if isinstance(q, QReal):
        return q if dps is None or dps == q.dps else QReal(q, dps)
    return QReal(q, DEFAULT_DPS if dps is None else dps)


@dataclass(frozen=True)
class TruncationPolicy:
    tolerance: float = 1e-20
    max_terms: int = 10**6
    start_terms: int = 16

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.start_terms < 1 or self.max_terms < 2 * self.start_terms:
            raise DomainError("need 1 <= start_terms and 2*start_terms <= max_terms")


DEFAULT_POLICY = TruncationPolicy()


def _until_stable(advance, policy: TruncationPolicy, what: str):
    """Double the truncation until two values agree; returns ``(value, terms)``."""
    terms = policy.start_terms
    prev = cur = advance(terms)
    rel = None
    while True:
        if 2 * terms > policy.max_terms:
            raise TruncationError(
                f"{what} did not settle within {policy.max_terms} terms"
                + (f" (last relative change {render(rel, 6)})" if rel is not None else ""),
                achieved=rel,
            )
        terms *= 2
        cur = advance(terms)
        if abs(cur - prev) <= policy.tolerance * abs(cur):
            return cur, terms
        rel = abs(cur - prev) / abs(cur) if cur else None
        prev = cur


class _Product:
    """Running product of ``1 - c * q**m`` over ``m = 0, 1, ...`` skipping ``skip(m)``."""

    def __init__(self, c, q, skip_mod: int | None = None):
        self.c = c
        self.q = q
        self.qm = q**0
        self.m = 0
        self.value = q**0
        self.skip_mod = skip_mod

    def advance(self, terms: int):
        c, q, qm, value, m = self.c, self.q, self.qm, self.value, self.m
        p = self.skip_mod
        while m < terms:
            if p is None or (m + 1) % p:
                f = 1 - c * qm
                if f == 0:
                    raise PoleError(f"factor m={m} of the q-product vanishes", index=m)
                value *= f
            qm *= q
            m += 1
        self.qm, self.value, self.m = qm, value, m
        return value


class _RatioProduct:
    """Running ratio ``prod (1 - a*q**m) / (1 - b*q**m)`` with optional restriction."""

    def __init__(self, a, b, q, skip_mod: int | None = None):
        self.a, self.b, self.q = a, b, q
        self.qm = q**0
        self.num = q**0
        self.den = q**0
        self.m = 0
        self.skip_mod = skip_mod

    def advance(self, terms: int):
        a, b, q, qm, num, den, m = self.a, self.b, self.q, self.qm, self.num, self.den, self.m
        p = self.skip_mod
        while m < terms:
            if p is None or (m + 1) % p:
                d = 1 - b * qm
                if d == 0:
                    raise PoleError(f"denominator factor m={m} vanishes", index=m)
                num *= 1 - a * qm
                den *= d
            qm *= q
            m += 1
        self.qm, self.num, self.den, self.m = qm, num, den, m
        return num / den


def nu_p(n: int, p: int) -> int:
    """Number of multiples of ``p`` in ``1..n``."""
    if n < 0:
        raise DomainError("n must be non-negative")
    return n // int(Prime(p))


def _finite_product(a, q: QReal, n: int, p: int | None):
    ea = _exact(a)
    if ea is not None and q.exact is not None:
        out, qm = Fraction(1), Fraction(1)
        for m in range(n):
            if p is None or (m + 1) % p:
                out *= 1 - qm * ea
            qm *= q.exact
        return out
    with _context(q.dps):
        return _Product(_num(a, q.dps), q.value, p).advance(n)


def q_pochhammer(a, q, n: int | None = None, policy: TruncationPolicy = DEFAULT_POLICY):
    """``(a; q)_n = prod_{m<n} (1 - a q**m)``; ``n=None`` means the infinite product."""
    q = _as_q(q)
    if n is not None:
        if n < 0:
            raise DomainError("n must be non-negative")
        return _finite_product(a, q, n, None)
    q.require_unit_interval()
    with _context(q.dps):
        value, _ = _until_stable(_Product(_num(a, q.dps), q.value).advance, policy, "(a;q)_oo")
    return value


@dataclass(frozen=True)
class RestrictedSymbol:
    """``(a; q)_{p,n}``: the q-Pochhammer product without factors where ``p | m+1``."""

    a: object
    q: QReal
    n: int | None
    p: int
    value: object
    terms: int


def q_pochhammer_p(a, q, n: int | None, p: int, policy: TruncationPolicy = DEFAULT_POLICY) -> RestrictedSymbol:
    q = _as_q(q)
    p = int(Prime(p))
    if n is not None:
        if n < 0:
            raise DomainError("n must be non-negative")
        return RestrictedSymbol(a, q, n, p, _finite_product(a, q, n, p), n)
    q.require_unit_interval()
    with _context(q.dps):
        value, terms = _until_stable(_Product(_num(a, q.dps), q.value, p).advance, policy, "(a;q)_{p,oo}")
    return RestrictedSymbol(a, q, None, p, value, terms)


def q_integer(m: int, q) -> Fraction:
    """``[m]_q = 1 + q + ... + q**(m-1)`` for rational q."""
    q = _as_q(q)
    if q.exact is None:
        raise DomainError("q_integer needs a rational q")
    return sum((q.exact**j for j in range(m)), Fraction(0))


def q_factorial(n: int, q) -> Fraction:
    """``[n]_q! = [1]_q [2]_q ... [n]_q`` for rational q."""
    if n < 0:
        raise DomainError("n must be non-negative")
    out = Fraction(1)
    for m in range(1, n + 1):
        out *= q_integer(m, q)
    return out


def _integer_or_none(x) -> int | None:
    e = _exact(x)
    return int(e) if e is not None and e.denominator == 1 else None


def gamma_q_shifted(x, q, policy: TruncationPolicy = DEFAULT_POLICY):
    """``Gamma_q(x + 1) = (1-q)**(-x) * prod_{m>=1} (1 - q**m) / (1 - q**(x+m))``.

    For a non-negative integer ``x`` and rational ``q`` the product telescopes
    to the exact q-factorial ``[x]_q!``.
    """
    q = _as_q(q)
    q.require_unit_interval()
    k = _integer_or_none(x)
    if k is not None and k <= -1:
        raise PoleError(f"Gamma_q has a pole: factor m={-k} of the denominator is 1 - q^0", index=-k)
    if k is not None and k >= 0 and q.exact is not None:
        return q_factorial(k, q)
    with _context(q.dps):
        qv = q.value
        xv = _num(x, q.dps)
        qx = qv**xv
        # prod_{m>=1} (1 - q^m)/(1 - q^x q^m), started at m = 1.
        ratio = _RatioProduct(qv, qx * qv, qv)
        value, _ = _until_stable(ratio.advance, policy, "Gamma_q product")
        return (1 - qv) ** (-xv) * value


def gamma_q(x, q, policy: TruncationPolicy = DEFAULT_POLICY):
    """``Gamma_q(x)`` through the shifted product at ``x - 1``."""
    e = _exact(x)
    if e is not None:
        return gamma_q_shifted(e - 1, q, policy)
    q = _as_q(q)
    with _context(q.dps):
        return gamma_q_shifted(_num(x, q.dps) - 1, q, policy)


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of an identity, evaluated along independent routes."""

    lhs: object
    rhs: object
    abs_diff: object
    truncation_used: dict
    tolerance_met: bool

    @property
    def rel_diff(self):
        return self.abs_diff / abs(self.lhs) if self.lhs else self.abs_diff

    def to_json(self) -> dict:
        return {
            "lhs": render(self.lhs),
            "rhs": render(self.rhs),
            "abs_diff": render(self.abs_diff),
            "truncation_used": self.truncation_used,
            "tolerance_met": self.tolerance_met,
        }


def verify_q_binomial(alpha, z, q, policy: TruncationPolicy = DEFAULT_POLICY) -> IdentityReport:
    """q-binomial theorem: ``(z q**a; q)_oo / (z; q)_oo == sum_m (q**a; q)_m / (q; q)_m * z**m``.

    The left side is a quotient of two infinite products, the right side a
    power series summed by its term ratio.
    """
    q = _as_q(q)
    q.require_unit_interval()
    with _context(q.dps):
        qv = q.value
        zv = _num(z, q.dps)
        if not abs(zv) < 1:
            raise DomainError("the q-binomial series needs |z| < 1")
        qa = q.power(alpha)
        qa = _num(qa, q.dps)
        num, n_terms = _until_stable(_Product(zv * qa, qv).advance, policy, "(z q^a;q)_oo")
        den, d_terms = _until_stable(_Product(zv, qv).advance, policy, "(z;q)_oo")
        lhs = num / den

        state = {"m": 0, "term": mpfr(1), "sum": mpfr(1), "qm": mpfr(1)}

        def advance(terms):
            m, term, total, qm = state["m"], state["term"], state["sum"], state["qm"]
            while m < terms:
                # t_{m+1} = t_m * (1 - q^(a+m)) / (1 - q^(m+1)) * z
                nxt = qm * qv
                term = term * (1 - qa * qm) / (1 - nxt) * zv
                total += term
                qm = nxt
                m += 1
            state.update(m=m, term=term, sum=total, qm=qm)
            return total

        rhs, s_terms = _until_stable(advance, policy, "q-binomial series")
        diff = abs(lhs - rhs)
        met = diff <= policy.tolerance * abs(lhs)
    return IdentityReport(lhs, rhs, diff, {"lhs": max(n_terms, d_terms), "rhs": s_terms}, bool(met))


def _ratio_restricted(alpha, z, q: QReal, p: int, policy: TruncationPolicy):
    with _context(q.dps):
        qv = q.value
        zv = _num(z, q.dps)
        qa = _num(q.power(alpha), q.dps)
        return _until_stable(_RatioProduct(qa * zv, zv, qv, p).advance, policy, "restricted ratio")


def ratio_restricted(alpha, z, q, p: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """``(q**a z; q)_{p,oo} / (z; q)_{p,oo}`` as one running product of ratios."""
    q = _as_q(q)
    q.require_unit_interval()
    p = int(Prime(p))
    if not abs(_num(z, q.dps)) < 1:
        raise DomainError("need |z| < 1")
    return _ratio_restricted(alpha, z, q, p, policy)[0]


def verify_ratio_identity(alpha, z, q, p: int, policy: TruncationPolicy = DEFAULT_POLICY) -> IdentityReport:
    """Restricted ratio against ordinary ratios at ``(q, z)`` and ``(q' = q**p, z' = q**(p-1) z)``.

    The right side divides ``(q**a z; q)_oo / (z; q)_oo`` by
    ``(q'**(a/p) z'; q')_oo / (z'; q')_oo``, four independent infinite
    products.
    """
    q = _as_q(q)
    q.require_unit_interval()
    p = int(Prime(p))
    lhs, l_terms = _ratio_restricted(alpha, z, q, p, policy)
    with _context(q.dps):
        qv = q.value
        zv = _num(z, q.dps)
        av = _num(alpha, q.dps)
        qa = _num(q.power(alpha), q.dps)
        q2 = qv**p
        z2 = qv ** (p - 1) * zv
        parts = []
        terms = 0
        for c, base in ((qa * zv, qv), (zv, qv), (q2 ** (av / p) * z2, q2), (z2, q2)):
            v, t = _until_stable(_Product(c, base).advance, policy, "(a;q)_oo")
            parts.append(v)
            terms = max(terms, t)
        rhs = (parts[0] / parts[1]) / (parts[2] / parts[3])
        diff = abs(lhs - rhs)
        met = diff <= policy.tolerance * abs(lhs)
    return IdentityReport(lhs, rhs, diff, {"lhs": l_terms, "rhs": terms}, bool(met))


def ratio_identity_finite(alpha: int, z, q, p: int, n: int) -> tuple[Fraction, Fraction]:
    """Finite restricted ratio and its recombination through ``q' = q**p``, exactly.

    Returns ``(lhs, rhs)`` with ``lhs = (q**a z; q)_{p,n} / (z; q)_{p,n}`` and
    ``rhs = [(q**a z; q)_n / (z; q)_n] / [(q**a z'; q')_k / (z'; q')_k]``
    where ``z' = q**(p-1) z`` and ``k = floor(n/p)`` counts the skipped factors.
    """
    q = _as_q(q)
    p = int(Prime(p))
    za = _exact(z)
    if q.exact is None or za is None or _integer_or_none(alpha) is None:
        raise DomainError("the finite identity is checked with rational q, z and integer alpha")
    qa = q.power(alpha)
    qe = q.exact
    lhs = _finite_product(qa * za, q, n, p) / _finite_product(za, q, n, p)
    q2 = QReal(qe**p, q.dps)
    z2 = qe ** (p - 1) * za
    k = n // p
    rhs = (_finite_product(qa * za, q, n, None) / _finite_product(za, q, n, None)) / (
        _finite_product(qa * z2, q2, k, None) / _finite_product(z2, q2, k, None)
    )
    return lhs, rhs


def gamma_pq_symbol_form(x: int, q, p: int, terms: int) -> Fraction:
    """Truncated symbol form ``(-1)**x (1-q)**(1-x) (q;q)_{p,T} / (q**x;q)_{p,T}``, exact.

    The infinite restricted symbols do not converge p-adically, so only the
    truncation at ``T = terms`` factors is computed.
    """
    q = _as_q(q)
    if q.exact is None or q.exact == 1:
        raise DomainError("symbol form is evaluated with rational q != 1")
    p = int(Prime(p))
    qe = q.exact
    sign = -1 if x % 2 else 1
    return sign * (1 - qe) ** (1 - x) * _finite_product(qe, q, terms, p) / _finite_product(qe**x, q, terms, p)


def render(v, digits: int = 30) -> str:
    """Deterministic text for Fractions, ints and mpfr values."""
    if v is None:
        return "null"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, type(mpfr(0))):
        if gmpy2.is_zero(v):
            return "0"
        if not gmpy2.is_finite(v):
            return str(v)
        mant, exp, _ = v.digits(10, digits)
        sign = "-" if mant.startswith("-") else ""
        mant = mant.lstrip("-")
        return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+03d}"
    return str(v)
