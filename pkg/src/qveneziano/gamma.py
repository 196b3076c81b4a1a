"""Morita's p-adic gamma function and Koblitz's q-extension.

On positive integers both are finite products::

    Gamma_p(n)     = (-1)**n * prod(m for 1 <= m < n if p∤m)
    Gamma_{p,q}(n) = (-1)**n * prod([m]_q for 1 <= m < n if p∤m)

with ``[m]_q = (1 - q**m)/(1 - q) = 1 + q + ... + q**(m-1)``.  Arguments in
Z_p are handled by continuity: the value at ``x`` is read off at an integer
approximant ``n == x (mod p**K)``, ``K = N + g``, and certified by checking
that the approximant ``n + p**K`` gives the same ``N`` digits.  On a
mismatch the guard ``g`` doubles, up to ``MAX_GUARD``.

Cost is linear in the approximant, so a generic argument costs about
``2 * p**(N + g)`` modular multiplications.  Evaluations above the cost
ceiling (``QVENEZIANO_COST_CEILING``, default ``10**8`` terms) are refused.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .errors import CostLimitError, DomainError, PrecisionError
from .kernels import qint_prefix_products, unit_prefix_products
from .padic import PadicNumber, PadicQ, Prime, integer_representative, padic, vp

__all__ = [
    "DEFAULT_COST_CEILING",
    "DEFAULT_GUARD",
    "MAX_GUARD",
    "GammaRequest",
    "GammaValue",
    "cost_ceiling",
    "gamma_p",
    "gamma_p_int",
    "gamma_p_many",
    "gamma_pq",
    "gamma_pq_int",
    "gamma_pq_many",
    "koblitz_product",
    "morita_product",
]

DEFAULT_GUARD = 2
MAX_GUARD = 16
DEFAULT_COST_CEILING = 10**8


def cost_ceiling() -> int:
    """Ceiling on product terms, overridable through ``QVENEZIANO_COST_CEILING``."""
    raw = os.environ.get("QVENEZIANO_COST_CEILING")
    return int(float(raw)) if raw else DEFAULT_COST_CEILING


@dataclass(frozen=True)
class GammaValue:
    value: PadicNumber
    verified_digits: int
    approximant_used: int
    cost: int

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "text": str(self.value),
            "verified_digits": self.verified_digits,
            "approximant_used": self.approximant_used,
            "cost": self.cost,
        }


@dataclass(frozen=True)
class GammaRequest:
    """One evaluation of Gamma_p (``q is None``) or Gamma_{p,q}."""

    argument: PadicNumber | int
    p: int
    q: PadicQ | None = None
    target_precision: int = 8
    guard_digits: int = DEFAULT_GUARD

    def __post_init__(self):
        Prime(self.p)
        if self.target_precision < 1:
            raise DomainError("target precision must be at least 1")
        if isinstance(self.argument, PadicNumber) and not self.argument.is_zero_class and self.argument.valuation < 0:
            raise DomainError(f"argument {self.argument} is not in Z_{self.p}")
        if self.q is not None and self.q.p != self.p:
            raise DomainError("q lives over a different prime")

    def evaluate(self, ceiling: int | None = None) -> GammaValue:
        if self.q is None:
            return gamma_p(self.argument, self.target_precision, p=self.p, guard=self.guard_digits, ceiling=ceiling)
        return gamma_pq(self.argument, self.q, self.target_precision, guard=self.guard_digits, ceiling=ceiling)


# -- exact integer products ----------------------------------------------


def morita_product(n: int, p: int) -> int:
    """Exact integer ``Gamma_p(n + 1)`` for ``n >= 0``."""
    if n < 0:
        raise DomainError("n must be non-negative")
    out = 1
    for m in range(1, n + 1):
        if m % p:
            out *= m
    return -out if (n + 1) % 2 else out


def koblitz_product(n: int, q, p: int) -> Fraction:
    """Exact rational ``Gamma_{p,q}(n + 1)`` from the finite product, for any rational ``q != 1``.

    No p-adic condition on ``q`` is imposed: the finite product makes sense
    over Q, which is how the ``p -> oo`` limit is compared with the
    classical q-factorial.
    """
    q = Fraction(q)
    if q == 1:
        raise DomainError("q = 1 makes the factors 0/0")
    if n < 0:
        raise DomainError("n must be non-negative")
    out = Fraction(1)
    qm = Fraction(1)
    for m in range(1, n + 1):
        qm *= q
        if m % p:
            out *= (1 - qm) / (1 - q)
    return -out if (n + 1) % 2 else out


def _signed(residue: int, c: int, modulus: int) -> int:
    return (-residue) % modulus if c % 2 else residue % modulus


def _unit(p: int, residue: int, k: int) -> PadicNumber:
    if residue % p == 0:
        raise PrecisionError(f"product is not a {p}-adic unit; a factor lost its unit part")
    return PadicNumber(p, 0, residue, k)


@lru_cache(maxsize=4096)
def _gamma_residue(p: int, q_residue: int | None, c: int, k: int) -> int:
    mod = p**k
    if q_residue is None:
        r = unit_prefix_products(p, mod, [c])[0]
    else:
        r = qint_prefix_products(p, q_residue, mod, [c])[0]
    return _signed(r, c, mod)


def gamma_p_int(n: int, p: int, modulus_digits: int) -> PadicNumber:
    """``Gamma_p(n + 1)`` modulo ``p**modulus_digits`` as a p-adic unit."""
    p = int(Prime(p))
    if n < 0:
        raise DomainError("n must be non-negative")
    if modulus_digits < 1:
        raise DomainError("modulus_digits must be at least 1")
    return _unit(p, _gamma_residue(p, None, n + 1, modulus_digits), modulus_digits)


def gamma_pq_int(n: int, q: PadicQ, modulus_digits: int) -> PadicNumber:
    """``Gamma_{p,q}(n + 1)`` modulo ``p**modulus_digits``.

    Each factor ``(1 - q**m)/(1 - q)`` is formed as the q-integer
    ``1 + q + ... + q**(m-1)``, which avoids dividing out ``v_p(1 - q)``.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if modulus_digits < 1:
        raise DomainError("modulus_digits must be at least 1")
    _check_q_digits(q, modulus_digits)
    p = q.p
    return _unit(p, _gamma_residue(p, q.residue(modulus_digits), n + 1, modulus_digits), modulus_digits)


def _check_q_digits(q: PadicQ, k: int) -> None:
    if q.precision is not None and q.precision < k:
        raise PrecisionError(f"q is known to {q.precision} digits, {k} needed", achieved=q.precision)


# -- continuity in Z_p ---------------------------------------------------

Evaluator = Callable[[Sequence[int], int], list]


def _coerce_argument(x, p: int):
    if isinstance(x, bool):
        raise DomainError("boolean argument")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and "/" not in x and "O(" not in x:
        return int(x)
    if not isinstance(x, PadicNumber):
        q = Fraction(x)
        if q.denominator == 1:
            return int(q)
        if vp(q.denominator, p) > 0:
            raise DomainError(f"{q} is not in Z_{p}")
        # Exact rationals have every digit; 64 is far beyond any feasible N.
        return padic(q, p, 64)
    if x.p != p:
        raise DomainError(f"expected a {p}-adic argument, got a {x.p}-adic one")
    if not x.is_zero_class and x.valuation < 0:
        raise DomainError(f"{x} is not in Z_{p}")
    return x


def _agreement(a: int, b: int, p: int, N: int) -> int:
    d = (a - b) % p**N
    if d == 0:
        return N
    return vp(d, p)


def _continuity(x, p: int, N: int, evaluate: Evaluator, guard: int, max_guard: int, ceiling: int) -> GammaValue:
    if isinstance(x, int) and x >= 1:
        if x > ceiling:
            raise CostLimitError(f"Gamma at {x} needs {x} product terms, ceiling is {ceiling}", cost=x, ceiling=ceiling)
        (r,) = evaluate([x], N)
        return GammaValue(_unit(p, r, N), N, x, x)
    # p = 2 is only Lipschitz up to one digit, so the approximants are spaced one digit further.
    extra = 1 if p == 2 else 0
    if isinstance(x, int):
        x = padic(x, p, N + max_guard + extra + 1)
    known = x.abs_precision
    if known < N + extra:
        raise PrecisionError(f"argument known to {known} digits; {N + extra} needed for {N} verified digits", achieved=max(known - extra, 0))
    g = guard
    achieved = 0
    while True:
        K = N + g + extra
        n = integer_representative(x, min(K, known))
        a1 = n if n >= 1 else p**K
        a2 = a1 + p**K
        if a2 > ceiling:
            if achieved:
                raise PrecisionError(
                    f"guard escalation to g={g} exceeds the cost ceiling {ceiling}; {achieved} digits agreed",
                    achieved=achieved,
                )
            raise CostLimitError(
                f"continuity evaluation needs {a2} product terms (about 2*{p}^{K}), ceiling is {ceiling}",
                cost=a2,
                ceiling=ceiling,
            )
        r1, r2 = evaluate([a1, a2], N)
        agree = _agreement(r1, r2, p, N)
        if agree >= N:
            return GammaValue(_unit(p, r1, N), N, a1, a2)
        achieved = max(achieved, agree)
        if g >= max_guard:
            raise PrecisionError(f"approximants agree to only {achieved} of {N} digits at guard {g}", achieved=achieved)
        g = min(max(2 * g, 1), max_guard)


def _p_evaluator(p: int) -> Evaluator:
    def evaluate(checkpoints, N):
        mod = p**N
        return [_signed(r, c, mod) for r, c in zip(unit_prefix_products(p, mod, checkpoints), checkpoints)]

    return evaluate


def _pq_evaluator(q: PadicQ) -> Evaluator:
    p = q.p

    def evaluate(checkpoints, N):
        mod = p**N
        rs = qint_prefix_products(p, q.residue(N), mod, checkpoints)
        return [_signed(r, c, mod) for r, c in zip(rs, checkpoints)]

    return evaluate


def _infer_prime(x, p):
    if p is not None:
        return int(Prime(p))
    if isinstance(x, PadicNumber):
        return x.p
    raise DomainError("the prime p is required for a non-p-adic argument")


def gamma_p(x, N: int, p: int | None = None, guard: int = DEFAULT_GUARD, max_guard: int = MAX_GUARD,
            ceiling: int | None = None) -> GammaValue:
    """Morita's ``Gamma_p(x)`` to ``N`` verified digits.

    ``x`` may be a :class:`PadicNumber` in Z_p, an integer, or a rational
    with denominator prime to ``p``.  Positive integers are evaluated
    directly; everything else goes through the two-approximant check.
    """
    p = _infer_prime(x, p)
    if N < 1:
        raise DomainError("N must be at least 1")
    x = _coerce_argument(x, p)
    return _continuity(x, p, N, _p_evaluator(p), guard, max_guard, cost_ceiling() if ceiling is None else ceiling)


def gamma_pq(x, q: PadicQ, N: int, guard: int = DEFAULT_GUARD, max_guard: int = MAX_GUARD,
             ceiling: int | None = None) -> GammaValue:
    """Koblitz's ``Gamma_{p,q}(x)`` to ``N`` verified digits; see :func:`gamma_p`."""
    if not isinstance(q, PadicQ):
        raise DomainError("q must be a PadicQ with 0 < |q-1|_p < 1")
    if N < 1:
        raise DomainError("N must be at least 1")
    _check_q_digits(q, N)
    x = _coerce_argument(x, q.p)
    return _continuity(x, q.p, N, _pq_evaluator(q), guard, max_guard, cost_ceiling() if ceiling is None else ceiling)


def _many(xs, p: int, N: int, evaluate: Evaluator, single, guard: int, ceiling: int) -> list[GammaValue]:
    """Evaluate many arguments with one shared sweep, falling back per argument on a mismatch."""
    extra = 1 if p == 2 else 0
    plans = []
    checkpoints = []
    for x in xs:
        x = _coerce_argument(x, p)
        if isinstance(x, int) and x >= 1:
            plans.append((x, x, None))
            checkpoints.append(x)
            continue
        if isinstance(x, int):
            x = padic(x, p, N + MAX_GUARD + extra + 1)
        if x.abs_precision < N + extra:
            plans.append((x, None, None))
            continue
        K = N + guard + extra
        n = integer_representative(x, min(K, x.abs_precision))
        a1 = n if n >= 1 else p**K
        plans.append((x, a1, a1 + p**K))
        checkpoints += [a1, a1 + p**K]
    top = max(checkpoints, default=0)
    if top > ceiling:
        raise CostLimitError(f"batch needs {top} product terms, ceiling is {ceiling}", cost=top, ceiling=ceiling)
    values = dict(zip(checkpoints, evaluate(checkpoints, N))) if checkpoints else {}
    out = []
    for x, a1, a2 in plans:
        if a1 is None:
            out.append(single(x))
        elif a2 is None:
            out.append(GammaValue(_unit(p, values[a1], N), N, a1, a1))
        elif _agreement(values[a1], values[a2], p, N) >= N:
            out.append(GammaValue(_unit(p, values[a1], N), N, a1, a2))
        else:
            out.append(single(x))
    return out


def gamma_p_many(xs, N: int, p: int, guard: int = DEFAULT_GUARD, ceiling: int | None = None) -> list[GammaValue]:
    """Batch form of :func:`gamma_p`: one prefix sweep serves every argument."""
    p = int(Prime(p))
    ceiling = cost_ceiling() if ceiling is None else ceiling
    return _many(xs, p, N, _p_evaluator(p), lambda x: gamma_p(x, N, p=p, guard=guard, ceiling=ceiling), guard, ceiling)


def gamma_pq_many(xs, q: PadicQ, N: int, guard: int = DEFAULT_GUARD, ceiling: int | None = None) -> list[GammaValue]:
    """Batch form of :func:`gamma_pq`."""
    _check_q_digits(q, N)
    ceiling = cost_ceiling() if ceiling is None else ceiling
    return _many(xs, q.p, N, _pq_evaluator(q), lambda x: gamma_pq(x, q, N, guard=guard, ceiling=ceiling), guard, ceiling)
