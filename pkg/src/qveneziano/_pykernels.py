"""Pure-Python prefix-product sweeps; reference for the compiled kernels."""

from __future__ import annotations


def unit_prefix_products(p: int, modulus: int, checkpoints) -> list[int]:
    """For each ``c`` in ascending ``checkpoints``: prod of ``m < c`` with ``p∤m``, mod ``modulus``."""
    out = []
    prod = 1 % modulus
    m = 1
    for c in checkpoints:
        while m < c:
            if m % p:
                prod = prod * m % modulus
            m += 1
        out.append(prod)
    return out


def qint_prefix_products(p: int, q: int, modulus: int, checkpoints) -> list[int]:
    """As :func:`unit_prefix_products` with each ``m`` replaced by ``1 + q + ... + q**(m-1)``."""
    out = []
    prod = 1 % modulus
    s = 0
    qpow = 1 % modulus
    q %= modulus
    m = 1
    for c in checkpoints:
        while m < c:
            s += qpow
            if s >= modulus:
                s -= modulus
            qpow = qpow * q % modulus
            if m % p:
                prod = prod * s % modulus
            m += 1
        out.append(prod)
    return out
