import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qveneziano import kernels

BACKENDS = kernels.available_backends()


def brute_unit(p, modulus, c):
    out = 1
    for m in range(1, c):
        if m % p:
            out = out * m % modulus
    return out


def brute_qint(p, q, modulus, c):
    out = 1
    for m in range(1, c):
        if m % p:
            out = out * sum(q**j for j in range(m)) % modulus
    return out


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=40, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7]), k=st.integers(1, 5), cs=st.lists(st.integers(0, 300), min_size=1, max_size=6))
def test_unit_products(backend, p, k, cs):
    mod = p**k
    assert kernels.unit_prefix_products(p, mod, cs, backend=backend) == [brute_unit(p, mod, c) for c in cs]


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=40, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7]), k=st.integers(1, 5), q=st.integers(1, 50), cs=st.lists(st.integers(0, 120), min_size=1, max_size=6))
def test_qint_products(backend, p, k, q, cs):
    mod = p**k
    assert kernels.qint_prefix_products(p, q, mod, cs, backend=backend) == [brute_qint(p, q, mod, c) for c in cs]


def test_backends_agree_on_large_sweep():
    p, mod = 7, 7**20
    cs = [7**6, 3, 2 * 7**6 + 5]
    ref = kernels.unit_prefix_products(p, mod, cs, backend="python")
    for b in BACKENDS:
        assert kernels.unit_prefix_products(p, mod, cs, backend=b) == ref
        assert kernels.qint_prefix_products(p, 8, mod, cs, backend=b) == kernels.qint_prefix_products(p, 8, mod, cs, backend="python")


def test_wilson_type_value():
    # prod of units below p^k is -1 mod p^k for odd p.
    for p, k in [(3, 4), (5, 3), (7, 2)]:
        assert kernels.unit_prefix_products(p, p**k, [p**k])[0] == p**k - 1


def test_big_modulus_falls_back():
    mod = 3**50
    assert kernels.unit_prefix_products(3, mod, [100]) == [brute_unit(3, mod, 100)]


def test_negative_checkpoint():
    with pytest.raises(ValueError):
        kernels.unit_prefix_products(3, 27, [-1])


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


def test_math_sanity():
    assert kernels.unit_prefix_products(11, 10**9 + 7, [11])[0] == math.factorial(10) % (10**9 + 7)
