"""Backend selection for the prefix-product sweeps.

The compiled extension is used when it imported cleanly and the modulus
fits in 63 bits; otherwise the pure-Python sweep runs.  Setting
``QVENEZIANO_PURE_PYTHON=1`` before import forces the fallback.

Checkpoints may be given in any order; results come back in input order.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("QVENEZIANO_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"


def _dispatch(name: str, modulus: int, backend: str | None):
    if backend == "python" or (backend is None and (_ckernels is None or modulus >= _ckernels.MAX_MODULUS)):
        return getattr(_pykernels, name)
    if _ckernels is None:
        raise RuntimeError("compiled kernels are not available")
    if modulus >= _ckernels.MAX_MODULUS:
        raise ValueError("modulus too large for the compiled kernel")
    return getattr(_ckernels, name)


def _sorted_call(fn, args, checkpoints):
    checkpoints = list(checkpoints)
    if any(c < 0 for c in checkpoints):
        raise ValueError("checkpoints must be non-negative")
    order = sorted(range(len(checkpoints)), key=checkpoints.__getitem__)
    values = fn(*args, [checkpoints[i] for i in order])
    out = [0] * len(checkpoints)
    for i, v in zip(order, values):
        out[i] = v
    return out


def unit_prefix_products(p: int, modulus: int, checkpoints, backend: str | None = None) -> list[int]:
    """``prod(m for 1 <= m < c if m % p)`` modulo ``modulus`` for every checkpoint ``c``."""
    fn = _dispatch("unit_prefix_products", modulus, backend)
    return _sorted_call(fn, (p, modulus), checkpoints)


def qint_prefix_products(p: int, q: int, modulus: int, checkpoints, backend: str | None = None) -> list[int]:
    """Products of the q-integers ``[m]_q`` over ``1 <= m < c``, ``p∤m``, modulo ``modulus``."""
    fn = _dispatch("qint_prefix_products", modulus, backend)
    return _sorted_call(fn, (p, q % modulus, modulus), checkpoints)


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])
