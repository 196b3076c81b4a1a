"""Veneziano-type amplitudes: arithmetic (Gamma_p), quantum-arithmetic (Gamma_{p,q}),
classical q-deformed four-point in ratio and double-sum form, and the n-point sum.

Classical amplitudes take Regge values ``alpha = 1 + slope * s`` directly;
:class:`Kinematics` derives them from momenta when those are available.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping, NamedTuple, Sequence

from .errors import DomainError, KinematicsError, PoleError, TruncationError
from .gamma import GammaValue, gamma_p_many, gamma_pq_many
from .padic import PadicNumber, PadicQ, Prime, padic, vp
from .qseries import (
    DEFAULT_POLICY,
    QReal,
    TruncationPolicy,
    _as_q,
    _context,
    _exact,
    _num,
    q_pochhammer,
    render,
)

__all__ = [
    "AmplitudeResult",
    "ChannelSet",
    "Kinematics",
    "Mandelstam",
    "alpha",
    "amp_n",
    "amp_p",
    "amp_pq",
    "amp_q_doublesum",
    "amp_q_ratio",
    "channels",
    "doublesum_lattice",
    "inner",
    "kinematics_from_json",
    "mandelstam",
    "npoint_from_json",
    "npoint_lattice_sum",
    "random_on_shell_kinematics",
    "resonance_scan",
]


# -- kinematics ----------------------------------------------------------


def inner(u: Sequence, v: Sequence, metric: Sequence):
    """Diagonal quadratic form ``sum eta_i u_i v_i``."""
    if not len(u) == len(v) == len(metric):
        raise KinematicsError("vector and metric dimensions differ")
    total = 0
    for e, a, b in zip(metric, u, v):
        total = total + e * a * b
    return total


def _vsum(vectors):
    out = list(vectors[0])
    for v in vectors[1:]:
        out = [a + b for a, b in zip(out, v)]
    return out


def _is_zero(x) -> bool:
    return x == 0


@dataclass(frozen=True)
class Kinematics:
    """On-shell, momentum-conserving external momenta with a diagonal form.

    Entries may be exact rationals or :class:`PadicNumber` values.  The
    default metric is ``(-1, +1, ..., +1)``.
    """

    momenta: tuple
    metric: tuple | None = None
    slope: object = Fraction(1)

    def __post_init__(self):
        momenta = tuple(tuple(k) for k in self.momenta)
        if len(momenta) < 4:
            raise KinematicsError("need at least four momenta")
        d = len(momenta[0])
        if d < 1 or any(len(k) != d for k in momenta):
            raise KinematicsError("momenta must share one positive dimension")
        metric = tuple(self.metric) if self.metric is not None else (Fraction(-1),) + (Fraction(1),) * (d - 1)
        if len(metric) != d:
            raise KinematicsError(f"metric has {len(metric)} entries, momenta have {d}")
        if any(_is_zero(e) for e in metric):
            raise KinematicsError("metric coefficients must be non-zero")
        object.__setattr__(self, "momenta", momenta)
        object.__setattr__(self, "metric", metric)
        for i, k in enumerate(momenta, 1):
            sq = inner(k, k, metric)
            if not sq == 2:
                raise KinematicsError(f"k_{i} is off shell: <k_{i}|k_{i}> = {sq}, expected 2", vector=i)
        total = _vsum(momenta)
        if not all(_is_zero(c) for c in total):
            raise KinematicsError(f"momentum is not conserved: sum of k_i = {total}", vector=None)

    @property
    def d(self) -> int:
        return len(self.metric)

    @property
    def n(self) -> int:
        return len(self.momenta)

    def square(self, v):
        return inner(v, v, self.metric)

    def invariant(self, i: int, j: int):
        """``(k_i + ... + k_j)**2`` for 1-based ``i <= j``."""
        if not 1 <= i <= j <= self.n:
            raise DomainError(f"bad leg range {i}..{j}")
        return self.square(_vsum(self.momenta[i - 1 : j]))

    def channel_alphas(self) -> dict:
        """Regge values of every planar channel, from ``s_ij = (k_i + ... + k_j)**2``."""
        return {c: alpha(self.invariant(*c), self.slope) for c in channels(self.n).channels}


class Mandelstam(NamedTuple):
    s: object
    t: object
    u: object


def mandelstam(kin: Kinematics) -> Mandelstam:
    """``s = (k1+k2)**2``, ``t = (k1+k3)**2``, ``u = (k1+k4)**2``; checks ``s+t+u = sum k_i**2``."""
    if kin.n != 4:
        raise KinematicsError(f"Mandelstam variables need four momenta, got {kin.n}")
    k1, k2, k3, k4 = kin.momenta
    s = kin.square(_vsum([k1, k2]))
    t = kin.square(_vsum([k1, k3]))
    u = kin.square(_vsum([k1, k4]))
    total = sum((kin.square(k) for k in kin.momenta[1:]), kin.square(k1))
    if not s + t + u == total:
        raise KinematicsError(f"s+t+u = {s + t + u} differs from sum of k_i^2 = {total}")
    return Mandelstam(s, t, u)


def alpha(s, slope=1):
    """Regge trajectory ``1 + slope * s``."""
    if isinstance(slope, str):
        slope = Fraction(slope)
    if isinstance(s, str):
        s = Fraction(s)
    return 1 + slope * s


def _find_base_point(metric) -> list:
    # Smallest integer vector on the shell <k|k> = 2.
    d = len(metric)
    for r in range(1, 3):
        for v in itertools.product(range(-r, r + 1), repeat=d):
            if inner(v, v, metric) == 2:
                return [Fraction(c) for c in v]
    raise DomainError("no small rational point on <k|k> = 2 for this metric")


def _rand_vec(rng: random.Random, d: int, height: int) -> list:
    return [Fraction(rng.randint(-height, height), rng.randint(1, height)) for _ in range(d)]


def _reflect(k, v, metric):
    c = 2 * inner(k, v, metric) / inner(v, v, metric)
    return [a - c * b for a, b in zip(k, v)]


def _nonnull(rng, d, height, metric, orthogonal_to=None):
    while True:
        v = _rand_vec(rng, d, height)
        if orthogonal_to is not None:
            w = orthogonal_to
            c = inner(v, w, metric) / inner(w, w, metric)
            v = [a - c * b for a, b in zip(v, w)]
        if inner(v, v, metric) != 0:
            return v


def random_on_shell_kinematics(rng: random.Random, metric=None, d: int = 4, slope=Fraction(1), height: int = 5) -> Kinematics:
    """Random exact rational on-shell, conserved four-momenta.

    ``k1`` comes from stereographic projection through a rational shell
    point.  With a reflection ``R_v``: ``k2 = -R_v(k1)``, ``k3`` is ``-k1``
    reflected in a vector orthogonal to ``v`` (so ``<k3|v> = -<k1|v>``), and
    ``k4 = -R_v(k3)``.  Then ``k1 + k2 + k3 + k4 = 0`` identically and every
    ``k_i`` stays on shell since reflections are isometries.  A final random
    reflection mixes all four.
    """
    metric = [Fraction(e) for e in metric] if metric is not None else [Fraction(-1)] + [Fraction(1)] * (d - 1)
    d = len(metric)
    base = _find_base_point(metric)
    while True:
        w = _rand_vec(rng, d, height)
        ww = inner(w, w, metric)
        if ww != 0:
            break
    lam = -2 * inner(base, w, metric) / ww
    k1 = [a + lam * b for a, b in zip(base, w)]
    v = _nonnull(rng, d, height, metric)
    u = _nonnull(rng, d, height, metric, orthogonal_to=v)
    k2 = [-c for c in _reflect(k1, v, metric)]
    k3 = _reflect([-c for c in k1], u, metric)
    k4 = [-c for c in _reflect(k3, v, metric)]
    g = _nonnull(rng, d, height, metric)
    momenta = [_reflect(k, g, metric) for k in (k1, k2, k3, k4)]
    return Kinematics(tuple(tuple(k) for k in momenta), tuple(metric), Fraction(slope))


def _rational(x):
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise DomainError(f"expected an exact rational, got {x!r}")


def kinematics_from_json(data: Mapping) -> Kinematics:
    """``{"metric": [...], "momenta": [[...], ...], "slope": "a/b"}``; optional ``"p"``/``"precision"``
    embed every component p-adically."""
    try:
        momenta = [[_rational(c) for c in k] for k in data["momenta"]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad kinematics input: {exc}") from exc
    metric = [_rational(e) for e in data["metric"]] if data.get("metric") is not None else None
    slope = _rational(data.get("slope", 1))
    if "p" in data:
        p = int(Prime(int(data["p"])))
        N = int(data.get("precision", 20))
        momenta = [[padic(c, p, N) for c in k] for k in momenta]
        metric = [padic(e, p, N) for e in metric] if metric is not None else None
        slope = padic(slope, p, N)
    return Kinematics(tuple(tuple(k) for k in momenta), tuple(metric) if metric else None, slope)


# -- results -------------------------------------------------------------

MODES = ("arithmetic_p", "quantum_pq", "classical_q_ratio", "classical_q_sum", "n_point")


@dataclass(frozen=True)
class AmplitudeResult:
    value: object
    mode: str
    metadata: dict = field(default_factory=dict)
    resonance_flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown amplitude mode {self.mode!r}")

    def to_json(self) -> dict:
        if isinstance(self.value, PadicNumber):
            value = self.value.to_json()
            text = str(self.value)
        else:
            value = text = render(self.value)
        return {
            "mode": self.mode,
            "value": value,
            "text": text,
            "metadata": self.metadata,
            "resonance_flags": self.resonance_flags,
        }


def _is_resonant(a, p: int) -> bool:
    e = _exact(a) if not isinstance(a, PadicNumber) else None
    if e is None or e.denominator != 1:
        return False
    m = int(e)
    return m <= 0 and m % p != 0


def resonance_scan(alpha_values, p: int) -> list[dict]:
    """Flag integer channel values that are negative and prime to ``p``.

    A classifier only: Gamma_p takes unit values on all of Z_p, so a flag
    marks where the resonance criterion applies, not a divergence.
    """
    p = int(Prime(p))
    out = []
    for a in alpha_values:
        if isinstance(a, bool) or int(a) != a:
            raise DomainError(f"resonance scan takes integers, got {a!r}")
        out.append({"alpha": int(a), "flagged": _is_resonant(int(a), p)})
    return out


# -- arithmetic amplitudes -----------------------------------------------


def _zp(a, p: int):
    if isinstance(a, PadicNumber):
        if a.p != p:
            raise DomainError(f"argument is {a.p}-adic, expected {p}-adic")
        if not a.is_zero_class and a.valuation < 0:
            raise DomainError(f"alpha = {a} is not in Z_{p}; Gamma_p is only defined on Z_{p}")
        return a
    if isinstance(a, str):
        a = padic(a, p, 64) if "O(" in a else Fraction(a)
        if isinstance(a, PadicNumber):
            return _zp(a, p)
    if isinstance(a, bool) or not isinstance(a, (int, Rational)):
        raise DomainError(f"cannot use {a!r} as a p-adic argument")
    q = Fraction(a)
    if q != 0 and vp(q, p) < 0:
        raise DomainError(f"alpha = {q} is not in Z_{p}; Gamma_p is only defined on Z_{p}")
    return int(q) if q.denominator == 1 else q


def _arith_result(values: list[GammaValue], mode, p, N, a, b, extra=None) -> AmplitudeResult:
    ga, gb, gab = values
    meta = {
        "p": p,
        "precision": N,
        "verified_digits": min(v.verified_digits for v in values),
        "cost": sum(v.cost for v in values),
        "approximants": [v.approximant_used for v in values],
    }
    if extra:
        meta.update(extra)
    flags = {"alpha_s": _is_resonant(a, p), "alpha_t": _is_resonant(b, p)}
    return AmplitudeResult(ga.value * gb.value / gab.value, mode, meta, flags)


def amp_p(alpha_s, alpha_t, p: int, N: int, ceiling: int | None = None) -> AmplitudeResult:
    """``Gamma_p(a) Gamma_p(b) / Gamma_p(a + b)`` with ``a = alpha(s)``, ``b = alpha(t)`` in Z_p."""
    p = int(Prime(p))
    a, b = _zp(alpha_s, p), _zp(alpha_t, p)
    values = gamma_p_many([a, b, a + b], N, p, ceiling=ceiling)
    return _arith_result(values, "arithmetic_p", p, N, a, b)


def amp_pq(alpha_s, alpha_t, p: int, q: PadicQ, N: int, ceiling: int | None = None) -> AmplitudeResult:
    """Quantum extension: the same ratio with Koblitz's Gamma_{p,q}."""
    p = int(Prime(p))
    if not isinstance(q, PadicQ) or q.p != p:
        raise DomainError(f"q must be a PadicQ over p = {p}")
    a, b = _zp(alpha_s, p), _zp(alpha_t, p)
    values = gamma_pq_many([a, b, a + b], q, N, ceiling=ceiling)
    return _arith_result(values, "quantum_pq", p, N, a, b, {"q": str(q)})


# -- classical q-deformed amplitudes ---------------------------------------


def _check_no_pole(a, name: str) -> None:
    k = _exact(a)
    if k is not None and k.denominator == 1 and k <= 0:
        raise PoleError(f"{name} = {k}: (q^{name};q)_oo has the vanishing factor m={-int(k)}", index=-int(k))


def _prefactor(q: QReal, policy):
    with _context(q.dps):
        return (1 - q.value) * q_pochhammer(q.value, q, None, policy)


def amp_q_ratio(alpha_s, alpha_t, q, policy: TruncationPolicy = DEFAULT_POLICY) -> AmplitudeResult:
    """``(1-q)(q;q)_oo (q^(a+b);q)_oo / ((q^a;q)_oo (q^b;q)_oo)``."""
    q = _as_q(q)
    q.require_unit_interval()
    _check_no_pole(alpha_s, "alpha_s")
    _check_no_pole(alpha_t, "alpha_t")
    with _context(q.dps):
        a, b = _num(alpha_s, q.dps), _num(alpha_t, q.dps)
        ab = _exact(alpha_s) + _exact(alpha_t) if _exact(alpha_s) is not None and _exact(alpha_t) is not None else a + b
        k = _exact(ab)
        if k is not None and k.denominator == 1 and k <= 0:
            value = _num(0, q.dps)
        else:
            value = (
                _prefactor(q, policy)
                * q_pochhammer(q.power(ab), q, None, policy)
                / (q_pochhammer(q.power(alpha_s), q, None, policy) * q_pochhammer(q.power(alpha_t), q, None, policy))
            )
    return AmplitudeResult(value, "classical_q_ratio", {"q": str(q), "dps": q.dps, "tolerance": policy.tolerance})


def _qq_factors(q: QReal, L: int, exact: bool):
    """``1/(q;q)_l`` for ``l = 0..L``."""
    if exact:
        out, acc, qm = [Fraction(1)], Fraction(1), Fraction(1)
        for _ in range(L):
            qm *= q.exact
            acc *= 1 - qm
            out.append(1 / acc)
        return out
    qv = q.value
    out, acc, qm = [qv**0], qv**0, qv**0
    for _ in range(L):
        qm *= qv
        acc *= 1 - qm
        out.append(1 / acc)
    return out


def _unary(q: QReal, a, L: int, exact: bool, inv_qq):
    """``q**(l*a) / (q;q)_l`` for ``l = 0..L``."""
    base = q.power(a) if exact else _num(q.power(a), q.dps)
    out, pw = [], base**0
    for l in range(L + 1):
        out.append(pw * inv_qq[l])
        pw *= base
    return out


def _exact_mode(q: QReal, alphas) -> bool:
    return q.exact is not None and all((e := _exact(a)) is not None and e.denominator == 1 for a in alphas)


def doublesum_lattice(alpha_s, alpha_t, q, L: int, exact: bool | None = None):
    """``sum_{0<=m,n<=L} q**(m a + n b + m n) / ((q;q)_m (q;q)_n)``.

    Exact by default for rational q and integer a, b; ``exact=False`` forces mpfr.
    """
    q = _as_q(q)
    if L < 0:
        raise DomainError("L must be non-negative")
    exact = _exact_mode(q, (alpha_s, alpha_t)) and exact is not False
    with _context(q.dps):
        inv = _qq_factors(q, L, exact)
        us = _unary(q, alpha_s, L, exact, inv)
        ut = _unary(q, alpha_t, L, exact, inv)
        qe = q.exact if exact else q.value
        total = qe * 0
        qm = qe**0
        for m in range(L + 1):
            row = qe * 0
            cross = qe**0  # q**(m n)
            for n in range(L + 1):
                row += ut[n] * cross
                cross *= qm
            total += us[m] * row
            qm *= qe
        return total


def _check_convergent(q: QReal, alphas) -> None:
    for a in alphas:
        with _context(q.dps):
            if not _num(q.power(a), q.dps) < 1:
                raise DomainError(f"the level sum needs q^alpha < 1; alpha = {a} violates it")


def _adaptive_levels(evaluate, max_level, policy: TruncationPolicy, width: int, what: str):
    if max_level is not None:
        return evaluate(max_level), max_level
    L = policy.start_terms
    prev = evaluate(L)
    while True:
        nxt = 2 * L
        if (nxt + 1) ** width > policy.max_terms:
            raise TruncationError(f"{what} did not settle before {policy.max_terms} lattice points")
        cur = evaluate(nxt)
        if abs(cur - prev) <= policy.tolerance * abs(cur):
            return cur, nxt
        prev, L = cur, nxt


def amp_q_doublesum(alpha_s, alpha_t, q, max_level: int | None = None,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> AmplitudeResult:
    """Symmetric double-sum form ``(1-q)(q;q)_oo * doublesum_lattice``.

    With ``max_level=None`` the level doubles until two sums agree to the
    policy tolerance.
    """
    q = _as_q(q)
    q.require_unit_interval()
    _check_convergent(q, (alpha_s, alpha_t))
    s, L = _adaptive_levels(lambda L: doublesum_lattice(alpha_s, alpha_t, q, L, exact=False), max_level, policy, 2, "double sum")
    with _context(q.dps):
        value = _prefactor(q, policy) * s
    return AmplitudeResult(value, "classical_q_sum", {"q": str(q), "dps": q.dps, "max_level": L, "lattice_sum": render(s)})


# -- n-point ---------------------------------------------------------------


@dataclass(frozen=True)
class ChannelSet:
    n: int
    channels: tuple
    overlaps: tuple

    def __len__(self):
        return len(self.channels)


def _crosses(c, d) -> bool:
    (i, j), (k, l) = sorted((c, d))
    return i < k <= j < l


def channels(n: int) -> ChannelSet:
    """Planar channels ``{i..j}``, ``1 <= i < j < n`` without ``{1, n-1}``, and their overlapping pairs.

    Two channels overlap when their leg sets meet and neither contains the
    other, i.e. the intervals cross.
    """
    if isinstance(n, bool) or int(n) != n or n < 4:
        raise DomainError(f"n-point channels need n >= 4, got {n!r}")
    n = int(n)
    chans = tuple((i, j) for i in range(1, n) for j in range(i + 1, n) if (i, j) != (1, n - 1))
    overlaps = tuple((c, d) for c, d in itertools.combinations(chans, 2) if _crosses(c, d))
    return ChannelSet(n, chans, overlaps)


def _elimination_order(cs: ChannelSet) -> list:
    nbrs = {c: set() for c in cs.channels}
    for c, d in cs.overlaps:
        nbrs[c].add(d)
        nbrs[d].add(c)
    index = {c: i for i, c in enumerate(cs.channels)}
    order = []
    while nbrs:
        v = min(nbrs, key=lambda c: (len(nbrs[c]), index[c]))
        order.append(v)
        for a in nbrs[v]:
            nbrs[a].discard(v)
            nbrs[a].update(nbrs[v] - {a})
        del nbrs[v]
    return order


def npoint_lattice_sum(cs: ChannelSet, alphas: Mapping, q, L: int, exact: bool | None = None):
    """``sum over l_c in [0, L]`` of ``prod_c q**(l_c a_c)/(q;q)_{l_c} * prod_overlaps q**(l_c l_d)``.

    Evaluated by eliminating one channel index at a time (min-degree order,
    ties by channel order), which is the same finite sum regrouped.  Exact
    for rational q and integer alphas unless ``exact=False``.
    """
    q = _as_q(q)
    if L < 0:
        raise DomainError("L must be non-negative")
    exact = _exact_mode(q, alphas.values()) and exact is not False
    index = {c: i for i, c in enumerate(cs.channels)}
    with _context(q.dps):
        qe = q.exact if exact else q.value
        inv = _qq_factors(q, L, exact)
        cross = [[qe ** (a * b) for b in range(L + 1)] for a in range(L + 1)]
        factors = [((c,), {(l,): w for l, w in enumerate(_unary(q, alphas[c], L, exact, inv))}) for c in cs.channels]
        factors += [((c, d), {(a, b): cross[a][b] for a in range(L + 1) for b in range(L + 1)}) for c, d in cs.overlaps]
        zero = qe * 0
        for v in _elimination_order(cs):
            related = [f for f in factors if v in f[0]]
            factors = [f for f in factors if v not in f[0]]
            scope = sorted({c for s, _ in related for c in s if c != v}, key=index.__getitem__)
            table = {}
            for assign in itertools.product(range(L + 1), repeat=len(scope)):
                env = dict(zip(scope, assign))
                acc = zero
                for lv in range(L + 1):
                    env[v] = lv
                    term = qe**0
                    for s, t in related:
                        term *= t[tuple(env[c] for c in s)]
                    acc += term
                table[assign] = acc
            factors.append((tuple(scope), table))
        out = qe**0
        for _, t in factors:
            out *= t[()]
        return out


def _channel_key(key) -> tuple:
    if isinstance(key, str):
        parts = key.replace("(", "").replace(")", "").split(",")
        if len(parts) != 2:
            raise DomainError(f"channel key {key!r} is not 'i,j'")
        return int(parts[0]), int(parts[1])
    i, j = key
    return int(i), int(j)


def amp_n(alphas: Mapping, q, max_level: int | None = None, n: int | None = None,
          policy: TruncationPolicy = DEFAULT_POLICY) -> AmplitudeResult:
    """n-point amplitude ``[(1-q)(q;q)_oo]**(n-3) * npoint_lattice_sum``.

    ``alphas`` maps channel ``(i, j)`` (or ``"i,j"``) to its Regge value and
    must cover exactly the channels of ``channels(n)``.
    """
    alphas = {_channel_key(k): v for k, v in alphas.items()}
    if n is None:
        n = max(j for _, j in alphas) + 1 if alphas else 0
    cs = channels(n)
    if set(alphas) != set(cs.channels):
        missing = sorted(set(cs.channels) - set(alphas))
        extra = sorted(set(alphas) - set(cs.channels))
        raise DomainError(f"channel set mismatch for n={n}: missing {missing}, unexpected {extra}")
    q = _as_q(q)
    q.require_unit_interval()
    _check_convergent(q, alphas.values())
    s, L = _adaptive_levels(lambda L: npoint_lattice_sum(cs, alphas, q, L, exact=False), max_level, policy, 3, f"{n}-point sum")
    with _context(q.dps):
        value = _prefactor(q, policy) ** (n - 3) * s
    return AmplitudeResult(
        value,
        "n_point",
        {"n": n, "q": str(q), "dps": q.dps, "max_level": L, "channels": len(cs), "overlaps": len(cs.overlaps),
         "lattice_sum": render(s)},
    )


def npoint_from_json(data: Mapping) -> dict:
    """Parse ``{"n": int, "alphas": {"i,j": value}, "q": str, "max_level": int}``."""
    try:
        n = int(data["n"])
        alphas = {_channel_key(k): (str(v) if not isinstance(v, str) else v) for k, v in data["alphas"].items()}
        q = str(data["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad n-point input: {exc}") from exc
    max_level = data.get("max_level")
    return {"n": n, "alphas": alphas, "q": q, "max_level": None if max_level is None else int(max_level)}
