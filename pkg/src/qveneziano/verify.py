"""Property suites behind ``qveneziano verify``.

Every check yields ``{"check", "inputs", "status", "metric"}`` and, on a
failure, the first counterexample.  Suites are deterministic for a given
seed and emit checks in a fixed order.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import primerange

from . import amplitudes as amp
from .gamma import gamma_p, gamma_p_many, gamma_pq, gamma_pq_many, koblitz_product, morita_product
from .padic import PadicNumber, PadicQ, Prime, from_rational, q_power
from .qseries import (
    TruncationPolicy,
    nu_p,
    q_factorial,
    ratio_identity_finite,
    ratio_restricted,
    render,
    verify_q_binomial,
    verify_ratio_identity,
)

SUITES = ("recursions", "limits", "qbinomial", "ratio18", "npoint", "kinematics")


@dataclass
class Check:
    check: str
    inputs: dict
    status: str = "pass"
    metric: object = None
    counterexample: dict | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        out = {"check": self.check, "inputs": self.inputs, "status": self.status, "metric": self.metric}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass(frozen=True)
class VerifyConfig:
    p: int | None = None
    precision: int = 6
    seed: int = 42
    samples: int = 40
    tolerance: float = 1e-20
    primes: tuple = field(default=(3, 5, 7))

    def prime_list(self) -> list[int]:
        return [int(Prime(self.p))] if self.p is not None else list(self.primes)


def _random_zp(rng: random.Random, p: int, digits: int) -> PadicNumber:
    return from_rational(rng.randrange(1, p**digits), 1, p, digits)


def _fail(c: Check, **example) -> Check:
    c.status = "fail"
    if c.counterexample is None:
        c.counterexample = {k: str(v) for k, v in example.items()}
    return c


# -- recursions ------------------------------------------------------------


def _recursion(check: str, p: int, N: int, xs, values, factor) -> Check:
    c = Check(check, {"p": p, "precision": N, "samples": len(xs)})
    worst = N
    for x, gx, gx1 in zip(xs, values[0::2], values[1::2]):
        want = -gx.value if x.valuation > 0 else -factor(x) * gx.value
        got = gx1.value
        worst = min(worst, got.agreement_digits(want) if not got.agrees_with(want, N) else N)
        if not got.agrees_with(want, N):
            _fail(c, x=x, lhs=got, rhs=want)
    c.metric = {"min_agreeing_digits": worst}
    return c


def suite_recursions(cfg: VerifyConfig) -> list[Check]:
    out = []
    N = cfg.precision
    for p in cfg.prime_list():
        rng = random.Random(f"recursions:{cfg.seed}:{p}")
        xs = [_random_zp(rng, p, N + 12) for _ in range(cfg.samples)]
        args = [a for x in xs for a in (x, x + 1)]
        out.append(_recursion("gamma_p_recursion", p, N, xs, gamma_p_many(args, N, p), lambda x: x))
        one = gamma_p(1, N, p).value
        c = Check("gamma_p_at_one", {"p": p, "precision": N}, metric=str(one))
        out.append(c if one == -1 else _fail(c, value=one))
        for q_raw in (1 + p, 1 + p * p):
            q = PadicQ.from_rational(q_raw, p)
            e = q.delta_valuation

            def qint(x, q=q, e=e):
                return (1 - q_power(q, x, N + e)) / (1 - q.padic(N + e))

            c = _recursion("gamma_pq_recursion", p, N, xs, gamma_pq_many(args, q, N), qint)
            c.inputs["q"] = str(q)
            out.append(c)
            one = gamma_pq(1, q, N).value
            c = Check("gamma_pq_at_one", {"p": p, "q": str(q), "precision": N}, metric=str(one))
            out.append(c if one == -1 else _fail(c, value=one))
    return out


# -- limits ----------------------------------------------------------------


def _fixed_argument(p: int) -> Fraction:
    return Fraction(1, 3) if p == 2 else Fraction(-1, 2)


def suite_limits(cfg: VerifyConfig, restricted_levels: int = 3) -> list[Check]:
    out = []
    N = cfg.precision
    primes = [p for p in cfg.prime_list()] if cfg.p is not None else [3, 5]
    for p in primes:
        x = _fixed_argument(p)
        base = gamma_p(x, N, p).value
        vals = []
        for k in range(1, 7):
            g = gamma_pq(x, PadicQ.from_rational(1 + p**k, p), N).value
            vals.append(min((g - base).valuation, N) if not (g - base).is_zero_class else N)
        c = Check("gamma_pq_q_to_one", {"p": p, "x": str(x), "precision": N, "k": [1, 6]}, metric=vals)
        if any(b < a for a, b in zip(vals, vals[1:])) or vals[-1] < min(3, N):
            _fail(c, valuations=vals)
        out.append(c)

    bad = None
    count = 0
    for n in range(1, 13):
        for p in primerange(max(n - 1, 1) + 1, 102):
            count += 1
            if morita_product(n - 1, p) != (-1) ** n * math.factorial(n - 1):
                bad = bad or {"n": n, "p": p}
            if koblitz_product(n - 1, Fraction(1, 2), p) != (-1) ** n * q_factorial(n - 1, Fraction(1, 2)):
                bad = bad or {"n": n, "p": p, "q": "1/2"}
    c = Check("large_p_integer_values", {"n": [1, 12], "p_max": 101}, metric={"cases": count})
    out.append(c if bad is None else _fail(c, **bad))

    n, p, z = 5, 3, Fraction(2, 5)
    target = (1 - z) ** (-n + nu_p(n, p))
    errs = []
    policy = TruncationPolicy(1e-12, 10**7)
    for k in range(1, restricted_levels + 1):
        q = 1 - Fraction(1, 10**k)
        errs.append(abs(ratio_restricted(n, z, q, p, policy) - target))
    c = Check(
        "restricted_ratio_error_decreasing",
        {"n": n, "p": p, "z": str(z), "k": [1, restricted_levels]},
        metric=[render(e, 8) for e in errs],
    )
    out.append(c if all(b < a for a, b in zip(errs, errs[1:])) else _fail(c, errors=[render(e, 8) for e in errs]))
    return out


# -- classical identities --------------------------------------------------


def suite_qbinomial(cfg: VerifyConfig) -> list[Check]:
    c = Check("q_binomial", {"grid": "alpha x z x q = 3x3x3", "tolerance": 1e-18})
    policy = TruncationPolicy(min(cfg.tolerance, 1e-22))
    worst = 0
    for a, z, q in itertools.product(("0.5", "1.5", "3"), ("0.1", "0.3", "0.6"), ("0.2", "0.5", "0.8")):
        r = verify_q_binomial(a, z, q, policy)
        worst = max(worst, float(r.rel_diff))
        if not r.rel_diff < 1e-18:
            _fail(c, alpha=a, z=z, q=q, rel_diff=render(r.rel_diff, 6))
    c.metric = {"max_rel_diff": f"{worst:.3e}"}
    return [c]


def suite_ratio18(cfg: VerifyConfig, finite_n: int = 50) -> list[Check]:
    c = Check("ratio_of_ratios", {"p": [2, 3, 5], "q": ["0.3", "0.7"], "z": ["0.2", "0.5"], "alpha": ["0.5", "2"]})
    policy = TruncationPolicy(min(cfg.tolerance, 1e-22))
    worst = 0
    for p, q, z, a in itertools.product((2, 3, 5), ("0.3", "0.7"), ("0.2", "0.5"), ("0.5", "2")):
        r = verify_ratio_identity(a, z, q, p, policy)
        worst = max(worst, float(r.abs_diff))
        if not r.abs_diff < 1e-15:
            _fail(c, p=p, q=q, z=z, alpha=a, abs_diff=render(r.abs_diff, 6))
    c.metric = {"max_abs_diff": f"{worst:.3e}"}
    f = Check("ratio_of_ratios_finite", {"alpha": 2, "z": "1/5", "q": "1/3", "p": [2, 3, 5], "n": [1, finite_n]})
    for p in (2, 3, 5):
        for n in range(1, finite_n + 1):
            lhs, rhs = ratio_identity_finite(2, Fraction(1, 5), Fraction(1, 3), p, n)
            if lhs != rhs:
                _fail(f, p=p, n=n, lhs=lhs, rhs=rhs)
    f.metric = {"cases": 3 * finite_n}
    return [c, f]


def suite_npoint(cfg: VerifyConfig, max_level: int = 32) -> list[Check]:
    out = []
    c = Check("channel_counts", {"n": [4, 12]})
    for n in range(4, 13):
        cs = amp.channels(n)
        legs = {ch: set(range(ch[0], ch[1] + 1)) for ch in cs.channels}
        brute = {
            (a, b)
            for a, b in itertools.combinations(cs.channels, 2)
            if legs[a] & legs[b] and not legs[a] <= legs[b] and not legs[b] <= legs[a]
        }
        if len(cs) != n * (n - 3) // 2 or set(cs.overlaps) != brute:
            _fail(c, n=n, channels=len(cs), overlaps=len(cs.overlaps), expected=len(brute))
    out.append(c)

    q = Fraction(2, 5)
    cs4 = amp.channels(4)
    r = Check("npoint_reduces_to_double_sum", {"q": "2/5", "alpha_s": 2, "alpha_t": 3, "L": [0, max_level]})
    for L in range(max_level + 1):
        a = amp.npoint_lattice_sum(cs4, {(1, 2): 2, (2, 3): 3}, q, L)
        b = amp.doublesum_lattice(2, 3, q, L)
        if not (isinstance(a, Fraction) and a == b):
            _fail(r, L=L, npoint=a, double_sum=b)
    r.metric = {"levels": max_level + 1, "exact": True}
    out.append(r)

    cs5 = amp.channels(5)
    alphas = {ch: 2 for ch in cs5.channels}
    s = Check("npoint_doubling_stable", {"n": 5, "q": "0.4", "alpha": 2, "L": [6, 12, 24, 48]})
    vals = [amp.npoint_lattice_sum(cs5, alphas, "0.4", L, exact=False) for L in (6, 12, 24, 48)]
    rels = [float(abs(b - a) / abs(b)) for a, b in zip(vals, vals[1:])]
    s.metric = {"rel_changes": [f"{x:.3e}" for x in rels]}
    out.append(s if rels[-1] < 1e-10 else _fail(s, rel_changes=rels))

    d = Check("four_point_dual_forms", {"alpha_s": ["0.5", "1.5", "3"], "alpha_t": ["0.5", "2", "3.5"], "q": ["0.2", "0.5", "0.7"]})
    worst = 0
    policy = TruncationPolicy(max(cfg.tolerance, 1e-16))
    for a, b, qq in itertools.product(("0.5", "1.5", "3"), ("0.5", "2", "3.5"), ("0.2", "0.5", "0.7")):
        x = amp.amp_q_ratio(a, b, qq, policy).value
        y = amp.amp_q_doublesum(a, b, qq, policy=policy).value
        rel = float(abs(x - y) / abs(x))
        worst = max(worst, rel)
        if not rel < 1e-12:
            _fail(d, alpha_s=a, alpha_t=b, q=qq, rel=rel)
    d.metric = {"max_rel_diff": f"{worst:.3e}"}
    out.append(d)
    return out


def suite_kinematics(cfg: VerifyConfig, count: int = 500) -> list[Check]:
    rng = random.Random(f"kinematics:{cfg.seed}")
    c = Check("mandelstam_sum", {"d": 4, "sets": count, "seed": cfg.seed})
    for _ in range(count):
        kin = amp.random_on_shell_kinematics(rng)
        m = amp.mandelstam(kin)
        if m.s + m.t + m.u != 8:
            _fail(c, momenta=kin.momenta, total=m.s + m.t + m.u)
    c.metric = {"value": 8}
    return [c]


RUNNERS = {
    "recursions": suite_recursions,
    "limits": suite_limits,
    "qbinomial": suite_qbinomial,
    "ratio18": suite_ratio18,
    "npoint": suite_npoint,
    "kinematics": suite_kinematics,
}


def run(suite: str, cfg: VerifyConfig) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        for c in RUNNERS[name](cfg):
            c.inputs = {"suite": name, **c.inputs}
            out.append(c)
    return out
