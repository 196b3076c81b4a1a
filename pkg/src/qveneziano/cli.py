"""``qveneziano`` command line: gamma values, amplitudes, resonance scans, verification.

Exit codes: 0 success, 1 domain error, 2 precision/truncation/cost failure or
a failed check, 3 usage error.  Output is assembled in memory and written
only on success, so error paths print nothing but the single error line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .amplitudes import (
    amp_n,
    amp_p,
    amp_pq,
    amp_q_doublesum,
    amp_q_ratio,
    kinematics_from_json,
    mandelstam,
    npoint_from_json,
    resonance_scan,
)
from .errors import DomainError, PrecisionError, QVenezianoError
from .gamma import GammaValue, gamma_p, gamma_pq
from .kernels import BACKEND
from .padic import PadicNumber, PadicQ, Prime, rational_reconstruction
from .qseries import TruncationPolicy, _as_q, gamma_q, render
from .verify import SUITES, VerifyConfig, run

EXIT_OK, EXIT_DOMAIN, EXIT_PRECISION, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output and limits")
    g.add_argument("--config", help="JSON file whose keys mirror the long flags (dashes as underscores)")
    g.add_argument("--format", choices=("text", "json", "csv"), default="text")
    g.add_argument("--json", action="store_true", help="shorthand for --format json")
    g.add_argument("--cost-ceiling", type=_positive, help="max product terms per Gamma evaluation "
                   "(default: $QVENEZIANO_COST_CEILING or 1e8)")
    g.add_argument("--dps", type=_positive, default=50, help="decimal digits for classical scalars")
    g.add_argument("--tolerance", type=float, default=1e-20, help="relative truncation tolerance")
    g.add_argument("--max-terms", type=_positive, default=10**6)


def build_parser() -> Parser:
    parser = Parser(prog="qveneziano", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)
    parser.commands = sub.choices

    g = sub.add_parser("gamma", help="Gamma_p, Gamma_{p,q} or classical Gamma_q at one argument")
    g.add_argument("--kind", choices=("p", "pq", "q"), required=True)
    g.add_argument("--x", required=True, help="integer, a/b, or canonical p-adic text")
    g.add_argument("--p", type=int)
    g.add_argument("--q", help="a/b for p-adic q, decimal for classical q")
    g.add_argument("--prec", type=_positive, default=8, help="p-adic digits")
    g.add_argument("--guard", type=_positive, default=2)
    _common(g)

    a = sub.add_parser("amp", help="four-point and n-point amplitudes")
    a.add_argument("--mode", choices=("padic", "pq", "q-ratio", "q-sum", "n-point"), required=True)
    a.add_argument("--p", type=int)
    a.add_argument("--q")
    a.add_argument("--alpha-s")
    a.add_argument("--alpha-t")
    a.add_argument("--slope", type=_rational, help="alpha' for kinematics input")
    a.add_argument("--input", help="JSON file: n-point schema, or kinematics schema for four-point modes")
    a.add_argument("--prec", type=_positive, default=8)
    a.add_argument("--levels", type=int, help="fixed truncation level L (default: adaptive)")
    _common(a)

    s = sub.add_parser("scan", help="classify integer channel values by the resonance criterion")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--from", dest="start", type=int, required=True)
    s.add_argument("--to", dest="stop", type=int, required=True)
    s.add_argument("--slope", type=_rational, help="treat the range as s values with alpha = 1 + slope*s")
    _common(s)

    v = sub.add_parser("verify", help="run identity and property suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--p", type=int)
    v.add_argument("--prec", type=_positive, default=6)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--samples", type=_positive, default=40)
    _common(v)
    return parser


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: Parser, argv: list[str]) -> argparse.Namespace:
    """Parse ``argv``; keys of a ``--config`` JSON file act as defaults that flags override."""
    command = next((t for t in argv if t in parser.commands), None)
    path = _config_path(argv)
    if command is not None and path:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        sub = parser.commands[command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            dest = {"from": "start", "to": "stop"}.get(dest, dest)
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {command}")
            action = known[dest]
            if action.type is not None and not isinstance(value, bool):
                try:
                    value = action.type(str(value))
                except argparse.ArgumentTypeError as exc:
                    raise UsageError(f"config key {key!r}: {exc}") from exc
            elif isinstance(value, (int, float)) and not isinstance(value, bool) and action.type is None \
                    and action.const is None:
                value = str(value)
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
            defaults[dest] = value
            action.required = False
        sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required: gamma, amp, scan or verify")
    return args


def _policy(args) -> TruncationPolicy:
    return TruncationPolicy(args.tolerance, args.max_terms)


def _fmt(args) -> str:
    return "json" if args.json else args.format


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required here")


def _prime(args) -> int:
    _need(args, "p")
    return int(Prime(args.p))


def _padic_q(text: str, p: int) -> PadicQ:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--q must be a rational a/b for p-adic modes, got {text!r}") from exc
    return PadicQ.from_rational(value, p)


def _zp_arg(text: str, p: int):
    text = text.strip()
    if "O(" in text:
        return PadicNumber.parse(text)
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not an integer, rational or p-adic literal: {text!r}") from exc
    return int(v) if v.denominator == 1 else v


def _signed_residue(x: PadicNumber) -> int | None:
    if x.is_zero_class or x.valuation < 0:
        return None
    m = x.p**x.abs_precision
    r = x.lift() % m
    return r - m if r > m // 2 else r


def _padic_json(x: PadicNumber) -> dict:
    out = {"value": x.to_json(), "text": str(x)}
    r = _signed_residue(x)
    if r is not None:
        out["residue"] = r
    return out


def _rational_hint(x: PadicNumber) -> str | None:
    try:
        return render(rational_reconstruction(x))
    except (PrecisionError, DomainError):
        return None


# -- commands ----------------------------------------------------------------


def cmd_gamma(args) -> tuple[list[str], int]:
    fmt = _fmt(args)
    if args.kind == "q":
        _need(args, "q")
        q = _as_q(args.q, args.dps)
        value = gamma_q(args.x.strip(), q, _policy(args))
        rec = {"kind": "q", "x": args.x, "q": str(q), "value": render(value, args.dps)}
        if fmt == "json":
            return [json.dumps(rec, sort_keys=True)], EXIT_OK
        if fmt == "csv":
            return _csv([rec], ["kind", "x", "q", "value"]), EXIT_OK
        return [rec["value"]], EXIT_OK

    p = _prime(args)
    x = _zp_arg(args.x, p)
    if args.kind == "p":
        gv = gamma_p(x, args.prec, p, guard=args.guard, ceiling=args.cost_ceiling)
        head = {"kind": "p", "p": p, "x": args.x}
    else:
        _need(args, "q")
        q = _padic_q(args.q, p)
        gv = gamma_pq(x, q, args.prec, guard=args.guard, ceiling=args.cost_ceiling)
        head = {"kind": "pq", "p": p, "q": args.q, "x": args.x}
    return _render_gamma(head, gv, fmt), EXIT_OK


def _render_gamma(head: dict, gv: GammaValue, fmt: str) -> list[str]:
    rec = {**head, **gv.to_json()}
    r = _signed_residue(gv.value)
    rec["residue"] = r
    if fmt == "json":
        return [json.dumps(rec, sort_keys=True)]
    if fmt == "csv":
        flat = {**head, "value": str(gv.value), "residue": r, "verified_digits": gv.verified_digits,
                "approximant_used": gv.approximant_used, "cost": gv.cost}
        return _csv([flat], list(flat))
    p, N = gv.value.p, gv.verified_digits
    return [str(gv.value), f"residue {r} mod {p}^{N}"]


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not valid JSON: {exc}") from exc


def cmd_amp(args) -> tuple[list[str], int]:
    policy = _policy(args)
    if args.mode == "n-point":
        _need(args, "input")
        spec = npoint_from_json(_read_json(args.input))
        q = _as_q(spec["q"] if args.q is None else args.q, args.dps)
        levels = args.levels if args.levels is not None else spec["max_level"]
        res = amp_n(spec["alphas"], q, levels, n=spec["n"], policy=policy)
    else:
        if args.input:
            data = _read_json(args.input)
            if args.slope is not None:
                data = {**data, "slope": str(args.slope)}
            kin = kinematics_from_json(data)
            m = mandelstam(kin)
            a_s, a_t = 1 + kin.slope * m.s, 1 + kin.slope * m.t
        else:
            _need(args, "alpha_s", "alpha_t")
            a_s, a_t = args.alpha_s, args.alpha_t
        if args.mode in ("padic", "pq"):
            p = _prime(args)
            if isinstance(a_s, str):
                a_s, a_t = _zp_arg(a_s, p), _zp_arg(a_t, p)
            if args.mode == "padic":
                res = amp_p(a_s, a_t, p, args.prec, ceiling=args.cost_ceiling)
            else:
                _need(args, "q")
                res = amp_pq(a_s, a_t, p, _padic_q(args.q, p), args.prec, ceiling=args.cost_ceiling)
        else:
            _need(args, "q")
            q = _as_q(args.q, args.dps)
            if args.mode == "q-ratio":
                res = amp_q_ratio(a_s, a_t, q, policy)
            else:
                res = amp_q_doublesum(a_s, a_t, q, args.levels, policy)
    rec = res.to_json()
    if isinstance(res.value, PadicNumber):
        rec.update({k: v for k, v in _padic_json(res.value).items() if k == "residue"})
        hint = _rational_hint(res.value)
        if hint is not None:
            rec["rational"] = hint
    else:
        rec["value"] = rec["text"] = render(res.value, args.dps)
    fmt = _fmt(args)
    if fmt == "json":
        return [json.dumps(rec, sort_keys=True)], EXIT_OK
    if fmt == "csv":
        flat = {"mode": rec["mode"], "value": rec["text"], "rational": rec.get("rational", "")}
        return _csv([flat], list(flat)), EXIT_OK
    lines = [rec["text"]]
    if "rational" in rec:
        lines.append(f"rational {rec['rational']}")
    return lines, EXIT_OK


def cmd_scan(args) -> tuple[list[str], int]:
    p = int(Prime(args.p))
    rows = []
    for v in range(args.start, args.stop + 1):
        a = 1 + args.slope * v if args.slope is not None else Fraction(v)
        if a.denominator != 1:
            rows.append({"s" if args.slope is not None else "alpha": v, "alpha": str(a), "flagged": False})
            continue
        (r,) = resonance_scan([int(a)], p)
        if args.slope is not None:
            r = {"s": v, **r}
        rows.append(r)
    fmt = _fmt(args)
    fields = (["s"] if args.slope is not None else []) + ["alpha", "flagged"]
    if fmt == "json":
        return [json.dumps({"p": p, "rows": rows}, sort_keys=True)], EXIT_OK
    if fmt == "csv":
        return _csv(rows, fields), EXIT_OK
    return [" ".join(str(r[f]) for f in fields) for r in rows], EXIT_OK


def cmd_verify(args) -> tuple[list[str], int]:
    cfg = VerifyConfig(p=args.p, precision=args.prec, seed=args.seed, samples=args.samples, tolerance=args.tolerance)
    checks = run(args.suite, cfg)
    failed = [c for c in checks if not c.passed]
    fmt = _fmt(args)
    lines = []
    if fmt == "json":
        lines = [json.dumps(c.to_json(), sort_keys=True) for c in checks]
        lines.append(json.dumps({"summary": {"suite": args.suite, "seed": args.seed, "checks": len(checks),
                                             "failed": len(failed), "status": "fail" if failed else "pass"}},
                                sort_keys=True))
    elif fmt == "csv":
        lines = _csv([{"check": c.check, "suite": c.inputs["suite"], "status": c.status,
                       "metric": json.dumps(c.metric, sort_keys=True)} for c in checks],
                     ["suite", "check", "status", "metric"])
    else:
        for c in checks:
            lines.append(f"{c.status.upper():4} {c.inputs['suite']}/{c.check} {json.dumps(c.metric, sort_keys=True)}")
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        c = failed[0]
        sys.stderr.write(f"error: check failed: {c.check} {json.dumps(c.counterexample, sort_keys=True)}\n")
        return lines, EXIT_PRECISION
    return lines, EXIT_OK


def _csv(rows, fields) -> list[str]:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue().splitlines()


COMMANDS = {"gamma": cmd_gamma, "amp": cmd_amp, "scan": cmd_scan, "verify": cmd_verify}


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        lines, code = COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"error: usage: {_one_line(exc)}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"error: domain: {_one_line(exc)}\n")
        return EXIT_DOMAIN
    except PrecisionError as exc:
        sys.stderr.write(f"error: precision: {_one_line(exc)}\n")
        return EXIT_PRECISION
    except QVenezianoError as exc:
        sys.stderr.write(f"error: domain: {_one_line(exc)}\n")
        return EXIT_DOMAIN
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: usage: {_one_line(exc)}\n")
        return EXIT_USAGE
    if lines:
        sys.stdout.write("\n".join(lines) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
