"""Time the compiled and pure-Python prefix-product sweeps on the same inputs.

    python benchmarks/bench_kernels.py --p 7 --digits 8 --repeat 3
"""

import argparse
import json
import time

from qveneziano.kernels import available_backends, qint_prefix_products, unit_prefix_products


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=7)
    ap.add_argument("--digits", type=int, default=8, help="sweep to 2*p**digits terms modulo p**(digits-2)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    p, k = args.p, args.digits
    modulus = p ** max(k - 2, 1)
    checkpoints = [p**k, 2 * p**k]
    q = 1 + p
    rows = []
    results = {}
    for backend in available_backends():
        for name, fn in (
            ("unit", lambda b=backend: unit_prefix_products(p, modulus, checkpoints, backend=b)),
            ("qint", lambda b=backend: qint_prefix_products(p, q, modulus, checkpoints, backend=b)),
        ):
            sec, out = timed(fn, args.repeat)
            results.setdefault(name, set()).add(tuple(out))
            rows.append({"kernel": name, "backend": backend, "terms": checkpoints[-1], "seconds": round(sec, 4)})
    agree = all(len(v) == 1 for v in results.values())
    if args.json:
        print(json.dumps({"rows": rows, "backends_agree": agree}))
        return
    for r in rows:
        print(f"{r['kernel']:5} {r['backend']:7} {r['terms']:>12} terms  {r['seconds']:.4f} s")
    base = {r["kernel"]: r["seconds"] for r in rows if r["backend"] == "python"}
    for r in rows:
        if r["backend"] == "cython" and r["kernel"] in base:
            print(f"{r['kernel']}: compiled is {base[r['kernel']] / r['seconds']:.1f}x faster")
    print("backends agree" if agree else "BACKENDS DISAGREE")


if __name__ == "__main__":
    main()
