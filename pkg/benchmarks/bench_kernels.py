"""Time the compiled kernels against the numpy fallback on shared inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json]

Both backends run on the same multiplication tables and weight vectors and
their outputs are compared before any timing is reported.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from nctriples.groups import CyclicGroup, FreeAbelianGroup, enumerate_ball, full_ball, symmetric_group
from nctriples.kernels import _prep, get_backend


def cases():
    rng = np.random.default_rng(0)
    out = []
    for name, ball in [
        ("cyclic60", full_ball(CyclicGroup(60))),
        ("sym4", full_ball(symmetric_group(4))),
        ("z2_r6", enumerate_ball(FreeAbelianGroup(2), None, 6)),
    ]:
        mul, inv = ball.mul_table, ball.inverse_index
        # constant off the identity: left scans find no witness and run to the end
        w = np.full(len(ball), 2.0)
        w[0] = 0.0
        noisy = rng.integers(0, 5, len(ball)).astype(np.float64)
        noisy[0] = 0.0
        out.append((name, mul, inv, w, noisy))
    return out


def run(repeat: int):
    py, cy = get_backend("python"), get_backend("cython")
    rows = []
    for name, mul, inv, w, noisy in cases():
        args = _prep(mul, inv, w)
        nargs = _prep(mul, inv, noisy)
        jobs = {
            "translate_sup": lambda k: k.translate_sup(*nargs),
            "left_constancy": lambda k: k.left_constancy_witness(*args, 1e-12),
            "first_order": lambda k: k.first_order_witness(*args, 1e-12),
        }
        for kname, job in jobs.items():
            a, b = job(py), job(cy)
            if not np.array_equal(np.asarray(a), np.asarray(b)):
                raise SystemExit(f"backends disagree on {kname}/{name}: {a} vs {b}")
            t_py = min(timeit.repeat(lambda: job(py), number=1, repeat=repeat))
            t_cy = min(timeit.repeat(lambda: job(cy), number=1, repeat=repeat))
            rows.append(
                {"case": name, "size": len(mul), "kernel": kname,
                 "python_s": t_py, "cython_s": t_cy, "speedup": t_py / t_cy if t_cy else float("inf")}
            )
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--json", action="store_true")
    args = p.parse_args(argv)
    try:
        get_backend("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rows = run(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'case':<10} {'n':>5} {'kernel':<15} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for r in rows:
        print(f"{r['case']:<10} {r['size']:>5} {r['kernel']:<15} {r['python_s']:>11.5f} {r['cython_s']:>11.5f} {r['speedup']:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
