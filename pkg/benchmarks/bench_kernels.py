"""Compare the numba kernels with their numpy fallbacks.

Each backend runs in its own subprocess because the backend is fixed at
import time by ``DEFZEROS_DISABLE_NUMBA``.  Both runs also report a checksum
so the two paths can be seen to agree.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, time
import numpy as np
from defzeros import _accel, kernels
from defzeros.poly import sample_kostlan

def best(fn, repeat):
    fn()  # warm-up (includes JIT compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out

repeat = int(__REPEAT__)
p = sample_kostlan(2, 64, seed=1).poly
rng = np.random.default_rng(0)
pts = rng.standard_normal((4096, 3))
vals = rng.standard_normal((257, 257))
pairs = rng.integers(0, 20000, size=(30000, 2))

res = {"backend": _accel.backend()}
t, v = best(lambda: kernels.poly_eval(p.exps, p.coeffs, pts), repeat)
res["poly_eval"] = [t, float(np.sum(v))]
t, v = best(lambda: kernels.poly_eval_grad(p.exps, p.coeffs, pts), repeat)
res["poly_eval_grad"] = [t, float(np.sum(v))]
t, v = best(lambda: kernels.marching_segments(vals), repeat)
res["marching_segments"] = [t, float(len(v[0]))]
t, v = best(lambda: kernels.connected_labels(20000, pairs), repeat)
res["connected_labels"] = [t, float(v[0])]
print(json.dumps(res))
"""


def run(disable, repeat):
    env = dict(os.environ)
    if disable:
        env["DEFZEROS_DISABLE_NUMBA"] = "1"
    else:
        env.pop("DEFZEROS_DISABLE_NUMBA", None)
    code = CHILD.replace("__REPEAT__", str(repeat))
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'kernel':<20}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}  checksums agree")
    for name in ("poly_eval", "poly_eval_grad", "marching_segments", "connected_labels"):
        tf, cf = fast[name]
        ts, cs = slow[name]
        agree = abs(cf - cs) <= 1e-9 * max(1.0, abs(cs))
        print(f"{name:<20}{tf * 1e3:>10.2f}ms{ts * 1e3:>10.2f}ms{ts / tf:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
