"""Time the numba kernels against the numpy fallback.

Each backend runs in its own interpreter (the choice is made at import).
A warm-up call excludes JIT compilation from the timings.

    python3 benchmarks/bench_backends.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from unruh_lab._backend import BACKEND
from unruh_lab.faddeeva import faddeeva
from unruh_lab.oscillatory import Regularization, oracle_quadrature, spectrum_scan
from unruh_lab.trajectory import make_piecewise_alpha
from unruh_lab.transparency import demo_spec, scan_grid
from unruh_lab.unruh import UnruhSpec, kms_ratio

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
z = rng.normal(size=200_000) * 6 + 1j * np.abs(rng.normal(size=200_000)) * 6
pf = make_piecewise_alpha(1.0, 0.5, 2.0, 5.0, 10.0)
reg = Regularization.adiabatic(1e-3)
omegas = np.linspace(0.05, 3.0, 20_000)
spec = demo_spec(omega=1.7, grid=(128, 128))
ureg = Regularization.adiabatic(0.05)

cases = {
    "faddeeva 200k points": lambda: faddeeva(z),
    "spectrum 20k gaps": lambda: spectrum_scan(pf, omegas, reg),
    "transparency grid 128x128": lambda: scan_grid(spec),
    "oracle quadrature x10": lambda: [oracle_quadrature(pf, w, -1, ureg) for w in np.linspace(0.5, 5, 10)],
    "unruh amplitude pair": lambda: kms_ratio(UnruhSpec(), 1.0, check=False),
}
out = {}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps({"backend": BACKEND, "timings": out}))
"""


def run(backend, repeat):
    env = dict(os.environ, UNRUH_LAB_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])["timings"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    nb = run("numba", args.repeat)
    npy = run("numpy", args.repeat)
    print(f"{'case':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>9}")
    for name in nb:
        print(f"{name:<28}{1e3 * nb[name]:>12.2f}{1e3 * npy[name]:>12.2f}{npy[name] / nb[name]:>8.1f}x")


if __name__ == "__main__":
    main()
