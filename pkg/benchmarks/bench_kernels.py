"""Compare the compiled and numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times batched exponentials at the sizes the package produces (k = n + m
for transport steps, 3k for the metric's block-triangular exponentials),
the ordered product of a transport run, and one complete holonomy run.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from dualgrass import _backend
from dualgrass.holonomy import IntegratorConfig, transport
from dualgrass.matrix import Signature
from dualgrass.sampling import random_algebra_element, random_cone, rng_for
from dualgrass.surface import CurveSpec, SurfaceChart


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def expm_case(k, batch, backend):
    rng = rng_for(0, k)
    sig = Signature(max(1, k // 2), k - max(1, k // 2))
    A = np.stack([random_algebra_element(rng, sig, norm=rng.uniform(0.01, 2.0)) for _ in range(batch)])
    return lambda: _backend.expm_batch(A, backend=backend)


def product_case(backend, steps=4096):
    rng = rng_for(1)
    sig = Signature(2, 3)
    H = np.stack([random_algebra_element(rng, sig, norm=1e-3) for _ in range(steps)])
    H[:, :2, 2:] = 0
    H[:, 2:, :2] = 0
    F = _backend.expm_batch(H, backend="python")
    return lambda: _backend.ordered_product(F, 64, 2, backend=backend)


def transport_case(backend):
    chart = SurfaceChart.complex_surface(random_cone(rng_for(2), 3, 2, 2.0))
    curve = CurveSpec.circle(0.5)
    cfg = IntegratorConfig(steps=4096)
    return lambda: transport(chart, curve, cfg, backend=backend)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)

    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy kernels are available", file=sys.stderr)

    cases = [(f"expm k={k} x{b}", lambda be, k=k, b=b: expm_case(k, b, be), 3)
             for k, b in [(2, 4096), (5, 4096), (6, 2048), (12, 1024), (15, 512), (18, 256)]]
    cases.append(("ordered product 4096 x 5x5", product_case, 5))
    cases.append(("transport (2,3), 4096 steps", transport_case, 2))

    rows = []
    header = f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else "")
    print(header)
    for name, make, number in cases:
        t = {be: best(make(be), args.repeat, number) for be in backends}
        line = f"{name:32s}" + "".join(f"{t[be] * 1e3:10.3f}ms" for be in backends)
        if len(backends) > 1:
            line += f"{t['python'] / t['cython']:11.2f}x"
        print(line)
        rows.append({"case": name, "seconds": t})
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
