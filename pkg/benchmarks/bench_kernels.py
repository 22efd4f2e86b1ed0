"""Compare the compiled and numpy grid kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from avprec.kernels import available_backends


def bench(repeat: int = 20):
    backends = available_backends()
    rows = []
    for dim, n1d in ((1, 2 ** 16 - 1), (2, 127), (2, 255), (2, 511)):
        n = n1d ** dim
        v = np.random.default_rng(0).standard_normal(n)
        nc = (n1d + 1) // 2 - 1
        vc = np.random.default_rng(1).standard_normal(nc ** dim)
        inv_h2 = float((n1d + 1) ** 2)
        for kernel in ("apply_stencil", "restrict", "prolong"):
            times = {}
            for name, mod in backends.items():
                if kernel == "apply_stencil":
                    fn = lambda: mod.apply_stencil(v, n1d, dim, inv_h2, 300.0)
                elif kernel == "restrict":
                    fn = lambda: mod.restrict(v, n1d, dim)
                else:
                    fn = lambda: mod.prolong(vc, nc, dim)
                times[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
            rows.append((dim, n1d, kernel, times))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    names = sorted(available_backends())
    print(f"{'dim':>3} {'n1d':>6} {'kernel':<14}" + "".join(f"{n + ' [ms]':>14}" for n in names) + f"{'speedup':>10}")
    for dim, n1d, kernel, t in bench(args.repeat):
        line = f"{dim:>3} {n1d:>6} {kernel:<14}" + "".join(f"{1e3 * t[n]:>14.3f}" for n in names)
        if "cython" in t:
            line += f"{t['python'] / t['cython']:>10.2f}"
        print(line)


if __name__ == "__main__":
    main()
