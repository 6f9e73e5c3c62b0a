"""Compare the numba and pure-numpy kernels, then time every moment family.

    python benchmarks/bench_backends.py [--grid 64] [--repeats 20]

Timings are machine-dependent.  The family timings use whichever backend is
active; run once normally and once with MOMENTS3D_DISABLE_NUMBA=1 to compare
end to end.
"""

import argparse

import numpy as np

from moments3d import backend_name
from moments3d.bench import bench_families, bench_kernels, format_kernel_report, format_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    print(f"# kernels, n={args.grid}")
    print(format_kernel_report(bench_kernels(n=args.grid, repeats=args.repeats)))

    c = (2.0 * np.arange(args.grid) - args.grid + 1) / args.grid
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    ball = (x * x + y * y + z * z <= 0.64).astype(np.float64)
    print(f"# families, backend={backend_name()}")
    print(format_report(bench_families(ball, repeats=args.repeats)))


if __name__ == "__main__":
    main()
