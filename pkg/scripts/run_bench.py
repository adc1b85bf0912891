"""1D vs 2D solver wall time as the virtual grid is refined.

    python scripts/run_bench.py --scales 1,1.5,2 --base-r 0.25
"""

import argparse

from ddest.bench import format_bench, run_bench


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scales", default="1,2")
    p.add_argument("--base-r", type=float, default=0.25)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()
    scales = [float(s) for s in args.scales.split(",")]
    print(format_bench(run_bench(scales, base_r=args.base_r, iterations=args.iterations, repeats=args.repeats)))


if __name__ == "__main__":
    main()
