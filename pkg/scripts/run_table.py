"""Emit the benchmark table for the default problem suite.

Runs every suite problem with both kernels from the 11 protocol starts
and prints the worst-case table (markdown by default).  This is the
zero-argument reproduction of the shipped benchmark numbers; use the
`smoothncp bench` entry point for ad-hoc problem/kernel subsets.
"""

import argparse
import sys

from smoothncp import BenchRun, ProblemSpec, format_table, run_bench

SUITE = ("analytic2d", "ks", "monotone:10", "monotone:100", "hphard:20", "nash5")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--problems", nargs="*", default=list(SUITE))
    parser.add_argument("--theta", nargs="*", default=["rational", "exp"])
    parser.add_argument("--starts", type=int, default=11)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--format", choices=("md", "csv", "json"), default="md")
    parser.add_argument("--out", default=None)
    parser.add_argument("--verbose", action="store_true", help="append per-start detail rows")
    args = parser.parse_args(argv)

    run = BenchRun(
        problems=tuple(ProblemSpec.from_selector(p) for p in args.problems),
        kernels=tuple(args.theta),
        starts_per_problem=args.starts,
        rng_seed=args.seed,
        output_format=args.format,
        verbose=args.verbose,
    )
    rows, detail, ok = run_bench(run)
    text = format_table(rows, args.format, detail=detail if args.verbose else None)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
