"""Jacobi verdicts for every structure of a model across a range of truncation depths.

    python3 scripts/jacobi_sweep.py [MODEL] [--min 2] [--max 8]

MODEL is a model file or a built-in name (default: sl3red).  A verdict that
flips as the depth grows points at a structure whose failure only shows up in
the non-local tail.
"""

import argparse
import sys
import time

from pvadirac.config import RunConfig
from pvadirac.model import parse_model
from pvadirac.pva import check_jacobi


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model", nargs="?", default="sl3red")
    ap.add_argument("--min", type=int, default=2, dest="lo")
    ap.add_argument("--max", type=int, default=8, dest="hi")
    args = ap.parse_args(argv)
    model = parse_model(args.model, RunConfig(depth_d=args.hi + 2))
    print("%-12s %6s %9s %8s  first failure" % ("structure", "depth", "triples", "seconds"))
    all_ok = True
    for name, S in model.structures.items():
        for K in range(args.lo, args.hi + 1):
            t0 = time.perf_counter()
            rep = check_jacobi(S, (K, K))
            dt = time.perf_counter() - t0
            good = sum(1 for l in rep.lines if l[1])
            fail = rep.failures()
            first = "%s %s" % (fail[0][0], fail[0][2]) if fail else ""
            print("%-12s %6d %4d/%-4d %8.2f  %s" % (name, K, good, len(rep.lines), dt, first))
            all_ok = all_ok and rep.passed
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
