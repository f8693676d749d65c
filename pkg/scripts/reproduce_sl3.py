"""Recompute every quantity of the sl3 minimal nilpotent example and print a report.

    python3 scripts/reproduce_sl3.py [--depth K] [--json]

Exit status is 0 when every line passes.
"""

import argparse
import json
import sys
import time

from pvadirac.config import RunConfig
from pvadirac.sl3 import reproduce


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=None, help="truncation depth for d, lambda, mu")
    ap.add_argument("--json", action="store_true", help="emit the report as JSON")
    args = ap.parse_args(argv)
    over = {}
    if args.depth is not None:
        over = dict(depth_d=args.depth, depth_lambda=args.depth, depth_mu=args.depth)
    cfg = RunConfig.from_env(**over)
    t0 = time.perf_counter()
    rep = reproduce(cfg)
    elapsed = time.perf_counter() - t0
    if args.json:
        doc = rep.as_dict()
        doc["seconds"] = round(elapsed, 2)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(rep.text())
        print("%d/%d checks passed in %.1fs"
              % (sum(1 for l in rep.lines if l[1]), len(rep.lines), elapsed))
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
