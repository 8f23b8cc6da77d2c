"""Rotation demo across target radii: powers needed and distances achieved."""

import argparse
import math

from gammadyn.certify import BFTarget, bf_counterexample_demo
from gammadyn.construction import target_entry
from gammadyn.errors import GammaDynError


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.02])
    ap.add_argument("--targets", type=int, default=5)
    ap.add_argument("--budget", type=int, default=2_000_000)
    a = ap.parse_args()
    theta = 2 * math.pi * (math.sqrt(5) - 1) / 2
    gammas = [1 + t / 100 for t in range(101)]
    targets = [BFTarget(1.5 * complex(math.cos(0.7 * i), math.sin(0.7 * i)), target_entry(2 * i + 1)[0])
               for i in range(a.targets)]
    print(f"{'eps':>6} {'pad':>4} {'max n':>8} {'max dist':>10} audit")
    for eps in a.eps:
        try:
            rep = bf_counterexample_demo(gammas, theta, targets, eps, a.budget)
        except GammaDynError as e:
            print(f"{eps:6.3f} {e.label}: {e}")
            continue
        print(f"{eps:6.3f} {rep.padding:4d} {max(e.n for e in rep.entries):8d} "
              f"{max(e.distance for e in rep.entries):10.4g} {'ok' if rep.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
