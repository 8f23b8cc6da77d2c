"""How the schedule, error bound and runtime grow with the horizon K."""

import argparse
import csv
import sys
import time
from dataclasses import dataclass

import numpy as np

from gammadyn.certify import measure_orbit_errors
from gammadyn.construction import BuildConfig, build_counterexample
from gammadyn.errors import GammaDynError
from gammadyn.scalar_sets import ScalarSet


@dataclass
class Sweep:
    k_max: int = 14
    n: int = 256
    regime: str = "zero"  # or "infinity"
    pivot_start: int = 16


def sample(cfg: Sweep) -> ScalarSet:
    rows = np.arange(cfg.n)
    X = np.zeros((cfg.n, cfg.n + 1), dtype=complex)
    X[:, 0] = 1 if cfg.regime == "zero" else rows + 1
    X[rows, rows + 1] = 1 / (rows + 1) if cfg.regime == "zero" else 1
    return ScalarSet("sequence", X)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=Sweep.k_max)
    ap.add_argument("--n", type=int, default=Sweep.n)
    ap.add_argument("--regime", choices=["zero", "infinity"], default=Sweep.regime)
    ap.add_argument("--pivot-start", type=int, default=Sweep.pivot_start)
    a = ap.parse_args()
    cfg = Sweep(a.k_max, a.n, a.regime, a.pivot_start)
    S = sample(cfg)
    w = csv.writer(sys.stdout)
    w.writerow(["K", "seconds", "m_K", "phi_K", "e_K", "b_K", "status"])
    for K in range(cfg.k_max + 1):
        t0 = time.perf_counter()
        try:
            b = build_counterexample(S, BuildConfig(K=K, pivot_start=cfg.pivot_start))
        except GammaDynError as e:
            w.writerow([K, f"{time.perf_counter() - t0:.3f}", "", "", "", "", e.label])
            continue
        last = measure_orbit_errors(b).rows[-1]
        w.writerow([K, f"{time.perf_counter() - t0:.3f}", b.schedule.m[-1], b.schedule.phi[-1],
                    f"{last.e_k:.4g}", f"{last.b_k:.4g}", "ok" if last.ok else "bound"])


if __name__ == "__main__":
    main()
