"""Build the three reference counterexamples and write bundles, reports and orbit CSVs."""

import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from gammadyn.certify import measure_orbit_errors, verify_conditions
from gammadyn.construction import BuildConfig, build_counterexample
from gammadyn.scalar_sets import ScalarSet


@dataclass
class RegimeRun:
    out_dir: str = "runs/regimes"
    finite_n: int = 200
    finite_k: int = 12
    sequence_n: int = 256
    sequence_k: int = 10
    seed: int = 0


def samples(cfg: RegimeRun) -> dict[str, tuple[ScalarSet, int]]:
    n = np.arange(1, cfg.finite_n + 1)
    finite = ScalarSet("finite", np.stack([np.ones(cfg.finite_n), 1 / n], axis=1))
    N = cfg.sequence_n
    rows = np.arange(N)
    zero = np.zeros((N, N + 1), dtype=complex)
    zero[:, 0] = 1
    zero[rows, rows + 1] = 1 / (rows + 1)
    inf = np.zeros((N, N + 1), dtype=complex)
    inf[:, 0] = rows + 1
    inf[rows, rows + 1] = 1
    return {"finite": (finite, cfg.finite_k),
            "sequence_to_zero": (ScalarSet("sequence", zero), cfg.sequence_k),
            "sequence_to_infinity": (ScalarSet("sequence", inf), cfg.sequence_k)}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, val in asdict(RegimeRun()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(val), default=val)
    cfg = RegimeRun(**vars(ap.parse_args()))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (S, K) in samples(cfg).items():
        t0 = time.perf_counter()
        b = build_counterexample(S, BuildConfig(K=K, seed=cfg.seed))
        built = time.perf_counter() - t0
        cond = verify_conditions(b)
        orbit = measure_orbit_errors(b)
        (out / f"{name}.bundle.json").write_text(json.dumps(b.to_json()))
        (out / f"{name}.orbit.csv").write_text(orbit.to_csv())
        (out / f"{name}.report.json").write_text(json.dumps(
            {"run": asdict(cfg), "conditions": cond.to_json(), "orbit": orbit.to_json()}, indent=1))
        print(f"{name:22s} build {built:6.2f}s  conditions {'ok' if cond.passed else 'FAIL'}  "
              f"orbit {'ok' if orbit.passed else 'FAIL'}  m_K={b.schedule.m[-1]}  "
              f"e_K={orbit.rows[-1].e_k:.3g}  b_K={orbit.rows[-1].b_k:.3g}")


if __name__ == "__main__":
    main()
