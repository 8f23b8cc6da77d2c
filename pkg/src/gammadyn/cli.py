"""Command-line front end.

Exit codes::

    0   success (classify: coverable)
    1   invalid input, missing file, malformed JSON
    2   construct refused: the sample is coverable
    3   construct infeasible within the configured caps
    4   verify/orbit/bf-demo found a violated condition or bound
    10  classify: not coverable
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .certify import (BFTarget, bf_counterexample_demo, measure_orbit_errors,
                      verify_conditions)
from .construction import BuildConfig, CounterexampleBundle, build_counterexample, target_entry
from .core_l2 import SparseSeq
from .errors import (AllZero, CoordinateExhausted, Coverable, ExtractionFailed, GammaDynError,
                     MBudgetExceeded, PhaseBudgetExceeded, PreconditionViolated, TargetUnreachable)
from .scalar_sets import ScalarSet, classify_cover

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COVERABLE = 2
EXIT_INFEASIBLE = 3
EXIT_VIOLATION = 4
EXIT_NOT_COVERABLE = 10


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    output: Path | None = None
    build: BuildConfig = field(default_factory=BuildConfig)
    extra: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        b = self.build
        for name in ("m_cap", "phi_cap", "rejection_budget"):
            if getattr(b, name) <= 0:
                raise InputError(f"{name} must be positive")
        if b.K < 0:
            raise InputError("K must be >= 0")


def _load_json(path: Path | None) -> dict:
    if path is None:
        raise InputError("--input is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e})") from None


def _emit(obj: dict | str, path: Path | None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=2)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _workers() -> int:
    raw = os.environ.get("GAMMADYN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"GAMMADYN_THREADS must be an integer, got {raw!r}") from None


def _scalar_set(cfg: RunConfig) -> ScalarSet:
    try:
        return ScalarSet.from_json(_load_json(cfg.input))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid scalar set: {e}") from None


def _bundle(cfg: RunConfig) -> CounterexampleBundle:
    try:
        return CounterexampleBundle.from_json(_load_json(cfg.input))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid bundle: {e}") from None


def cmd_classify(cfg: RunConfig) -> int:
    S = _scalar_set(cfg)
    try:
        rep = classify_cover(S, cfg.build.cover_tol, cfg.build.cluster_limit)
    except AllZero as e:
        raise InputError(str(e)) from None
    out = rep.to_json()
    out["seed"] = cfg.build.seed
    _emit(out, cfg.output)
    return EXIT_OK if rep.coverable else EXIT_NOT_COVERABLE


def cmd_construct(cfg: RunConfig) -> int:
    S = _scalar_set(cfg)
    try:
        bundle = build_counterexample(S, cfg.build)
    except Coverable as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_COVERABLE
    except (MBudgetExceeded, CoordinateExhausted, ExtractionFailed) as e:
        print(f"infeasible ({e.label}): {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AllZero as e:
        raise InputError(str(e)) from None
    _emit(bundle.to_json(), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    bundle = _bundle(cfg)
    margin = cfg.extra.get("margin")
    cond = verify_conditions(bundle, margin, workers=cfg.workers)
    orbit = measure_orbit_errors(bundle)
    out = {"seed": bundle.config.seed, "passed": cond.passed and orbit.passed,
           "conditions": cond.to_json(), "orbit": orbit.to_json()}
    _emit(out, cfg.output)
    return EXIT_OK if out["passed"] else EXIT_VIOLATION


def cmd_orbit(cfg: RunConfig) -> int:
    bundle = _bundle(cfg)
    rep = measure_orbit_errors(bundle)
    _emit(f"# seed={bundle.config.seed}\n" + rep.to_csv(), cfg.output)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def default_bf_setup() -> dict:
    """Golden-ratio rotation, moduli 1..2 and five targets of modulus 1.5."""
    return {"theta": 2 * math.pi * (math.sqrt(5) - 1) / 2,
            "gammas": [[1 + t / 100, 0.0] for t in range(101)],
            "eps": 0.1, "budget": 200_000, "lambda": [1.0, 0.0],
            "targets": [{"scalar": [1.5 * math.cos(a), 1.5 * math.sin(a)], "enumeration_index": n}
                        for a, n in zip([0.3, 1.0, 2.0, -1.0, 3.0], [2, 3, 5, 7, 9])]}


def _bf_targets(raw: list[dict]) -> list[BFTarget]:
    out = []
    for t in raw:
        a = complex(*t["scalar"])
        if "y" in t:
            y = SparseSeq.from_json(t["y"])
        else:
            y = target_entry(int(t["enumeration_index"]))[0]
        out.append(BFTarget(a, y))
    return out


def cmd_bf_demo(cfg: RunConfig) -> int:
    setup = default_bf_setup()
    if cfg.input is not None:
        setup.update(_load_json(cfg.input))
    if "eps" in cfg.extra:
        setup["eps"] = cfg.extra["eps"]
    try:
        rep = bf_counterexample_demo([complex(*g) for g in setup["gammas"]], float(setup["theta"]),
                                     _bf_targets(setup["targets"]), float(setup["eps"]),
                                     int(setup["budget"]), complex(*setup["lambda"]))
    except (PreconditionViolated, TargetUnreachable) as e:
        raise InputError(f"{e.label}: {e}") from None
    except (PhaseBudgetExceeded, MBudgetExceeded) as e:
        print(f"infeasible ({e.label}): {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid demo setup: {e}") from None
    out = rep.to_json()
    out["seed"] = cfg.build.seed
    _emit(out, cfg.output)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


COMMANDS = {"classify": cmd_classify, "construct": cmd_construct, "verify": cmd_verify,
            "orbit": cmd_orbit, "bf-demo": cmd_bf_demo}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gammadyn", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--input", type=Path, help="scalar set, bundle or demo setup JSON")
    ap.add_argument("--output", type=Path, help="output file (default: stdout)")
    ap.add_argument("--config", type=Path, help="JSON build config (K, m_cap, phi_cap, margin, seed, ...)")
    ap.add_argument("--k", type=int, help="number of schedule steps K")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol", type=float, help="coverability tolerance")
    ap.add_argument("--margin", type=float, help="relative margin for strict inequalities")
    ap.add_argument("--eps", type=float, help="bf-demo target radius")
    return ap


def make_config(args: argparse.Namespace) -> RunConfig:
    raw = _load_json(args.config) if args.config else {}
    build = BuildConfig.from_json(raw)
    if args.k is not None:
        build.K = args.k
    if args.seed is not None:
        build.seed = args.seed
    if args.tol is not None:
        build.cover_tol = args.tol
    if args.margin is not None:
        build.margin = args.margin
    extra = {}
    if args.margin is not None:
        extra["margin"] = args.margin
    if args.eps is not None:
        extra["eps"] = args.eps
    return RunConfig(args.command, args.input, args.output, build, extra, _workers())


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except GammaDynError as e:
        print(f"error ({e.label}): {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
