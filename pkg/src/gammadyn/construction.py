"""Target enumeration, inductive schedule and vector family.

Blocks are labelled so that block 0 always carries the pivot coordinate:
it uses the expansive profile W1 (pivot tending to 0) or the contractive
profile W2 (pivot tending to infinity); every other block uses V.

Condition ids are namespaced FIN.* for the finite-dimensional setting and
INF0.* / INF∞.* for the sequence-space setting in the two regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core_l2 import (DirectSumVec, SparseSeq, ZERO, ds_norm, ss_norm, ss_scale, ss_sum)
from .errors import (CoordinateExhausted, Coverable, MBudgetExceeded, PhaseBudgetExceeded)
from .scalar_sets import (BasisExtraction, Regime, ScalarSet, classify_cover, extract_basis)
from .shifts import (NU, OMEGA1, OMEGA2, V, W1, W2, NonHypercyclicityCertificate,
                     OperatorSpec, WeightProfile, apply_direct_sum, certify_not_hypercyclic,
                     power_apply)


@dataclass
class BuildConfig:
    K: int = 10
    m_cap: int = 4096
    phi_cap: int = 100_000
    margin: float = 1e-9
    seed: int = 0
    cover_tol: float = 1e-6
    cluster_limit: int = 32
    pivot_start: int = 16
    rejection_budget: int = 10_000

    def to_json(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, obj: dict) -> "BuildConfig":
        known = {k: obj[k] for k in cls.__dataclass_fields__ if k in obj}
        return cls(**known)


# ---------------------------------------------------------------- targets

GRID_STRIDE = (1 << 61) - 1  # prime, so it is coprime to every grid size
_GOLDEN = 0x9E3779B97F4A7C15


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


@dataclass
class TargetSequence:
    entries: list[DirectSumVec]
    degrees: list[int]
    n_blocks: int | None
    pivot_start: int

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, n: int) -> DirectSumVec:
        return self.entries[n]

    def active_blocks(self) -> int:
        return 1 + max((y.max_block() for y in self.entries), default=-1) if self.entries else 0

    def to_json(self) -> dict:
        return {"entries": [y.to_json() for y in self.entries], "degrees": self.degrees,
                "n_blocks": self.n_blocks, "pivot_start": self.pivot_start}

    @classmethod
    def from_json(cls, obj: dict) -> "TargetSequence":
        return cls([DirectSumVec.from_json(e) for e in obj["entries"]], list(obj["degrees"]),
                   obj.get("n_blocks"), obj.get("pivot_start", 0))


def _grid_element(level: int, blocks: int, rank: int) -> DirectSumVec:
    """Decode ``rank`` in mixed radix over the level's dyadic grid."""
    step_bits = level
    half = level << (step_bits - 1)  # |re|, |im| <= level/2 on the grid of step 2**-level
    side = 2 * half + 1
    positions = [(b, j) for b in range(blocks) for j in range(-(level - 1), level)]
    total = (side * side) ** len(positions)
    r = (rank * GRID_STRIDE + _GOLDEN * level) % total
    out: dict[int, dict[int, complex]] = {}
    for b, j in positions:
        r, digit = divmod(r, side * side)
        p, q = divmod(digit, side)
        # centre the digits so that digit 0 means coefficient 0
        p, q = (p + half) % side - half, (q + half) % side - half
        c = complex(math.ldexp(p, -step_bits), math.ldexp(q, -step_bits))
        if c != 0:
            out.setdefault(b, {})[j] = c
    return DirectSumVec((b, SparseSeq(d)) for b, d in out.items())


def target_entry(n: int, n_blocks: int | None = None, pivot_start: int = 0) -> DirectSumVec:
    """The ``n``-th target.

    ``y_0 = 0``.  For ``n >= 1`` the pair ``(a, c)`` unpairs ``n - 1``; level
    ``L = a + 1`` fixes blocks ``< L``, indices ``|j| < L`` and coefficients on
    the grid of step ``2**-L`` with real and imaginary parts in ``[-L/2, L/2]``.
    Every level is visited infinitely often and ``c`` runs through all grid
    points of that level, so the sequence is dense.  Block 0 stays empty
    for ``n < pivot_start``.
    """
    if n == 0:
        return DirectSumVec()
    a, c = cantor_unpair(n - 1)
    level = a + 1
    blocks = level if n_blocks is None else min(level, n_blocks)
    y = _grid_element(level, blocks, c)
    if n < pivot_start and 0 in y:
        y = DirectSumVec((b, s) for b, s in y.items() if b != 0)
    return y


def degree(entries: Sequence[DirectSumVec], finite: bool) -> int:
    d = 0
    for y in entries:
        for b, s in y.items():
            d = max(d, max(abs(j) for j in s))
            if not finite:
                d = max(d, b)
    return d


def gen_target_sequence(K: int, n_blocks: int | None = None, pivot_start: int = 0,
                        finite: bool = False) -> TargetSequence:
    if K < 0:
        raise ValueError("K must be >= 0")
    entries = [target_entry(n, n_blocks, pivot_start) for n in range(K + 1)]
    degrees = [degree(entries[: n + 1], finite) for n in range(K + 1)]
    return TargetSequence(entries, degrees, n_blocks, pivot_start)


# ---------------------------------------------------------------- conditions

@dataclass
class ConditionRecord:
    k: int
    cond: str
    block: int | None
    j: int | None
    lhs: float
    rhs: float
    relation: str  # "<" or "=="
    passed: bool
    margin: float

    def to_json(self) -> dict:
        return {"k": self.k, "cond": self.cond, "block": self.block, "j": self.j,
                "lhs": self.lhs, "rhs": self.rhs, "relation": self.relation,
                "passed": self.passed, "margin": self.margin}


def _prefix(mode: str, regime: Regime) -> str:
    if mode == "finite":
        return "FIN"
    return "INF0" if regime is Regime.TO_ZERO else "INF∞"


def pivot_profiles(regime: Regime) -> tuple[WeightProfile, WeightProfile]:
    return (W1, OMEGA1) if regime is Regime.TO_ZERO else (W2, OMEGA2)


def worsening(mode: str, regime: Regime) -> frozenset[str]:
    """Condition ids whose left side never decreases as ``m_k`` grows."""
    p = _prefix(mode, regime)
    if regime is Regime.TO_ZERO:
        return frozenset({f"{p}.vi"})
    return frozenset({f"{p}.ii", f"{p}.iv"})


def _lt(k, cond, block, j, lhs, rhs, margin) -> ConditionRecord:
    passed = bool(lhs < rhs - margin * abs(rhs))
    slack = (rhs - lhs) / abs(rhs) if rhs not in (0, math.inf) else math.inf
    return ConditionRecord(k, cond, block, j, float(lhs), float(rhs), "<", passed, float(slack))


def step_conditions(k: int, phi: Sequence[int], m: Sequence[int], coords: np.ndarray,
                    targets: Sequence[DirectSumVec], mode: str, regime: Regime,
                    blocks: int, margin: float = 1e-9) -> Iterator[ConditionRecord]:
    """All conditions of step ``k`` given ``phi[:k+1]`` and ``m[:k+1]``.

    Pivot conditions come first so a search can prune on them early.
    ``blocks`` is the number of blocks that can carry target mass.
    """
    p = _prefix(mode, regime)
    w, omega = pivot_profiles(regime)
    lam = coords[phi[k]]
    y_k = targets[k]
    rhs_k = math.ldexp(1.0, -k)
    mk = m[k]

    def rhs_i(i: int) -> float:
        return rhs_k if mode == "finite" else math.ldexp(1.0, -(k + i))

    # pivot block
    yield _lt(k, f"{p}.ii", 0, None, ss_norm(power_apply(omega, mk, y_k[0])) / abs(lam[0]), rhs_k, margin)
    for j in range(k):
        ratio = abs(coords[phi[j]][0] / lam[0])
        yield _lt(k, f"{p}.iv", 0, j, ratio * ss_norm(power_apply(omega, mk - m[j], y_k[0])), rhs_k, margin)
    for j in range(k):
        ratio = abs(lam[0] / coords[phi[j]][0])
        yield _lt(k, f"{p}.vi", 0, j, ratio * ss_norm(power_apply(w, mk - m[j], targets[j][0])), rhs_k, margin)
    # other blocks
    for i in range(1, blocks):
        yield _lt(k, f"{p}.i", i, None, ss_norm(power_apply(NU, mk, y_k[i])) / abs(lam[i]), rhs_k, margin)
    for i in range(1, blocks):
        for j in range(k):
            ratio = abs(coords[phi[j]][i] / lam[i])
            yield _lt(k, f"{p}.iii", i, j, ratio * ss_norm(power_apply(NU, mk - m[j], y_k[i])), rhs_i(i), margin)
    for i in range(1, blocks):
        for j in range(k):
            ratio = abs(lam[i] / coords[phi[j]][i])
            yield _lt(k, f"{p}.v", i, j, ratio * ss_norm(power_apply(V, mk - m[j], targets[j][i])), rhs_i(i), margin)
    if mode == "finite":
        return
    for i in range(1, blocks):
        v = abs(power_apply(NU, mk, y_k[i])[0])
        yield ConditionRecord(k, f"{p}.vii", i, None, v, 0.0, "==", v == 0, 0.0)
    v = abs(power_apply(omega, mk, y_k[0])[0])
    yield ConditionRecord(k, f"{p}.viii", 0, None, v, 0.0, "==", v == 0, 0.0)
    if k == 0:
        return  # the bounds 2^(m-1)/k are vacuous at k = 0
    bound = math.ldexp(1.0, mk - 1) / k if mk < 1000 else math.inf
    row_norm = float(np.linalg.norm(lam))
    if regime is Regime.TO_ZERO:
        yield _lt(k, f"{p}.ix", None, None, row_norm, bound, margin)
    else:
        yield _lt(k, f"{p}.ix", 0, None, abs(lam[0]), bound, margin)
        yield _lt(k, f"{p}.x", None, None, row_norm, bound, margin)


# ---------------------------------------------------------------- schedule

@dataclass
class Schedule:
    K: int
    phi: list[int]
    m: list[int]
    regime: Regime
    mode: str
    blocks: int
    margins: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"K": self.K, "phi": self.phi, "m": self.m, "regime": self.regime.value,
                "mode": self.mode, "blocks": self.blocks, "margins": self.margins}

    @classmethod
    def from_json(cls, obj: dict) -> "Schedule":
        return cls(int(obj["K"]), list(obj["phi"]), list(obj["m"]), Regime(obj["regime"]),
                   obj["mode"], int(obj["blocks"]), list(obj.get("margins", [])))


def _first_failure(records: Iterator[ConditionRecord]) -> tuple[ConditionRecord | None, float]:
    worst = math.inf
    for r in records:
        if not r.passed:
            return r, worst
        worst = min(worst, r.margin)
    return None, worst


def build_schedule(coords: np.ndarray, targets: Sequence[DirectSumVec], K: int, mode: str,
                   regime: Regime, m_cap: int = 4096, phi_cap: int = 100_000,
                   margin: float = 1e-9, blocks: int | None = None) -> Schedule:
    """Least admissible ``(phi(k), m_k)`` in lexicographic order at every step."""
    if len(targets) < K + 1:
        raise ValueError("need K+1 targets")
    if blocks is None:
        blocks = coords.shape[1]
    bad_m = worsening(mode, regime)
    rows = min(len(coords), phi_cap)
    phi: list[int] = []
    m: list[int] = []
    margins: list[float] = []
    for k in range(K + 1):
        found = False
        capped = False
        start_phi = phi[-1] + 1 if phi else 0
        start_m = m[-1] + 1 if m else 1
        for f in range(start_phi, rows):
            for mk in range(start_m, m_cap + 1):
                fail, worst = _first_failure(
                    step_conditions(k, phi + [f], m + [mk], coords, targets, mode, regime, blocks, margin))
                if fail is None:
                    phi.append(f)
                    m.append(mk)
                    margins.append(worst)
                    found = True
                    break
                if fail.cond in bad_m:
                    break
            else:
                capped = True
            if found:
                break
        if not found:
            if capped:
                raise MBudgetExceeded(f"step {k}: no admissible m <= {m_cap}")
            raise CoordinateExhausted(f"step {k}: no admissible coordinate index among {rows} rows")
    return Schedule(K, phi, m, regime, mode, blocks, margins)


# ---------------------------------------------------------------- family

@dataclass
class ConstructedFamily:
    z_tilde: list[DirectSumVec]
    norms: list[float]
    includes_e0: bool

    @property
    def z(self) -> list[DirectSumVec]:
        from .core_l2 import ds_scale
        # a truncated series can be empty when no target up to K touches its block
        return [ds_scale(1.0 / n, v) if n > 0 else v for v, n in zip(self.z_tilde, self.norms)]

    def to_json(self) -> dict:
        return {"z_tilde": [v.to_json() for v in self.z_tilde], "norms": self.norms,
                "includes_e0": self.includes_e0}

    @classmethod
    def from_json(cls, obj: dict) -> "ConstructedFamily":
        return cls([DirectSumVec.from_json(v) for v in obj["z_tilde"]], list(obj["norms"]),
                   bool(obj["includes_e0"]))


def family_block(b: int, schedule: Schedule, coords: np.ndarray,
                 targets: Sequence[DirectSumVec], includes_e0: bool) -> SparseSeq:
    """Truncated series for label ``b``: optional e_0 plus K+1 forward terms."""
    fwd = pivot_profiles(schedule.regime)[1] if b == 0 else NU
    terms = [SparseSeq.basis(0)] if includes_e0 else []
    for j in range(schedule.K + 1):
        y = targets[j][b]
        if not y.is_zero():
            terms.append(ss_scale(1.0 / coords[schedule.phi[j]][b], power_apply(fwd, schedule.m[j], y)))
    return ss_sum(terms)


def assemble_family(schedule: Schedule, coords: np.ndarray, targets: Sequence[DirectSumVec],
                    n_blocks: int | None = None, placement: Sequence[int] | None = None) -> ConstructedFamily:
    n_blocks = coords.shape[1] if n_blocks is None else n_blocks
    placement = list(range(n_blocks)) if placement is None else list(placement)
    e0 = schedule.mode != "finite"
    vecs, norms = [], []
    for b in range(n_blocks):
        s = family_block(b, schedule, coords, targets, e0)
        vecs.append(DirectSumVec({placement[b]: s}))
        norms.append(ss_norm(s))
    return ConstructedFamily(vecs, norms, e0)


@dataclass
class DiagonalNormalizer:
    entries: list[float]
    commutation_residual: float

    def to_json(self) -> dict:
        return {"entries": self.entries, "commutation_residual": self.commutation_residual}

    @classmethod
    def from_json(cls, obj: dict) -> "DiagonalNormalizer":
        return cls(list(obj["entries"]), float(obj["commutation_residual"]))


def diagonal_normalizer(family: ConstructedFamily, op: OperatorSpec | None = None,
                        checks: int = 50, seed: int = 0) -> DiagonalNormalizer:
    from .core_l2 import ds_scale, ds_sub
    from .shifts import random_dyadic_seq
    if any(n < 1 - 1e-12 for n in family.norms):
        raise ValueError("normalizer needs every norm >= 1")
    d = [1.0 / n for n in family.norms]
    if op is None:
        op = OperatorSpec("W1", "V", max(1, len(d)))
    rng = np.random.default_rng(seed)
    worst = 0.0
    nb = min(len(d), op.blocks)

    def D(X: DirectSumVec) -> DirectSumVec:
        return DirectSumVec((i, ss_scale(d[i], s)) for i, s in X.items())

    for _ in range(checks):
        X = DirectSumVec((int(i), random_dyadic_seq(rng)) for i in rng.integers(0, nb, size=3))
        diff = ds_sub(D(apply_direct_sum(op, X)), apply_direct_sum(op, D(X)))
        worst = max(worst, ds_norm(diff))
    return DiagonalNormalizer(d, worst)


# ---------------------------------------------------------------- pipeline

@dataclass
class CounterexampleBundle:
    scalar_set: ScalarSet
    extraction: BasisExtraction
    targets: TargetSequence
    schedule: Schedule
    family: ConstructedFamily
    operator: OperatorSpec
    certificate: NonHypercyclicityCertificate
    normalizer: DiagonalNormalizer | None
    placement: list[int]
    config: BuildConfig

    @property
    def mode(self) -> str:
        return self.schedule.mode

    def physical_target(self, k: int) -> DirectSumVec:
        y = self.targets[k]
        return DirectSumVec((self.placement[b], s) for b, s in y.items())

    def to_json(self) -> dict:
        return {"scalar_set": self.scalar_set.to_json(), "extraction": self.extraction.to_json(),
                "targets": self.targets.to_json(), "schedule": self.schedule.to_json(),
                "family": self.family.to_json(), "operator": self.operator.to_json(),
                "certificate": self.certificate.to_json(),
                "normalizer": None if self.normalizer is None else self.normalizer.to_json(),
                "placement": self.placement, "config": self.config.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "CounterexampleBundle":
        return cls(ScalarSet.from_json(obj["scalar_set"]), BasisExtraction.from_json(obj["extraction"]),
                   TargetSequence.from_json(obj["targets"]), Schedule.from_json(obj["schedule"]),
                   ConstructedFamily.from_json(obj["family"]), OperatorSpec.from_json(obj["operator"]),
                   NonHypercyclicityCertificate.from_json(obj["certificate"]),
                   None if obj.get("normalizer") is None else DiagonalNormalizer.from_json(obj["normalizer"]),
                   list(obj["placement"]),
                   BuildConfig.from_json(obj["config"]))


def build_counterexample(S: ScalarSet, config: BuildConfig | None = None) -> CounterexampleBundle:
    cfg = config or BuildConfig()
    report = classify_cover(S, cfg.cover_tol, cfg.cluster_limit)
    if report.coverable:
        raise Coverable(f"sample fits in {len(report.annuli)} vector annuli; refusing to build")
    if S.ambient == "finite":
        ext = extract_basis(S, seed=cfg.seed)
    else:
        ext = extract_basis(S, seed=cfg.seed, budget=cfg.rejection_budget)
    B = ext.n_blocks
    finite = ext.mode == "finite"
    targets = gen_target_sequence(cfg.K, B, cfg.pivot_start, finite=finite)
    mode = "finite" if finite else "infinite"
    sched = build_schedule(ext.coords, targets.entries, cfg.K, mode, ext.regime,
                           cfg.m_cap, cfg.phi_cap, cfg.margin, blocks=min(B, max(1, targets.active_blocks())))
    sched.blocks = B
    family = assemble_family(sched, ext.coords, targets.entries, B)
    op = OperatorSpec("W1" if ext.regime is Regime.TO_ZERO else "W2", "V", B)
    cert = certify_not_hypercyclic(op, seed=cfg.seed)
    norm = None if finite else diagonal_normalizer(family, op, seed=cfg.seed)
    return CounterexampleBundle(S, ext, targets, sched, family, op, cert, norm, list(range(B)), cfg)


# ---------------------------------------------------------------- single shift

def wrap_angle(x: float) -> float:
    """Representative of ``x`` modulo 2*pi in (-pi, pi]."""
    return math.remainder(x, 2 * math.pi)


@dataclass
class HypercyclicVector:
    x: SparseSeq
    m: list[int]
    phase_gaps: list[float]


def build_hypercyclic_vector(targets: Sequence[SparseSeq], K: int | None = None,
                             phase_goals: Sequence[float] | None = None, theta: float | None = None,
                             delta: float = 0.1, m_cap: int = 200_000,
                             margin: float = 1e-9,
                             free_steps: Sequence[bool] | None = None) -> HypercyclicVector:
    """``x = sum_k F^{m_k} y_k`` for the V-profile shift with unit scalars.

    With ``phase_goals`` each ``m_k`` also satisfies
    ``|theta*m_k - goal_k| < delta`` modulo 2*pi, except at steps flagged
    in ``free_steps``.
    """
    targets = list(targets)
    if K is None:
        K = len(targets) - 1
    if K < 0 or not targets:
        return HypercyclicVector(ZERO, [], [])
    if phase_goals is not None and theta is None:
        raise ValueError("phase goals need theta")
    coords = np.ones((K + 1, 1), dtype=complex)
    dsv = [DirectSumVec({1: t}) for t in targets[: K + 1]]
    m: list[int] = []
    gaps: list[float] = []
    for k in range(K + 1):
        mk = m[-1] + 1 if m else 1
        phi = list(range(k + 1))
        while True:
            if mk > m_cap:
                if phase_goals is not None:
                    raise PhaseBudgetExceeded(f"step {k}: phase window {delta} not met below m = {m_cap}")
                raise MBudgetExceeded(f"step {k}: no admissible m <= {m_cap}")
            gap = 0.0
            if phase_goals is not None and not (free_steps and free_steps[k]):
                gap = abs(wrap_angle(theta * mk - phase_goals[k]))
            if gap < delta:
                recs = step_conditions(k, phi, m + [mk], np.hstack([coords, coords]), dsv,
                                       "finite", Regime.TO_ZERO, 2, margin)
                fail, _ = _first_failure(r for r in recs if r.block != 0)
                if fail is None:
                    break
            mk += 1
        m.append(mk)
        gaps.append(gap)
    x = ss_sum(power_apply(NU, mk, t) for mk, t in zip(m, targets))
    return HypercyclicVector(x, m, gaps)
