"""Independent re-verification of bundles and the rotation demo.

Nothing stored in a bundle's margin fields is trusted: conditions are
recomputed from the raw sample, basis, targets and schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .construction import (ConditionRecord, CounterexampleBundle, HypercyclicVector,
                           assemble_family, build_hypercyclic_vector, gen_target_sequence,
                           step_conditions, wrap_angle)
from .core_l2 import (DirectSumVec, SparseSeq, ds_norm, ds_sub, ss_add, ss_norm, ss_scale,
                      ss_sum)
from .errors import (BoundViolated, NotASymmetry, PrecisionExhausted, PreconditionViolated,
                     ReportFailure, TargetUnreachable)
from .scalar_sets import Regime
from .shifts import V, OperatorSpec, apply_direct_sum, power_apply


# ---------------------------------------------------------------- conditions

@dataclass
class ConditionReport:
    records: list[ConditionRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def first_failure(self) -> ConditionRecord | None:
        return next((r for r in self.records if not r.passed), None)

    def verdicts(self) -> list[tuple[int, str, int | None, int | None, bool]]:
        return [(r.k, r.cond, r.block, r.j, r.passed) for r in self.records]

    def by_condition(self) -> dict[str, tuple[int, int]]:
        """cond id -> (passed, total)."""
        out: dict[str, list[int]] = {}
        for r in self.records:
            c = out.setdefault(r.cond, [0, 0])
            c[0] += r.passed
            c[1] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}

    def raise_on_failure(self) -> None:
        f = self.first_failure()
        if f is not None:
            raise ReportFailure(f"{f.cond} failed at k={f.k} block={f.block} j={f.j}: "
                                f"lhs={f.lhs:.6g} rhs={f.rhs:.6g}")

    def to_json(self) -> dict:
        f = self.first_failure()
        return {"passed": self.passed, "count": len(self.records),
                "first_failure": None if f is None else f.to_json(),
                "summary": {k: {"passed": p, "total": t} for k, (p, t) in self.by_condition().items()},
                "records": [r.to_json() for r in self.records]}


def _structural(k: int, name: str, ok: bool, lhs: float = 0.0, rhs: float = 0.0,
                block: int | None = None) -> ConditionRecord:
    return ConditionRecord(k, f"STRUCT.{name}", block, None, float(lhs), float(rhs), "<=", bool(ok), 0.0)


def _target_invariants(bundle: CounterexampleBundle) -> list[ConditionRecord]:
    out = []
    finite = bundle.mode == "finite"
    tg = bundle.targets
    for n, y in enumerate(tg.entries):
        ok = True
        for b, s in y.items():
            if not finite and b >= n:
                ok = False
            if any(abs(j) >= n for j in s) or any(abs(c) > n for c in s.values()):
                ok = False
        if n < len(tg.degrees) and tg.degrees[n] > n:
            ok = False
        out.append(_structural(n, "TARGETS", ok))
    fresh = gen_target_sequence(len(tg.entries) - 1, tg.n_blocks, tg.pivot_start, finite=finite)
    out.append(_structural(len(tg.entries) - 1, "TARGET_GEN", fresh.entries == tg.entries))
    return out


def verify_conditions(bundle: CounterexampleBundle, margin: float | None = None,
                      workers: int = 1) -> ConditionReport:
    """Recompute every schedule condition plus structural consistency checks.

    Structural checks: ``MONO`` (phi and m strictly increasing, m_0 >= 1),
    ``COORD`` (stored coordinates equal the projections of the raw samples),
    ``FAMILY`` (stored vectors equal the series rebuilt from the schedule) and
    ``TARGETS``/``TARGET_GEN`` (target properties and regeneration).
    """
    margin = bundle.config.margin if margin is None else margin
    sched = bundle.schedule
    ext = bundle.extraction
    recs: list[ConditionRecord] = []
    K = sched.K
    if K == 0 and not sched.phi:
        return ConditionReport([])
    phi, m = sched.phi, sched.m
    mono = (len(phi) == K + 1 and len(m) == K + 1 and m[0] >= 1
            and all(a < b for a, b in zip(phi, phi[1:])) and all(a < b for a, b in zip(m, m[1:]))
            and phi[0] >= 0 and phi[-1] < len(ext.coords))
    recs.append(_structural(K, "MONO", mono))
    if not mono:
        return ConditionReport(recs)

    cols = ext.block_columns()
    gram = cols.conj().T @ cols
    gerr = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    recs.append(_structural(0, "BASIS", gerr <= 1e-10, gerr, 1e-10))
    raw = bundle.scalar_set.vectors[ext.subsequence] @ cols.conj()
    for k in range(K + 1):
        row = phi[k]
        err = float(np.max(np.abs(raw[row] - ext.coords[row])))
        tol = 1e-9 * max(1.0, float(np.max(np.abs(raw[row]))))
        recs.append(_structural(k, "COORD", err <= tol, err, tol))
    recs.extend(_target_invariants(bundle))

    coords = ext.coords
    targets = bundle.targets.entries
    active = max(1, min(sched.blocks, bundle.targets.active_blocks()))

    def at(k: int) -> list[ConditionRecord]:
        try:
            return list(step_conditions(k, phi, m, coords, targets, sched.mode, sched.regime, active, margin))
        except PrecisionExhausted:
            return [_structural(k, "PRECISION", False)]

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            for chunk in pool.map(at, range(K + 1)):
                recs.extend(chunk)
    else:
        for k in range(K + 1):
            recs.extend(at(k))

    rebuilt = assemble_family(sched, coords, targets, len(bundle.family.z_tilde), bundle.placement)
    for b, (got, want) in enumerate(zip(bundle.family.z_tilde, rebuilt.z_tilde)):
        diff = ds_norm(ds_sub(got, want))
        tol = 1e-12 * max(1.0, ds_norm(want))
        recs.append(_structural(K, "FAMILY", diff <= tol, diff, tol, block=b))
    return ConditionReport(recs)


# ---------------------------------------------------------------- orbit errors

@dataclass
class OrbitRow:
    k: int
    m_k: int
    e_k: float
    b_k: float
    slack: float

    @property
    def margin(self) -> float:
        return self.b_k + self.slack - self.e_k

    @property
    def ok(self) -> bool:
        return self.e_k <= self.b_k + self.slack


@dataclass
class OrbitErrorReport:
    rows: list[OrbitRow]
    mode: str
    regime: str

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    def errors(self) -> list[float]:
        return [r.e_k for r in self.rows]

    def to_json(self) -> dict:
        return {"passed": self.passed, "mode": self.mode, "regime": self.regime,
                "rows": [{"k": r.k, "m_k": r.m_k, "e_k": r.e_k, "b_k": r.b_k,
                          "slack": r.slack, "margin": r.margin} for r in self.rows]}

    def to_csv(self) -> str:
        lines = ["k,m_k,e_k,b_k,margin"]
        lines += [f"{r.k},{r.m_k},{r.e_k!r},{r.b_k!r},{r.margin!r}" for r in self.rows]
        return "\n".join(lines) + "\n"


def orbit_bound(mode: str, regime: Regime, k: int, m_k: int, lam: np.ndarray, blocks: int) -> float:
    """Closed-form error bound at step ``k``."""
    geo = (k + 1) / 2.0 ** k
    if mode == "finite":
        return blocks * geo
    tail = math.ldexp(float(np.linalg.norm(lam[1:])), 1 - m_k)
    if regime is Regime.TO_ZERO:
        return 2 * abs(lam[0]) + 7 / 3 * geo + tail
    return math.ldexp(abs(lam[0]), 1 - m_k) + 7 / 3 * geo + tail


def measure_orbit_errors(bundle: CounterexampleBundle, strict: bool = False) -> OrbitErrorReport:
    sched = bundle.schedule
    coords = bundle.extraction.coords
    fam = bundle.family.z_tilde
    op = bundle.operator
    slack = 2.0 ** -sched.K
    rows = []
    for k in range(sched.K + 1):
        lam = coords[sched.phi[k]]
        mk = sched.m[k]
        combo: dict[int, list[SparseSeq]] = {}
        for b, z in enumerate(fam):
            for i, s in z.items():
                combo.setdefault(i, []).append(ss_scale(lam[b], s))
        X = DirectSumVec((i, ss_sum(v)) for i, v in combo.items())
        try:
            e = ds_norm(ds_sub(apply_direct_sum(op, X, mk), bundle.physical_target(k)))
        except PrecisionExhausted:
            e = math.inf
        bk = float(orbit_bound(sched.mode, sched.regime, k, mk, lam, len(fam)))
        row = OrbitRow(k, mk, e, bk, slack)
        if strict and not row.ok:
            raise BoundViolated(f"k={k}: e_k={e:.6g} > b_k + 2^-K = {bk + slack:.6g}")
        rows.append(row)
    return OrbitErrorReport(rows, sched.mode, sched.regime.value)


# ---------------------------------------------------------------- conjugacy

@dataclass
class TransportReport:
    max_error_diff: float
    verdicts_equal: bool
    errors_before: list[float]
    errors_after: list[float]
    permutation: list[int]

    @property
    def passed(self) -> bool:
        return self.verdicts_equal and self.max_error_diff <= 1e-12

    def to_json(self) -> dict:
        return {"passed": self.passed, "max_error_diff": self.max_error_diff,
                "verdicts_equal": self.verdicts_equal, "permutation": self.permutation,
                "errors_before": self.errors_before, "errors_after": self.errors_after}


def transport_bundle(bundle: CounterexampleBundle, sigma: Sequence[int]) -> CounterexampleBundle:
    """Move physical block ``i`` to ``sigma[i]``; labels and conditions are untouched."""
    sigma = list(sigma)
    op = bundle.operator
    n = op.blocks
    if sorted(sigma) != list(range(n)):
        raise NotASymmetry(f"not a permutation of the {n} blocks")
    for i, t in enumerate(sigma):
        if op.block_profile(i) != op.block_profile(t):
            raise NotASymmetry(f"block {i} ({op.block_profile(i).name}) cannot move to "
                               f"block {t} ({op.block_profile(t).name})")
    fam = [DirectSumVec((sigma[i], s) for i, s in z.items()) for z in bundle.family.z_tilde]
    family = replace(bundle.family, z_tilde=fam)
    return replace(bundle, family=family, placement=[sigma[p] for p in bundle.placement])


def conjugacy_transport(bundle: CounterexampleBundle, sigma: Sequence[int]) -> tuple[CounterexampleBundle, TransportReport]:
    moved = transport_bundle(bundle, sigma)
    before = measure_orbit_errors(bundle).errors()
    after = measure_orbit_errors(moved).errors()
    same = verify_conditions(bundle).verdicts() == verify_conditions(moved).verdicts()
    diff = max((abs(a - b) for a, b in zip(before, after)), default=0.0)
    return moved, TransportReport(diff, same, before, after, list(sigma))


# ---------------------------------------------------------------- rotation demo

def rational_multiple_of_pi(theta: float, max_den: int = 10_000, tol: float = 1e-12) -> Fraction | None:
    r = theta / math.pi
    f = Fraction(r).limit_denominator(max_den)
    return f if abs(r - f.numerator / f.denominator) <= tol * max(1.0, abs(r)) else None


@dataclass
class BFTarget:
    scalar: complex
    y: SparseSeq


@dataclass
class BFEntry:
    goal_scalar: complex
    gamma: complex
    n: int
    distance: float
    shift: float
    phase: float
    modulus: float
    within_eps: bool
    audit: bool

    def to_json(self) -> dict:
        return {"goal_scalar": [self.goal_scalar.real, self.goal_scalar.imag],
                "gamma": [self.gamma.real, self.gamma.imag], "n": self.n, "distance": self.distance,
                "shift_contribution": self.shift, "phase_contribution": self.phase,
                "modulus_contribution": self.modulus, "within_eps": self.within_eps,
                "triangle_audit": self.audit}


@dataclass
class BFDemoReport:
    theta: float
    lam: complex
    eps: float
    delta: float
    padding: int
    entries: list[BFEntry]
    x_support: int
    note: str = ("targets are restricted to the reachable product form (scalar, sequence) "
                 "and hit to within eps; this replaces a somewhere-density certificate")

    @property
    def passed(self) -> bool:
        return all(e.within_eps and e.audit for e in self.entries)

    def to_json(self) -> dict:
        return {"theta": self.theta, "lambda": [self.lam.real, self.lam.imag], "eps": self.eps,
                "delta": self.delta, "padding": self.padding, "passed": self.passed,
                "x_support": self.x_support, "note": self.note,
                "entries": [e.to_json() for e in self.entries]}


def bf_counterexample_demo(gammas: Sequence[complex], theta: float, targets: Sequence[BFTarget],
                           eps: float = 0.1, budget: int = 200_000, lam: complex = 1.0) -> BFDemoReport:
    """Hit each target ``(a, y)`` with some ``gamma * T^n (lam, x)``, ``T = e^{i theta} + B_v``."""
    if rational_multiple_of_pi(theta) is not None:
        raise PreconditionViolated(f"theta/pi = {rational_multiple_of_pi(theta)} is rational")
    gammas = np.asarray(gammas, dtype=complex)
    if gammas.size == 0 or np.any(gammas == 0):
        raise PreconditionViolated("scalar sample must be nonempty and nonzero")
    mods = np.abs(gammas)
    lo, hi = float(mods.min()), float(mods.max())
    lam = complex(lam)
    chosen = []
    for t in targets:
        want = abs(t.scalar) / abs(lam)
        if not lo <= want <= hi:
            raise TargetUnreachable(f"|a|/|lambda| = {want:.6g} outside sample moduli [{lo:.6g}, {hi:.6g}]")
        chosen.append(complex(gammas[int(np.argmin(np.abs(mods - want)))]))

    # budget eps/3 for each of the shift, phase and modulus parts
    delta = eps / (3 * abs(lam) * hi)
    pad = 0
    while hi * (pad + 1) / 2.0 ** pad > eps / 3:
        pad += 1
    seq = [SparseSeq()] * pad + [ss_scale(1 / g, t.y) for g, t in zip(chosen, targets)]
    goals: list[float | None] = [None] * pad
    goals += [math.atan2(t.scalar.imag, t.scalar.real) - math.atan2(g.imag, g.real)
              - math.atan2(lam.imag, lam.real) for g, t in zip(chosen, targets)]
    hv = _phase_vector(seq, goals, theta, delta, budget)
    entries = []
    for idx, (g, t) in enumerate(zip(chosen, targets)):
        k = pad + idx
        n = hv.m[k]
        rot = complex(math.cos(theta * n), math.sin(theta * n))
        scalar = lam * g * rot
        shift_err = ss_norm(ss_add(ss_scale(g, power_apply(V, n, hv.x)), ss_scale(-1, t.y)))
        scalar_err = abs(scalar - t.scalar)
        dist = math.hypot(scalar_err, shift_err)
        phase_c = abs(lam * g) * abs(scalar / abs(scalar) - t.scalar / abs(t.scalar))
        mod_c = abs(abs(lam * g) - abs(t.scalar))
        audit = dist <= shift_err + phase_c + mod_c + 1e-15
        entries.append(BFEntry(t.scalar, g, n, dist, shift_err, phase_c, mod_c, dist <= eps, audit))
    return BFDemoReport(theta, lam, eps, delta, pad, entries, len(hv.x))


def _phase_vector(seq, goals, theta, delta, budget) -> HypercyclicVector:
    # steps without a goal accept any phase
    filled = [0.0 if g is None else g for g in goals]
    free = [g is None for g in goals]
    return build_hypercyclic_vector(seq, len(seq) - 1, filled, theta, delta, budget, free_steps=free)
