import copy
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammadyn.certify import (BFTarget, bf_counterexample_demo, conjugacy_transport,
                              measure_orbit_errors, orbit_bound, rational_multiple_of_pi,
                              transport_bundle, verify_conditions)
from gammadyn.construction import BuildConfig, CounterexampleBundle, build_counterexample, target_entry
from gammadyn.core_l2 import DirectSumVec, SparseSeq
from gammadyn.errors import (BoundViolated, NotASymmetry, PreconditionViolated, ReportFailure,
                             TargetUnreachable)
from gammadyn.scalar_sets import Regime

import oracles
from conftest import shrinking_tail_sequence

GOLDEN_THETA = 2 * math.pi * (math.sqrt(5) - 1) / 2
GAMMAS = [1 + t / 100 for t in range(101)]


def clone(b):
    return CounterexampleBundle.from_json(copy.deepcopy(b.to_json()))


def bf_targets(scalars, idx=(2, 3, 5, 7, 9)):
    return [BFTarget(a, target_entry(n)[0]) for a, n in zip(scalars, idx)]


# ---------------------------------------------------------------- conditions

def test_fresh_bundles_verify(finite_bundle, zero_bundle, infinity_bundle):
    for b, prefix in ((finite_bundle, "FIN"), (zero_bundle, "INF0"), (infinity_bundle, "INF∞")):
        rep = verify_conditions(b)
        assert rep.passed and rep.first_failure() is None
        conds = {r.cond for r in rep.records}
        assert any(c.startswith(prefix + ".") for c in conds)
        rep.raise_on_failure()
        assert all(r.margin > 0 for r in rep.records if r.relation == "<")


def test_k0_report_passes():
    b = build_counterexample(shrinking_tail_sequence(64), BuildConfig(K=0))
    rep = verify_conditions(b)
    assert rep.passed
    assert all(r.lhs == 0 for r in rep.records if not r.cond.startswith("STRUCT"))


def test_decremented_m_is_caught_at_that_step(zero_bundle):
    b = clone(zero_bundle)
    b.schedule.m[3] -= 1
    rep = verify_conditions(b)
    assert not rep.passed
    assert any(r.k == 3 and not r.passed for r in rep.records)
    with pytest.raises(ReportFailure):
        rep.raise_on_failure()


def test_stored_margins_are_ignored(zero_bundle):
    b = clone(zero_bundle)
    b.schedule.margins = [-1.0] * len(b.schedule.margins)
    assert verify_conditions(b).verdicts() == verify_conditions(zero_bundle).verdicts()


def test_parallel_verification_agrees(zero_bundle):
    assert verify_conditions(zero_bundle, workers=4).verdicts() == verify_conditions(zero_bundle).verdicts()


def test_report_json(finite_bundle):
    js = json.loads(json.dumps(verify_conditions(finite_bundle).to_json()))
    assert js["passed"] and js["first_failure"] is None
    assert js["summary"]["FIN.vi"]["passed"] == js["summary"]["FIN.vi"]["total"]


# ---------------------------------------------------------------- orbit errors

def test_bound_examples():
    lam = np.ones(3)
    assert orbit_bound("finite", Regime.TO_ZERO, 12, 50, lam, 3) == pytest.approx(3 * 13 / 4096)
    assert 3 * 13 / 4096 == pytest.approx(0.009521, abs=1e-6)
    assert orbit_bound("finite", Regime.TO_ZERO, 0, 1, lam[:1], 1) == 1


def test_orbit_errors_within_bounds(finite_bundle, zero_bundle, infinity_bundle):
    for b in (finite_bundle, zero_bundle, infinity_bundle):
        rep = measure_orbit_errors(b, strict=True)
        assert rep.passed and len(rep.rows) == b.schedule.K + 1


def test_zero_regime_bounds_decay(zero_bundle):
    rows = measure_orbit_errors(zero_bundle).rows
    K = len(rows) - 1
    assert rows[K].b_k < rows[math.ceil(K / 2)].b_k


@pytest.mark.parametrize("name", ["finite_bundle", "zero_bundle"])
def test_orbit_errors_match_dense_oracle(name, request):
    b = request.getfixturevalue(name)
    rep = measure_orbit_errors(b)
    for k in range(b.schedule.K + 1):
        assert rep.rows[k].e_k == pytest.approx(oracles.dense_orbit_error(b, k), abs=1e-12)


def test_orbit_csv(finite_bundle):
    csv = measure_orbit_errors(finite_bundle).to_csv().splitlines()
    assert csv[0] == "k,m_k,e_k,b_k,margin"
    assert len(csv) == finite_bundle.schedule.K + 2


def test_bound_violation_raised(zero_bundle):
    b = clone(zero_bundle)
    b.family.z_tilde[1] = DirectSumVec({1: SparseSeq({400: 1e6})})
    with pytest.raises(BoundViolated):
        measure_orbit_errors(b, strict=True)
    assert not measure_orbit_errors(b).passed


# ---------------------------------------------------------------- transport

def test_identity_transport_is_bitwise(zero_bundle):
    n = zero_bundle.operator.blocks
    _, rep = conjugacy_transport(zero_bundle, list(range(n)))
    assert rep.errors_before == rep.errors_after and rep.passed


def test_tail_swap_transport(zero_bundle):
    n = zero_bundle.operator.blocks
    sigma = [0, 2, 1] + list(range(3, n))
    moved, rep = conjugacy_transport(zero_bundle, sigma)
    assert rep.passed and rep.max_error_diff <= 1e-12 and rep.verdicts_equal
    assert 2 in moved.family.z_tilde[1] and moved.placement[:3] == [0, 2, 1]


def test_pivot_cannot_move(zero_bundle):
    n = zero_bundle.operator.blocks
    with pytest.raises(NotASymmetry):
        transport_bundle(zero_bundle, [1, 0] + list(range(2, n)))
    with pytest.raises(NotASymmetry):
        transport_bundle(zero_bundle, [0, 0] + list(range(2, n)))


# ---------------------------------------------------------------- rotation demo

def test_rationality_check():
    assert rational_multiple_of_pi(math.pi / 2) == 0.5
    assert rational_multiple_of_pi(GOLDEN_THETA) is None


def test_bf_demo_reaches_targets():
    scalars = [1.5 * complex(math.cos(a), math.sin(a)) for a in (0.3, 1.0, 2.0, -1.0, 3.0)]
    rep = bf_counterexample_demo(GAMMAS, GOLDEN_THETA, bf_targets(scalars), eps=0.1)
    assert rep.passed and len(rep.entries) == 5
    assert all(e.distance <= 0.1 for e in rep.entries)
    assert json.loads(json.dumps(rep.to_json()))["passed"]


def test_bf_demo_gates():
    with pytest.raises(TargetUnreachable):
        bf_counterexample_demo(GAMMAS, GOLDEN_THETA, bf_targets([10 * 2.0]), eps=0.1)
    with pytest.raises(PreconditionViolated):
        bf_counterexample_demo(GAMMAS, math.pi / 2, bf_targets([1.5]), eps=0.1)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.tuples(st.floats(1.0, 2.0), st.floats(-math.pi, math.pi)), min_size=1, max_size=3))
def test_bf_triangle_audit(pts):
    scalars = [r * complex(math.cos(a), math.sin(a)) for r, a in pts]
    rep = bf_counterexample_demo(GAMMAS, GOLDEN_THETA, bf_targets(scalars), eps=0.1)
    for e in rep.entries:
        assert e.audit and e.distance <= e.shift + e.phase + e.modulus + 1e-15


def test_out_of_range_power_is_a_failure(zero_bundle):
    b = clone(zero_bundle)
    b.schedule.m[-1] = 5000
    assert not verify_conditions(b).passed
    assert not measure_orbit_errors(b).passed
