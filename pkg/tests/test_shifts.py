import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammadyn.core_l2 import DirectSumVec, SparseSeq, ss_norm
from gammadyn.errors import BlockOutOfRange
from gammadyn.shifts import (INVERSE, NU, OMEGA1, OMEGA2, PROFILES, V, W1, W2, OperatorSpec,
                             Verdict, apply_direct_sum, backward_apply, certify_not_hypercyclic,
                             forward_apply, power_apply)

import oracles
from strategies import sparse_seqs

e = SparseSeq.basis
PAIRS = [(V, NU), (W1, OMEGA1), (W2, OMEGA2)]


def test_profile_tables():
    want = {"V": (2, 0.5), "W1": (2, 1), "W2": (1, 0.5), "NU": (0.5, 2), "OMEGA1": (0.5, 1),
            "OMEGA2": (1, 2)}
    for name, (hi, lo) in want.items():
        p = PROFILES[name]
        assert (p.pos_weight, p.nonpos_weight) == (hi, lo)
    assert V.weight(1) == 2 and V.weight(0) == 0.5
    assert NU.weight(0) == 0.5 and NU.weight(-1) == 2


def test_basis_examples():
    assert backward_apply(V, e(1)) == e(0, 2)
    assert backward_apply(V, e(0)) == e(-1, 0.5)
    assert forward_apply(NU, e(0)) == e(1, 0.5)
    assert forward_apply(NU, e(-1)) == e(0, 2)
    for p in (V, W1, W2):
        assert backward_apply(p, SparseSeq()).is_zero()


def test_direction_is_checked():
    with pytest.raises(ValueError):
        backward_apply(NU, e(0))
    with pytest.raises(ValueError):
        forward_apply(V, e(0))


@pytest.mark.parametrize("m", [1, 5, 17, 64, 300])
def test_power_examples(m):
    assert power_apply(NU, m, e(0)) == e(m, 2.0 ** -m)
    assert power_apply(W1, m, e(m)) == e(0, 2.0 ** m)
    assert power_apply(V, 0, e(3)) == e(3)


@given(sparse_seqs())
def test_inverse_pairs_exact(x):
    for b, f in PAIRS:
        assert backward_apply(b, forward_apply(f, x)) == x
        assert forward_apply(f, backward_apply(b, x)) == x
        assert INVERSE[b.name] is f


@settings(max_examples=60)
@given(sparse_seqs(max_size=6, radius=20), st.integers(0, 64),
       st.sampled_from([V, W1, W2, NU, OMEGA1, OMEGA2]))
def test_power_equals_repeated_steps(x, m, p):
    y = x
    for _ in range(m):
        y = power_apply(p, 1, y)
    assert power_apply(p, m, x) == y


@settings(max_examples=40)
@given(sparse_seqs(max_size=6, radius=20), st.integers(0, 40),
       st.sampled_from(["V", "W1", "W2"]))
def test_backward_power_matches_dense_oracle(x, m, name):
    d = oracles.dense(x)
    for _ in range(m):
        d = oracles.back_step(d, name)
    assert np.array_equal(oracles.dense(power_apply(PROFILES[name], m, x)), d)


@settings(max_examples=40)
@given(sparse_seqs(max_size=6, radius=20), st.integers(0, 40),
       st.sampled_from(["NU", "OMEGA1", "OMEGA2"]))
def test_forward_power_matches_dense_oracle(x, m, name):
    d = oracles.dense(x)
    for _ in range(m):
        d = oracles.fwd_step(d, name)
    assert np.array_equal(oracles.dense(power_apply(PROFILES[name], m, x)), d)


@given(sparse_seqs())
def test_expansive_and_contractive(x):
    assert ss_norm(backward_apply(W1, x)) >= ss_norm(x)
    assert ss_norm(backward_apply(W2, x)) <= ss_norm(x)


def test_direct_sum_examples():
    T = OperatorSpec("W1", "V", 3)
    assert apply_direct_sum(T, DirectSumVec({0: e(1)})) == DirectSumVec({0: e(0, 2)})
    assert apply_direct_sum(T, DirectSumVec({2: e(0)})) == DirectSumVec({2: e(-1, 0.5)})
    assert apply_direct_sum(T, DirectSumVec()).is_zero()
    with pytest.raises(BlockOutOfRange):
        apply_direct_sum(T, DirectSumVec({3: e(0)}))


@given(sparse_seqs(), st.integers(0, 3), st.integers(0, 20))
def test_direct_sum_acts_blockwise(x, b, m):
    T = OperatorSpec("W2", "V", 4)
    got = apply_direct_sum(T, DirectSumVec({b: x}), m)
    assert got == DirectSumVec({b: power_apply(T.block_profile(b), m, x)})


def test_operator_spec_validation_and_json():
    with pytest.raises(ValueError):
        OperatorSpec("NU")
    with pytest.raises(ValueError):
        OperatorSpec("W1", "W2")
    T = OperatorSpec("V", "V", 1, 0.5)
    assert OperatorSpec.from_json(T.to_json()) == T
    assert OperatorSpec("W1", "V", 2).to_json() == {"block0": "W1", "tail": "V", "blocks": 2}


def test_certificates():
    c = certify_not_hypercyclic(OperatorSpec("W1"))
    assert c.verdict is Verdict.EXPANSIVE and c.spot_checks == 100 and c.spot_failures == 0
    c = certify_not_hypercyclic(OperatorSpec("W2"))
    assert c.verdict is Verdict.POWER_BOUNDED and c.spot_failures == 0
    assert certify_not_hypercyclic(OperatorSpec("V")).verdict is Verdict.NONE


def test_underflow_is_refused():
    from gammadyn.errors import PrecisionExhausted
    assert power_apply(NU, 1000, e(0)) == e(1000, 2.0 ** -1000)
    with pytest.raises(PrecisionExhausted):
        power_apply(NU, 1100, e(0))
    with pytest.raises(PrecisionExhausted):
        power_apply(W1, 1100, e(1100))
