"""Weighted bilateral shifts with piecewise-constant dyadic weights.

Convention: the backward shift sends ``e_j`` to ``w_j e_{j-1}``, i.e.
``(B x)(j) = w_{j+1} x(j+1)``; the forward shift sends ``e_j`` to
``nu_j e_{j+1}``.  Every weight is a power of two, so a power of a shift
multiplies each coefficient by ``2**e`` for an integer ``e`` computed in
closed form, which is exact in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core_l2 import DirectSumVec, SparseSeq, ZERO, ss_norm
from .errors import BlockOutOfRange, PrecisionExhausted


class Direction(str, Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class WeightProfile:
    """Two-valued dyadic weight sequence.

    ``pos_exp``/``nonpos_exp`` are base-2 exponents.  For backward profiles
    the split is ``i > 0`` versus ``i <= 0``; for forward profiles it is
    ``i >= 0`` versus ``i < 0``, which is what makes the listed pairs exact
    inverses.
    """

    name: str
    direction: Direction
    pos_exp: int
    nonpos_exp: int

    @property
    def pos_weight(self) -> float:
        return math.ldexp(1.0, self.pos_exp)

    @property
    def nonpos_weight(self) -> float:
        return math.ldexp(1.0, self.nonpos_exp)

    def weight(self, i: int) -> float:
        return math.ldexp(1.0, self.exponent_at(i))

    def exponent_at(self, i: int) -> int:
        upper = i > 0 if self.direction is Direction.BACKWARD else i >= 0
        return self.pos_exp if upper else self.nonpos_exp

    @property
    def all_at_least_one(self) -> bool:
        return self.pos_exp >= 0 and self.nonpos_exp >= 0

    @property
    def all_at_most_one(self) -> bool:
        return self.pos_exp <= 0 and self.nonpos_exp <= 0


V = WeightProfile("V", Direction.BACKWARD, 1, -1)
W1 = WeightProfile("W1", Direction.BACKWARD, 1, 0)
W2 = WeightProfile("W2", Direction.BACKWARD, 0, -1)
NU = WeightProfile("NU", Direction.FORWARD, -1, 1)
OMEGA1 = WeightProfile("OMEGA1", Direction.FORWARD, -1, 0)
OMEGA2 = WeightProfile("OMEGA2", Direction.FORWARD, 0, 1)

PROFILES = {p.name: p for p in (V, W1, W2, NU, OMEGA1, OMEGA2)}
INVERSE = {"V": NU, "W1": OMEGA1, "W2": OMEGA2, "NU": V, "OMEGA1": W1, "OMEGA2": W2}


def profile(name: str | WeightProfile) -> WeightProfile:
    if isinstance(name, WeightProfile):
        return name
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown weight profile {name!r}") from None


def inverse_profile(p: WeightProfile) -> WeightProfile:
    return INVERSE[p.name]


def power_exponent(p: WeightProfile, m: int, j: int) -> int:
    """Base-2 exponent picked up by ``e_j`` under the ``m``-th power of ``p``."""
    if p.direction is Direction.BACKWARD:
        # indices visited: j, j-1, ..., j-m+1
        upper = min(m, j) if j > 0 else 0
    else:
        # indices visited: j, j+1, ..., j+m-1
        upper = min(m, max(0, j + m)) if j < 0 else m
    return upper * p.pos_exp + (m - upper) * p.nonpos_exp


# exponents of the smallest and largest normal doubles
_MIN_EXP, _MAX_EXP = -1021, 1024


def _scale2(c: complex, e: int) -> complex:
    """``c * 2**e`` exactly, refusing to underflow into subnormals or overflow."""
    for part in (c.real, c.imag):
        if part:
            pe = math.frexp(part)[1] + e
            if pe < _MIN_EXP or pe > _MAX_EXP:
                raise PrecisionExhausted(f"coefficient {part!r} * 2**{e} leaves the double range")
    return complex(math.ldexp(c.real, e), math.ldexp(c.imag, e))


def power_apply(p: WeightProfile, m: int, x: SparseSeq) -> SparseSeq:
    if m < 0:
        raise ValueError("power must be nonnegative")
    if m == 0 or x.is_zero():
        return x
    step = -m if p.direction is Direction.BACKWARD else m
    out = {}
    for j, c in x.items():
        out[j + step] = _scale2(c, power_exponent(p, m, j))
    return SparseSeq._trusted(out)


def backward_apply(p: WeightProfile, x: SparseSeq) -> SparseSeq:
    if p.direction is not Direction.BACKWARD:
        raise ValueError(f"{p.name} is not a backward profile")
    return power_apply(p, 1, x)


def forward_apply(p: WeightProfile, x: SparseSeq) -> SparseSeq:
    if p.direction is not Direction.FORWARD:
        raise ValueError(f"{p.name} is not a forward profile")
    return power_apply(p, 1, x)


@dataclass(frozen=True)
class OperatorSpec:
    """Block 0 uses ``block0``, every other block uses ``tail``.

    ``rotation_theta`` is only set for the scalar-rotation demo, where the
    operator also carries a one-dimensional prefix multiplied by
    ``exp(i theta)``.
    """

    block0: str = "W1"
    tail: str = "V"
    blocks: int = 1
    rotation_theta: float | None = None

    def __post_init__(self):
        if self.block0 not in ("W1", "W2", "V"):
            raise ValueError(f"block0 must be W1, W2 or V, got {self.block0!r}")
        if self.tail != "V":
            raise ValueError("tail profile must be V")
        if self.blocks < 1:
            raise ValueError("need at least one block")

    def block_profile(self, i: int) -> WeightProfile:
        return PROFILES[self.block0] if i == 0 else PROFILES[self.tail]

    def to_json(self) -> dict:
        out = {"block0": self.block0, "tail": self.tail, "blocks": self.blocks}
        if self.rotation_theta is not None:
            out["rotation_theta"] = self.rotation_theta
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "OperatorSpec":
        return cls(obj["block0"], obj.get("tail", "V"), int(obj["blocks"]), obj.get("rotation_theta"))


def apply_direct_sum(T: OperatorSpec, X: DirectSumVec, m: int = 1) -> DirectSumVec:
    """Apply ``T**m`` blockwise."""
    if X.max_block() >= T.blocks:
        raise BlockOutOfRange(f"block {X.max_block()} outside truncation {T.blocks}")
    return DirectSumVec((i, power_apply(T.block_profile(i), m, b)) for i, b in X.items())


def rotate_scalar(T: OperatorSpec, c: complex, m: int = 1) -> complex:
    if T.rotation_theta is None:
        return c
    return c * complex(math.cos(T.rotation_theta * m), math.sin(T.rotation_theta * m))


class Verdict(str, Enum):
    EXPANSIVE = "Expansive"
    POWER_BOUNDED = "PowerBounded"
    NONE = "None"


@dataclass
class NonHypercyclicityCertificate:
    verdict: Verdict
    witness_block: int
    evidence: str
    spot_checks: int = 0
    spot_failures: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "witness_block": self.witness_block,
            "evidence": self.evidence,
            "spot_checks": self.spot_checks,
            "spot_failures": self.spot_failures,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NonHypercyclicityCertificate":
        return cls(Verdict(obj["verdict"]), obj["witness_block"], obj["evidence"],
                   obj.get("spot_checks", 0), obj.get("spot_failures", 0))


def random_dyadic_seq(rng: np.random.Generator, max_support: int = 12, radius: int = 20,
                      scale_bits: int = 8) -> SparseSeq:
    """Random sequence whose coefficients are small dyadic rationals."""
    n = int(rng.integers(0, max_support + 1))
    idx = rng.integers(-radius, radius + 1, size=n)
    re = rng.integers(-(1 << scale_bits), (1 << scale_bits) + 1, size=n)
    im = rng.integers(-(1 << scale_bits), (1 << scale_bits) + 1, size=n)
    return SparseSeq((int(j), complex(math.ldexp(float(a), -scale_bits), math.ldexp(float(b), -scale_bits)))
                     for j, a, b in zip(idx, re, im))


def certify_not_hypercyclic(T: OperatorSpec, seed: int = 0, checks: int = 100) -> NonHypercyclicityCertificate:
    """Weight inspection of block 0, corroborated by random monotonicity checks."""
    p = PROFILES[T.block0]
    rng = np.random.default_rng(seed)
    failures = 0
    if p.all_at_least_one:
        for _ in range(checks):
            x = random_dyadic_seq(rng)
            if ss_norm(backward_apply(p, x)) < ss_norm(x):
                failures += 1
        return NonHypercyclicityCertificate(
            Verdict.EXPANSIVE, 0,
            f"all weights of {p.name} are >= 1, so ||Bx|| >= ||x|| and orbits stay away from 0; "
            f"{checks - failures}/{checks} random norm checks agree",
            checks, failures)
    if p.all_at_most_one:
        for _ in range(checks):
            x = random_dyadic_seq(rng)
            if ss_norm(backward_apply(p, x)) > ss_norm(x):
                failures += 1
        return NonHypercyclicityCertificate(
            Verdict.POWER_BOUNDED, 0,
            f"all weights of {p.name} are <= 1, so every power has norm <= 1 and orbits are bounded; "
            f"{checks - failures}/{checks} random norm checks agree",
            checks, failures)
    return NonHypercyclicityCertificate(
        Verdict.NONE, 0, f"{p.name} mixes weights above and below 1; no obstruction applies", 0, 0)


__all__ = [
    "Direction", "WeightProfile", "V", "W1", "W2", "NU", "OMEGA1", "OMEGA2", "PROFILES",
    "profile", "inverse_profile", "power_exponent", "power_apply", "backward_apply",
    "forward_apply", "OperatorSpec", "apply_direct_sum", "rotate_scalar", "Verdict",
    "NonHypercyclicityCertificate", "certify_not_hypercyclic", "random_dyadic_seq", "ZERO",
]
