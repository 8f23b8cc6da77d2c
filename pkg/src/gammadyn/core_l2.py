"""Sparse arithmetic for finitely supported sequences on the integers.

``SparseSeq`` stores only nonzero coefficients, so nothing is ever truncated.
``DirectSumVec`` is a finite collection of such sequences indexed by block.
Both are immutable once built.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from types import MappingProxyType

from .errors import EmptySupport


def _check_finite(c: complex) -> complex:
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


class SparseSeq(Mapping):
    """Finitely supported complex function on the integers; absent indices are zero."""

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping[int, complex] | Iterable[tuple[int, complex]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[int, complex] = {}
        for j, c in items:
            c = _check_finite(complex(c))
            if c != 0:
                data[int(j)] = c
        self._data = MappingProxyType(data)

    @classmethod
    def _trusted(cls, data: dict[int, complex]) -> "SparseSeq":
        # caller guarantees nonzero finite values and int keys
        obj = cls.__new__(cls)
        obj._data = MappingProxyType(data)
        return obj

    @classmethod
    def basis(cls, j: int, coeff: complex = 1.0) -> "SparseSeq":
        return cls({j: coeff})

    def __getitem__(self, j: int) -> complex:
        return self._data.get(j, 0j)

    def __iter__(self) -> Iterator[int]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, j: object) -> bool:
        return j in self._data

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SparseSeq):
            return dict(self._data) == dict(other._data)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._data.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{j}: {c}" for j, c in sorted(self._data.items()))
        return f"SparseSeq({{{inner}}})"

    def __add__(self, other: "SparseSeq") -> "SparseSeq":
        return ss_add(self, other)

    def __sub__(self, other: "SparseSeq") -> "SparseSeq":
        return ss_add(self, ss_scale(-1, other))

    def __neg__(self) -> "SparseSeq":
        return ss_scale(-1, self)

    def __rmul__(self, c: complex) -> "SparseSeq":
        return ss_scale(c, self)

    def is_zero(self) -> bool:
        return not self._data

    def to_json(self) -> list[list[float]]:
        return [[j, c.real, c.imag] for j, c in sorted(self._data.items())]

    @classmethod
    def from_json(cls, triples: Iterable[Iterable[float]]) -> "SparseSeq":
        return cls((int(j), complex(re, im)) for j, re, im in triples)


ZERO = SparseSeq()


def ss_norm(x: SparseSeq) -> float:
    return math.hypot(*(abs(c) for c in x.values())) if len(x) else 0.0


def ss_inner(x: SparseSeq, y: SparseSeq) -> complex:
    """Inner product, linear in ``x`` and conjugate-linear in ``y``."""
    if len(y) < len(x):
        return sum((x[j] * y[j].conjugate() for j in y), 0j)
    return sum((c * y[j].conjugate() for j, c in x.items() if j in y), 0j)


def ss_add(x: SparseSeq, y: SparseSeq) -> SparseSeq:
    data = dict(x.items())
    for j, c in y.items():
        s = data.get(j, 0j) + c
        if s == 0:
            data.pop(j, None)
        else:
            data[j] = _check_finite(s)
    return SparseSeq._trusted(data)


def ss_scale(c: complex, x: SparseSeq) -> SparseSeq:
    c = complex(c)
    if c == 0:
        return ZERO
    data = {}
    for j, v in x.items():
        p = c * v
        if p != 0:
            data[j] = _check_finite(p)
    return SparseSeq._trusted(data)


def ss_sum(terms: Iterable[SparseSeq]) -> SparseSeq:
    data: dict[int, complex] = {}
    for t in terms:
        for j, c in t.items():
            data[j] = data.get(j, 0j) + c
    return SparseSeq((j, c) for j, c in data.items())


def support_bounds(x: SparseSeq) -> tuple[int, int]:
    if x.is_zero():
        raise EmptySupport("support_bounds of the zero sequence")
    return min(x), max(x)


class DirectSumVec(Mapping):
    """Finite direct sum of ``SparseSeq`` blocks keyed by block index >= 0."""

    __slots__ = ("_blocks",)

    def __init__(self, blocks: Mapping[int, SparseSeq] | Iterable[tuple[int, SparseSeq]] = ()):
        items = blocks.items() if isinstance(blocks, Mapping) else blocks
        data = {}
        for i, b in items:
            i = int(i)
            if i < 0:
                raise ValueError(f"negative block index {i}")
            if not isinstance(b, SparseSeq):
                b = SparseSeq(b)
            if not b.is_zero():
                data[i] = b
        self._blocks = MappingProxyType(data)

    def __getitem__(self, i: int) -> SparseSeq:
        return self._blocks.get(i, ZERO)

    def __iter__(self) -> Iterator[int]:
        return iter(self._blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    def __contains__(self, i: object) -> bool:
        return i in self._blocks

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DirectSumVec):
            return dict(self._blocks) == dict(other._blocks)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._blocks.items()))

    def __repr__(self) -> str:
        return f"DirectSumVec({dict(sorted(self._blocks.items()))!r})"

    def is_zero(self) -> bool:
        return not self._blocks

    def max_block(self) -> int:
        return max(self._blocks) if self._blocks else -1

    def to_json(self) -> dict[str, list[list[float]]]:
        return {str(i): b.to_json() for i, b in sorted(self._blocks.items())}

    @classmethod
    def from_json(cls, obj: Mapping[str, Iterable]) -> "DirectSumVec":
        return cls((int(k), SparseSeq.from_json(v)) for k, v in obj.items())


def ds_norm(x: DirectSumVec) -> float:
    return math.hypot(*(ss_norm(b) for b in x.values())) if len(x) else 0.0


def ds_inner(x: DirectSumVec, y: DirectSumVec) -> complex:
    return sum((ss_inner(x[i], y[i]) for i in x if i in y), 0j)


def ds_add(x: DirectSumVec, y: DirectSumVec) -> DirectSumVec:
    keys = set(x) | set(y)
    return DirectSumVec((i, ss_add(x[i], y[i])) for i in keys)


def ds_sub(x: DirectSumVec, y: DirectSumVec) -> DirectSumVec:
    keys = set(x) | set(y)
    return DirectSumVec((i, ss_add(x[i], ss_scale(-1, y[i]))) for i in keys)


def ds_scale(c: complex, x: DirectSumVec) -> DirectSumVec:
    return DirectSumVec((i, ss_scale(c, b)) for i, b in x.items())
