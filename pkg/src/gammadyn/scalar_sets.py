"""Scalar sets: coverability by vector annuli and basis extraction.

A scalar set is a finite ordered sample of complex vectors, either in C^l
("finite") or as finite windows of vectors in l^2(N) ("sequence").  Because
a finite sample is always covered by finitely many annuli, limiting
behaviour is supplied by an optional ``asymptotics`` declaration and the
classifier only checks that the sample is consistent with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (AllZero, ExtractionFailed, NoTrend, PreconditionViolated,
                     RejectionBudgetExceeded, SingularBasis)


class Regime(str, Enum):
    TO_ZERO = "ToZero"
    TO_INFINITY = "ToInfinity"


ASYMPTOTIC_KINDS = ("modulus_to_zero", "modulus_to_infinity", "directions_accumulate", "none")


def _cvec(raw) -> np.ndarray:
    return np.array([complex(re, im) for re, im in raw], dtype=complex)


def _cvec_json(v: np.ndarray) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v, dtype=complex)]


def _cmat_json(a: np.ndarray) -> list:
    return [_cvec_json(row) for row in np.asarray(a, dtype=complex)]


def _cmat(raw) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in raw], dtype=complex)


@dataclass
class Asymptotics:
    kind: str = "none"
    direction: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ASYMPTOTIC_KINDS:
            raise ValueError(f"unknown asymptotics kind {self.kind!r}")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.direction is not None:
            out["direction"] = _cvec_json(self.direction)
        return out

    @classmethod
    def from_json(cls, obj: dict | None) -> "Asymptotics":
        if not obj:
            return cls()
        d = obj.get("direction")
        return cls(obj.get("kind", "none"), None if d is None else _cvec(d))


@dataclass
class ScalarSet:
    """Ordered sample of vectors; rows of ``vectors`` are the samples."""

    ambient: str
    vectors: np.ndarray
    asymptotics: Asymptotics = field(default_factory=Asymptotics)

    def __post_init__(self):
        if self.ambient not in ("finite", "sequence"):
            raise ValueError(f"ambient must be 'finite' or 'sequence', got {self.ambient!r}")
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("sample vectors must be finite")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def to_json(self) -> dict:
        return {"ambient": self.ambient, "dim": self.dim,
                "vectors": _cmat_json(self.vectors), "asymptotics": self.asymptotics.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "ScalarSet":
        rows = [[complex(re, im) for re, im in v] for v in obj["vectors"]]
        if not rows:
            raise ValueError("scalar set has no vectors")
        width = max(len(r) for r in rows)
        if obj.get("ambient") == "finite":
            width = int(obj.get("dim", width))
            if any(len(r) > width for r in rows):
                raise ValueError("vector longer than declared dim")
        arr = np.zeros((len(rows), width), dtype=complex)
        for i, r in enumerate(rows):
            arr[i, :len(r)] = r
        return cls(obj["ambient"], arr, Asymptotics.from_json(obj.get("asymptotics")))


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """sqrt(2 - 2|<u/|u|, v/|v|>|), zero iff u and v span the same line."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    c = min(1.0, abs(np.vdot(v, u)) / (nu * nv))
    return math.sqrt(max(0.0, 2.0 - 2.0 * c))


def _records(values: np.ndarray, decreasing: bool) -> list[int]:
    """Greedy strictly monotone subsequence taking every new record."""
    out: list[int] = []
    best = None
    for i, v in enumerate(values):
        if best is None or (v < best if decreasing else v > best):
            out.append(i)
            best = v
    return out


def _trend_factor(vals: Sequence[float], decreasing: bool) -> float:
    if len(vals) < 2 or min(vals) <= 0:
        return 1.0
    return vals[0] / vals[-1] if decreasing else vals[-1] / vals[0]


# ---------------------------------------------------------------- coverability

@dataclass
class Annulus:
    direction: np.ndarray
    a: float
    b: float
    members: list[int]

    def to_json(self) -> dict:
        return {"direction": _cvec_json(self.direction), "a": self.a, "b": self.b,
                "members": self.members}


@dataclass
class CoverReport:
    coverable: bool
    annuli: list[Annulus]
    unassigned: list[int]
    flags: list[str]
    tol: float
    note: str = ("a finite sample always lies in finitely many annuli; the verdict "
                 "is driven by the declared asymptotics and the cluster limit")

    def to_json(self) -> dict:
        return {"verdict": "Coverable" if self.coverable else "NotCoverable",
                "annuli": [a.to_json() for a in self.annuli], "unassigned": self.unassigned,
                "flags": self.flags, "cluster_count": len(self.annuli), "tol": self.tol,
                "note": self.note}


def classify_cover(S: ScalarSet, tol: float = 1e-6, cluster_limit: int = 32,
                   trend_factor: float = 2.0) -> CoverReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    norms = np.linalg.norm(S.vectors, axis=1)
    nonzero = [i for i in range(len(S)) if norms[i] > 0]
    if not nonzero:
        raise AllZero("every sample vector is zero")

    reps: list[np.ndarray] = []
    members: list[list[int]] = []
    for i in nonzero:
        x = S.vectors[i]
        for c, r in enumerate(reps):
            if projective_distance(x, r) <= tol:
                members[c].append(i)
                break
        else:
            reps.append(x / norms[i])
            members.append([i])
    annuli = []
    for r, mem in zip(reps, members):
        # fix the phase so the largest coordinate of the direction is real positive
        k = int(np.argmax(np.abs(r)))
        d = r * (abs(r[k]) / r[k])
        mods = norms[mem]
        annuli.append(Annulus(d, float(mods.min()), float(mods.max()), mem))

    flags = []
    kind = S.asymptotics.kind
    if kind in ("modulus_to_zero", "modulus_to_infinity"):
        dec = kind == "modulus_to_zero"
        for ann in annuli:
            mods = norms[ann.members]
            rec = _records(mods, dec)
            if _trend_factor(list(mods[rec]), dec) >= trend_factor:
                flags.append(kind)
                break
    elif kind == "directions_accumulate" and len(annuli) >= 2:
        flags.append(kind)
    if len(annuli) > cluster_limit:
        flags.append("cluster_limit")
    return CoverReport(not flags, annuli, [], flags, tol)


# ---------------------------------------------------------------- extraction

@dataclass
class BasisExtraction:
    """Basis data consumed by the construction.

    ``basis`` holds basis vectors as columns.  Columns listed in ``i1`` carry
    the sample's coordinates; the pivot column is always ``i1[0]`` and its
    coordinate is column 0 of ``coords``.  ``coords[k, b]`` is the coordinate
    of sample ``subsequence[k]`` along ``basis[:, i1[b]]``.
    """

    mode: str
    subsequence: list[int]
    basis: np.ndarray
    i1: list[int]
    i2: list[int] | str
    regime: Regime
    coords: np.ndarray
    orthonormal: bool = True
    info: dict = field(default_factory=dict)

    @property
    def pivot(self) -> int:
        return self.i1[0]

    @property
    def n_blocks(self) -> int:
        return self.coords.shape[1]

    def block_columns(self) -> np.ndarray:
        """Basis vectors carrying the coordinates, in block order."""
        if self.mode == "finite":
            return self.basis[:, self.i1]
        return self.basis[:, : self.n_blocks]

    def check_invariants(self, rel_tol: float = 1e-12) -> None:
        piv = np.abs(self.coords[:, 0])
        if np.any(np.abs(self.coords) <= 0):
            raise ExtractionFailed("zero coordinate on an I1 index")
        steps = np.diff(piv)
        if self.regime is Regime.TO_ZERO and np.any(steps >= 0):
            raise ExtractionFailed("pivot coordinate not strictly decreasing")
        if self.regime is Regime.TO_INFINITY and np.any(steps <= 0):
            raise ExtractionFailed("pivot coordinate not strictly increasing")

    def to_json(self) -> dict:
        return {"mode": self.mode, "subsequence": self.subsequence,
                "basis": _cmat_json(self.basis.T), "i1": self.i1, "i2": self.i2,
                "pivot": self.pivot, "regime": self.regime.value,
                "coords": _cmat_json(self.coords), "orthonormal": self.orthonormal,
                "info": self.info}

    @classmethod
    def from_json(cls, obj: dict) -> "BasisExtraction":
        return cls(obj["mode"], list(obj["subsequence"]), _cmat(obj["basis"]).T,
                   list(obj["i1"]), obj["i2"], Regime(obj["regime"]), _cmat(obj["coords"]),
                   obj.get("orthonormal", True), obj.get("info", {}))


def _orth_complement(cols: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of the column span of ``cols``."""
    if cols.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
    return u[:, rank:]


def _span_basis(vectors: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the rows of ``vectors``."""
    u, s, _ = np.linalg.svd(vectors.T, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, : int(np.sum(s > s[0] * rel_tol))]


def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def change_coordinates(vectors: np.ndarray, basis: np.ndarray, orthonormal: bool = True,
                       tol: float = 1e-10) -> np.ndarray:
    """Coordinates of each row of ``vectors`` in the column basis ``basis``."""
    vectors = np.atleast_2d(vectors)
    if orthonormal:
        gram = basis.conj().T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > tol:
            raise SingularBasis("basis is not orthonormal")
        coords = vectors @ basis.conj()
    else:
        if basis.shape[0] != basis.shape[1] or np.linalg.cond(basis) > 1e12:
            raise SingularBasis("basis is not invertible")
        coords = np.linalg.solve(basis, vectors.T).T
    err = np.max(np.abs(coords @ basis.T - vectors)) if vectors.size else 0.0
    if err > tol * max(1.0, float(np.max(np.abs(vectors))) if vectors.size else 1.0):
        raise SingularBasis(f"reconstruction error {err:.3g} (vectors outside the basis span?)")
    return coords


def _monotone_subsequence(values: np.ndarray, candidates: list[int], decreasing: bool,
                          trend_factor: float, min_length: int, what: str,
                          exc=ExtractionFailed) -> list[int]:
    vals = np.abs(values[candidates])
    rec = [candidates[i] for i in _records(vals, decreasing)]
    factor = _trend_factor(list(np.abs(values[rec])), decreasing)
    if len(rec) < min_length or factor < trend_factor:
        raise exc(f"{what}: monotone subsequence has length {len(rec)} and factor "
                  f"{factor:.3g} (need >= {min_length} and >= {trend_factor})")
    return rec


def extract_basis_finite(S: ScalarSet, seed: int = 0, trend_factor: float = 2.0,
                         min_length: int = 8, tol: float = 1e-6) -> BasisExtraction:
    """Direction, pivot coordinate and orthonormal basis for a set in C^l."""
    X = S.vectors
    norms = np.linalg.norm(X, axis=1)
    idx = [i for i in range(len(S)) if norms[i] > 0]
    if not idx:
        raise AllZero("every sample vector is zero")
    rng = np.random.default_rng(seed)
    l = S.dim
    span = _span_basis(X[idx])
    L = span.shape[1]
    kind = S.asymptotics.kind
    declared = S.asymptotics.direction

    if L == 1:
        f1 = span[:, 0]
        coords = X @ f1.conj()
        if kind == "modulus_to_infinity":
            dec = False
        elif kind == "modulus_to_zero":
            dec = True
        else:
            # infer the direction of the modulus trend from the sample
            dec = abs(coords[idx[-1]]) < abs(coords[idx[0]])
        sub = _monotone_subsequence(coords, idx, dec, trend_factor, min_length,
                                    "no modulus trend on the single line")
        basis = np.column_stack([f1, _orth_complement(f1[:, None], l)])
        regime = Regime.TO_ZERO if dec else Regime.TO_INFINITY
        ext = BasisExtraction("finite", sub, basis, [0], list(range(1, l)), regime,
                              coords[sub][:, None], True,
                              {"L": 1, "case": "single line"})
        ext.check_invariants()
        return ext

    # several directions: accumulation direction f1, either bounded or growing moduli
    growing = kind == "modulus_to_infinity"
    if kind not in ("modulus_to_infinity", "modulus_to_zero", "directions_accumulate"):
        rec = _records(norms[idx], decreasing=False)
        growing = len(rec) >= min_length and _trend_factor(list(norms[idx][rec]), False) >= trend_factor
    if declared is not None:
        f1 = np.asarray(declared, dtype=complex)
        source = None
    else:
        source = idx[-1]
        f1 = X[source]
    f1 = f1 / np.linalg.norm(f1)
    if np.linalg.norm(f1 - span @ (span.conj().T @ f1)) > 1e-8:
        raise ExtractionFailed("accumulation direction lies outside the span of the sample")
    # generic orthonormal basis of span minus f1
    inner = span - np.outer(f1, f1.conj() @ span)
    inner_basis = _span_basis(inner.T)[:, : L - 1]
    inner_basis = inner_basis @ _random_unitary(L - 1, rng)
    comp = _orth_complement(np.column_stack([f1, inner_basis]), l)
    pair_ok = [i for i in idx if i != source]

    if growing:
        regime = Regime.TO_INFINITY
        cols = [f1] + [inner_basis[:, j] for j in range(L - 1)]
        pivot_col = 0
    else:
        regime = Regime.TO_ZERO
        cols = [f1] + [inner_basis[:, j] for j in range(L - 1)]
        # pivot: the completion coordinate with the strongest decreasing trend
        best = None
        for j in range(1, L):
            vals = X[pair_ok] @ cols[j].conj()
            rec = _records(np.abs(vals), decreasing=True)
            f = _trend_factor(list(np.abs(vals[rec])), True)
            if best is None or (len(rec) >= min_length and f > best[0]):
                best = (f, j)
        pivot_col = best[1]
    order = [pivot_col] + [j for j in range(L) if j != pivot_col]
    b_i1 = np.column_stack([cols[j] for j in order])
    basis = np.column_stack([b_i1, comp]) if comp.shape[1] else b_i1
    all_coords = X @ b_i1.conj()
    # keep samples with every I1 coordinate nonzero and pairwise independent of kept ones
    good = [i for i in pair_ok if np.all(np.abs(all_coords[i]) > 1e-14 * norms[i])]
    sub = _monotone_subsequence(all_coords[:, 0], good, regime is Regime.TO_ZERO, trend_factor,
                                min_length, "pivot coordinate shows no trend")
    kept: list[int] = []
    for i in sub:
        if all(projective_distance(X[i], X[j]) > tol for j in kept):
            kept.append(i)
    if len(kept) < min_length:
        raise ExtractionFailed("too few pairwise independent samples along the trend")
    ext = BasisExtraction("finite", kept, basis, list(range(L)), list(range(L, l)), regime,
                          all_coords[kept], True,
                          {"L": L, "case": "growing moduli" if growing else "bounded, directions accumulate",
                           "direction_source": "declared" if source is None else f"sample {source}"})
    ext.check_invariants()
    return ext


# ---------------------------------------------------------------- sequence space

def _envelope_draw(rng: np.random.Generator, dim: int) -> np.ndarray:
    # square-summable envelope 1/(j+1): a generic element of l^2, not a flat vector
    env = 1.0 / np.arange(1, dim + 1)
    z = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) * env
    return z / np.linalg.norm(z)


def check_pairwise_independent(samples: np.ndarray, tol: float) -> None:
    U = samples / np.linalg.norm(samples, axis=1)[:, None]
    G = np.abs(U @ U.conj().T) ** 2
    np.fill_diagonal(G, 0.0)
    if np.max(G, initial=0.0) > 1.0 - tol:
        i, j = np.unravel_index(int(np.argmax(G)), G.shape)
        raise PreconditionViolated(f"samples {i} and {j} are not linearly independent")


def _line_ok(samples: np.ndarray, f: np.ndarray, tol: float) -> bool:
    ip = samples @ f.conj()
    if np.min(np.abs(ip)) < tol:
        return False
    resid = np.linalg.norm(samples - np.outer(ip, f), axis=1)
    return bool(np.min(resid / np.linalg.norm(samples, axis=1)) >= tol)


def _pairwise_projection_ok(P: np.ndarray, tol: float) -> bool:
    a, b = P[:, 0], P[:, 1]
    det = np.outer(a, b) - np.outer(b, a)
    scale = np.outer(np.linalg.norm(P, axis=1), np.linalg.norm(P, axis=1))
    np.fill_diagonal(det, 1.0)
    np.fill_diagonal(scale, 1.0)
    return bool(np.min(np.abs(det) / scale) >= tol)


@dataclass
class SeparatingPair:
    f0: np.ndarray
    f1: np.ndarray
    draws: int

    def __iter__(self):
        return iter((self.f0, self.f1))


def find_separating_pair(samples: np.ndarray, tol: float = 1e-9, seed: int = 0,
                         budget: int = 10_000) -> SeparatingPair:
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    if np.any(np.linalg.norm(samples, axis=1) == 0):
        raise PreconditionViolated("zero sample vector")
    check_pairwise_independent(samples, tol)
    rng = np.random.default_rng(seed)
    dim = samples.shape[1]
    draws = 0
    while draws < budget:
        draws += 1
        f0 = _envelope_draw(rng, dim)
        if not _line_ok(samples, f0, tol):
            continue
        while draws < budget:
            draws += 1
            b = _envelope_draw(rng, dim)
            b = b - f0 * np.vdot(f0, b)
            nb = np.linalg.norm(b)
            if nb < 1e-8:
                continue
            f1 = b / nb
            if not _line_ok(samples, f1, tol):
                continue
            P = np.column_stack([samples @ f0.conj(), samples @ f1.conj()])
            if _pairwise_projection_ok(P, tol):
                return SeparatingPair(f0, f1, draws)
    raise RejectionBudgetExceeded(f"no separating pair within {budget} draws")


@dataclass
class FunctionalLimit:
    a: np.ndarray
    subsequence: list[int]
    regime: Regime
    values: np.ndarray
    pair: SeparatingPair
    limit_estimate: np.ndarray | None = None


def extract_functional_limit(samples: np.ndarray, tol: float = 1e-9, seed: int = 0,
                             growth_factor: float = 2.0, trend_factor: float = 2.0,
                             min_length: int = 8, budget: int = 10_000,
                             pair: SeparatingPair | None = None) -> FunctionalLimit:
    """Functional ``a`` along which the sample tends to 0 or to infinity."""
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    if pair is None:
        pair = find_separating_pair(samples, tol, seed, budget)
    f0, f1 = pair.f0, pair.f1
    P = np.column_stack([samples @ f0.conj(), samples @ f1.conj()])
    pn = np.linalg.norm(P, axis=1)
    n = len(samples)
    rec = _records(pn, decreasing=False)
    if len(rec) >= min_length and _trend_factor(list(pn[rec]), False) >= growth_factor:
        best = None
        for f in (f0, f1):
            vals = samples @ f.conj()
            r = _records(np.abs(vals), decreasing=False)
            fac = _trend_factor(list(np.abs(vals[r])), False)
            if len(r) >= min_length and (best is None or fac > best[0]):
                best = (fac, f, r, vals)
        if best is None or best[0] < trend_factor:
            raise NoTrend("projection norms grow but neither coordinate has a usable trend")
        _, a, r, vals = best
        ok = [i for i in r if _line_ok(samples[i:i + 1], a, tol)]
        return FunctionalLimit(a, ok, Regime.TO_INFINITY, vals[ok], pair)

    # bounded: the last projection estimates the limit w, and a is orthogonal to it in span(f0, f1)
    w = P[-1]
    if np.linalg.norm(w) < 1e-300:
        coeff = np.array([1.0, 0.0], dtype=complex)
    else:
        coeff = np.array([np.conj(w[1]), -np.conj(w[0])]) / np.linalg.norm(w)
    a = coeff[0] * f0 + coeff[1] * f1
    a = a / np.linalg.norm(a)
    vals = samples @ a.conj()
    cands = [i for i in range(n - 1) if _line_ok(samples[i:i + 1], a, tol)]
    sub = _monotone_subsequence(vals, cands, True, trend_factor, min_length,
                                "no decreasing trend along the orthogonal functional", NoTrend)
    return FunctionalLimit(a, sub, Regime.TO_ZERO, vals[sub], pair, w)


@dataclass
class CompletedBasis:
    """Orthonormal family; column 0 is ``f0`` and columns 1..M are the completion."""

    f: np.ndarray
    phi: list[int]
    eps: list[float]
    dist: list[float]
    draws: int

    def gram_error(self) -> float:
        G = self.f.conj().T @ self.f
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def default_eps(eps1: float, M: int) -> list[float]:
    # harmonic decay keeps every eps_m far above double-precision resolution
    return [eps1 / m for m in range(1, M + 1)]


def _proj_out(G: np.ndarray, v: np.ndarray) -> np.ndarray:
    if G.shape[1] == 0:
        return v
    v = v - G @ (G.conj().T @ v)
    return v - G @ (G.conj().T @ v)


def complete_basis_avoiding_orthogonality(f0: np.ndarray, samples: np.ndarray,
                                          eps: Sequence[float] | None = None, seed: int = 0,
                                          budget: int = 10_000, tol: float = 1e-12,
                                          M: int | None = None) -> CompletedBasis:
    """Complete ``f0`` to an orthonormal basis of span(f0, samples).

    Each new vector is a small random perturbation (size below ``eps[m-1]``)
    of the residual of the next sample in round-robin order, rejected until
    no sample is orthogonal to it.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=complex))
    f0 = np.asarray(f0, dtype=complex)
    f0 = f0 / np.linalg.norm(f0)
    N = len(samples)
    xn = np.linalg.norm(samples, axis=1)
    ip0 = samples @ f0.conj()
    if np.min(np.abs(ip0)) < tol:
        raise PreconditionViolated("a sample is orthogonal to f0")
    resid0 = np.linalg.norm(samples - np.outer(ip0, f0), axis=1)
    if np.min(resid0 / xn) < 1e-12:
        raise PreconditionViolated("a sample lies on the line through f0")
    Q = _span_basis(np.vstack([f0[None, :], samples]))
    r = Q.shape[1]
    if M is None:
        M = r - 1 if eps is None else len(eps)
    if M > r - 1:
        raise PreconditionViolated(f"span has dimension {r}, cannot add {M} vectors")
    phi = [(m - 1) % N for m in range(1, M + 1)]
    if eps is None:
        eps = default_eps(float(resid0[phi[0]]) if M else 1.0, M)
    eps = list(eps)[:M]
    if len(eps) < M or any(e <= 0 for e in eps):
        raise ValueError("need M positive eps values")

    rng = np.random.default_rng(seed)
    # work in coordinates of the span Q
    Xc = samples @ Q.conj()
    cols = [Q.conj().T @ f0]
    dists = []
    draws = 0
    for m in range(1, M + 1):
        G = np.column_stack(cols)
        t = _proj_out(G, Xc[phi[m - 1]])
        while True:
            if draws >= budget:
                raise RejectionBudgetExceeded(f"step {m}: no admissible vector within {budget} draws")
            draws += 1
            d = rng.standard_normal(r) + 1j * rng.standard_normal(r)
            d = _proj_out(G, d)
            d *= eps[m - 1] * rng.uniform(0.25, 0.75) / np.linalg.norm(d)
            ft = t + d
            nf = np.linalg.norm(ft)
            if nf == 0:
                continue
            fm = _proj_out(G, ft / nf)
            fm /= np.linalg.norm(fm)
            if np.min(np.abs(Xc @ fm.conj())) <= tol * 10:
                continue
            Gm = np.column_stack([G, fm])
            res = np.linalg.norm(Xc - (Xc @ Gm.conj()) @ Gm.T, axis=1)
            if m < M and np.min(res / xn) <= 1e-13:
                continue
            if res[phi[m - 1]] > eps[m - 1]:
                continue
            cols.append(fm)
            dists.append(float(res[phi[m - 1]]))
            break
    f = Q @ np.column_stack(cols)
    return CompletedBasis(f, phi, eps, dists, draws)


def extract_basis_infinite(S: ScalarSet, seed: int = 0, tol: float = 1e-9,
                           budget: int = 10_000, trend_factor: float = 2.0,
                           min_length: int = 8) -> BasisExtraction:
    """Functional limit, then a completed orthonormal basis with no orthogonal sample.

    Block ``b`` of the construction corresponds to basis index ``2b`` (the
    even indices); odd indices span the orthogonal complement of the
    sample and carry zero coordinates, so they are not materialised.
    """
    X = S.vectors
    norms = np.linalg.norm(X, axis=1)
    idx = [i for i in range(len(S)) if norms[i] > 0]
    if not idx:
        raise AllZero("every sample vector is zero")
    if len(idx) < min_length:
        raise ExtractionFailed(f"sample too short ({len(idx)} vectors) to exhibit a trend")
    Xs = X[idx]
    s = np.linalg.svd(Xs, compute_uv=False)
    if s[-1] < s[0] * 1e-10 or len(idx) > X.shape[1]:
        raise ExtractionFailed("sample vectors are not linearly independent")
    lim = extract_functional_limit(Xs, tol, seed, trend_factor=trend_factor,
                                   min_length=min_length, budget=budget)
    sub_local = lim.subsequence
    comp = complete_basis_avoiding_orthogonality(lim.a, Xs[sub_local], seed=seed + 1,
                                                 budget=budget)
    coords = change_coordinates(Xs[sub_local], comp.f)
    sub = [idx[i] for i in sub_local]
    M = comp.f.shape[1]
    ext = BasisExtraction(
        "sequence", sub, comp.f, [2 * b for b in range(M)], "odd indices (orthogonal complement)",
        lim.regime, coords, True,
        {"separating_pair_draws": lim.pair.draws, "completion_draws": comp.draws,
         "gram_error": comp.gram_error(), "eps": comp.eps, "dist": comp.dist,
         "phi": comp.phi})
    ext.check_invariants()
    return ext


def extract_basis(S: ScalarSet, seed: int = 0, **kw) -> BasisExtraction:
    if S.ambient == "finite":
        return extract_basis_finite(S, seed=seed)
    return extract_basis_infinite(S, seed=seed, **kw)
