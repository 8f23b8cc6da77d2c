import sys

import numpy as np
import pytest

from gammadyn.construction import BuildConfig, build_counterexample
from gammadyn.scalar_sets import Asymptotics, ScalarSet


def pivot_to_zero_finite(n: int = 200) -> ScalarSet:
    k = np.arange(1, n + 1)
    return ScalarSet("finite", np.stack([np.ones(n), 1 / k], axis=1))


def shrinking_tail_sequence(n: int = 256) -> ScalarSet:
    """``x_n = e_0 + e_n / n``."""
    X = np.zeros((n, n + 1), dtype=complex)
    X[:, 0] = 1
    X[np.arange(n), np.arange(1, n + 1)] = 1 / np.arange(1, n + 1)
    return ScalarSet("sequence", X)


def growing_head_sequence(n: int = 256) -> ScalarSet:
    """``x_n = n e_0 + e_n``."""
    X = np.zeros((n, n + 1), dtype=complex)
    X[:, 0] = np.arange(1, n + 1)
    X[np.arange(n), np.arange(1, n + 1)] = 1
    return ScalarSet("sequence", X)


def orthonormal_sequence(n: int = 64) -> ScalarSet:
    return ScalarSet("sequence", np.eye(n, dtype=complex))


def annulus_sample(rng: np.random.Generator, dim: int = 3, n: int = 60) -> ScalarSet:
    """Random direction times moduli in [1, 2] and random phases."""
    d = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    d /= np.linalg.norm(d)
    r = rng.uniform(1, 2, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return ScalarSet("finite", r[:, None] * d[None, :])


def random_noncoverable(rng: np.random.Generator, dim: int = 3, n: int = 200) -> ScalarSet:
    """Random unitary image of ``(c/n, 1, ...)`` or ``(c n, 1, ...)``."""
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    k = np.arange(1, n + 1)
    growing = bool(rng.integers(2))
    pivot = k * rng.uniform(0.5, 2) if growing else rng.uniform(0.5, 2) / k
    raw = np.ones((n, dim), dtype=complex) * np.exp(1j * rng.uniform(0, 2 * np.pi, dim))
    raw[:, 0] = pivot
    kind = "modulus_to_infinity" if growing else "modulus_to_zero"
    return ScalarSet("finite", raw @ Q.T, Asymptotics(kind))


@pytest.fixture(scope="session")
def finite_bundle():
    return build_counterexample(pivot_to_zero_finite(), BuildConfig(K=12))


@pytest.fixture(scope="session")
def zero_bundle():
    return build_counterexample(shrinking_tail_sequence(), BuildConfig(K=10))


@pytest.fixture(scope="session")
def infinity_bundle():
    return build_counterexample(growing_head_sequence(), BuildConfig(K=10))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
