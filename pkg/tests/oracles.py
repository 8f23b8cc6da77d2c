"""Independent dense reference implementations used as test oracles.

Nothing here imports the shift or schedule code: sequences live on a fixed
index window and shifts are applied one step at a time from the weight
tables, the way one would do it by hand.
"""

import numpy as np

WINDOW = 450
IDX = np.arange(-WINDOW, WINDOW + 1)

# (value for the upper index range, value otherwise); backward split is j > 0,
# forward split is j >= 0
BACKWARD = {"V": (2.0, 0.5), "W1": (2.0, 1.0), "W2": (1.0, 0.5)}
FORWARD = {"NU": (0.5, 2.0), "OMEGA1": (0.5, 1.0), "OMEGA2": (1.0, 2.0)}


def dense(seq) -> np.ndarray:
    x = np.zeros(IDX.size, dtype=complex)
    for j, c in seq.items():
        x[j + WINDOW] = c
    return x


def back_step(x: np.ndarray, name: str) -> np.ndarray:
    hi, lo = BACKWARD[name]
    w = np.where(IDX > 0, hi, lo)
    out = np.zeros_like(x)
    out[:-1] = w[1:] * x[1:]  # (Bx)(j) = w_{j+1} x(j+1)
    assert x[0] == 0, "window too small"
    return out


def fwd_step(x: np.ndarray, name: str) -> np.ndarray:
    hi, lo = FORWARD[name]
    nu = np.where(IDX >= 0, hi, lo)
    out = np.zeros_like(x)
    out[1:] = nu[:-1] * x[:-1]  # (Fx)(j+1) = nu_j x(j)
    assert x[-1] == 0, "window too small"
    return out


def norms_along(x: np.ndarray, step, name: str, count: int) -> list[float]:
    """``[||x||, ||S x||, ..., ||S^count x||]`` for the single step ``S``."""
    out = [float(np.linalg.norm(x))]
    for _ in range(count):
        x = step(x, name)
        out.append(float(np.linalg.norm(x)))
    return out


def brute_force_finite_schedule(coords: np.ndarray, targets, K: int, m_max: int = 200,
                                phi_max: int = 200, margin: float = 1e-9):
    """Lexicographically least ``(phi, m)`` per step, scanning every pair.

    Finite setting, pivot tending to zero: block 0 uses W1/OMEGA1, the rest V/NU.
    No pruning, so this also checks that the production search never skips
    the least admissible pair.
    """
    blocks = coords.shape[1]
    prof = {0: ("W1", "OMEGA1")}
    phi, m = [], []

    def lt(lhs, rhs):
        return lhs < rhs - margin * abs(rhs)

    for k in range(K + 1):
        rhs = 2.0 ** -k
        fwd_k, back_j = {}, {}
        for i in range(blocks):
            bw, fw = prof.get(i, ("V", "NU"))
            fwd_k[i] = norms_along(dense(targets[k][i]), fwd_step, fw, m_max)
            back_j[i] = [norms_along(dense(targets[j][i]), back_step, bw, m_max) for j in range(k)]
        hit = None
        for f in range(phi[-1] + 1 if phi else 0, min(phi_max, len(coords))):
            lam = coords[f]
            for mk in range(m[-1] + 1 if m else 1, m_max + 1):
                ok = True
                for i in range(blocks):
                    if not lt(fwd_k[i][mk] / abs(lam[i]), rhs):
                        ok = False
                    for j in range(k):
                        d = mk - m[j]
                        if not lt(abs(coords[phi[j]][i] / lam[i]) * fwd_k[i][d], rhs):
                            ok = False
                        if not lt(abs(lam[i] / coords[phi[j]][i]) * back_j[i][j][d], rhs):
                            ok = False
                if ok:
                    hit = (f, mk)
                    break
            if hit:
                break
        if hit is None:
            return None
        phi.append(hit[0])
        m.append(hit[1])
    return phi, m


def dense_orbit_error(bundle, k: int) -> float:
    """``||T^{m_k}(sum_b lam_b z_b) - y_k||`` with dense single steps."""
    op = bundle.operator
    lam = bundle.extraction.coords[bundle.schedule.phi[k]]
    mk = bundle.schedule.m[k]
    total = 0.0
    for phys in range(op.blocks):
        x = np.zeros(IDX.size, dtype=complex)
        for b, z in enumerate(bundle.family.z_tilde):
            if phys in z:
                x += lam[b] * dense(z[phys])
        name = op.block0 if phys == 0 else op.tail
        for _ in range(mk):
            x = back_step(x, name)
        x -= dense(bundle.physical_target(k)[phys])
        total += float(np.vdot(x, x).real)
    return total ** 0.5
