"""Reference computations used only by the tests.

Everything here is computed a second way from first principles (explicit
states, Pauli matrices, generic optimisers), independent of the package
code paths being checked.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

I2 = np.eye(2)
PX = np.array([[0.0, 1.0], [1.0, 0.0]])
PZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def obs(t: float) -> np.ndarray:
    return math.cos(t) * PZ + math.sin(t) * PX


def state(theta: float) -> np.ndarray:
    psi = np.zeros(4)
    psi[0] = math.cos(theta / 2)
    psi[3] = math.sin(theta / 2)
    return psi


def expectation_point(theta, a0, a1, b0, b1) -> np.ndarray:
    """8-vector from <psi| A (x) B |psi> with explicit Kronecker products."""
    psi = state(theta)
    A = [obs(a0), obs(a1)]
    B = [obs(b0), obs(b1)]
    ev = lambda m: float(psi @ m @ psi)  # noqa: E731
    marg = [ev(np.kron(A[0], I2)), ev(np.kron(A[1], I2)), ev(np.kron(I2, B[0])), ev(np.kron(I2, B[1]))]
    corr = [ev(np.kron(A[x], B[y])) for x in (0, 1) for y in (0, 1)]
    return np.array(marg + corr)


def born_probabilities(theta, a0, a1, b0, b1) -> np.ndarray:
    """p[a, b, x, y] from projectors (1 + (-1)^k O)/2 on the explicit state."""
    psi = state(theta)
    A = [obs(a0), obs(a1)]
    B = [obs(b0), obs(b1)]
    out = np.empty((2, 2, 2, 2))
    for a, b, x, y in itertools.product((0, 1), repeat=4):
        pa = (I2 + (-1) ** a * A[x]) / 2
        pb = (I2 + (-1) ** b * B[y]) / 2
        out[a, b, x, y] = psi @ np.kron(pa, pb) @ psi
    return out


def bell_matrix(coeffs, a0, a1, b0, b1) -> np.ndarray:
    A = [obs(a0), obs(a1)]
    B = [obs(b0), obs(b1)]
    terms = [np.kron(A[0], I2), np.kron(A[1], I2), np.kron(I2, B[0]), np.kron(I2, B[1])]
    terms += [np.kron(A[x], B[y]) for x in (0, 1) for y in (0, 1)]
    return sum(c * t for c, t in zip(coeffs, terms))


def quantum_value(coeffs, starts: int = 24, seed: int = 0) -> float:
    """Max over all four angles of the top eigenvalue, by multistart Nelder-Mead."""
    rng = np.random.default_rng(seed)

    def neg(v):
        return -np.linalg.eigvalsh(bell_matrix(coeffs, *v))[-1]

    best = -math.inf
    for _ in range(starts):
        x0 = rng.uniform(0, 2 * math.pi, 4)
        res = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        best = max(best, -res.fun)
    return best


def deterministic_vectors() -> list[np.ndarray]:
    out = []
    for c0, c1, d0, d1 in itertools.product((1, -1), repeat=4):
        out.append(np.array([c0, c1, d0, d1, c0 * d0, c0 * d1, c1 * d0, c1 * d1], dtype=float))
    return out


def finite_difference_gradients(r, h: float = 1e-6) -> np.ndarray:
    params = np.array([r.theta, r.a0, r.a1, r.b0, r.b1])
    rows = []
    for k in range(5):
        e = np.zeros(5)
        e[k] = h
        rows.append((expectation_point(*(params + e)) - expectation_point(*(params - e))) / (2 * h))
    return np.array(rows)


def random_realization_tuple(rng) -> tuple[float, ...]:
    return (float(rng.uniform(0, math.pi / 2)),) + tuple(float(t) for t in rng.uniform(0, 2 * math.pi, 4))
