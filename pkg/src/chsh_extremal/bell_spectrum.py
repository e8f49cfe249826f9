"""Bell operators, their spectra and the two-angle quantum-value search.

With ``A0 = B0 = Z`` and ``A1``, ``B1`` rotated by ``a``, ``b`` in the X-Z
plane the quantum value of a functional is the maximum over ``(a, b) in
[0, pi]^2`` of the top eigenvalue of the 4x4 Bell operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core_model import Realization, point_from_realization
from .polytopes import Functional

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])

# uniqueness of the maximiser at floating-point scale
UNIQUE_VALUE_TOL = 1e-7
UNIQUE_ANGLE_TOL = 1e-3
# top-eigenvalue gap below which the maximiser is treated as degenerate
DEGENERACY_TOL = 1e-9
BOUNDARY_TOL = 1e-6

MAX_CANDIDATES = 8
MAX_NEWTON_STEPS = 60


def observable(t: float) -> np.ndarray:
    """``cos(t) Z + sin(t) X``."""
    return math.cos(t) * Z + math.sin(t) * X


def bell_operator_from_observables(
    f: Functional, a_obs: Sequence[np.ndarray], b_obs: Sequence[np.ndarray]
) -> np.ndarray:
    c = f.coeffs
    w = (
        c[0] * np.kron(a_obs[0], I2)
        + c[1] * np.kron(a_obs[1], I2)
        + c[2] * np.kron(I2, b_obs[0])
        + c[3] * np.kron(I2, b_obs[1])
    )
    for k, (x, y) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        w = w + c[4 + k] * np.kron(a_obs[x], b_obs[y])
    return w


def bell_operator_for_angles(f: Functional, a0: float, a1: float, b0: float, b1: float) -> np.ndarray:
    return bell_operator_from_observables(
        f, (observable(a0), observable(a1)), (observable(b0), observable(b1))
    )


@dataclass(frozen=True)
class BellOperator:
    entries: np.ndarray
    functional: Functional
    a: float
    b: float

    def spectrum(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.entries)[::-1]


def build_bell_operator(f: Functional, a: float, b: float) -> BellOperator:
    if not (-1e-12 <= a <= math.pi + 1e-12 and -1e-12 <= b <= math.pi + 1e-12):
        raise ValueError(f"angles must lie in [0, pi], got a={a}, b={b}")
    w = bell_operator_for_angles(f, 0.0, a, 0.0, b)
    w = 0.5 * (w + w.T)
    return BellOperator(w, f, float(a), float(b))


def _as_matrix(w) -> np.ndarray:
    return w.entries if isinstance(w, BellOperator) else np.asarray(w, dtype=float)


def top_eigenpair(w) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a real unit eigenvector (largest |component| made positive)."""
    m = _as_matrix(w)
    vals, vecs = np.linalg.eigh(m)
    v = vecs[:, -1]
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    return float(vals[-1]), v


def top_gap(w) -> float:
    vals = np.linalg.eigvalsh(_as_matrix(w))
    return float(vals[-1] - vals[-2])


# --------------------------------------------------------------------------
# Two-angle maximisation
# --------------------------------------------------------------------------


def _fold(t: float) -> float:
    # lambda_max is even about 0 and pi in each angle, so folding keeps the value
    return math.acos(math.cos(t))


def _grid_values(f: Functional, grid: np.ndarray) -> np.ndarray:
    c = f.coeffs
    n = len(grid)
    a = grid[:, None, None, None]
    b = grid[None, :, None, None]
    za, xa = np.cos(a), np.sin(a)
    zb, xb = np.cos(b), np.sin(b)
    ZI, XI, IZ, IX = np.kron(Z, I2), np.kron(X, I2), np.kron(I2, Z), np.kron(I2, X)
    ZZ, ZX, XZ, XX = np.kron(Z, Z), np.kron(Z, X), np.kron(X, Z), np.kron(X, X)
    A1 = za * ZI + xa * XI  # A1 (x) 1
    B1 = zb * IZ + xb * IX  # 1 (x) B1
    w = (
        c[0] * ZI
        + c[1] * A1
        + c[2] * IZ
        + c[3] * B1
        + c[4] * ZZ
        + c[5] * (zb * ZZ + xb * ZX)
        + c[6] * (za * ZZ + xa * XZ)
        + c[7] * (za * zb * ZZ + za * xb * ZX + xa * zb * XZ + xa * xb * XX)
    )
    w = np.broadcast_to(w, (n, n, 4, 4))
    return np.linalg.eigvalsh(w)[..., -1]


def _operator(f: Functional, a: float, b: float) -> np.ndarray:
    return bell_operator_for_angles(f, 0.0, a, 0.0, b)


def _gradient(f: Functional, a: float, b: float) -> tuple[float, np.ndarray]:
    """Top eigenvalue and its gradient in ``(a, b)`` (Hellmann-Feynman)."""
    lam, v = top_eigenpair(_operator(f, a, b))
    c = f.coeffs
    da = np.array([[-math.sin(a), math.cos(a)], [math.cos(a), math.sin(a)]])  # d A1 / da
    db = np.array([[-math.sin(b), math.cos(b)], [math.cos(b), math.sin(b)]])
    A1, B1 = observable(a), observable(b)
    wa = c[1] * np.kron(da, I2) + c[6] * np.kron(da, Z) + c[7] * np.kron(da, B1)
    wb = c[3] * np.kron(I2, db) + c[5] * np.kron(Z, db) + c[7] * np.kron(A1, db)
    return lam, np.array([v @ wa @ v, v @ wb @ v])


def _value(f: Functional, a: float, b: float) -> float:
    return float(np.linalg.eigvalsh(_operator(f, a, b))[-1])


def _refine(f: Functional, a: float, b: float, step0: float, tol: float) -> tuple[float, float, float]:
    """Newton ascent on a local quadratic model with a finite-difference Hessian."""
    x = np.array([a, b], dtype=float)
    lam, g = _gradient(f, *x)
    h = 1e-5
    radius = step0
    for _ in range(MAX_NEWTON_STEPS):
        hess = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            hess[:, k] = (_gradient(f, *(x + e))[1] - _gradient(f, *(x - e))[1]) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        evals = np.linalg.eigvalsh(hess)
        if evals[-1] < -1e-12:
            step = -np.linalg.solve(hess, g)
        else:
            gn = float(np.linalg.norm(g))
            step = g / gn * radius if gn > 0 else np.zeros(2)
        norm = float(np.linalg.norm(step))
        if norm > radius:
            step *= radius / norm
            norm = radius
        accepted = False
        while norm > 0.1 * tol:
            trial = x + step
            lam_t, g_t = _gradient(f, *trial)
            if lam_t >= lam - 1e-15:
                x, lam, g = trial, lam_t, g_t
                accepted = True
                break
            step *= 0.5
            norm *= 0.5
        if not accepted or norm < tol:
            break
        radius = max(2.0 * norm, tol)
    a_f, b_f = _fold(x[0]), _fold(x[1])
    return _value(f, a_f, b_f), a_f, b_f


def _grid_local_maxima(values: np.ndarray) -> list[tuple[int, int]]:
    n = values.shape[0]
    # reflect at the boundaries: lambda_max is even about 0 and pi
    padded = np.pad(values, 1, mode="reflect")
    center = padded[1:-1, 1:-1]
    is_max = np.ones_like(values, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_max &= center >= padded[1 + di : 1 + di + n, 1 + dj : 1 + dj + n] - 1e-14
    idx = np.argwhere(is_max)
    order = np.argsort(-values[is_max], kind="stable")
    return [tuple(int(t) for t in idx[k]) for k in order]


@dataclass
class QuantumMaximum:
    beta_max: float
    a_star: float
    b_star: float
    eigenvector: np.ndarray
    realization: Optional[Realization]
    unique: bool
    boundary: bool
    degenerate: bool = False
    candidates: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def nonlocal_candidate(self) -> bool:
        return not self.boundary

    def to_dict(self) -> dict:
        return {
            "beta_max": self.beta_max,
            "a_star": self.a_star,
            "b_star": self.b_star,
            "eigenvector": self.eigenvector.tolist(),
            "realization": None if self.realization is None else self.realization.to_dict(),
            "point": None
            if self.realization is None
            else point_from_realization(self.realization).to_dict(),
            "unique": self.unique,
            "boundary_optimum": self.boundary,
            "degenerate_top_eigenvalue": self.degenerate,
        }


def maximize_quantum_value(f: Functional, grid_n: int = 64, refine_tol: float = 1e-10) -> QuantumMaximum:
    """Grid search over ``(a, b) in [0, pi]^2`` followed by local Newton refinement.

    ``unique`` is False when a second local maximum within ``UNIQUE_VALUE_TOL``
    of the best value sits more than ``UNIQUE_ANGLE_TOL`` away, or when the
    top eigenvalue at the optimum is degenerate.  ``boundary`` flags an
    optimum with ``a`` or ``b`` at 0 or pi (local statistics).
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    if refine_tol <= 0:
        raise ValueError("refine_tol must be positive")
    grid = np.linspace(0.0, math.pi, grid_n)
    values = _grid_values(f, grid)
    spacing = grid[1] - grid[0]
    starts = _grid_local_maxima(values)[:MAX_CANDIDATES]
    refined = []
    for i, j in starts:
        lam, a, b = _refine(f, grid[i], grid[j], spacing, refine_tol)
        lam = max(lam, float(values[i, j]))
        if lam == float(values[i, j]) and lam > _value(f, a, b):
            a, b = float(grid[i]), float(grid[j])
        refined.append((lam, a, b))
    refined.sort(key=lambda t: -t[0])
    best, a_star, b_star = refined[0]

    unique = True
    for lam, a, b in refined[1:]:
        if lam >= best - UNIQUE_VALUE_TOL and math.hypot(a - a_star, b - b_star) > UNIQUE_ANGLE_TOL:
            unique = False
            break

    w = _operator(f, a_star, b_star)
    _, v = top_eigenpair(w)
    degenerate = top_gap(w) < DEGENERACY_TOL
    if degenerate:
        unique = False
    boundary = any(t < BOUNDARY_TOL or t > math.pi - BOUNDARY_TOL for t in (a_star, b_star))
    realization = canonicalize_realization(v, a_star, b_star)
    return QuantumMaximum(
        beta_max=best,
        a_star=a_star,
        b_star=b_star,
        eigenvector=v,
        realization=realization,
        unique=unique,
        boundary=boundary,
        degenerate=degenerate,
        candidates=refined,
    )


# --------------------------------------------------------------------------
# Canonical form of the optimal state
# --------------------------------------------------------------------------


def _bloch_angle(m: np.ndarray) -> float:
    return math.atan2(0.5 * float(np.trace(m @ X)), 0.5 * float(np.trace(m @ Z)))


def canonicalize_realization(eigenvector, a: float, b: float) -> Realization:
    """Rotate a real two-qubit state into ``cos(t/2)|00> + sin(t/2)|11>``.

    The Schmidt bases of a real vector are real, so each side is mapped to the
    computational basis by a real orthogonal matrix; observables stay in the
    X-Z plane and their new angles are read off directly.
    """
    v = np.asarray(eigenvector)
    if v.shape != (4,):
        raise ValueError(f"expected a 4-vector, got shape {v.shape}")
    if np.iscomplexobj(v):
        k = int(np.argmax(np.abs(v)))
        v = v * (abs(v[k]) / v[k])
        if np.abs(v.imag).max() > 1e-10:
            raise ValueError("eigenvector has non-negligible imaginary content")
        v = v.real
    v = v.astype(float)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"eigenvector must be normalised, got norm {norm}")
    v = v / norm
    u, s, vt = np.linalg.svd(v.reshape(2, 2))
    # (u^T (x) vt) v = s0 |00> + s1 |11>
    oa, ob = u.T, vt
    theta = 2.0 * math.atan2(s[1], s[0])
    angles_a = [_bloch_angle(oa @ observable(t) @ oa.T) for t in (0.0, a)]
    angles_b = [_bloch_angle(ob @ observable(t) @ ob.T) for t in (0.0, b)]
    return Realization(min(theta, math.pi / 2), angles_a[0], angles_a[1], angles_b[0], angles_b[1])


# --------------------------------------------------------------------------
# Moment check of stated eigenvalues
# --------------------------------------------------------------------------


@dataclass
class MomentCheck:
    m2: float
    m4: float
    lambda1: float
    lambda2: float
    odd_trace_residual: float
    m2_residual: float
    m4_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def eigenvalues_from_moments(m2: float, m4: float) -> tuple[float, float]:
    """Non-negative ``(l1, l2)``, ``l1 >= l2``, with ``2(l1^2+l2^2) = m2``, ``2(l1^4+l2^4) = m4``."""
    disc = math.sqrt(max(4.0 * m4 - m2 * m2, 0.0))
    return (
        0.5 * math.sqrt(max(m2 + disc, 0.0)),
        0.5 * math.sqrt(max(m2 - disc, 0.0)),
    )


def moment_verify(f: Functional, a: float, b: float, lambda1: float, lambda2: float) -> MomentCheck:
    """Check claimed eigenvalues ``{+-lambda1, +-lambda2}`` through Tr W^k, k = 1..4."""
    c = f.coeffs
    if c[2] == 0.0 and c[3] == 0.0:
        flip = np.kron(np.array([[0.0, -1.0], [1.0, 0.0]]), I2)  # i Y (x) 1, real
    elif c[0] == 0.0 and c[1] == 0.0:
        flip = np.kron(I2, np.array([[0.0, -1.0], [1.0, 0.0]]))
    else:
        raise ValueError("moment check needs vanishing Bob (or Alice) marginal coefficients")
    w = build_bell_operator(f, a, b).entries
    # sanity: the Y-reflection negates W
    assert np.abs(flip @ w @ flip.T + w).max() < 1e-10
    w2 = w @ w
    m1 = float(np.trace(w))
    m2 = float(np.trace(w2))
    m3 = float(np.trace(w2 @ w))
    m4 = float(np.trace(w2 @ w2))
    odd = max(abs(m1), abs(m3))
    r2 = abs(m2 - 2.0 * (lambda1**2 + lambda2**2)) / max(1.0, abs(m2))
    r4 = abs(m4 - 2.0 * (lambda1**4 + lambda2**4)) / max(1.0, abs(m4))
    l1, l2 = eigenvalues_from_moments(m2, m4)
    return MomentCheck(
        m2=m2,
        m4=m4,
        lambda1=l1,
        lambda2=l2,
        odd_trace_residual=odd,
        m2_residual=r2,
        m4_residual=r4,
        passed=odd < 1e-10 and r2 < 1e-9 and r4 < 1e-9,
    )
