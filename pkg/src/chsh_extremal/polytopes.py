"""Local and non-signalling polytopes of the CHSH scenario."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .core_model import OUTCOME_LABELS, ProbabilityPoint, _scaled_probabilities

TIE_TOL = 1e-12
FACET_TOL = 1e-9


@dataclass(frozen=True)
class Functional:
    """Bell functional coefficients ordered like a probability point."""

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in self.coeffs)
        if len(c) != 8:
            raise ValueError(f"a functional has 8 coefficients, got {len(c)}")
        if not all(math.isfinite(v) for v in c):
            raise ValueError(f"non-finite functional coefficient in {c}")
        object.__setattr__(self, "coeffs", c)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.coeffs)

    def value(self, p: ProbabilityPoint | Sequence[float]) -> float:
        vec = p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)
        return float(self.vector @ vec)

    def scaled(self, k: float) -> "Functional":
        return Functional(tuple(k * c for c in self.coeffs))


CHSH = Functional((0, 0, 0, 0, 1, 1, 1, -1))


@dataclass
class FunctionalValues:
    beta_L: float
    beta_NS: float
    beta_Q: Optional[float] = None
    maximizers: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "beta_L": self.beta_L,
            "beta_NS": self.beta_NS,
            "beta_Q": self.beta_Q,
            "maximizers": list(self.maximizers),
        }


@lru_cache(maxsize=None)
def _deterministic_matrix() -> np.ndarray:
    rows = []
    # binary counting over (c0, c1, d0, d1), +1 -> bit 0, c0 most significant
    for c0, c1, d0, d1 in itertools.product((1, -1), repeat=4):
        rows.append((c0, c1, d0, d1, c0 * d0, c0 * d1, c1 * d0, c1 * d1))
    m = np.array(rows, dtype=float)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _pr_matrix() -> np.ndarray:
    rows = [
        (0, 0, 0, 0) + e
        for e in itertools.product((1, -1), repeat=4)
        if e[0] * e[1] * e[2] * e[3] == -1
    ]
    m = np.array(rows, dtype=float)
    m.setflags(write=False)
    return m


def deterministic_matrix() -> np.ndarray:
    """16x8 array of deterministic points in enumeration order."""
    return _deterministic_matrix()


def vertex_matrix() -> np.ndarray:
    """24x8 array: the 16 deterministic points followed by the 8 PR boxes."""
    return np.vstack([_deterministic_matrix(), _pr_matrix()])


def deterministic_points() -> list[ProbabilityPoint]:
    return [ProbabilityPoint.from_vector(row) for row in _deterministic_matrix()]


def deterministic_index(vec: Sequence[float]) -> int:
    diffs = np.abs(_deterministic_matrix() - np.asarray(vec, dtype=float)).max(axis=1)
    idx = int(np.argmin(diffs))
    if diffs[idx] > 1e-12:
        raise ValueError(f"{list(vec)} is not a deterministic point")
    return idx


def pr_boxes() -> list[ProbabilityPoint]:
    return [ProbabilityPoint.from_vector(row) for row in _pr_matrix()]


def _tie_threshold(best: float) -> float:
    return TIE_TOL * max(1.0, abs(best))


def local_value(f: Functional) -> FunctionalValues:
    values = _deterministic_matrix() @ f.vector
    best = float(values.max())
    maximizers = [int(i) for i in np.flatnonzero(values >= best - _tie_threshold(best))]
    return FunctionalValues(beta_L=best, beta_NS=nonsignalling_value(f), maximizers=maximizers)


def nonsignalling_value(f: Functional) -> float:
    return float((vertex_matrix() @ f.vector).max())


def chsh_values(p: ProbabilityPoint | Sequence[float]) -> np.ndarray:
    """Left-hand sides of the eight CHSH inequalities (each bounded by 2 locally)."""
    vec = p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)
    corr = vec[4:8]
    out = []
    for k in range(4):
        signs = np.ones(4)
        signs[k] = -1.0
        s = float(signs @ corr)
        out.extend((s, -s))
    return np.array(out)


def is_nonlocal(p: ProbabilityPoint | Sequence[float], tol: float = 1e-9) -> bool:
    return bool(chsh_values(p).max() > 2.0 + tol)


def facet_residuals(p: ProbabilityPoint | Sequence[float]) -> np.ndarray:
    """``1 + (-1)^a <A_x> + (-1)^b <B_y> + (-1)^(a+b) <A_x B_y>`` in ``OUTCOME_LABELS`` order."""
    vec = p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)
    scaled = _scaled_probabilities(vec)
    return np.array([scaled[label] for label in OUTCOME_LABELS])


def touched_facets(p: ProbabilityPoint | Sequence[float], tol: float = FACET_TOL) -> list[tuple[int, int, int, int]]:
    """Labels ``(a, b, x, y)`` of the non-negativity facets the point lies on."""
    res = facet_residuals(p)
    return [label for label, r in zip(OUTCOME_LABELS, res) if abs(r) < tol]


@dataclass
class LocalDecomposition:
    weights: list[float]
    vertex_indices: list[int]
    reconstruction_error: float

    def vertices(self) -> np.ndarray:
        return _deterministic_matrix()[self.vertex_indices]

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "vertex_indices": list(self.vertex_indices),
            "vertices": self.vertices().tolist(),
            "reconstruction_error": self.reconstruction_error,
        }


def local_decomposition_witness(
    p: ProbabilityPoint | Sequence[float], tol: float = 1e-10
) -> Optional[LocalDecomposition]:
    """Split a point of the form ``(1, ca, 1, cb, 1, cb, ca, 1 - |ca - cb|)`` into deterministic points.

    Returns ``None`` ("not found") when the point does not have that form.
    """
    vec = p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)
    ca, cb = float(vec[1]), float(vec[3])
    template = np.array([1.0, ca, 1.0, cb, 1.0, cb, ca, 1.0 - abs(ca - cb)])
    if np.abs(vec - template).max() > tol or abs(ca) > 1.0 + tol or abs(cb) > 1.0 + tol:
        return None
    if ca >= cb:
        weights = [(1.0 + cb) / 2.0, (ca - cb) / 2.0, (1.0 - ca) / 2.0]
        verts = [(1, 1, 1, 1), (1, 1, 1, -1), (1, -1, 1, -1)]
    else:
        weights = [(1.0 + ca) / 2.0, (cb - ca) / 2.0, (1.0 - cb) / 2.0]
        verts = [(1, 1, 1, 1), (1, -1, 1, 1), (1, -1, 1, -1)]
    det = _deterministic_matrix()
    indices = [deterministic_index(_local_vector(*v)) for v in verts]
    recon = np.asarray(weights) @ det[indices]
    return LocalDecomposition(weights, indices, float(np.abs(recon - vec).max()))


def _local_vector(c0: int, c1: int, d0: int, d1: int) -> tuple[int, ...]:
    return (c0, c1, d0, d1, c0 * d0, c0 * d1, c1 * d0, c1 * d1)


def functional_from(values: Iterable[float]) -> Functional:
    return Functional(tuple(values))
