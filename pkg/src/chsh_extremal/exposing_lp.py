"""Search for a Bell functional that exposes a given quantum point.

A functional tangent to the quantum set at ``P(r)`` has zero derivative
along every realisation parameter.  Among those, normalised so that every
deterministic point scores at most 1, the LP maximises ``F . P``.  A value
below 1 means the point is a proper mixture (interior); above 1 the point
is a candidate for an exposed point, confirmed by maximising the quantum
value of ``F`` and checking the maximiser returns ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .bell_spectrum import QuantumMaximum, maximize_quantum_value
from .core_model import ProbabilityPoint, Realization, point_from_realization, point_gradients
from .polytopes import Functional, deterministic_matrix

INTERIOR_TOL = 1e-9
ROUND_TRIP_TOL = 1e-6
NULLSPACE_RCOND = 1e-10
NULLSPACE_ATOL = 1e-10  # gradient directions below this are numerically zero
ENTRY_FLUSH = 1e-14  # subnormal coefficients stall the simplex

EXPOSED_CANDIDATE = "exposed-candidate"
BOUNDARY = "boundary"
INTERIOR = "interior"
DEGENERATE = "degenerate"

PROVEN_EXPOSED = "PROVEN-EXPOSED"
NOT_EXTREMAL = "NOT-EXTREMAL"
INCONCLUSIVE = "INCONCLUSIVE"

PARAMETER_NAMES = ("theta", "a0", "a1", "b0", "b1")


@dataclass
class ExposeProblem:
    point: ProbabilityPoint
    realization: Realization
    gradients: np.ndarray  # 5 x 8 equality rows
    normalization: np.ndarray  # 16 x 8, rows F . P_j <= 1

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_dict(),
            "realization": self.realization.to_dict(),
            "gradients": self.gradients.tolist(),
        }


@dataclass
class ExposeResult:
    functional: Optional[Functional]
    i_max: float
    status: str
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "functional": None if self.functional is None else list(self.functional.coeffs),
            "i_max": self.i_max,
            "status": self.status,
            "message": self.message,
        }


def build_expose_lp(r: Realization) -> ExposeProblem:
    return ExposeProblem(
        point=point_from_realization(r),
        realization=r,
        gradients=point_gradients(r),
        normalization=np.array(deterministic_matrix()),
    )


def tangent_basis(gradients: np.ndarray) -> np.ndarray:
    """Orthonormal basis (8 x k) of functionals orthogonal to every gradient row."""
    _, sv, vh = np.linalg.svd(gradients)
    cutoff = max(NULLSPACE_RCOND * (sv[0] if sv.size else 0.0), NULLSPACE_ATOL)
    rank = int((sv > cutoff).sum())
    return vh[rank:].T.copy()


def _status(i_max: float) -> str:
    if i_max < 1.0 - INTERIOR_TOL:
        return INTERIOR
    if i_max > 1.0 + INTERIOR_TOL:
        return EXPOSED_CANDIDATE
    return BOUNDARY


def solve_expose_lp(prob: ExposeProblem) -> ExposeResult:
    """Maximise ``F . P`` over the tangent functionals with local value at most 1.

    The five equalities are removed by restricting ``F`` to the null space of
    the gradient rows, leaving a small LP in the free coordinates.
    """
    basis = tangent_basis(prob.gradients)
    if basis.shape[1] == 0:
        return ExposeResult(Functional((0.0,) * 8), 0.0, INTERIOR, "only the zero functional is tangent")
    basis[np.abs(basis) < ENTRY_FLUSH] = 0.0
    p = prob.point.vector
    a_ub = prob.normalization @ basis
    a_ub[np.abs(a_ub) < ENTRY_FLUSH] = 0.0
    for method in ("highs", "highs-ipm"):
        res = linprog(
            c=-(basis.T @ p),
            A_ub=a_ub,
            b_ub=np.ones(len(prob.normalization)),
            bounds=[(None, None)] * basis.shape[1],
            method=method,
        )
        if res.status != 4:  # 4: numerical difficulties, retry with interior point
            break
    if res.status != 0:
        return ExposeResult(None, math.nan, DEGENERATE, res.message)
    f = basis @ res.x
    # remove the solver's primal slack so the local bound holds exactly
    f = f / max(1.0, float((prob.normalization @ f).max()))
    i_max = float(f @ p)
    return ExposeResult(Functional(tuple(f)), i_max, _status(i_max), res.message)


def expose(r: Realization) -> ExposeResult:
    return solve_expose_lp(build_expose_lp(r))


@dataclass
class Certificate:
    verdict: str
    lp: ExposeResult
    maximum: Optional[QuantumMaximum]
    round_trip_distance: Optional[float]
    unique: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "certificate": self.verdict,
            "functional": None if self.lp.functional is None else list(self.lp.functional.coeffs),
            "i_max": self.lp.i_max,
            "status": self.lp.status,
            "round_trip_distance": self.round_trip_distance,
            "unique": self.unique,
            "beta_max": None if self.maximum is None else self.maximum.beta_max,
        }


def certify_exposed(r: Realization, grid_n: int = 64) -> Certificate:
    lp = expose(r)
    if lp.status == INTERIOR:
        return Certificate(NOT_EXTREMAL, lp, None, None, None)
    if lp.status != EXPOSED_CANDIDATE or lp.functional is None:
        return Certificate(INCONCLUSIVE, lp, None, None, None)
    q = maximize_quantum_value(lp.functional, grid_n=grid_n)
    target = point_from_realization(r).vector
    if q.realization is None:
        return Certificate(INCONCLUSIVE, lp, q, None, q.unique)
    dist = float(np.abs(point_from_realization(q.realization).vector - target).max())
    verdict = PROVEN_EXPOSED if (q.unique and not q.boundary and dist < ROUND_TRIP_TOL) else INCONCLUSIVE
    return Certificate(verdict, lp, q, dist, q.unique)
