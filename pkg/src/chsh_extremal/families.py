"""Closed-form quantum values for two one-parameter extensions of CHSH.

Double-tilted:  F = (alpha cos(phi/2), alpha sin(phi/2), 0, 0, 1, 1, 1, -1)
Wolfe-Yelin:    F = (alpha0, alpha0, alpha1, 0, 1, 1, 1, -1)

Admissibility conditions that have no analytic proof are evaluated
numerically per parameter point; solutions record this in
``admissibility_check = "numeric"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bell_spectrum import build_bell_operator, canonicalize_realization, top_eigenpair
from .core_model import ProbabilityPoint, Realization, point_from_realization
from .polytopes import Functional, local_value


# --------------------------------------------------------------------------
# Double-tilted CHSH
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleTiltedParams:
    """Parameters reduced to ``alpha in [0, 2)``, ``phi in [0, pi/2]``.

    The marginal coefficients ``(c0, c1) = alpha (cos(phi/2), sin(phi/2))``
    can be permuted and sign-flipped by relabelling settings and outcomes
    without changing the correlator part, so only ``c0 >= c1 >= 0`` is kept.
    """

    alpha: float
    phi: float

    def __post_init__(self) -> None:
        alpha, phi = float(self.alpha), float(self.phi)
        if not (math.isfinite(alpha) and math.isfinite(phi)):
            raise ValueError("alpha and phi must be finite")
        c = sorted((abs(alpha * math.cos(phi / 2)), abs(alpha * math.sin(phi / 2))), reverse=True)
        alpha_r = math.hypot(c[0], c[1])
        phi_r = 2.0 * math.atan2(c[1], c[0]) if alpha_r > 0 else 0.0
        if alpha_r >= 2.0:
            raise ValueError(f"alpha must satisfy |alpha| < 2, got {alpha}")
        object.__setattr__(self, "alpha", alpha_r)
        object.__setattr__(self, "phi", phi_r)


@dataclass
class DoubleTiltedSolution:
    params: DoubleTiltedParams
    beta_L: float
    beta_Q: Optional[float]
    cos_b_opt: float
    y1: float
    y2: float
    beta_Q1: float
    beta_Q2: float
    admissible: bool
    a_opt: Optional[float]
    b_opt: Optional[float]
    realization: Optional[Realization]
    admissibility_check: str = "numeric"

    @property
    def point(self) -> Optional[ProbabilityPoint]:
        return None if self.realization is None else point_from_realization(self.realization)

    def to_dict(self) -> dict:
        point = self.point
        return {
            "family": "double-tilted",
            "alpha": self.params.alpha,
            "phi": self.params.phi,
            "beta_L": self.beta_L,
            "beta_Q": self.beta_Q,
            "cos_b_opt": self.cos_b_opt,
            "y1": self.y1,
            "y2": self.y2,
            "beta_Q1": self.beta_Q1,
            "beta_Q2": self.beta_Q2,
            "admissible": self.admissible,
            "admissibility_check": self.admissibility_check,
            "a_opt": self.a_opt,
            "b_opt": self.b_opt,
            "realization": None if self.realization is None else self.realization.to_dict(),
            "point": None if point is None else point.to_dict(),
        }


def double_tilted_functional(p: DoubleTiltedParams) -> Functional:
    return Functional(
        (p.alpha * math.cos(p.phi / 2), p.alpha * math.sin(p.phi / 2), 0.0, 0.0, 1.0, 1.0, 1.0, -1.0)
    )


def double_tilted_local_value(p: DoubleTiltedParams) -> float:
    return p.alpha * math.cos(p.phi / 2) + p.alpha * math.sin(p.phi / 2) + 2.0


def double_tilted_eigenvalues(p: DoubleTiltedParams, a: float, b: float) -> tuple[float, float]:
    """Non-negative eigenvalue pair of the operator with ``A0, A1`` at ``+a, -a`` and ``B0, B1`` at ``0, b``.

    The spectrum is ``{+-l1, +-l2}``.  Equivalently ``build_bell_operator(f, 2a, b)``
    (after folding ``2a`` into ``[0, pi]``), since a common rotation of
    Alice's observables does not change the spectrum.
    """
    al2 = p.alpha**2
    sphi, cphi = math.sin(p.phi), math.cos(p.phi)
    inner = (
        1.0
        + 3.0 * al2
        - math.cos(2 * b)
        + al2 * math.cos(b) * cphi
        + 4.0 * al2 * math.cos(2 * a) * sphi
        + math.cos(4 * a) * (-1.0 + al2 + math.cos(2 * b) - al2 * math.cos(b) * cphi)
    )
    root = math.sqrt(max(inner, 0.0))
    base = 4.0 + al2 + al2 * math.cos(2 * a) * sphi
    return math.sqrt(max(base + 2 * root, 0.0)), math.sqrt(max(base - 2 * root, 0.0))


def double_tilted_solve(p: DoubleTiltedParams) -> DoubleTiltedSolution:
    al, phi = p.alpha, p.phi
    al2, al4 = al**2, al**4
    c2 = 1.0 + math.cos(2 * phi)
    x_max = al2 * math.cos(phi) / 4.0
    y1 = al2 * math.sin(phi) / (4.0 - al2)
    denom = 32.0 - 16.0 * al2 + al4 * c2
    beta_l = local_value(double_tilted_functional(p)).beta_L
    beta_q1 = math.sqrt((32.0 - al4 * c2) / (4.0 - al2))
    if denom > 0:
        y2 = al2 * math.sin(phi) * (96.0 - 16.0 * al2 - al4 * c2) / ((4.0 - al2) * denom)
        beta_q2 = math.sqrt(2.0) * math.sqrt((4.0 - al2) * (32.0 - al4 * c2) / denom)
    else:
        y2, beta_q2 = math.inf, math.nan

    # |y2| < 1 keeps Alice's two observables distinct (interior optimum)
    admissible = bool(abs(y2) < 1.0 and 0.0 <= x_max < 1.0 and beta_q2 > beta_l)
    if not admissible:
        return DoubleTiltedSolution(
            p, beta_l, None, x_max, y1, y2, beta_q1, beta_q2, False, None, None, None
        )
    a_rel = math.acos(y2)  # angle between A0 and A1
    b = math.acos(x_max)
    _, v = top_eigenpair(build_bell_operator(double_tilted_functional(p), a_rel, b))
    realization = canonicalize_realization(v, a_rel, b)
    return DoubleTiltedSolution(
        p, beta_l, beta_q2, x_max, y1, y2, beta_q1, beta_q2, True, a_rel / 2.0, b, realization
    )


# --------------------------------------------------------------------------
# Generalised Wolfe-Yelin
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WolfeYelinParams:
    alpha0: float
    alpha1: float

    def __post_init__(self) -> None:
        a0, a1 = float(self.alpha0), float(self.alpha1)
        if not (-1.0 < a0 < 1.0):
            raise ValueError(f"alpha0 must lie in (-1, 1), got {a0}")
        if not (0.0 <= a1 <= 2.0):
            raise ValueError(f"alpha1 must lie in [0, 2], got {a1}")
        object.__setattr__(self, "alpha0", a0)
        object.__setattr__(self, "alpha1", a1)


@dataclass
class WolfeYelinSolution:
    params: WolfeYelinParams
    beta_L: float
    beta_Q: Optional[float]
    x_plus: float
    x_minus: float
    lambda_plus: float
    lambda_minus: float
    cot_half_theta: Optional[float]
    admissible: bool
    realization: Optional[Realization]
    point: Optional[ProbabilityPoint]
    admissibility_check: str = "numeric"

    def to_dict(self) -> dict:
        return {
            "family": "wolfe-yelin",
            "alpha0": self.params.alpha0,
            "alpha1": self.params.alpha1,
            "beta_L": self.beta_L,
            "beta_Q": self.beta_Q,
            "x_plus": self.x_plus,
            "x_minus": self.x_minus,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "cot_half_theta": self.cot_half_theta,
            "admissible": self.admissible,
            "admissibility_check": self.admissibility_check,
            "realization": None if self.realization is None else self.realization.to_dict(),
            "point": None if self.point is None else self.point.to_dict(),
        }


def wolfe_yelin_functional(p: WolfeYelinParams) -> Functional:
    return Functional((p.alpha0, p.alpha0, p.alpha1, 0.0, 1.0, 1.0, 1.0, -1.0))


def wolfe_yelin_local_value(p: WolfeYelinParams) -> float:
    a0, a1 = p.alpha0, p.alpha1
    return max(2 * a0 + a1 + 2, -2 * a0 - a1 + 2, a1 + 2)


def wolfe_yelin_eigenvalue(p: WolfeYelinParams, a: float) -> float:
    """Top eigenvalue at ``b = pi/2`` with Alice's observables at ``+-a/2``."""
    return 2 * math.cos(a / 2) + math.sqrt(wolfe_yelin_radicand(p, a))


def wolfe_yelin_radicand(p: WolfeYelinParams, a: float) -> float:
    # expanded: 2 + a1^2 + 2 a0^2 + 4 a0 a1 cos(a/2) - 2 cos(a) (1 - a0^2)
    return (p.alpha1 + 2 * p.alpha0 * math.cos(a / 2)) ** 2 + 4 * math.sin(a / 2) ** 2


def wolfe_yelin_discriminant(p: WolfeYelinParams) -> float:
    a0, a1 = p.alpha0, p.alpha1
    return 16 * (2 - a0**2) * (a1**2 + 4 * (1 - a0**2))


def _cot_half_theta(p: WolfeYelinParams) -> Optional[tuple[float, float]]:
    """``(numerator, sqrt(radicand))`` of the optimal-state ratio, or None where undefined."""
    a0, a1 = p.alpha0, p.alpha1
    s = math.sqrt(4 + a1**2 - 4 * a0**2)
    t = math.sqrt(2 - a0**2)
    num = a1 * t + s * (1 + a0 - a0**2)
    rad = (
        -2 * a0 * a1 * t * s
        + a1**2 * (-1 - 2 * a0**2 + a0**4)
        - 4 * (-1 + 4 * a0**2 - 4 * a0**4 + a0**6)
    )
    if rad <= 0.0:
        return None
    return num, math.sqrt(rad)


def wolfe_yelin_theta(p: WolfeYelinParams) -> Optional[float]:
    """Schmidt angle of the optimal state (unfolded, may exceed pi/2)."""
    parts = _cot_half_theta(p)
    if parts is None:
        return None
    return 2.0 * math.atan2(parts[1], parts[0])


def wolfe_yelin_realization(p: WolfeYelinParams, a: float) -> Realization:
    theta = wolfe_yelin_theta(p)
    if theta is None:
        raise ValueError(
            f"optimal Schmidt angle undefined at alpha0={p.alpha0}, alpha1={p.alpha1}"
        )
    return Realization.folded(theta, a, -a, 0.0, math.pi / 2)


def wolfe_yelin_solve(p: WolfeYelinParams) -> WolfeYelinSolution:
    a0, a1 = p.alpha0, p.alpha1
    one_m = 1.0 - a0**2
    q = math.sqrt((a1**2 + 4 - 4 * a0**2) / (2 - a0**2))
    x_plus = (a0 * a1 + q) / (2 * one_m)
    x_minus = (a0 * a1 - q) / (2 * one_m)
    lam_plus = (a0 * a1 + math.sqrt((4 + a1**2 - 4 * a0**2) * (2 - a0**2))) / one_m
    lam_minus = (a0 * a1 - a0**2 * q) / one_m
    beta_l = local_value(wolfe_yelin_functional(p)).beta_L
    parts = _cot_half_theta(p)
    cot = None if parts is None else parts[0] / parts[1]

    admissible = bool(a1 / 2 < x_plus < 1 and beta_l < lam_plus and parts is not None)
    realization = point = None
    if admissible:
        realization = wolfe_yelin_realization(p, math.acos(x_plus))
        point = point_from_realization(realization)
    return WolfeYelinSolution(
        params=p,
        beta_L=beta_l,
        beta_Q=lam_plus if admissible else None,
        x_plus=x_plus,
        x_minus=x_minus,
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        cot_half_theta=cot,
        admissible=admissible,
        realization=realization,
        point=point,
    )


def wolfe_yelin_extended_point(p: WolfeYelinParams, a: Optional[float] = None) -> ProbabilityPoint:
    """Point with ``A0, A1`` at ``+-a``, ``B0, B1`` at ``0, pi/2`` and the closed-form Schmidt angle.

    ``a`` defaults to ``arccos(x_plus)``; the local-value condition is not
    required here, which extends the family beyond the quantum-advantage region.
    """
    if a is None:
        sol = wolfe_yelin_solve(p)
        if not -1.0 <= sol.x_plus <= 1.0:
            raise ValueError(f"x_plus={sol.x_plus} is not a cosine")
        a = math.acos(sol.x_plus)
    return point_from_realization(wolfe_yelin_realization(p, a))


def wolfe_yelin_extended_realization(p: WolfeYelinParams) -> Optional[Realization]:
    """Realisation behind :func:`wolfe_yelin_extended_point`, or None where it is undefined."""
    sol = wolfe_yelin_solve(p)
    if not (p.alpha1 / 2 < sol.x_plus < 1.0) or sol.cot_half_theta is None:
        return None
    return wolfe_yelin_realization(p, math.acos(sol.x_plus))


def wolfe_yelin_matrix(p: WolfeYelinParams, a: float, b: float) -> np.ndarray:
    """Bell operator with ``A0, A1`` at ``+-a/2`` and ``B0, B1`` at ``0, b`` written out entrywise."""
    a0, a1 = p.alpha0, p.alpha1
    ch, sh = math.cos(a / 2), math.sin(a / 2)
    cb, sb = math.cos(b), math.sin(b)
    return np.array(
        [
            [a1 + 2 * ch * (1 + a0), 0, 2 * cb * sh, 2 * sb * sh],
            [0, -a1 + 2 * ch * (-1 + a0), 2 * sb * sh, -2 * cb * sh],
            [2 * cb * sh, 2 * sb * sh, a1 - 2 * ch * (1 + a0), 0],
            [2 * sb * sh, -2 * cb * sh, 0, -a1 + 2 * ch * (1 - a0)],
        ]
    )
