"""Two-qubit reconstruction of probability points and two extremality predicates.

Predicate 1 (scaled TLM): the correlators, rescaled by the largest value
each party's observable can reach on the state, saturate the TLM relation,
and ``sin^2(theta)`` is the larger root of each pair's realisation quadratic.

Predicate 2 (TLM + threshold): the zero-marginal correlators ``cos(a_x - b_y)``
saturate TLM and ``sin(theta)`` is at least the threshold ``sin(theta*)``
below which the ellipse of points with fixed observables crosses a
non-negativity facet.

Both predicates are reported side by side, never merged.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core_model import (
    ProbabilityPoint,
    Realization,
    _scaled_probabilities,
    point_from_realization,
    point_gradients,
)
from .polytopes import LocalDecomposition, deterministic_matrix, is_nonlocal, local_decomposition_witness

SATURATION_TOL = 1e-9
ROOT_MATCH_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-12
ZERO_MARGINAL_TOL = 1e-10
REPRODUCTION_TOL = 1e-9
# |cos a_x cos b_y| this close to 1 marks a pair whose ellipse lies on a facet
DEGENERATE_PAIR_TOL = 1e-12  # angular distance from |cos a cos b| = 1
D_FLOOR = 1e-12

PAIRS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


def _vec(p: ProbabilityPoint | Sequence[float]) -> np.ndarray:
    return p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)


# --------------------------------------------------------------------------
# Realisation quadratics and reconstruction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizationQuadratic:
    """``z^2 - b z + c^2 = 0`` for one setting pair; ``z = sin^2(theta)`` for a canonical realisation.

    ``w_plus``/``w_minus`` hold ``1 - z_minus`` and ``1 - z_plus`` from the
    shifted quadratic in ``w = 1 - z``, accurate when ``z`` is close to 1.
    """

    pair: tuple[int, int]
    b: float
    c: float
    discriminant: float  # b^2 - 4 c^2 as written
    z_plus: float
    z_minus: float
    w_plus: float = 0.0
    w_minus: float = 0.0
    # same discriminant as a product of the four scaled probabilities; no cancellation
    discriminant_product: float = 0.0

    @property
    def double_root(self) -> bool:
        return abs(self.discriminant_product) < DOUBLE_ROOT_TOL

    @property
    def match_tol(self) -> float:
        # near a double root the computed roots carry error ~ sqrt(|disc|)
        if self.double_root:
            return ROOT_MATCH_TOL + 0.5 * math.sqrt(abs(self.discriminant_product))
        return ROOT_MATCH_TOL

    def roots(self) -> tuple[float, ...]:
        return (self.z_plus, self.z_minus)

    def root_pairs(self) -> tuple[tuple[float, float], ...]:
        """``(z, 1 - z)`` for each root, both computed without cancellation."""
        pairs = ((self.z_plus, self.w_minus), (self.z_minus, self.w_plus))
        return pairs[:1] if self.z_plus - self.z_minus <= ROOT_MATCH_TOL else pairs

    def has_root(self, z: float) -> bool:
        return any(abs(z - r) <= self.match_tol for r in self.roots())


def _small_large_roots(lin: float, const: float, disc: float) -> tuple[float, float]:
    """Roots of ``t^2 - lin t + const`` as (larger, smaller).

    ``disc`` comes from the probability product, so even a near-double root
    keeps both roots apart at their true spacing.
    """
    big = (lin + math.sqrt(max(disc, 0.0))) / 2.0
    return big, (const / big if big > 0 else 0.0)


def realization_quadratics(p: ProbabilityPoint | Sequence[float]) -> list[RealizationQuadratic]:
    v = _vec(p)
    scaled = _scaled_probabilities(v)
    out = []
    for x, y in PAIRS:
        ma, mb, corr = v[x], v[2 + y], v[4 + 2 * x + y]
        b = corr**2 - ma**2 - mb**2 + 1.0
        c = corr - ma * mb
        disc = b * b - 4.0 * c * c
        disc_prod = float(np.prod(scaled[:, :, x, y]))
        zp, zm = _small_large_roots(b, c * c, disc_prod)
        # same equation in w = 1 - z: w^2 - (2 - b) w + (1 - b + c^2), both
        # coefficients rearranged into sums of non-negative terms
        one_m_c2 = (1.0 - corr) * (1.0 + corr)
        w_lin = one_m_c2 + ma**2 + mb**2
        w_const = (ma - mb * corr) ** 2 + mb**2 * (one_m_c2 + ma**2)
        wp, wm = _small_large_roots(w_lin, w_const, disc_prod)
        out.append(RealizationQuadratic((x, y), b, c, disc, zp, zm, wp, wm, disc_prod))
    return out


def _common_roots(quads: list[RealizationQuadratic]) -> list[tuple[float, float]]:
    anchor = max(quads, key=lambda q: q.discriminant_product)
    found: list[tuple[float, float]] = []
    for z, w in anchor.root_pairs():
        if all(q.has_root(z) for q in quads) and not any(abs(z - f[0]) <= ROOT_MATCH_TOL for f in found):
            found.append((z, w))
    return found


def _propagate_signs(
    sin_a: list[float], sin_b: list[float], s: dict[tuple[int, int], float], tol: float = 1e-12
) -> tuple[list[float], list[float]]:
    """Fix the signs of the sines from the products ``s_xy = sin a_x sin b_y``.

    Signs spread from the largest Alice sine along the largest products
    first, so near-zero sines (whose sign is noise) never decide anything.
    The global flip leaves the statistics unchanged and is used at the end
    to make ``sin a0 >= 0``.
    """
    sign_a: list[Optional[float]] = [None, None]
    sign_b: list[Optional[float]] = [None, None]
    seed = 0 if sin_a[0] >= sin_a[1] else 1
    if sin_a[seed] > tol:
        sign_a[seed] = 1.0
    links = sorted(s.items(), key=lambda item: -abs(item[1]))
    changed = True
    while changed:
        changed = False
        for (x, y), sxy in links:
            if abs(sxy) <= tol:
                break
            sgn = 1.0 if sxy > 0 else -1.0
            if sign_a[x] is not None and sign_b[y] is None:
                sign_b[y] = sgn * sign_a[x]
                changed = True
                break
            if sign_b[y] is not None and sign_a[x] is None:
                sign_a[x] = sgn * sign_b[y]
                changed = True
                break
    sa = [sin_a[k] * (sign_a[k] if sign_a[k] is not None else 1.0) for k in (0, 1)]
    sb = [sin_b[k] * (sign_b[k] if sign_b[k] is not None else 1.0) for k in (0, 1)]
    if sa[0] < 0:
        sa, sb = [-t for t in sa], [-t for t in sb]
    return sa, sb


def schmidt_parameter_conditions(p: ProbabilityPoint | Sequence[float], z: float) -> dict:
    """Residuals of the three realisability conditions for a candidate ``z = sin^2(theta)``.

    Each residual is <= 0 (up to tolerance) when the condition holds.
    """
    v = _vec(p)
    quad_res = max(abs(z * z - q.b * z + q.c * q.c) for q in realization_quadratics(v))
    range_res = max(float(v[k] ** 2) for k in range(4)) - (1.0 - z)
    if 1.0 - z <= 0:
        product = 0.0
    else:
        product = 1.0
        for x, y in PAIRS:
            product *= v[4 + 2 * x + y] - v[x] * v[2 + y] / (1.0 - z)
    return {"quadratic": quad_res, "range": range_res, "product": -product}


def realizations_from_point(p: ProbabilityPoint | Sequence[float]) -> list[Realization]:
    """All canonical two-qubit realisations (one per admissible ``sin^2 theta``) of a point with a non-zero marginal."""
    v = _vec(p)
    if max(abs(v[k]) for k in range(4)) <= ZERO_MARGINAL_TOL:
        raise ValueError("all marginals vanish; use zero_marginal_realization")
    out: list[Realization] = []
    for z, w in _common_roots(realization_quadratics(v)):
        z, w = min(max(z, 0.0), 1.0), min(max(w, 0.0), 1.0)
        if w <= 0.0:
            continue  # cos(theta) = 0 forces zero marginals
        cond = schmidt_parameter_conditions(v, z)
        if cond["range"] > 1e-9 or cond["product"] > 1e-9:
            continue
        st, ct = math.sqrt(z), math.sqrt(w)
        theta = math.atan2(st, ct)
        cos_a = [max(-1.0, min(1.0, v[x] / ct)) for x in (0, 1)]
        cos_b = [max(-1.0, min(1.0, v[2 + y] / ct)) for y in (0, 1)]
        sin_a = [math.sqrt(1.0 - c * c) for c in cos_a]
        sin_b = [math.sqrt(1.0 - c * c) for c in cos_b]
        s = {
            (x, y): ((v[4 + 2 * x + y] - cos_a[x] * cos_b[y]) / st if st > 0 else 0.0)
            for x, y in PAIRS
        }
        sa, sb = _propagate_signs(sin_a, sin_b, s)
        r = Realization(
            theta,
            math.atan2(sa[0], cos_a[0]),
            math.atan2(sa[1], cos_a[1]),
            math.atan2(sb[0], cos_b[0]),
            math.atan2(sb[1], cos_b[1]),
        )
        r, err = _polish(r, v)
        if err <= REPRODUCTION_TOL:
            out.append(r)
    return out


def _polish(r: Realization, v: np.ndarray, steps: int = 6) -> tuple[Realization, float]:
    """Gauss-Newton on the five parameters.

    Angles recovered as ``arccos`` lose half their digits near 0 and pi
    (an error e in the cosine becomes sqrt(2e) in the sine); a few
    least-squares steps restore full precision.
    """
    err = float(np.abs(point_from_realization(r).vector - v).max())
    for _ in range(steps):
        if err < 1e-15:
            break
        resid = point_from_realization(r).vector - v
        step = np.linalg.lstsq(point_gradients(r).T, resid, rcond=None)[0]
        cand = Realization.folded(*(np.array(r.as_tuple()) - step))
        cand_err = float(np.abs(point_from_realization(cand).vector - v).max())
        if cand_err >= err:
            break
        r, err = cand, cand_err
    return r, err


def zero_marginal_realization(p: ProbabilityPoint | Sequence[float]) -> Optional[Realization]:
    """Maximally entangled realisation with ``a0 = 0``, or None if the correlators are not ``cos(a_x - b_y)``."""
    v = _vec(p)
    if max(abs(v[k]) for k in range(4)) > ZERO_MARGINAL_TOL:
        raise ValueError("zero_marginal_realization needs all marginals within 1e-10 of 0")
    c = [max(-1.0, min(1.0, float(t))) for t in v[4:8]]
    target = np.array(c)
    b0 = math.acos(c[0])
    candidates = []
    for sb1 in (1.0, -1.0):
        b1 = sb1 * math.acos(c[1])
        for sa1 in (1.0, -1.0):
            a1 = b0 + sa1 * math.acos(c[2])
            candidates.append(_polish_zero_marginal(np.array([a1, b0, b1]), target))
    err, (a1, b0, b1) = min(candidates, key=lambda t: t[0])
    if err <= REPRODUCTION_TOL:
        return Realization(math.pi / 2, 0.0, a1, b0, b1)
    return None


def _zero_marginal_correlators(x: np.ndarray) -> np.ndarray:
    a1, b0, b1 = x
    return np.array([math.cos(b0), math.cos(b1), math.cos(a1 - b0), math.cos(a1 - b1)])


def _polish_zero_marginal(x: np.ndarray, target: np.ndarray, steps: int = 6) -> tuple[float, np.ndarray]:
    # arccos near +-1 loses half the digits; Gauss-Newton on (a1, b0, b1) recovers them
    err = float(np.abs(_zero_marginal_correlators(x) - target).max())
    for _ in range(steps):
        if err < 1e-15:
            break
        a1, b0, b1 = x
        jac = np.array(
            [
                [0.0, -math.sin(b0), 0.0],
                [0.0, 0.0, -math.sin(b1)],
                [-math.sin(a1 - b0), math.sin(a1 - b0), 0.0],
                [-math.sin(a1 - b1), 0.0, math.sin(a1 - b1)],
            ]
        )
        resid = _zero_marginal_correlators(x) - target
        cand = x - np.linalg.lstsq(jac, resid, rcond=None)[0]
        cand_err = float(np.abs(_zero_marginal_correlators(cand) - target).max())
        if cand_err >= err:
            break
        x, err = cand, cand_err
    return err, x


# --------------------------------------------------------------------------
# TLM and its scaled variant
# --------------------------------------------------------------------------


def tlm_residual(correlators: Sequence[float], complements: Optional[Sequence[float]] = None) -> float:
    """``|C00 C01 - C10 C11| - sqrt(1-C00^2) sqrt(1-C01^2) - sqrt(1-C10^2) sqrt(1-C11^2)``.

    ``complements`` optionally supplies the four ``sqrt(1 - C^2)`` values;
    near ``|C| = 1`` the square root turns roundoff of order 1e-16 into
    errors of order 1e-8, so callers that know them in closed form pass them.
    """
    c = [float(t) for t in correlators]
    if max(abs(t) for t in c) > 1.0 + 1e-12:
        raise ValueError(f"correlators must lie in [-1, 1], got {c}")
    c = [max(-1.0, min(1.0, t)) for t in c]
    if complements is None:
        root = [math.sqrt(1.0 - t * t) for t in c]
    else:
        root = [float(t) for t in complements]
    return abs(c[0] * c[1] - c[2] * c[3]) - root[0] * root[1] - root[2] * root[3]


def tlm_saturation(
    correlators: Sequence[float], complements: Optional[Sequence[float]] = None
) -> tuple[bool, float]:
    res = tlm_residual(correlators, complements)
    return abs(res) < SATURATION_TOL, res


@dataclass
class StlmQuantities:
    d_alice: list[float]  # indexed by Bob's setting y: sqrt(<B_y>^2 + sin^2 theta)
    d_bob: list[float]  # indexed by Alice's setting x: sqrt(<A_x>^2 + sin^2 theta)
    table_by_alice_setting: list[float]  # C_xy / d_bob[x]
    table_by_bob_setting: list[float]  # C_xy / d_alice[y]
    complements_by_alice_setting: list[float] = field(default_factory=list)  # sqrt(1 - table^2)
    complements_by_bob_setting: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def stlm_quantities(r: Realization) -> StlmQuantities:
    v = point_from_realization(r).vector
    s2 = math.sin(r.theta) ** 2
    d_bob = [math.sqrt(v[x] ** 2 + s2) for x in (0, 1)]
    d_alice = [math.sqrt(v[2 + y] ** 2 + s2) for y in (0, 1)]

    def ratio(cxy: float, d: float) -> float:
        return 0.0 if d < D_FLOOR else max(-1.0, min(1.0, cxy / d))

    t1 = [ratio(v[4 + 2 * x + y], d_bob[x]) for x, y in PAIRS]
    t2 = [ratio(v[4 + 2 * x + y], d_alice[y]) for x, y in PAIRS]

    # d_bob[x]^2 - C_xy^2 = (cos a_x sin b_y - sin(theta) sin a_x cos b_y)^2, and symmetrically
    st = math.sin(r.theta)
    alice, bob = (r.a0, r.a1), (r.b0, r.b1)

    def complement(num: float, d: float) -> float:
        return 1.0 if d < D_FLOOR else min(abs(num) / d, 1.0)

    k1, k2 = [], []
    for x, y in PAIRS:
        ca, sa, cb, sb = math.cos(alice[x]), math.sin(alice[x]), math.cos(bob[y]), math.sin(bob[y])
        k1.append(complement(ca * sb - st * sa * cb, d_bob[x]))
        k2.append(complement(sa * cb - st * ca * sb, d_alice[y]))
    return StlmQuantities(d_alice, d_bob, t1, t2, k1, k2)


def stlm_saturation(r: Realization) -> tuple[bool, tuple[float, float]]:
    q = stlm_quantities(r)
    res = (
        tlm_residual(q.table_by_alice_setting, q.complements_by_alice_setting),
        tlm_residual(q.table_by_bob_setting, q.complements_by_bob_setting),
    )
    return all(abs(t) < SATURATION_TOL for t in res), res


# --------------------------------------------------------------------------
# Threshold angle and ellipse geometry
# --------------------------------------------------------------------------


@dataclass
class ThresholdResult:
    sin_theta_star: float
    pair: Optional[tuple[int, int]]
    branch: Optional[str]  # "minus" for s/(1-c), "plus" for -s/(1+c)
    degenerate: bool
    degenerate_pairs: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sin_theta_star": self.sin_theta_star,
            "pair": None if self.pair is None else list(self.pair),
            "branch": self.branch,
            "degenerate": self.degenerate,
            "degenerate_pairs": [list(t) for t in self.degenerate_pairs],
        }


def _half_angle_terms(a: float, b: float) -> tuple[float, float, float, float]:
    """``sin^2((a+b)/2), sin^2((a-b)/2), cos^2((a+b)/2), cos^2((a-b)/2)``.

    ``1 - cos a cos b = sp + sm`` and ``sin a sin b = sp - sm``; likewise
    ``1 + cos a cos b = cp + cm`` and ``-sin a sin b = cp - cm``.  Ratios built
    from these stay accurate as a pair approaches ``|cos a cos b| = 1``.
    """
    sp, sm = math.sin((a + b) / 2) ** 2, math.sin((a - b) / 2) ** 2
    cp, cm = math.cos((a + b) / 2) ** 2, math.cos((a - b) / 2) ** 2
    return sp, sm, cp, cm


def _threshold_ratios(a: float, b: float) -> Optional[tuple[float, float]]:
    """``(s/(1-c), -s/(1+c))`` with ``c = cos a cos b``, ``s = sin a sin b``; None for a degenerate pair."""
    sp, sm, cp, cm = _half_angle_terms(a, b)
    eps = DEGENERATE_PAIR_TOL**2
    if sp + sm <= eps or cp + cm <= eps:
        return None
    return (sp - sm) / (sp + sm), (cp - cm) / (cp + cm)


def theta_star(a0: float, a1: float, b0: float, b1: float) -> ThresholdResult:
    alice, bob = (a0, a1), (b0, b1)
    best, best_pair, best_branch = -math.inf, None, None
    degenerate_pairs = []
    for x, y in PAIRS:
        ratios = _threshold_ratios(alice[x], bob[y])
        if ratios is None:
            degenerate_pairs.append((x, y))
            continue
        for branch, val in zip(("minus", "plus"), ratios):
            if val > best:
                best, best_pair, best_branch = val, (x, y), branch
    value = min(max(best, 0.0), 1.0) if best_pair is not None else 0.0
    return ThresholdResult(value, best_pair, best_branch, bool(degenerate_pairs), degenerate_pairs)


@dataclass
class EllipseDecomposition:
    """``P(theta) = p0 + cos(theta) pm + sin(theta) pc`` for fixed observables."""

    p0: np.ndarray
    pm: np.ndarray
    pc: np.ndarray

    def at(self, theta: float) -> np.ndarray:
        return self.p0 + math.cos(theta) * self.pm + math.sin(theta) * self.pc

    def at_uv(self, u: float, v: float) -> np.ndarray:
        return self.p0 + u * self.pm + v * self.pc


def ellipse_decomposition(a0: float, a1: float, b0: float, b1: float) -> EllipseDecomposition:
    ca = [math.cos(a0), math.cos(a1)]
    sa = [math.sin(a0), math.sin(a1)]
    cb = [math.cos(b0), math.cos(b1)]
    sb = [math.sin(b0), math.sin(b1)]
    p0 = np.array([0.0] * 4 + [ca[x] * cb[y] for x, y in PAIRS])
    pm = np.array(ca + cb + [0.0] * 4)
    pc = np.array([0.0] * 4 + [sa[x] * sb[y] for x, y in PAIRS])
    return EllipseDecomposition(p0, pm, pc)


@dataclass(frozen=True)
class FacetTouch:
    outcome: tuple[int, int]
    sin_theta: Optional[float]
    cos_theta: Optional[float]
    all_theta: bool = False


def facet_touch_angles(a_x: float, b_y: float) -> list[FacetTouch]:
    """Where the ellipse for one setting pair meets ``p(ab|xy) = 0``.

    ``4 p(ab|xy) = C + B cos(theta) + A sin(theta)`` with ``A^2 + B^2 = C^2``,
    so the ellipse is tangent to the facet at ``(sin, cos) = (-A/C, -B/C)``
    when both are non-negative.  ``C = 0`` means the facet holds for every theta.
    """
    ca, cb = math.cos(a_x), math.cos(b_y)
    sp, sm, cp, cm = _half_angle_terms(a_x, b_y)
    out = []
    for a, b in itertools.product((0, 1), repeat=2):
        sgn_a, sgn_b = (-1.0) ** a, (-1.0) ** b
        # sin a sin b = sp - sm = cm - cp; pick the form matching C, as theta_star does
        if sgn_a * sgn_b > 0:
            A, C = cm - cp, cp + cm
        else:
            A, C = sm - sp, sp + sm
        B = sgn_a * ca + sgn_b * cb
        if C <= DEGENERATE_PAIR_TOL**2:
            out.append(FacetTouch((a, b), None, None, all_theta=True))
        elif A <= 0.0 and B <= 0.0:
            out.append(FacetTouch((a, b), min(-A / C, 1.0), min(-B / C, 1.0)))
    return out


def discriminant_probability_identity(p: ProbabilityPoint | Sequence[float]) -> list[float]:
    """``disc_xy - prod_ab 4 p(ab|xy)`` for each setting pair (zero for every valid point)."""
    v = _vec(p)
    scaled = _scaled_probabilities(v)
    quads = realization_quadratics(v)
    return [float(q.discriminant - np.prod(scaled[:, :, x, y])) for q, (x, y) in zip(quads, PAIRS)]


# --------------------------------------------------------------------------
# Predicates
# --------------------------------------------------------------------------


@dataclass
class ConjectureVerdict:
    extremal: bool
    nonlocal_: bool
    reason: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "extremal": self.extremal,
            "nonlocal": self.nonlocal_,
            "reason": self.reason,
            "details": self.details,
            "tolerance": SATURATION_TOL,
        }


def _z_plus_matches(r: Realization) -> tuple[bool, list[float]]:
    """Does ``sin^2 theta`` equal the larger root for every pair?

    ``sin^2 theta`` is always one of the two roots, so the other is ``b - sin^2 theta``
    (sum of roots).  This avoids the square root of a near-zero discriminant,
    whose error (~1e-8) would otherwise blur the answer close to the threshold.
    """
    quads = realization_quadratics(point_from_realization(r))
    s2 = math.sin(r.theta) ** 2
    gaps = [max(s2, q.b - s2) - s2 for q in quads]
    return all(abs(g) <= SATURATION_TOL for g in gaps), gaps


def conjecture1_extremal(r: Realization) -> ConjectureVerdict:
    point = point_from_realization(r)
    if not is_nonlocal(point):
        return ConjectureVerdict(False, False, "local point")
    saturated, residuals = stlm_saturation(r)
    z_ok, gaps = _z_plus_matches(r)
    details = {"stlm_residuals": list(residuals), "z_plus_minus_sin2theta": gaps}
    if not saturated:
        return ConjectureVerdict(False, True, "scaled TLM not saturated", details)
    if not z_ok:
        return ConjectureVerdict(False, True, "sin^2(theta) is not the larger root for every pair", details)
    return ConjectureVerdict(True, True, "scaled TLM saturated and larger roots coincide", details)


def conjecture2_extremal(r: Realization) -> ConjectureVerdict:
    point = point_from_realization(r)
    if not is_nonlocal(point):
        return ConjectureVerdict(False, False, "local point")
    corr = point_from_realization(Realization(math.pi / 2, r.a0, r.a1, r.b0, r.b1)).correlators
    alice, bob = (r.a0, r.a1), (r.b0, r.b1)
    saturated, residual = tlm_saturation(corr, [abs(math.sin(alice[x] - bob[y])) for x, y in PAIRS])
    ts = theta_star(r.a0, r.a1, r.b0, r.b1)
    st = math.sin(r.theta)
    details = {"tlm_residual": residual, "sin_theta": st, "threshold": ts.to_dict()}
    if not saturated:
        return ConjectureVerdict(False, True, "TLM not saturated at theta = pi/2", details)
    if st < ts.sin_theta_star - SATURATION_TOL:
        if ts.degenerate:
            w = decomposition_witness(r)
            if w is not None:
                details["witness"] = w.to_dict()
        return ConjectureVerdict(False, True, "sin(theta) below threshold", details)
    return ConjectureVerdict(True, True, "TLM saturated and sin(theta) above threshold", details)


def conjecture_equivalence_check(r: Realization) -> tuple[bool, dict]:
    """Compare the larger-root condition with the threshold condition."""
    z_ok, gaps = _z_plus_matches(r)
    ts = theta_star(r.a0, r.a1, r.b0, r.b1)
    st = math.sin(r.theta)
    above = st >= ts.sin_theta_star - SATURATION_TOL
    return z_ok == above, {
        "z_plus_condition": z_ok,
        "threshold_condition": above,
        "z_plus_minus_sin2theta": gaps,
        "sin_theta": st,
        "sin_theta_star": ts.sin_theta_star,
    }


# --------------------------------------------------------------------------
# Convex-decomposition witness for the degenerate regime
# --------------------------------------------------------------------------

# Relabellings as maps on the 8-vector and on the angles; each is an involution.


def _swap_alice(v: np.ndarray) -> np.ndarray:
    return v[[1, 0, 2, 3, 6, 7, 4, 5]]


def _swap_bob(v: np.ndarray) -> np.ndarray:
    return v[[0, 1, 3, 2, 5, 4, 7, 6]]


def _flip_alice(v: np.ndarray, x: int) -> np.ndarray:
    out = v.copy()
    out[[x, 4 + 2 * x, 5 + 2 * x]] *= -1.0
    return out


def _flip_bob(v: np.ndarray, y: int) -> np.ndarray:
    out = v.copy()
    out[[2 + y, 4 + y, 6 + y]] *= -1.0
    return out


@dataclass
class _Relabel:
    steps: list[tuple[str, int]]

    def forward(self, v: np.ndarray) -> np.ndarray:
        for step in self.steps:
            v = _apply(step, v)
        return v

    def inverse(self, v: np.ndarray) -> np.ndarray:
        for step in reversed(self.steps):
            v = _apply(step, v)
        return v


def _apply(step: tuple[str, int], v: np.ndarray) -> np.ndarray:
    kind, k = step
    if kind == "swap_a":
        return _swap_alice(v)
    if kind == "swap_b":
        return _swap_bob(v)
    if kind == "flip_a":
        return _flip_alice(v, k)
    return _flip_bob(v, k)


@dataclass
class DecompositionWitness:
    points: list[np.ndarray]  # threshold point, local tangent point, product-state point
    weights: list[float]
    local_part: LocalDecomposition  # of the tangent point, relabelled frame
    local_vertices: np.ndarray  # its deterministic points in the original labelling
    reconstruction_error: float

    def to_dict(self) -> dict:
        return {
            "points": [p.tolist() for p in self.points],
            "weights": list(self.weights),
            "local_weights": list(self.local_part.weights),
            "local_vertices": self.local_vertices.tolist(),
            "reconstruction_error": self.reconstruction_error,
        }


def decomposition_witness(r: Realization, tol: float = 1e-12) -> Optional[DecompositionWitness]:
    """Write ``P(theta)`` below threshold as a mix of ``P(theta*)``, a local point and ``P(0)``.

    Applies when one setting pair has ``|cos a_x cos b_y| = 1``; returns None
    ("not applicable") otherwise or when ``sin(theta) > sin(theta*)``.
    """
    ts = theta_star(r.a0, r.a1, r.b0, r.b1)
    if not ts.degenerate or math.sin(r.theta) > ts.sin_theta_star + tol:
        return None
    x, y = ts.degenerate_pairs[0]
    alice, bob = [r.a0, r.a1], [r.b0, r.b1]
    steps: list[tuple[str, int]] = []
    if x == 1:
        steps.append(("swap_a", 0))
        alice.reverse()
    if y == 1:
        steps.append(("swap_b", 0))
        bob.reverse()
    # outcome flips shift an angle by pi; bring a0 = b0 = 0 and a1, b1 into [0, pi)
    if math.cos(alice[0]) < 0:
        steps.append(("flip_a", 0))
        alice[0] += math.pi
    if math.cos(bob[0]) < 0:
        steps.append(("flip_b", 0))
        bob[0] += math.pi
    if math.sin(alice[1]) < 0:
        steps.append(("flip_a", 1))
        alice[1] += math.pi
    if math.sin(bob[1]) < 0:
        steps.append(("flip_b", 1))
        bob[1] += math.pi
    relabel = _Relabel(steps)
    ca, cb = math.cos(alice[1]), math.cos(bob[1])
    ell = ellipse_decomposition(0.0, alice[1], 0.0, bob[1])

    s_star = ts.sin_theta_star
    c_star = math.sqrt(max(1.0 - s_star * s_star, 0.0))
    # corners in (cos, sin) coordinates: (c*, s*), (1, t), (1, 0) with t = (1 - c*)/s*
    tangent_v = s_star / (1.0 + c_star)

    p_star = ell.at_uv(c_star, s_star)
    p_tangent = np.array([1.0, ca, 1.0, cb, 1.0, cb, ca, 1.0 - abs(ca - cb)])
    p_zero = ell.at_uv(1.0, 0.0)
    weights = _triangle_weights(r.theta, s_star, c_star, tangent_v)
    local = local_decomposition_witness(p_tangent)
    if local is None or min(weights) < -1e-10:
        return None
    weights = [max(w, 0.0) for w in weights]
    total = sum(weights)
    weights = [w / total for w in weights]

    pts = [relabel.inverse(q) for q in (p_star, p_tangent, p_zero)]
    verts = np.array([relabel.inverse(row) for row in deterministic_matrix()[local.vertex_indices]])
    target = point_from_realization(r).vector
    recon = sum(w * q for w, q in zip(weights, pts))
    return DecompositionWitness(pts, weights, local, verts, float(np.abs(recon - target).max()))


def _triangle_weights(theta: float, s_star: float, c_star: float, t: float) -> list[float]:
    """Barycentric weights of ``(cos theta, sin theta)`` in the witness triangle.

    Written with ``1 - cos x = sin^2 x / (1 + cos x)`` so that a thin
    triangle (small ``sin theta*``) does not lose precision.
    """
    if s_star <= 0.0:
        return [0.0, 0.0, 1.0]
    st, ct = math.sin(theta), math.cos(theta)
    w_star = (st * st / (1.0 + ct)) / (s_star * s_star / (1.0 + c_star))
    w_tan = (st - w_star * s_star) / t
    return [w_star, w_tan, 1.0 - w_star - w_tan]


# --------------------------------------------------------------------------
# Report
# --------------------------------------------------------------------------


@dataclass
class ExtremalityReport:
    realization: Realization
    has_realization: bool
    realizations: list[Realization]
    reconstruction_branch: str
    conjecture1: Optional[ConjectureVerdict]
    conjecture2: Optional[ConjectureVerdict]

    @property
    def agreement(self) -> Optional[bool]:
        if self.conjecture1 is None or self.conjecture2 is None:
            return None
        return self.conjecture1.extremal == self.conjecture2.extremal

    def to_dict(self) -> dict:
        return {
            "realization": self.realization.to_dict(),
            "point": point_from_realization(self.realization).to_dict(),
            "has_realization": self.has_realization,
            "realizations": [r.to_dict() for r in self.realizations],
            "reconstruction_branch": self.reconstruction_branch,
            "conjecture1": None if self.conjecture1 is None else self.conjecture1.to_dict(),
            "conjecture2": None if self.conjecture2 is None else self.conjecture2.to_dict(),
            "agreement": self.agreement,
        }


def extremality_report(r: Realization, method: str = "both") -> ExtremalityReport:
    if method not in ("ishizaka", "conjecture", "both"):
        raise ValueError(f"unknown method {method!r}")
    point = point_from_realization(r)
    if max(abs(t) for t in point.marginals) <= ZERO_MARGINAL_TOL:
        zr = zero_marginal_realization(point)
        found, branch = ([] if zr is None else [zr]), "zero-marginal"
    else:
        found, branch = realizations_from_point(point), "general"
    c1 = conjecture1_extremal(r) if method in ("ishizaka", "both") else None
    c2 = conjecture2_extremal(r) if method in ("conjecture", "both") else None
    return ExtremalityReport(r, bool(found), found, branch, c1, c2)


def is_extremal(r: Realization) -> bool:
    """Both predicates agree on extremal."""
    return conjecture1_extremal(r).extremal and conjecture2_extremal(r).extremal
