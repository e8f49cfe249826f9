"""Canonical two-qubit realisations and CHSH probability points.

A realisation is the 5-tuple ``(theta, a0, a1, b0, b1)`` describing the state
``cos(theta/2)|00> + sin(theta/2)|11>`` measured with observables
``cos(t) Z + sin(t) X``.  A probability point is the 8-vector

    (<A0>, <A1>, <B0>, <B1>, <A0B0>, <A0B1>, <A1B0>, <A1B1>)

which fully determines the 16 probabilities p(ab|xy).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# absolute tolerance for p(ab|xy) >= 0 when accepting a point
NONNEG_TOL = 1e-9
# slack on theta in [0, pi/2] and on |component| <= 1
RANGE_TOL = 1e-12

# (a, b, x, y) in the order used for flattened probability tables / facets
OUTCOME_LABELS: tuple[tuple[int, int, int, int], ...] = tuple(itertools.product((0, 1), repeat=4))


class NonSignallingViolation(ValueError):
    """A candidate point has a probability below ``-NONNEG_TOL``."""


def normalize_angle(t: float) -> float:
    """Map an angle into ``[0, 2*pi)``."""
    t = math.fmod(float(t), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:  # fmod of tiny negatives can round up to 2*pi
        t = 0.0
    return t


@dataclass(frozen=True)
class Realization:
    theta: float
    a0: float
    a1: float
    b0: float
    b1: float

    def __post_init__(self) -> None:
        vals = (self.theta, self.a0, self.a1, self.b0, self.b1)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite realisation parameters: {vals}")
        theta = float(self.theta)
        if theta < -RANGE_TOL or theta > HALF_PI + RANGE_TOL:
            raise ValueError(f"theta={theta!r} outside [0, pi/2]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), HALF_PI))
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, normalize_angle(getattr(self, name)))

    @classmethod
    def folded(cls, theta: float, a0: float, a1: float, b0: float, b1: float) -> "Realization":
        """Build a realisation from an arbitrary ``theta``, preserving the statistics.

        ``theta -> -theta`` is compensated by negating Alice's angles and
        ``theta -> pi - theta`` by ``t -> pi - t`` on every observable angle.
        """
        theta = math.remainder(float(theta), TWO_PI)  # (-pi, pi]
        if theta < 0.0:
            theta = -theta
            a0, a1 = -a0, -a1
        if theta > HALF_PI:
            theta = math.pi - theta
            a0, a1, b0, b1 = (math.pi - t for t in (a0, a1, b0, b1))
        return cls(theta, a0, a1, b0, b1)

    @property
    def alice(self) -> tuple[float, float]:
        return (self.a0, self.a1)

    @property
    def bob(self) -> tuple[float, float]:
        return (self.b0, self.b1)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.theta, self.a0, self.a1, self.b0, self.b1)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "a0": self.a0, "a1": self.a1, "b0": self.b0, "b1": self.b1}

    @classmethod
    def from_dict(cls, d: dict) -> "Realization":
        return cls(d["theta"], d["a0"], d["a1"], d["b0"], d["b1"])


def _scaled_probabilities(vec: np.ndarray) -> np.ndarray:
    """Return ``4 p(ab|xy)`` as an array indexed ``[a, b, x, y]``."""
    marg_a, marg_b, corr = vec[0:2], vec[2:4], vec[4:8].reshape(2, 2)
    out = np.empty((2, 2, 2, 2))
    for a, b in itertools.product((0, 1), repeat=2):
        sa, sb = (-1.0) ** a, (-1.0) ** b
        out[a, b] = 1.0 + sa * marg_a[:, None] + sb * marg_b[None, :] + sa * sb * corr
    return out


@dataclass(frozen=True)
class ProbabilityPoint:
    marginals: tuple[float, float, float, float]
    correlators: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        m = tuple(float(v) for v in self.marginals)
        c = tuple(float(v) for v in self.correlators)
        if len(m) != 4 or len(c) != 4:
            raise ValueError("a probability point needs 4 marginals and 4 correlators")
        vals = m + c
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite component in {vals}")
        if max(abs(v) for v in vals) > 1.0 + NONNEG_TOL:
            raise ValueError(f"component outside [-1, 1]: {vals}")
        object.__setattr__(self, "marginals", m)
        object.__setattr__(self, "correlators", c)
        lowest = float(_scaled_probabilities(self.vector).min()) / 4.0
        if lowest < -NONNEG_TOL:
            raise NonSignallingViolation(
                f"point lies outside the non-signalling set (min p(ab|xy) = {lowest:.3e})"
            )

    @classmethod
    def from_vector(cls, vec: Iterable[float]) -> "ProbabilityPoint":
        v = [float(t) for t in vec]
        if len(v) != 8:
            raise ValueError(f"expected 8 components, got {len(v)}")
        return cls(tuple(v[:4]), tuple(v[4:]))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.marginals + self.correlators)

    def alice_marginal(self, x: int) -> float:
        return self.marginals[x]

    def bob_marginal(self, y: int) -> float:
        return self.marginals[2 + y]

    def correlator(self, x: int, y: int) -> float:
        return self.correlators[2 * x + y]

    def to_dict(self) -> dict:
        return {"marginals": list(self.marginals), "correlators": list(self.correlators)}

    @classmethod
    def from_dict(cls, d: dict) -> "ProbabilityPoint":
        return cls(tuple(d["marginals"]), tuple(d["correlators"]))


@dataclass(frozen=True)
class ProbabilityTable:
    """Full behaviour ``p[a, b, x, y]``."""

    p: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.p, dtype=float)
        if arr.shape != (2, 2, 2, 2):
            raise ValueError(f"expected shape (2, 2, 2, 2), got {arr.shape}")
        object.__setattr__(self, "p", arr)

    def __getitem__(self, key):
        return self.p[key]

    def normalization_residual(self) -> float:
        return float(np.abs(self.p.sum(axis=(0, 1)) - 1.0).max())

    def signalling_residual(self) -> float:
        alice = self.p.sum(axis=1)  # [a, x, y]
        bob = self.p.sum(axis=0)  # [b, x, y]
        return float(
            max(
                np.abs(alice[:, :, 0] - alice[:, :, 1]).max(),
                np.abs(bob[:, 0, :] - bob[:, 1, :]).max(),
            )
        )

    def to_point(self) -> ProbabilityPoint:
        """Invert the probability formula back to marginals and correlators."""
        p = self.p
        sign = np.array([1.0, -1.0])
        alice = [float(sign @ p[:, :, x, 0].sum(axis=1)) for x in (0, 1)]
        bob = [float(sign @ p[:, :, 0, y].sum(axis=0)) for y in (0, 1)]
        parity = np.outer(sign, sign)
        corr = [float((parity * p[:, :, x, y]).sum()) for x in (0, 1) for y in (0, 1)]
        return ProbabilityPoint(tuple(alice + bob), tuple(corr))

    def flat(self) -> list[float]:
        return [float(self.p[label]) for label in OUTCOME_LABELS]


def point_from_realization(r: Realization) -> ProbabilityPoint:
    if r.theta == HALF_PI:
        ct, st = 0.0, 1.0  # exact zero marginals for the maximally entangled state
    else:
        ct, st = math.cos(r.theta), math.sin(r.theta)
    ca = [math.cos(t) for t in r.alice]
    sa = [math.sin(t) for t in r.alice]
    cb = [math.cos(t) for t in r.bob]
    sb = [math.sin(t) for t in r.bob]
    marginals = (ct * ca[0], ct * ca[1], ct * cb[0], ct * cb[1])
    correlators = tuple(ca[x] * cb[y] + st * sa[x] * sb[y] for x in (0, 1) for y in (0, 1))
    return ProbabilityPoint(marginals, correlators)


def probabilities_from_point(p: ProbabilityPoint | Sequence[float]) -> ProbabilityTable:
    """Probabilities ``p(ab|xy) = (1 + (-1)^a <A_x> + (-1)^b <B_y> + (-1)^(a+b) <A_x B_y>) / 4``.

    Accepts a raw 8-vector as well; raises :class:`NonSignallingViolation`
    when an entry falls below ``-NONNEG_TOL``.
    """
    vec = p.vector if isinstance(p, ProbabilityPoint) else np.asarray(p, dtype=float)
    if vec.shape != (8,):
        raise ValueError(f"expected 8 components, got shape {vec.shape}")
    table = _scaled_probabilities(vec) / 4.0
    lowest = float(table.min())
    if lowest < -NONNEG_TOL:
        raise NonSignallingViolation(f"p(ab|xy) = {lowest:.3e} < 0: point outside the non-signalling set")
    return ProbabilityTable(table)


def sign_flip_symmetry(r: Realization) -> Realization:
    """Negate every observable angle; the statistics are unchanged."""
    return Realization(r.theta, -r.a0, -r.a1, -r.b0, -r.b1)


def point_gradients(r: Realization) -> np.ndarray:
    """5x8 array of ``dP/d(theta, a0, a1, b0, b1)``."""
    ct, st = math.cos(r.theta), math.sin(r.theta)
    ca = [math.cos(t) for t in r.alice]
    sa = [math.sin(t) for t in r.alice]
    cb = [math.cos(t) for t in r.bob]
    sb = [math.sin(t) for t in r.bob]
    grad = np.zeros((5, 8))
    grad[0, :4] = [-st * ca[0], -st * ca[1], -st * cb[0], -st * cb[1]]
    for x in (0, 1):
        for y in (0, 1):
            k = 4 + 2 * x + y
            grad[0, k] = ct * sa[x] * sb[y]
            grad[1 + x, k] = -sa[x] * cb[y] + st * ca[x] * sb[y]
            grad[3 + y, k] = -ca[x] * sb[y] + st * sa[x] * cb[y]
        grad[1 + x, x] = -ct * sa[x]
    for y in (0, 1):
        grad[3 + y, 2 + y] = -ct * sb[y]
    return grad
