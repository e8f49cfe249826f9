import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chsh_extremal.bell_spectrum import (
    X,
    Z,
    build_bell_operator,
    bell_operator_for_angles,
    canonicalize_realization,
    eigenvalues_from_moments,
    maximize_quantum_value,
    moment_verify,
    top_eigenpair,
)
from chsh_extremal.core_model import point_from_realization
from chsh_extremal.families import (
    DoubleTiltedParams,
    WolfeYelinParams,
    double_tilted_eigenvalues,
    double_tilted_functional,
    wolfe_yelin_functional,
    wolfe_yelin_matrix,
    wolfe_yelin_solve,
)
from chsh_extremal.polytopes import CHSH, Functional, local_value, nonsignalling_value

from oracles import bell_matrix, obs, quantum_value

SQRT2 = math.sqrt(2)
half_turn = st.floats(0, math.pi)
coeff = st.floats(-2, 2, allow_nan=False)


def test_chsh_operator_pauli_form():
    w = build_bell_operator(CHSH, math.pi / 2, math.pi / 2)
    expected = np.kron(Z, Z) + np.kron(Z, X) + np.kron(X, Z) - np.kron(X, X)
    assert np.allclose(w.entries, expected, atol=1e-15)
    assert np.allclose(w.spectrum(), [2 * SQRT2, 0, 0, -2 * SQRT2], atol=1e-12)


@given(st.lists(coeff, min_size=8, max_size=8))
def test_commuting_observables_give_diagonal_operator(c):
    w = build_bell_operator(Functional(tuple(c)), 0.0, 0.0).entries
    assert np.abs(w - np.diag(np.diag(w))).max() < 1e-15


@given(st.lists(coeff, min_size=8, max_size=8), half_turn, half_turn)
def test_operator_matches_pauli_oracle_and_is_symmetric(c, a, b):
    w = build_bell_operator(Functional(tuple(c)), a, b).entries
    assert np.abs(w - w.T).max() < 1e-14
    assert np.allclose(w, bell_matrix(c, 0.0, a, 0.0, b), atol=1e-13)


def test_operator_rejects_angles_outside_half_turn():
    with pytest.raises(ValueError):
        build_bell_operator(CHSH, -0.5, 0.0)


@given(st.floats(-0.99, 0.99), st.floats(0, 2), st.floats(0, 2 * math.pi), half_turn)
def test_wolfe_yelin_block_matrix(a0, a1, a, b):
    # Alice's observables at +-a/2, Bob's at 0 and b
    f = wolfe_yelin_functional(WolfeYelinParams(a0, a1))
    w = bell_operator_for_angles(f, a / 2, -a / 2, 0.0, b)
    assert np.allclose(w, wolfe_yelin_matrix(WolfeYelinParams(a0, a1), a, b), atol=1e-13)


def test_top_eigenpair_chsh_and_zero():
    lam, v = top_eigenpair(build_bell_operator(CHSH, math.pi / 2, math.pi / 2))
    assert lam == pytest.approx(2 * SQRT2, abs=1e-14)
    lam0, v0 = top_eigenpair(build_bell_operator(Functional((0,) * 8), 1.0, 2.0))
    assert lam0 == 0.0
    assert np.linalg.norm(v0) == pytest.approx(1.0)


@given(st.lists(coeff, min_size=8, max_size=8), half_turn, half_turn)
def test_top_eigenpair_residual(c, a, b):
    w = build_bell_operator(Functional(tuple(c)), a, b)
    lam, v = top_eigenpair(w)
    assert np.linalg.norm(w.entries @ v - lam * v) < 1e-11
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert lam == pytest.approx(w.spectrum()[0], abs=1e-12)


@given(st.floats(0, 1.99), st.floats(0, math.pi / 2), st.floats(0, math.pi), half_turn)
def test_double_tilted_closed_form_eigenvalues(alpha, phi, a, b):
    p = DoubleTiltedParams(alpha, phi)
    l1, l2 = double_tilted_eigenvalues(p, a, b)
    spectrum = np.linalg.eigvalsh(bell_operator_for_angles(double_tilted_functional(p), a, -a, 0, b))
    assert np.allclose(sorted(spectrum), sorted([l1, l2, -l1, -l2]), atol=1e-9)


# ---- maximisation ------------------------------------------------------------


def test_chsh_maximum():
    t0 = time.perf_counter()
    q = maximize_quantum_value(CHSH)
    assert time.perf_counter() - t0 < 1.0
    assert q.beta_max == pytest.approx(2 * SQRT2, abs=1e-9)
    assert math.sin(q.a_star) == pytest.approx(1, abs=1e-6)
    assert math.sin(q.b_star) == pytest.approx(1, abs=1e-6)
    assert q.unique and not q.boundary
    w = build_bell_operator(CHSH, q.a_star, q.b_star)
    assert q.beta_max == pytest.approx(top_eigenpair(w)[0], abs=1e-10)
    assert abs(np.linalg.norm(q.eigenvector) - 1) < 1e-12


def test_marginal_functional_boundary_optimum():
    q = maximize_quantum_value(Functional((1, 0, 0, 0, 0, 0, 0, 0)))
    assert q.beta_max == pytest.approx(1.0, abs=1e-12)
    assert q.boundary


def test_zero_functional_is_not_unique():
    q = maximize_quantum_value(Functional((0,) * 8))
    assert q.beta_max == 0.0
    assert not q.unique


def test_wolfe_yelin_point_matches_closed_form():
    p = WolfeYelinParams(0.3, 0.8)
    q = maximize_quantum_value(wolfe_yelin_functional(p))
    assert q.beta_max == pytest.approx(wolfe_yelin_solve(p).lambda_plus, abs=1e-6)
    # frozen from a four-angle multistart oracle
    assert q.beta_max == pytest.approx(3.405671116499349, abs=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_maximum_matches_four_angle_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    c = tuple(rng.uniform(-1, 1, 8))
    q = maximize_quantum_value(Functional(c))
    assert q.beta_max == pytest.approx(quantum_value(c, starts=12, seed=seed), abs=1e-6)


def test_maximize_argument_checks():
    with pytest.raises(ValueError):
        maximize_quantum_value(CHSH, grid_n=4)
    with pytest.raises(ValueError):
        maximize_quantum_value(CHSH, refine_tol=0)


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=8, max_size=8))
def test_quantum_value_between_local_and_nonsignalling(c):
    f = Functional(tuple(c))
    q = maximize_quantum_value(f)
    assert local_value(f).beta_L - 1e-9 <= q.beta_max <= nonsignalling_value(f) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=8, max_size=8))
def test_optimal_realisation_attains_value(c):
    f = Functional(tuple(c))
    q = maximize_quantum_value(f)
    assert f.value(point_from_realization(q.realization)) == pytest.approx(q.beta_max, abs=1e-9)


# ---- canonicalisation --------------------------------------------------------


def _direct_point(v, a, b):
    A = [obs(0.0), obs(a)]
    B = [obs(0.0), obs(b)]
    I = np.eye(2)
    ev = lambda m: float(v @ m @ v)  # noqa: E731
    return np.array(
        [ev(np.kron(A[0], I)), ev(np.kron(A[1], I)), ev(np.kron(I, B[0])), ev(np.kron(I, B[1]))]
        + [ev(np.kron(A[x], B[y])) for x in (0, 1) for y in (0, 1)]
    )


def test_canonicalize_product_state():
    r = canonicalize_realization(np.array([1.0, 0, 0, 0]), 0.3, 0.4)
    assert r.theta == pytest.approx(0.0, abs=1e-15)


def test_canonicalize_bell_state():
    v = np.array([1.0, 0, 0, 1]) / SQRT2
    r = canonicalize_realization(v, math.pi / 2, math.pi / 2)
    assert r.theta == pytest.approx(math.pi / 2, abs=1e-12)
    p = point_from_realization(r).vector
    assert np.allclose(p, [0, 0, 0, 0, 1, 0, 0, 1], atol=1e-12)


@given(
    st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 0.1),
    half_turn,
    half_turn,
)
def test_canonicalize_preserves_statistics(raw, a, b):
    v = np.array(raw) / np.linalg.norm(raw)
    r = canonicalize_realization(v, a, b)
    assert 0 <= r.theta <= math.pi / 2
    assert np.abs(point_from_realization(r).vector - _direct_point(v, a, b)).max() < 1e-10


def test_canonicalize_complex_input():
    v = np.exp(0.7j) * np.array([0.6, 0.0, 0.0, 0.8])
    r = canonicalize_realization(v, 1.0, 2.0)
    # the larger Schmidt coefficient sits on |00>
    assert math.cos(r.theta / 2) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        canonicalize_realization(np.array([0.6, 0.8j, 0, 0]), 1.0, 2.0)


def test_canonicalize_requires_unit_norm():
    with pytest.raises(ValueError):
        canonicalize_realization(np.array([1.0, 1.0, 0, 0]), 1.0, 2.0)


def test_wolfe_yelin_optimum_state_angle():
    p = WolfeYelinParams(0.3, 0.8)
    sol = wolfe_yelin_solve(p)
    q = maximize_quantum_value(wolfe_yelin_functional(p))
    # compare the Schmidt coefficient via cot(theta/2), folded to theta <= pi/2
    theta_closed = 2 * math.atan(1 / sol.cot_half_theta)
    theta_closed = min(theta_closed, math.pi - theta_closed)
    assert q.realization.theta == pytest.approx(theta_closed, abs=1e-7)


# ---- moments -----------------------------------------------------------------


def test_moments_chsh():
    m = moment_verify(CHSH, math.pi / 2, math.pi / 2, 2 * SQRT2, 0.0)
    assert m.passed
    assert m.m2 == pytest.approx(16)
    assert m.m4 == pytest.approx(128)
    assert m.lambda1 == pytest.approx(2 * SQRT2)
    assert m.lambda2 == pytest.approx(0, abs=1e-6)


def test_moments_zero_functional():
    m = moment_verify(Functional((0,) * 8), 0.4, 0.5, 0.0, 0.0)
    assert m.passed and m.m2 == 0 and m.m4 == 0


def test_moments_reject_wrong_eigenvalues():
    assert not moment_verify(CHSH, math.pi / 2, math.pi / 2, 2.0, 0.0).passed


def test_moments_precondition():
    with pytest.raises(ValueError):
        moment_verify(Functional((1, 0, 1, 0, 1, 1, 1, -1)), 0.3, 0.4, 1, 1)
    # the mirrored case with vanishing Alice coefficients is served
    assert moment_verify(Functional((0, 0, 0.5, 0, 1, 1, 1, -1)), 0.3, 0.4, 1, 1).odd_trace_residual < 1e-10


def test_moments_double_tilted_sample():
    rng = np.random.default_rng(3)
    p = DoubleTiltedParams(1.0, math.pi / 4)
    f = double_tilted_functional(p)
    for _ in range(20):
        a, b = rng.uniform(0, math.pi, 2)
        l1, l2 = double_tilted_eigenvalues(p, a / 2, b)
        assert moment_verify(f, a, b, l1, l2).passed


@given(st.floats(0, 64), st.floats(0, 1))
def test_moment_inversion(m2, t):
    # choose m4 inside its feasible range [m2^2/4, m2^2/2]
    m4 = m2 * m2 / 4 * (1 + t)
    l1, l2 = eigenvalues_from_moments(m2, m4)
    assert 2 * (l1**2 + l2**2) == pytest.approx(m2, rel=1e-9, abs=1e-9)
    assert l1 >= l2 >= 0


@given(st.floats(-2, 2), st.floats(-2, 2), st.lists(coeff, min_size=4, max_size=4), half_turn, half_turn)
def test_spectrum_symmetric_without_bob_marginals(c1, c2, corr, a, b):
    w = build_bell_operator(Functional((c1, c2, 0, 0, *corr)), a, b)
    s = w.spectrum()
    assert np.allclose(s, -s[::-1], atol=1e-10)


@given(st.floats(0, 1.99), st.floats(0, math.pi / 2), st.floats(0, math.pi), half_turn)
def test_double_tilted_radicands_nonnegative(alpha, phi, a, b):
    al2 = alpha**2
    inner = (
        1
        + 3 * al2
        - math.cos(2 * b)
        + al2 * math.cos(b) * math.cos(phi)
        + 4 * al2 * math.cos(2 * a) * math.sin(phi)
        + math.cos(4 * a) * (-1 + al2 + math.cos(2 * b) - al2 * math.cos(b) * math.cos(phi))
    )
    assert inner >= -1e-12
    base = 4 + al2 + al2 * math.cos(2 * a) * math.sin(phi)
    assert base - 2 * math.sqrt(max(inner, 0)) >= -1e-9
