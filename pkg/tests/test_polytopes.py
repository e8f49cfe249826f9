import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chsh_extremal.core_model import ProbabilityPoint, probabilities_from_point
from chsh_extremal.polytopes import (
    CHSH,
    Functional,
    chsh_values,
    deterministic_index,
    deterministic_matrix,
    deterministic_points,
    facet_residuals,
    is_nonlocal,
    local_decomposition_witness,
    local_value,
    nonsignalling_value,
    pr_boxes,
    touched_facets,
    vertex_matrix,
)

from oracles import deterministic_vectors

coeff = st.floats(-5, 5, allow_nan=False)
functionals = st.builds(lambda c: Functional(tuple(c)), st.lists(coeff, min_size=8, max_size=8))


def test_deterministic_enumeration_order():
    pts = deterministic_points()
    assert len(pts) == 16
    assert np.array_equal(pts[0].vector, np.ones(8))
    assert np.array_equal(pts[15].vector, [-1, -1, -1, -1, 1, 1, 1, 1])
    # matches an independent enumeration
    assert np.array_equal(deterministic_matrix(), np.array(deterministic_vectors()))


def test_deterministic_points_have_01_probabilities():
    for p in deterministic_points():
        t = probabilities_from_point(p).p
        assert np.all((np.abs(t) < 1e-15) | (np.abs(t - 1) < 1e-15))


def test_pr_boxes():
    boxes = pr_boxes()
    assert len(boxes) == 8
    vecs = [tuple(b.vector) for b in boxes]
    assert (0, 0, 0, 0, 1, 1, 1, -1) in vecs
    for v in vecs:
        assert v[:4] == (0, 0, 0, 0)
        assert np.prod(v[4:]) == -1
    assert CHSH.value(ProbabilityPoint.from_vector([0, 0, 0, 0, 1, 1, 1, -1])) == 4


def test_vertices_distinct():
    v = vertex_matrix()
    assert v.shape == (24, 8)
    assert len({tuple(r) for r in v}) == 24


def test_local_values():
    assert local_value(CHSH).beta_L == 2
    dt = Functional((1, 0, 0, 0, 1, 1, 1, -1))
    assert local_value(dt).beta_L == pytest.approx(3)
    wy = Functional((0.5, 0.5, 1, 0, 1, 1, 1, -1))
    assert local_value(wy).beta_L == pytest.approx(max(4, -1, 3))


def test_local_value_ties():
    vals = local_value(CHSH)
    # CHSH = 2 is attained by 8 of the 16 deterministic points
    assert len(vals.maximizers) == 8
    d = deterministic_matrix()
    for i in vals.maximizers:
        assert CHSH.value(d[i]) == 2
    assert local_value(Functional((0,) * 8)).maximizers == list(range(16))


def test_nonsignalling_values():
    assert nonsignalling_value(CHSH) == 4
    assert nonsignalling_value(Functional((1, 0, 0, 0, 0, 0, 0, 0))) == 1
    assert nonsignalling_value(Functional((0, 0, 0, 0, 1, 1, 1, -1))) == 4


@given(functionals)
def test_local_below_nonsignalling(f):
    vals = local_value(f)
    assert vals.beta_L <= vals.beta_NS + 1e-12
    brute = max(float(np.dot(f.coeffs, v)) for v in deterministic_vectors())
    assert vals.beta_L == pytest.approx(brute, abs=1e-12)


def test_functional_validation():
    with pytest.raises(ValueError):
        Functional((1, 2, 3))
    with pytest.raises(ValueError):
        Functional((math.inf,) + (0,) * 7)


def test_facet_residuals_uniform():
    assert np.allclose(facet_residuals([0] * 8), 1.0)


def test_facet_residuals_pr_box():
    res = facet_residuals([0, 0, 0, 0, 1, 1, 1, -1])
    assert set(np.round(res, 12)) <= {0.0, 2.0}


def test_deterministic_facet_residuals():
    for v in deterministic_matrix():
        res = facet_residuals(v)
        assert all(min(abs(r - k) for k in (0, 2, 4)) < 1e-12 for r in res)


def test_touched_facets_labels():
    # (1,1,1,1,...) has p(ab|xy) = 0 whenever a or b is 1
    labels = touched_facets(np.ones(8))
    assert len(labels) == 12
    assert all(a == 1 or b == 1 for a, b, _, _ in labels)


def test_chsh_values_and_nonlocality():
    s = math.sqrt(2) / 2
    assert chsh_values([0, 0, 0, 0, s, s, s, -s]).max() == pytest.approx(2 * math.sqrt(2))
    assert is_nonlocal([0, 0, 0, 0, s, s, s, -s])
    for v in deterministic_matrix():
        assert not is_nonlocal(v)


@pytest.mark.parametrize(
    "a1,b1,weights",
    [
        (0.0, 0.0, [1.0, 0.0, 0.0]),
        (math.pi / 2, math.pi / 2, [0.5, 0.0, 0.5]),
        (math.pi / 3, 2 * math.pi / 3, [0.25, 0.5, 0.25]),
    ],
)
def test_local_decomposition_witness_examples(a1, b1, weights):
    ca, cb = math.cos(a1), math.cos(b1)
    p = [1, ca, 1, cb, 1, cb, ca, 1 - abs(ca - cb)]
    w = local_decomposition_witness(p)
    assert w is not None
    assert w.weights == pytest.approx(weights, abs=1e-15)
    assert w.reconstruction_error < 1e-12


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_local_decomposition_witness_property(ca, cb):
    p = np.array([1, ca, 1, cb, 1, cb, ca, 1 - abs(ca - cb)])
    w = local_decomposition_witness(p)
    assert w is not None
    assert min(w.weights) >= 0
    assert sum(w.weights) == pytest.approx(1, abs=1e-12)
    assert np.abs(np.asarray(w.weights) @ w.vertices() - p).max() < 1e-12


def test_local_decomposition_not_found():
    assert local_decomposition_witness([0] * 8) is None


def test_deterministic_index():
    assert deterministic_index(np.ones(8)) == 0
    with pytest.raises(ValueError):
        deterministic_index(np.zeros(8))
