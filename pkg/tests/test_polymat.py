from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnusconv.polymat import (
    MAX_DEGREE,
    DegreeOverflowError,
    DimensionError,
    DomainError,
    PiecewisePolyMatrix,
    Poly,
    PolyMatrix,
    antiderivative,
    commutator,
    dumps,
    from_document,
    loads,
    poly_matrix,
    to_document,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)
big_ints = st.integers(min_value=-(10**40), max_value=10**40)
coeff_lists = st.lists(fractions, min_size=0, max_size=4)


@st.composite
def poly_matrices(draw, dim=None, coeffs=coeff_lists):
    d = dim if dim is not None else draw(st.integers(1, 3))
    rows = [[draw(coeffs) for _ in range(d)] for _ in range(d)]
    return PolyMatrix.from_entries(rows)


def naive_product(a: PolyMatrix, b: PolyMatrix):
    ea, eb = a.entries(), b.entries()
    d = a.dim
    return [[sum((ea[i][k] * eb[k][j] for k in range(d)), Poly()) for j in range(d)] for i in range(d)]


# ---------------------------------------------------------------------------
# scalar polynomials


@given(coeff_lists, coeff_lists, fractions)
def test_poly_ring_operations_commute_with_evaluation(p, q, x):
    p, q = Poly(tuple(p)), Poly(tuple(q))
    assert (p * q)(x) == p(x) * q(x)
    assert (p + q)(x) == p(x) + q(x)
    assert (p - q)(x) == p(x) - q(x)


@given(coeff_lists)
def test_poly_integral_then_derivative(p):
    p = Poly(tuple(p))
    assert p.integral().derivative() == p
    assert p.integral()(0) == 0


def test_poly_trims_and_prints():
    p = Poly((0, 2, 0, Fraction(5, 12), Fraction(-11, 12), 0, 0))
    assert p.degree == 4
    assert str(p) == "-11/12*t^4 + 5/12*t^3 + 2*t"
    assert str(Poly()) == "0"
    assert str(Poly((-1,))) == "-1"
    assert Poly((0, -1)).to_strings() == ["0", "-1"]


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        Poly((0.5,))
    with pytest.raises(TypeError):
        poly_matrix([[[0.1]]])


# ---------------------------------------------------------------------------
# polynomial matrices


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(poly_matrices(d), poly_matrices(d))))
def test_matmul_matches_naive(pair):
    a, b = pair
    assert (a @ b).entries() == naive_product(a, b)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda d: st.tuples(poly_matrices(d, st.lists(big_ints, max_size=3)), poly_matrices(d, st.lists(big_ints, max_size=3)))))
def test_matmul_with_huge_integers(pair):
    a, b = pair
    assert (a @ b).entries() == naive_product(a, b)
    assert a.commutator(b) == a @ b - b @ a


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(poly_matrices(d), poly_matrices(d), poly_matrices(d))))
def test_commutator_is_a_lie_bracket(triple):
    x, y, z = triple
    assert x.commutator(y) == -(y.commutator(x))
    jacobi = x.commutator(y.commutator(z)) + y.commutator(z.commutator(x)) + z.commutator(x.commutator(y))
    assert jacobi.is_zero()
    assert (x @ y) @ z == x @ (y @ z)


@settings(max_examples=40, deadline=None)
@given(poly_matrices(), fractions)
def test_integral_derivative_and_evaluation(m, x):
    assert m.integral().derivative() == m
    exact = m.evaluate_exact(x)
    assert np.allclose(m.evaluate(float(x)), np.array(exact, dtype=float), rtol=1e-12, atol=1e-9)


def test_scalar_and_constant_helpers():
    m = PolyMatrix.constant([[1, 2], [3, 4]])
    assert (m * Fraction(1, 2)).coefficient(0) == [[Fraction(1, 2), 1], [Fraction(3, 2), 2]]
    assert PolyMatrix.identity(2) @ m == m
    assert PolyMatrix.zeros(2).is_zero()
    assert PolyMatrix.zeros(2).degree == -1
    assert m.add_constant([[Fraction(1)] * 2] * 2).coefficient(0) == [[2, 3], [4, 5]]


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        PolyMatrix.identity(2) @ PolyMatrix.identity(3)
    with pytest.raises(DimensionError):
        PolyMatrix.identity(2) + PolyMatrix.identity(3)


def test_degree_guard():
    m = PolyMatrix.from_entries([[[0] * 300 + [1]]])
    with pytest.raises(DegreeOverflowError):
        m @ m
    assert MAX_DEGREE == 512


# ---------------------------------------------------------------------------
# piecewise


def piecewise_example():
    return PiecewisePolyMatrix(
        (0, 1, 3),
        [poly_matrix([[[1], [0, 1]], [[0], [2]]]), poly_matrix([[[0, 0, 1], [5]], [[-1], [0]]])],
    )


def test_antiderivative_is_continuous_and_differentiates_back():
    a = piecewise_example()
    w = antiderivative(a)
    assert w.evaluate_exact(0) == [[0, 0], [0, 0]]
    assert w.limit_left(1) == w.evaluate_exact(1)
    assert w.derivative() == a
    # value at 1 from the first segment: int_0^1 [[1, t], [0, 2]]
    assert w.evaluate_exact(1) == [[1, Fraction(1, 2)], [0, 2]]


def test_segment_lookup_and_domain():
    a = piecewise_example()
    assert a.segment_index(0) == 0
    assert a.segment_index(1) == 1
    assert a.segment_index(3) == 1
    with pytest.raises(DomainError):
        a.evaluate(3.5)
    with pytest.raises(DomainError):
        a.evaluate_exact(-1)


def test_commutator_needs_equal_grids():
    a = piecewise_example()
    b = PiecewisePolyMatrix.single(PolyMatrix.identity(2), 0, 3)
    with pytest.raises(ValueError):
        commutator(a, b)
    assert commutator(a, a).is_zero()


def test_document_roundtrip():
    a = piecewise_example()
    doc = to_document(a)
    assert doc["breakpoints"] == ["0", "1", "3"]
    assert from_document(doc) == a
    assert loads(dumps(a)) == a


@pytest.mark.parametrize(
    "doc",
    [
        {"dim": 2},
        {"dim": 1, "breakpoints": ["0"], "segments": []},
        {"dim": 1, "breakpoints": ["1", "0"], "segments": [[[["1"]]]]},
        {"dim": 1, "breakpoints": ["0", "1"], "segments": [[[["one"]]]]},
        {"dim": 1, "breakpoints": ["0", "1"], "segments": [[[[0.5]]]]},
        {"dim": 2, "breakpoints": ["0", "1"], "segments": [[[["1"]]]]},
    ],
)
def test_bad_documents(doc):
    with pytest.raises(ValueError):
        from_document(doc)
