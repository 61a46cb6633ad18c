import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mwrc.errors import SpecMismatchError, ValidationError
from mwrc.gf import (FieldElem, FieldSpec, FieldVec, GenMatrix, add, get_field, inv, mat_vec_mul, mul,
                     neg, prime_power, sub)

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32]


def elem(q, v):
    return FieldElem(FieldSpec.of_order(q), v)


def test_small_examples():
    assert add(elem(2, 1), elem(2, 1)).value == 0
    assert add(elem(5, 3), elem(5, 4)).value == 2
    assert mul(elem(5, 3), elem(5, 4)).value == 2
    assert neg(elem(2, 1)).value == 1
    assert inv(elem(5, 2)).value == 3


def test_gf4_examples_with_x2_x_1():
    spec = FieldSpec(2, 2, (1, 1, 1))
    a, b = FieldElem(spec, 0b10), FieldElem(spec, 0b11)
    assert (a + b).value == 0b01
    assert (a * a).value == 0b11
    assert inv(a).value == 0b11


def test_operators_match_functions():
    a, b = elem(7, 3), elem(7, 5)
    assert a + b == add(a, b)
    assert a - b == sub(a, b)
    assert a * b == mul(a, b)
    assert -a == neg(a)
    assert int(a) == 3


def test_mixed_fields_rejected():
    with pytest.raises(SpecMismatchError):
        add(elem(2, 1), elem(3, 1))
    with pytest.raises(SpecMismatchError):
        mat_vec_mul(FieldVec(FieldSpec(2), [1]), GenMatrix(FieldSpec(3), [[1]]))


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        inv(elem(4, 0))


@pytest.mark.parametrize("bad", [
    dict(p=4), dict(p=2, k=0), dict(p=2, k=2, poly=(1, 0, 1)), dict(p=2, k=2, poly=(1, 1)),
    dict(p=2, k=11),
])
def test_invalid_field_specs(bad):
    with pytest.raises(ValidationError):
        FieldSpec(**bad)


def test_element_range_checked():
    with pytest.raises(ValidationError):
        elem(5, 5)
    with pytest.raises(ValidationError):
        FieldVec(FieldSpec(2), [0, 2])


def test_prime_power():
    assert prime_power(8) == (2, 3)
    assert prime_power(9) == (3, 2)
    assert prime_power(6) is None
    with pytest.raises(ValidationError):
        FieldSpec.of_order(6)


@pytest.mark.parametrize("q", ORDERS)
def test_tables_match_polynomial_oracle(q):
    spec = FieldSpec.of_order(q)
    gf = get_field(spec)
    for a in range(q):
        for b in range(q):
            if spec.k == 1:
                assert gf.mul(a, b) == (a * b) % q
                assert gf.add(a, b) == (a + b) % q
            else:
                assert gf.mul(a, b) == oracles.poly_mul_mod(a, b, spec.p, spec.k, spec.poly)
                assert gf.add(a, b) == oracles.poly_add(a, b, spec.p, spec.k)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(ORDERS), st.data())
def test_field_axioms(q, data):
    gf = get_field(FieldSpec.of_order(q))
    a, b, c = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert gf.add(a, b) == gf.add(b, a)
    assert gf.mul(a, b) == gf.mul(b, a)
    assert gf.add(gf.add(a, b), c) == gf.add(a, gf.add(b, c))
    assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
    assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))
    assert gf.add(a, gf.neg(a)) == 0
    assert gf.sub(gf.add(a, b), b) == a
    assert gf.mul(a, 1) == a
    if a:
        assert gf.mul(a, gf.inv(a)) == 1


def test_mat_vec_examples():
    spec = FieldSpec(3)
    G = GenMatrix(spec, [[1, 2, 0], [2, 2, 1]])
    assert np.array_equal(mat_vec_mul(FieldVec(spec, [0, 0]), G).values, [0, 0, 0])
    eye = GenMatrix(spec, np.eye(3, dtype=int))
    c = FieldVec(spec, [2, 0, 1])
    assert mat_vec_mul(c, eye) == c
    want = oracles.naive_mat_vec([1, 2], G.values.tolist(), lambda x, y: (x + y) % 3, lambda x, y: x * y % 3)
    assert mat_vec_mul(FieldVec(spec, [1, 2]), G).values.tolist() == want


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 4, 5, 8, 9]), st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_mat_vec_matches_naive_oracle(q, ell, n, seed):
    spec = FieldSpec.of_order(q)
    gf = get_field(spec)
    rng = np.random.default_rng(seed)
    c, G = gf.random(rng, ell), gf.random(rng, (ell, n))
    got = mat_vec_mul(FieldVec(spec, c), GenMatrix(spec, G)).values.tolist()
    want = oracles.naive_mat_vec(c.tolist(), G.tolist(), lambda x, y: int(gf.add(x, y)),
                                 lambda x, y: int(gf.mul(x, y)))
    assert got == want


def test_dimension_mismatch():
    spec = FieldSpec(2)
    with pytest.raises(ValidationError):
        mat_vec_mul(FieldVec(spec, [1, 0, 1]), GenMatrix(spec, [[1, 0]]))


def test_rank():
    gf = get_field(FieldSpec(2))
    assert gf.rank(np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]])) == 2
    assert gf.rank(np.eye(4, dtype=int)) == 4
    gf5 = get_field(FieldSpec(5))
    assert gf5.rank(np.array([[1, 2], [2, 4]])) == 1
