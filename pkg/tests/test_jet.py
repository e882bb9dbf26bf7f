import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from segre_lines.errors import Degenerate, InvalidInput, SingularAlongLine
from segre_lines.exactalg import BinaryForm, RatMatrix, det_exact
from segre_lines.generators import one_example, random_curve
from segre_lines.jet import (
    Hypersurface,
    JetCurve,
    build_AC,
    classify_discriminants,
    det_AC,
    euler_index,
    extract_jet,
    has_cusp,
    syzygy,
)

import numpy as np

from conftest import bf

coef = st.integers(min_value=-9, max_value=9)


def _curve_or_none(rows):
    try:
        return JetCurve.from_coeffs(rows)
    except (SingularAlongLine, InvalidInput):
        return None


def curves(n):
    d = 2 * n - 2
    rows = st.lists(st.lists(coef, min_size=d + 1, max_size=d + 1).filter(any), min_size=n, max_size=n)
    return rows.map(_curve_or_none).filter(lambda C: C is not None)


def one_example_hypersurface(extra=()):
    terms = [((4, 0, 1, 0, 0), 1), ((2, 2, 0, 1, 0), 1), ((0, 4, 0, 0, 1), 1)]
    return Hypersurface(3, tuple(terms) + tuple(extra))


def test_extract_jet_examples():
    C = extract_jet(one_example_hypersurface())
    assert C == one_example(3)
    X2 = Hypersurface(2, (((2, 0, 1, 0), 1), ((0, 2, 0, 1), 1)))
    assert extract_jet(X2).p == (bf(1, 0, 0), bf(0, 0, 1))
    # x_1^2 x_2 u^2 has x-degree 3 and is dropped
    assert extract_jet(one_example_hypersurface([((2, 0, 2, 1, 0), 1)])) == C


def test_extract_jet_rejects_bad_input():
    with pytest.raises(InvalidInput):
        Hypersurface(2, (((1, 0, 0), 1),))
    with pytest.raises(InvalidInput):
        extract_jet(Hypersurface(2, (((3, 0, 0, 0), 1), ((2, 0, 1, 0), 1))))
    # p = (u^2, uv) share the root u = 0
    with pytest.raises(SingularAlongLine):
        extract_jet(Hypersurface(2, (((2, 0, 1, 0), 1), ((1, 1, 0, 1), 1))))


def test_build_AC_examples(syz_curve):
    A = build_AC(one_example(2))
    assert A.to_rows() == [[int(i == j) for j in range(4)] for i in range(4)]
    A3 = build_AC(one_example(3))
    assert A3.to_rows() == [[int(i == j) for j in range(6)] for i in range(6)]
    # column 1 is (a_{0,1}, ..., a_{2n-2,1}, 0)
    col0 = [r[0] for r in build_AC(syz_curve).to_rows()]
    assert col0 == list(syz_curve.p[0].coeffs) + [0]


def test_det_and_euler_examples(cstar, syz_curve):
    for n in range(2, 7):
        assert det_AC(one_example(n)) == 1
        assert euler_index(one_example(n)) == 1
    assert det_AC(cstar) == -64
    assert euler_index(cstar) == -1
    with pytest.raises(Degenerate):
        euler_index(syz_curve)


def test_syzygy_examples(syz_curve):
    L = syzygy(syz_curve)
    assert L is not None
    # proportional to (u - 3v, -(u - 2v), 0)
    target = (bf(1, -3), bf(-1, 2), bf(0, 0))
    k = L[0].coeffs[0]
    assert all(l == t.scale(k) for l, t in zip(L, target))
    assert syzygy(one_example(3)) is None


def test_syzygy_constructed_example():
    # p = (u^2 r, uv r, v^2 r') with r = u^2: p1 v - p2 u = 0
    r2 = bf(1, 1, 2)
    C = JetCurve(3, (bf(1, 0, 0, 0, 0), bf(0, 1, 0, 0, 0), BinaryForm.monomial(0, 2) * r2), check=False)
    L = syzygy(C)
    assert L is not None
    total = sum((f * l for f, l in zip(C.p, L)), BinaryForm.zero(5))
    assert total.is_zero


def test_classify_examples(syz_curve):
    f = classify_discriminants(one_example(3))
    assert not f.in_DP and not f.in_DP1 and f.balanced
    dep = JetCurve.from_coeffs([[1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [1, 0, 1, 0, 0]], check=False)
    f = classify_discriminants(dep)
    assert f.in_DP1 and f.in_DP
    f = classify_discriminants(syz_curve)
    assert f.in_DP and not f.in_DP1


def test_det_zero_iff_syzygy_random():
    rng = np.random.default_rng(11)
    zeros = 0
    for i in range(500):
        # coefficients in {-1, 0, 1} hit the discriminant now and then
        bound = 1 if i % 2 else 9
        C = _curve_or_none([[int(x) for x in r] for r in rng.integers(-bound, bound + 1, size=(3, 5))])
        if C is None:
            continue
        L = syzygy(C)
        assert (det_AC(C) == 0) == (L is not None)
        zeros += L is not None
        if L is not None:
            total = sum((f * l for f, l in zip(C.p, L)), BinaryForm.zero(5))
            assert total.is_zero
    assert zeros > 0


@given(curves(3), st.lists(coef, min_size=9, max_size=9))
def test_coordinate_change_scales_det_by_square(C, m):
    M = [m[0:3], m[3:6], m[6:9]]
    dM = det_exact(RatMatrix.from_rows(M))
    assume(dM != 0)
    assert det_AC(C.transform(M)) == dM**2 * det_AC(C)


@given(curves(3), st.integers(1, 20), st.integers(1, 20))
def test_positive_u_scaling_keeps_sign(C, a, b):
    lam = Fraction(a, b)
    d0 = det_AC(C)
    d1 = det_AC(C.reparametrize(lam, 0, 0, 1))
    assert (d0 > 0) == (d1 > 0) and (d0 == 0) == (d1 == 0)


@given(curves(3), st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_reparametrization_factor(C, g):
    # det A_C picks up det(g)^(2n(n-1)); the exponent is even, so the sign is kept
    a, b, c, d = g
    dg = a * d - b * c
    assume(dg != 0)
    assert det_AC(C.reparametrize(a, b, c, d)) == Fraction(dg) ** 12 * det_AC(C)


@given(curves(2))
def test_swap_uv_keeps_sign_n2(C):
    assert det_AC(C.reparametrize(0, 1, 1, 0)) == det_AC(C)


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-5, 5)), max_size=4))
def test_higher_order_terms_do_not_change_jet(extra):
    X = one_example_hypersurface()
    terms = []
    for a, b, c in extra:
        # x-degree >= 2 monomials of total degree 5
        e = [0, 0, 0, 0, 0]
        e[2 + a] += 1
        e[2 + b] += 1
        e[0] = 3
        terms.append((tuple(e), c))
    Y = Hypersurface(3, X.terms + tuple(terms))
    assert extract_jet(Y) == extract_jet(X)


def test_json_roundtrip(cstar):
    assert JetCurve.from_json(cstar.to_json()) == cstar
    X = one_example_hypersurface()
    assert Hypersurface.from_json(X.to_json()) == X
    with pytest.raises(InvalidInput):
        JetCurve.from_json({"n": 3})


def test_random_curve_helper_reproducible():
    a = random_curve(3, np.random.default_rng(1))
    b = random_curve(3, np.random.default_rng(1))
    assert a == b
    assert random.Random(0).random() == random.Random(0).random()


def test_cusp_detection(cstar):
    assert not has_cusp(cstar)
    # the u^3 v row is 3/2 times the u^4 row: dC/dv is parallel to C at [1:0]
    C = JetCurve.from_coeffs([[-6, -9, 2, 3, -5], [2, 3, 6, -5, -7], [4, 6, 7, -9, -1]])
    assert has_cusp(C)
    # reparametrising moves the cusp but does not remove it
    C2 = JetCurve(3, tuple(f.compose(1, 1, 0, 1) for f in C.p))
    assert has_cusp(C2)
