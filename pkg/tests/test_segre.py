from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from segre_lines.errors import Degenerate, DegenerateOnWall, InvalidInput, NonGenericCurve
from segre_lines.exactalg import BinaryForm
from segre_lines.generators import PlaneConfig, cremona_generate, one_example, random_curve
from segre_lines.jet import JetCurve, euler_index
from segre_lines.secants import Divisor, Secant, nodes_exact_n3
from segre_lines.segre import (
    ResidualPencil,
    chord_diagram,
    chord_diagram_index_n3,
    residual_pencil,
    segre_details,
    segre_index,
    segre_points,
    segre_weight,
)

from conftest import bf


def _secant(form, la, lb):
    div = Divisor(form.degree, tuple(complex(float(c)) for c in form.coeffs), (), form)
    return Secant(
        tuple(complex(x) for x in la),
        tuple(complex(x) for x in lb),
        div,
        1,
        True,
        exact_lambda=(tuple(Fraction(x) for x in la), tuple(Fraction(x) for x in lb)),
    )


@pytest.mark.parametrize(
    "form, la, lb, q0, q1",
    [
        (bf(1, 0, 1), (1, 0, 0), (0, 1, 0), bf(0, 2, 0), bf(1, 0, -1)),
        (bf(1, 0, -1), (0, 1, 0), (0, 0, 1), bf(1, 0, 1), bf(0, 2, 0)),
        (bf(0, 1, 0), (1, 0, 0), (0, 0, 1), bf(2, 0, 2), bf(2, 0, -2)),
    ],
)
def test_residual_pencils_of_cstar(cstar, form, la, lb, q0, q1):
    P = residual_pencil(cstar, _secant(form, la, lb))
    assert P.exact
    assert (P.q0, P.q1) == (q0, q1)


def test_residual_pencil_on_wall(syz_curve):
    # x1 = x2 = 0 meets the syzygy curve in 3 > 2 points
    M = _secant(bf(1, -1, 0), (1, 0, 0), (0, 1, 0))
    with pytest.raises(DegenerateOnWall):
        residual_pencil(syz_curve, M)


@pytest.mark.parametrize(
    "q0, q1, disc",
    [
        (bf(0, 2, 0), bf(1, 0, -1), -1),
        (bf(1, 0, 1), bf(0, 2, 0), 1),
        (bf(1, 0, 1), bf(1, 0, -1), 1),
        (bf(1, 0, 0), bf(0, 0, 1), 1),
    ],
)
def test_segre_points_examples(q0, q1, disc):
    sp = segre_points(ResidualPencil(q0, q1))
    assert sp.disc_sign == disc
    assert segre_weight(ResidualPencil(q0, q1)) == disc


def test_jacobian_of_first_example():
    sp = segre_points(ResidualPencil(bf(0, 2, 0), bf(1, 0, -1)))
    # (2v)(-2v) - (2u)(2u)
    assert sp.jacobian == bf(-4, 0, -4)


def test_proportional_pencil_rejected():
    with pytest.raises(InvalidInput):
        segre_points(ResidualPencil(bf(1, 2, 3), bf(2, 4, 6)))


def test_base_point_is_on_wall():
    # common root u = 0: the Segre points collide
    with pytest.raises(DegenerateOnWall):
        segre_weight(ResidualPencil(bf(0, 1, 0), bf(0, 1, 1)))


small = st.integers(-6, 6)
quad = st.tuples(small, small, small)


def _indep(a, b):
    return any(a[i] * b[j] != a[j] * b[i] for i in range(3) for j in range(3))


@given(quad, quad)
def test_jacobian_matches_branch_parameters(a, b):
    """Members of q0 + t q1 with a double root sit exactly over the Segre points."""
    assume(_indep(a, b))
    q0, q1 = bf(*a), bf(*b)
    sp = segre_points(ResidualPencil(q0, q1))
    # disc(q0 + t q1) = B(t)^2 - 4 A(t) C(t), quadratic in t
    A = np.poly1d([b[0], a[0]])
    B = np.poly1d([b[1], a[1]])
    Cq = np.poly1d([b[2], a[2]])
    disc_t = B * B - 4 * A * Cq
    co = [int(round(c)) for c in disc_t.coeffs]
    while co and co[0] == 0:
        co = co[1:]
    assume(len(co) == 3)
    d2 = co[1] ** 2 - 4 * co[0] * co[2]
    # real branch parameters <=> real Segre points
    assert (d2 > 0) == (sp.disc_sign > 0)
    assert (d2 == 0) == (sp.disc_sign == 0)
    if d2 != 0:
        jac = [float(x) for x in sp.jacobian.coeffs]
        for t in np.roots(co):
            qa, qb = a[0] + t * b[0], a[1] + t * b[1]
            if abs(qa) < 1e-9:
                x = (1.0, 0.0)
            else:
                x = (-qb / (2 * qa), 1.0)
            val = jac[0] * x[0] ** 2 + jac[1] * x[0] * x[1] + jac[2] * x[1] ** 2
            assert abs(val) < 1e-6 * (1 + sum(abs(c) for c in jac)) * (1 + abs(x[0]) ** 2)


@given(quad, quad, st.tuples(small, small, small, small))
def test_pencil_basis_change_scales_jacobian(a, b, g):
    assume(_indep(a, b))
    ga, gb, gc, gd = g
    det = ga * gd - gb * gc
    assume(det != 0)
    q0, q1 = bf(*a), bf(*b)
    r0 = q0.scale(ga) + q1.scale(gb)
    r1 = q0.scale(gc) + q1.scale(gd)
    j = segre_points(ResidualPencil(q0, q1)).jacobian
    jg = segre_points(ResidualPencil(r0, r1)).jacobian
    assert jg == j.scale(det)
    if segre_points(ResidualPencil(q0, q1)).disc_sign != 0:
        assert segre_weight(ResidualPencil(r0, r1)) == segre_weight(ResidualPencil(q0, q1))


def test_segre_index_cstar(cstar):
    assert segre_index(cstar) == -1
    rows = segre_details(cstar, nodes_exact_n3(cstar))
    assert sorted(r["weight"] for r in rows) == [-1, 1, 1]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_perturbed_first_example_is_hyperbolic(seed):
    rng = np.random.default_rng(seed)
    base = one_example(3)
    eps = Fraction(1, 50)
    rows = []
    for f in base.p:
        rows.append([c + eps * int(r) for c, r in zip(f.coeffs, rng.integers(-3, 4, size=5))])
    C = JetCurve.from_coeffs(rows)
    assert euler_index(C) == 1
    assert segre_index(C) == 1


def test_n2_segre_is_resultant_sign():
    assert segre_index(one_example(2)) == 1
    C = JetCurve.from_coeffs([[0, 1, 0], [1, 0, -1]])
    assert segre_index(C) == euler_index(C)


def test_segre_refuses_degenerate(syz_curve):
    with pytest.raises(Degenerate):
        segre_index(syz_curve)


def test_segre_refuses_dinf1(cstar):
    with pytest.raises(DegenerateOnWall):
        segre_index(cstar, in_dinf1=True)


def test_infinitely_many_secants():
    with pytest.raises(NonGenericCurve):
        segre_index(one_example(3))


def test_chord_diagram_cstar(cstar):
    d = chord_diagram(cstar, nodes_exact_n3(cstar))
    assert sorted(d["kinds"]) == ["cross", "cross", "solitary"]
    assert d["interlaced"] == 1
    assert d["essential_pairs"] == 0
    assert d["index"] == -1


def _cfg(points, Q, param, pairs=()):
    return PlaneConfig.from_json(
        {
            "points": points,
            "pairs": [{"re": a, "im": b} for a, b in pairs],
            "Q": Q,
            "param": [{"degree": 2, "coeffs": c} for c in param],
        }
    )


def test_chord_diagram_three_separate_chords():
    cfg = _cfg(
        [["-4", "4", "0"], ["2", "4", "3"], ["-4", "0", "-4"]],
        [["-6", "-2", "-2"], ["-2", "1", "2"], ["-2", "2", "0"]],
        [["0", "-2/3", "0"], ["0", "-2/3", "2"], ["1/2", "-1/3", "-1/2"]],
    )
    C, truth = cremona_generate(cfg, 3)
    d = chord_diagram(C, nodes_exact_n3(C))
    assert d["kinds"] == ["cross"] * 3
    assert d["interlaced"] == 0
    assert d["index"] == 1 == truth


def test_chord_diagram_essential_pair():
    cfg = _cfg(
        [["-4", "4", "0"]],
        [["-6", "-5", "-10"], ["-5", "8", "6"], ["-10", "6", "0"]],
        [["1", "3", "0"], ["1", "5", "0"], ["-1", "-9/2", "-1/2"]],
        pairs=[(["0", "0", "-4"], ["3", "3", "-4"])],
    )
    C, truth = cremona_generate(cfg, 3)
    d = chord_diagram(C, nodes_exact_n3(C))
    assert sorted(d["kinds"]) == ["cross", "imaginary", "imaginary"]
    assert d["essential_pairs"] == 1
    assert d["index"] == -1 == truth == segre_index(C)


def test_chord_diagram_matches_segre_on_random_curves():
    rng = np.random.default_rng(11)
    for _ in range(15):
        C = random_curve(3, rng)
        rep = nodes_exact_n3(C)
        assert chord_diagram_index_n3(C, rep) == segre_index(C, rep) == euler_index(C)


def test_chord_diagram_needs_n3():
    with pytest.raises(InvalidInput):
        chord_diagram(one_example(2), None)


def test_pencil_json(cstar):
    P = residual_pencil(cstar, _secant(bf(1, 0, 1), (1, 0, 0), (0, 1, 0)))
    assert P.to_json() == {"q0": BinaryForm.from_coeffs([0, 2, 0]).to_json(), "q1": bf(1, 0, -1).to_json(), "exact": True}
