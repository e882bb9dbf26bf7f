from fractions import Fraction

import numpy as np
import pytest

from segre_lines.errors import Degenerate, IncompleteEnumeration, InvalidInput, Unsupported
from segre_lines.jet import Hypersurface, extract_jet, euler_index
from segre_lines.lines import (
    RealLine,
    clebsch_cubic,
    double_factorial,
    fermat,
    fermat_cubic,
    find_real_lines,
    line_indices,
    line_jet,
    plucker_key,
    restrict_to_line,
    signed_count,
)
from segre_lines.secants import SolverConfig

from conftest import bf


def test_restrict_examples():
    X = fermat_cubic()
    assert restrict_to_line(X, ([1, -1, 0, 0], [0, 0, 1, -1])).is_zero
    assert restrict_to_line(X, ([1, 0, 0, 0], [0, 1, 0, 0])) == bf(1, 0, 0, 1)
    Q = fermat(3)
    assert restrict_to_line(Q, ([1, -1, 0, 0, 0], [0, 0, 1, -1, 0])).is_zero


def test_restrict_wrong_space():
    with pytest.raises(InvalidInput):
        restrict_to_line(fermat_cubic(), ([1, 0, 0], [0, 1, 0]))


def test_double_factorial():
    assert [double_factorial(2 * n - 1) for n in (1, 2, 3, 4)] == [1, 3, 15, 105]


def _key(r1, r2):
    return tuple(np.round(plucker_key(np.array([r1, r2], dtype=float)), 9))


def test_fermat_cubic_lines():
    X = fermat_cubic()
    res = find_real_lines(X, SolverConfig(seed=1))
    assert res.stable and len(res) == 3
    expected = {
        _key([1, -1, 0, 0], [0, 0, 1, -1]),
        _key([1, 0, -1, 0], [0, 1, 0, -1]),
        _key([1, 0, 0, -1], [0, 1, -1, 0]),
    }
    assert {tuple(np.round(L.plucker_key, 9)) for L in res} == expected
    for L in res:
        assert L.exact and restrict_to_line(X, L).is_zero
    assert signed_count(X, res.lines) == 3
    assert all(line_jet(X, L).det_sign == 1 for L in res)


def test_clebsch_lines():
    X = clebsch_cubic()
    res = find_real_lines(X, SolverConfig(seed=2))
    assert res.stable and len(res) == 27
    assert len(res) in (3, 7, 15, 27)
    for L in res:
        if L.exact:
            assert restrict_to_line(X, L).is_zero
        else:
            assert L.residual < 1e-9
    assert signed_count(X, res.lines) == 3


def test_clebsch_triples_agree():
    X = clebsch_cubic()
    res = find_real_lines(X, SolverConfig(seed=3))
    species = []
    for L in res:
        ind = line_indices(X, L)
        assert ind["euler"] == ind["segre"] == ind["welschinger"]
        species.append(ind["species"])
    assert species.count("hyperbolic") == 15 and species.count("elliptic") == 12


def test_standard_line_matches_extract_jet():
    # a cubic through x1 = x2 = 0: jet from the line equals extract_jet
    X = Hypersurface(
        2,
        (
            ((2, 0, 1, 0), 1),
            ((0, 2, 1, 0), -1),
            ((1, 1, 0, 1), 2),
            ((0, 2, 0, 1), 3),
            ((0, 0, 3, 0), 1),
            ((0, 0, 1, 2), -1),
        ),
    )
    L = RealLine((0, 1), ((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))), (), True)
    J = line_jet(X, L)
    C = extract_jet(X)
    assert J.exact and J.curve.p == C.p
    assert J.det_sign == euler_index(C)


def test_degenerate_line():
    # p1 = u^2, p2 = uv share the root [0:1]: X is singular on the line
    X = Hypersurface(2, (((2, 0, 1, 0), 1), ((1, 1, 0, 1), 1), ((0, 0, 3, 0), 1), ((0, 0, 0, 3), 1)))
    L = RealLine((0, 1), ((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))), (), True)
    with pytest.raises(Degenerate):
        signed_count(X, [L])


def test_line_json_roundtrip():
    res = find_real_lines(fermat_cubic(), SolverConfig(seed=4))
    for L in res:
        back = RealLine.from_json(L.to_json())
        assert back.chart == L.chart and back.params == L.params and back.exact == L.exact
        assert np.allclose(back.plucker_key, L.plucker_key)
    assert res.to_json()["stable"] is True


def test_line_json_rejects_bad_chart():
    with pytest.raises(InvalidInput):
        RealLine.from_json({"chart": [3, 1], "params": [["0", "0"], ["0", "0"]], "exact": True})


def test_unstable_search_reports_incomplete():
    with pytest.raises(IncompleteEnumeration):
        find_real_lines(clebsch_cubic(), SolverConfig(seed=1, starts=4, max_rounds=1))


def test_n4_unsupported():
    with pytest.raises(Unsupported):
        find_real_lines(fermat(4))
