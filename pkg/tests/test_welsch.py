import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from segre_lines.errors import NotBalanced, Unsupported
from segre_lines.generators import one_example, random_curve
from segre_lines.jet import JetCurve, euler_index
from segre_lines.welsch import frame_loop, splitting_sections, welschinger_weight

from conftest import bf


def test_sections_first_example():
    S = splitting_sections(one_example(3))
    assert S.sections == (
        (bf(0, 0, 1), bf(-1, 0, 0), bf(0, 0, 0)),
        (bf(0, 0, 0), bf(0, 0, 1), bf(-1, 0, 0)),
    )


def test_sections_n2():
    S = splitting_sections(one_example(2))
    assert S.sections == ((bf(0, 0, 1), bf(-1, 0, 0)),)


def test_sections_are_syzygies():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        C = random_curve(n, rng)
        S = splitting_sections(C)
        assert len(S.sections) == n - 1
        for sec in S.sections:
            tot = sec[0] * C.p[0]
            for q, p in zip(sec[1:], C.p[1:]):
                tot = tot + q * p
            assert tot.is_zero


def test_unbalanced(syz_curve):
    with pytest.raises(NotBalanced):
        splitting_sections(syz_curve)


@pytest.mark.parametrize("n, expected", [(2, 1), (3, 1)])
def test_first_example_weight(n, expected):
    assert welschinger_weight(one_example(n)) == expected


def test_cstar_weight(cstar):
    details = {}
    assert welschinger_weight(cstar, details=details) == -1
    assert details["max_step_angle"] < math.pi / 4


def test_n2_winding():
    details = {}
    assert welschinger_weight(one_example(2), details=details) == 1
    assert details["winding"] == 0


def test_unsupported_n4():
    with pytest.raises(Unsupported):
        welschinger_weight(one_example(4))


def test_matches_euler_on_random_curves():
    rng = np.random.default_rng(5)
    for n in (2, 3):
        for _ in range(25):
            C = random_curve(n, rng)
            assert welschinger_weight(C) == euler_index(C)


small = st.integers(-4, 4)


@given(st.integers(0, 10**6), small, small, small, small)
def test_basis_independence(seed, a, b, c, d):
    assume(a * d - b * c != 0)
    C = random_curve(3, np.random.default_rng(seed))
    S = splitting_sections(C)
    w = welschinger_weight(C, S)
    assert welschinger_weight(C, S.combine([[a, b], [c, d]])) == w


@pytest.mark.parametrize("seed", range(6))
def test_refinement_stability(seed):
    C = random_curve(3, np.random.default_rng(100 + seed))
    S = splitting_sections(C)
    base = welschinger_weight(C, S)
    for initial in (64, 128, 512):
        for step in (math.pi / 4, math.pi / 8, math.pi / 32):
            assert welschinger_weight(C, S, max_step=step, initial=initial) == base


@pytest.mark.parametrize("n", [2, 3])
def test_loop_closes(n):
    C = random_curve(n, np.random.default_rng(n))
    loop = frame_loop(splitting_sections(C), n)
    assert loop.thetas[0] == 0 and loop.thetas[-1] == math.pi
    assert np.max(np.abs(loop.frames[0] - loop.frames[-1])) < 1e-12
    assert loop.max_step < math.pi / 4
    # every frame is a rotation
    for F in loop.frames[:: max(1, len(loop.frames) // 16)]:
        assert np.allclose(F @ F.T, np.eye(n), atol=1e-12)
        assert abs(np.linalg.det(F) - 1) < 1e-12


def test_sections_json():
    S = splitting_sections(JetCurve.from_coeffs([[1, 0, 0], [0, 0, 1]]))
    assert S.to_json() == [[bf(0, 0, 1).to_json(), bf(-1, 0, 0).to_json()]]
