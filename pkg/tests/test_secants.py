import math

import numpy as np
import pytest

from segre_lines.errors import IncompleteEnumeration, NonGenericCurve
from segre_lines.exactalg import BinaryForm
from segre_lines.generators import PlaneConfig, cremona_generate, random_curve, random_plane_config
from segre_lines.jet import JetCurve, det_AC
from segre_lines.secants import (
    Divisor,
    Secant,
    SolverConfig,
    nodes_exact_n3,
    secants_numeric,
    verify_secant,
)

from conftest import bf


def _proj(v):
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v / v[k]


def _same_proj(a, b, tol=1e-8):
    return np.linalg.norm(_proj(a) - _proj(b)) < tol


def _fd_set(rep):
    return [_proj(s.divisor.coeffs) for s in rep.secants]


def _match(A, B, tol=1e-6):
    B = list(B)
    for a in A:
        hit = [i for i, b in enumerate(B) if np.linalg.norm(a - b) < tol]
        if not hit:
            return False
        B.pop(hit[0])
    return not B


def _exact_secant(C, la, lb):
    div = Divisor(0, (1 + 0j,), ())
    return Secant(tuple(complex(x) for x in la), tuple(complex(x) for x in lb), div, 1, True, exact_lambda=(tuple(la), tuple(lb)))


def test_nodes_of_cstar(cstar):
    rep = nodes_exact_n3(cstar)
    assert rep.certificate_ok and rep.total_with_multiplicity == 3
    assert rep.method == "exact-elimination"
    got = {}
    for s in rep.secants:
        assert s.divisor.form is not None and s.multiplicity == 1 and s.is_real
        got[tuple(int(round(abs(x))) for x in _proj(s.image_point).real)] = s.divisor.form.normalized()
    assert got == {
        (1, 0, 0): bf(1, 0, -1),
        (0, 1, 0): bf(0, 1, 0),
        (0, 0, 1): bf(1, 0, 1),
    }


def test_nodes_of_cstar_parameters_collide(cstar):
    from segre_lines.exactalg import bf_eval

    # C*([1:1]) = C*([1:-1]) = [1:0:0]
    a = [bf_eval(f, (1, 1)) for f in cstar.p]
    b = [bf_eval(f, (1, -1)) for f in cstar.p]
    assert a == [4, 0, 0] and b == [-4, 0, 0]


def test_nodes_reject_syzygy_curve(syz_curve):
    with pytest.raises(NonGenericCurve):
        nodes_exact_n3(syz_curve)


def test_nodes_of_generator_curve_sit_over_base_points():
    # coordinate base points: the quadratic Cremona map is an involution,
    # so the nodes land on the base points themselves
    E = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    cfg = PlaneConfig(E, [[1, 0, -3], [0, 1, -3], [-3, -3, 17]])
    C, _ = cremona_generate(cfg, 3)
    rep = nodes_exact_n3(C)
    images = sorted(tuple(int(round(abs(x))) for x in _proj(s.image_point).real) for s in rep.secants)
    assert images == sorted(E)


def test_numeric_matches_exact_on_cstar(cstar):
    num = secants_numeric(cstar, SolverConfig(seed=5))
    assert num.certificate_ok and all(s.multiplicity == 1 for s in num.secants)
    assert _match(_fd_set(num), _fd_set(nodes_exact_n3(cstar)))


def test_numeric_n4_finds_six():
    rng = np.random.default_rng(4)
    for _ in range(3):
        C = random_curve(4, rng)
        rep = secants_numeric(C, SolverConfig(seed=1))
        assert rep.total_with_multiplicity == 6 == math.comb(4, 2)


def test_numeric_on_discriminant_has_triple_secant():
    rng = np.random.default_rng(2)

    def rf(d):
        return BinaryForm.from_coeffs([int(x) for x in rng.integers(-5, 6, size=d + 1)])

    L = [rf(1) for _ in range(3)]
    A, B, Cc = rf(3), rf(3), rf(3)
    # p . L = 0 identically
    C = JetCurve(3, (L[1] * A - L[2] * B, L[2] * Cc - L[0] * A, L[0] * B - L[1] * Cc))
    assert det_AC(C) == 0
    rep = secants_numeric(C, SolverConfig(seed=3), raise_on_fail=False)
    assert [(s.multiplicity, s.is_real) for s in rep.secants] == [(3, True)]


def test_verify_secant_examples(cstar, syz_curve):
    M = _exact_secant(cstar, (0, 1, 0), (0, 0, 1))
    assert verify_secant(cstar, M) == 2
    from segre_lines.exactalg import bf_gcd

    assert bf_gcd(cstar.p[1], cstar.p[2]) == bf(1, 0, -1)
    assert verify_secant(syz_curve, _exact_secant(syz_curve, (1, 0, 0), (0, 1, 0))) == 3
    C = random_curve(3, np.random.default_rng(8))
    assert verify_secant(C, _exact_secant(C, (3, -1, 2), (1, 5, -7))) == 0


def test_exact_secants_have_degree_2n_minus_4():
    rng = np.random.default_rng(21)
    for _ in range(15):
        C = random_curve(3, rng)
        for s in nodes_exact_n3(C).secants:
            if s.exact_lambda is not None:
                assert verify_secant(C, s) == 2


def test_exact_and_numeric_agree_random():
    rng = np.random.default_rng(22)
    for i in range(12):
        C = random_curve(3, rng)
        ex = nodes_exact_n3(C)
        num = secants_numeric(C, SolverConfig(seed=i))
        assert _match(_fd_set(ex), _fd_set(num), tol=1e-5)
        assert sorted(s.is_real for s in ex.secants) == sorted(s.is_real for s in num.secants)


def _conj_matching_ok(rep):
    fds = [_proj(s.divisor.coeffs) for s in rep.secants]
    used = set()
    for i, s in enumerate(rep.secants):
        if s.is_real:
            assert np.linalg.norm(fds[i].imag) < 1e-6 or s.multiplicity > 1
            continue
        partners = [
            j
            for j, t in enumerate(rep.secants)
            if j != i and not t.is_real and t.multiplicity == s.multiplicity
            and np.linalg.norm(fds[j] - np.conj(fds[i])) < 1e-6
        ]
        assert len(partners) == 1
        used.add(i)
    return True


def test_conjugate_pairs_n4():
    rng = np.random.default_rng(31)
    for k in range(4):
        cfg = random_plane_config(4, rng, pairs=k % 3)
        C, _ = cremona_generate(cfg, 4)
        rep = secants_numeric(C, SolverConfig(seed=k))
        assert rep.certificate_ok
        assert _conj_matching_ok(rep)


def test_conjugate_pairs_n3_exact():
    rng = np.random.default_rng(32)
    for _ in range(10):
        assert _conj_matching_ok(nodes_exact_n3(random_curve(3, rng)))


def test_incomplete_enumeration_raised():
    C = random_curve(4, np.random.default_rng(4))
    with pytest.raises(IncompleteEnumeration) as info:
        secants_numeric(C, SolverConfig(starts=1, max_rounds=1, seed=0))
    assert info.value.report is not None and not info.value.report.certificate_ok


def test_solver_config_json():
    cfg = SolverConfig(starts=10, seed=7)
    assert SolverConfig.from_json(cfg.to_json()) == cfg
    assert cfg.cluster_tol == 1e-8


def test_report_is_deterministic(cstar):
    a = secants_numeric(cstar, SolverConfig(seed=9)).to_json()
    b = secants_numeric(cstar, SolverConfig(seed=9)).to_json()
    assert a == b
