"""Test curves with known answers.

* :func:`one_example` - the monomial family with det A_C = 1;
* :func:`cremona_generate` - degree n-1 plane curves through C(n,2) points
  B, restricted to a conic Q; the Segre index is (-1)^{#real points of B
  inside Q};
* :func:`wallcross_path` - sign changes of det A_{C_t} along a segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import (
    Degenerate,
    DegenerateConfig,
    InvalidInput,
    NonGenericPath,
    SingularAlongLine,
    SupplyPointRequired,
)
from .exactalg import (
    BinaryForm,
    RatMatrix,
    as_fraction,
    det_exact,
    format_rational,
    isolate_real_roots,
    kernel_exact,
    parse_rational,
    simplest_between,
    sturm_count_interval,
    upoly_deriv,
    upoly_eval,
    upoly_gcd,
    upoly_interpolate,
    upoly_squarefree,
)
from .jet import JetCurve, det_AC, euler_index, has_cusp


def one_example(n: int) -> JetCurve:
    if n < 2:
        raise InvalidInput("n must be at least 2")
    d = 2 * n - 2
    return JetCurve(n, tuple(BinaryForm.monomial(d - 2 * k, 2 * k) for k in range(n)))


# ---------------------------------------------------------------------------
# plane configurations
# ---------------------------------------------------------------------------


def _vec(p):
    return tuple(as_fraction(x) for x in p)


@dataclass(frozen=True)
class PlaneConfig:
    """Base points B and a conic Q.

    ``points`` are real rational points; ``pairs`` are conjugate pairs given
    by (re, im) so that the points are re +- i*im. ``param`` optionally fixes
    the parametrization of Q by three binary quadratics.
    """

    points: tuple
    Q: tuple
    pairs: tuple = ()
    param: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_vec(p) for p in self.points))
        object.__setattr__(self, "pairs", tuple((_vec(a), _vec(b)) for a, b in self.pairs))
        Q = tuple(tuple(as_fraction(x) for x in row) for row in self.Q)
        if len(Q) != 3 or any(len(r) != 3 for r in Q):
            raise InvalidInput("Q must be a 3x3 matrix")
        if any(Q[i][j] != Q[j][i] for i in range(3) for j in range(3)):
            raise InvalidInput("Q must be symmetric")
        object.__setattr__(self, "Q", Q)
        if self.param is not None:
            object.__setattr__(self, "param", tuple(self.param))

    @property
    def size(self) -> int:
        return len(self.points) + 2 * len(self.pairs)

    def to_json(self) -> dict:
        fr = lambda v: [format_rational(x) for x in v]
        out = {
            "points": [fr(p) for p in self.points],
            "pairs": [{"re": fr(a), "im": fr(b)} for a, b in self.pairs],
            "Q": [fr(r) for r in self.Q],
        }
        if self.param is not None:
            out["param"] = [f.to_json() for f in self.param]
        return out

    @classmethod
    def from_json(cls, obj) -> "PlaneConfig":
        try:
            pr = lambda v: [parse_rational(str(x)) for x in v]
            param = obj.get("param")
            return cls(
                tuple(pr(p) for p in obj["points"]),
                tuple(pr(r) for r in obj["Q"]),
                tuple((pr(p["re"]), pr(p["im"])) for p in obj.get("pairs", [])),
                tuple(BinaryForm.from_json(f) for f in param) if param else None,
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed PlaneConfig: {exc}") from exc


def qform(Q, a, b=None):
    b = a if b is None else b
    return sum(Q[i][j] * a[i] * b[j] for i in range(3) for j in range(3))


def _monomials(deg: int) -> list[tuple]:
    exps = [(a, b, deg - a - b) for a in range(deg + 1) for b in range(deg + 1 - a)]
    return sorted(exps, key=lambda e: (-max(e), e))


def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _cpow(x, k):
    out = (Fraction(1), Fraction(0))
    for _ in range(k):
        out = _cmul(out, x)
    return out


def linear_system(cfg: PlaneConfig, deg: int) -> list[dict]:
    """Basis of degree-``deg`` plane forms through B, as {exponent: coeff} dicts."""
    mons = _monomials(deg)
    rows = []
    for p in cfg.points:
        rows.append([p[0] ** a * p[1] ** b * p[2] ** c for a, b, c in mons])
    for re, im in cfg.pairs:
        z = [(re[i], im[i]) for i in range(3)]
        vals = [_cmul(_cmul(_cpow(z[0], a), _cpow(z[1], b)), _cpow(z[2], c)) for a, b, c in mons]
        rows.append([v[0] for v in vals])
        rows.append([v[1] for v in vals])
    if not rows:
        rows = [[Fraction(0)] * len(mons)]
    ker = kernel_exact(RatMatrix.from_rows(rows))
    return [{e: c for e, c in zip(mons, v) if c != 0} for v in ker]


def _indefinite(Q) -> bool:
    d1 = Q[0][0]
    d2 = Q[0][0] * Q[1][1] - Q[0][1] ** 2
    d3 = det_exact(RatMatrix.from_rows(Q))
    if d3 == 0:
        return False
    posdef = d1 > 0 and d2 > 0 and d3 > 0
    negdef = d1 < 0 and d2 > 0 and d3 < 0
    return not (posdef or negdef)


def inside_sign(Q, pt) -> int:
    """-1 inside the disc bounded by Q_R, +1 outside, 0 on the conic."""
    d = det_exact(RatMatrix.from_rows(Q))
    v = qform(Q, pt)
    if d > 0:
        v = -v
    return (v > 0) - (v < 0)


def int_BQ(cfg: PlaneConfig) -> int:
    return sum(1 for p in cfg.points if inside_sign(cfg.Q, p) < 0)


def find_rational_point(Q, bound: int = 12) -> Optional[tuple]:
    rng = range(-bound, bound + 1)
    best = None
    for p in product(rng, rng, rng):
        if p == (0, 0, 0):
            continue
        if qform(Q, p) == 0:
            key = (sum(abs(x) for x in p), p)
            if best is None or key < best[0]:
                best = (key, p)
    return tuple(Fraction(x) for x in best[1]) if best else None


def conic_param(Q, point=None) -> tuple:
    """Three binary quadratics parametrizing Q from a rational point."""
    P0 = _vec(point) if point is not None else find_rational_point(Q)
    if P0 is None:
        raise SupplyPointRequired("no rational point of Q found; pass one explicitly")
    if qform(Q, P0) != 0:
        raise InvalidInput("supplied point is not on Q")
    E = [tuple(Fraction(int(i == j)) for j in range(3)) for i in range(3)]
    for i in range(3):
        for j in range(i + 1, 3):
            if det_exact(RatMatrix.from_rows([list(P0), list(E[i]), list(E[j])])) != 0:
                A, Bv = E[i], E[j]
                break
        else:
            continue
        break
    W = [BinaryForm.linear(A[k], Bv[k]) for k in range(3)]
    BPW = sum((W[k].scale(sum(Q[i][k] * P0[i] for i in range(3))) for k in range(3)), BinaryForm.zero(1))
    QW = BinaryForm.zero(2)
    for i in range(3):
        for j in range(3):
            if Q[i][j]:
                QW = QW + (W[i] * W[j]).scale(Q[i][j])
    return tuple((BPW * W[k]).scale(2) - QW.scale(P0[k]) for k in range(3))


def _eval_plane(poly: dict, X: Sequence[BinaryForm], deg: int) -> BinaryForm:
    out = BinaryForm.zero(2 * deg)
    for (a, b, c), co in poly.items():
        out = out + ((X[0] ** a) * (X[1] ** b) * (X[2] ** c)).scale(co)
    return out


def cremona_generate(cfg: PlaneConfig, n: int) -> tuple[JetCurve, int]:
    """Jet curve g o param and its ground-truth Segre index."""
    if n < 2:
        raise InvalidInput("n must be at least 2")
    if cfg.size != math.comb(n, 2):
        raise DegenerateConfig(f"need {math.comb(n, 2)} base points, got {cfg.size}")
    if not _indefinite(cfg.Q):
        raise DegenerateConfig("Q must be nondegenerate with real points")
    for p in cfg.points:
        if qform(cfg.Q, p) == 0:
            raise DegenerateConfig(f"base point {p} lies on Q")
    for re, im in cfg.pairs:
        z = [(re[i], im[i]) for i in range(3)]
        val = (Fraction(0), Fraction(0))
        for i in range(3):
            for j in range(3):
                t = _cmul(z[i], z[j])
                val = (val[0] + cfg.Q[i][j] * t[0], val[1] + cfg.Q[i][j] * t[1])
        if val == (0, 0):
            raise DegenerateConfig("a conjugate base point lies on Q")
    basis = linear_system(cfg, n - 1)
    if len(basis) != n:
        raise DegenerateConfig(f"linear system has dimension {len(basis)}, expected {n}")
    X = cfg.param if cfg.param is not None else conic_param(cfg.Q)
    for f in X:
        if f.degree != 2:
            raise InvalidInput("conic parametrization must be quadratic")
    if not _on_conic(cfg.Q, X):
        raise InvalidInput("param does not parametrize Q")
    comps = tuple(_eval_plane(g, X, n - 1) for g in basis)
    try:
        C = JetCurve(n, comps)
    except SingularAlongLine as exc:
        raise DegenerateConfig(f"generated curve has a base point: {exc}") from exc
    return C, (-1) ** int_BQ(cfg)


def _on_conic(Q, X) -> bool:
    acc = BinaryForm.zero(4)
    for i in range(3):
        for j in range(3):
            if Q[i][j]:
                acc = acc + (X[i] * X[j]).scale(Q[i][j])
    return acc.is_zero


CIRCLE_PARAM = (
    BinaryForm.from_coeffs([1, 0, -1]),
    BinaryForm.from_coeffs([0, 2, 0]),
    BinaryForm.from_coeffs([1, 0, 1]),
)


def circle_config(points, T=None, pairs=(), flip=False) -> PlaneConfig:
    """Q = T^t diag(1, 1, -1) T with the induced parametrization T^{-1}(circle)."""
    T = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)] if T is None else [
        [as_fraction(x) for x in r] for r in T
    ]
    D = [1, 1, -1]
    Q = [[sum(T[k][i] * D[k] * T[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    if flip:
        Q = [[-x for x in r] for r in Q]
    Tinv = _inv3(T)
    param = tuple(
        sum((CIRCLE_PARAM[k].scale(Tinv[i][k]) for k in range(3)), BinaryForm.zero(2)) for i in range(3)
    )
    return PlaneConfig(tuple(points), tuple(tuple(r) for r in Q), tuple(pairs), param)


def _inv3(T):
    det = det_exact(RatMatrix.from_rows(T))
    if det == 0:
        raise InvalidInput("singular transform")
    inv = [[Fraction(0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            minor = [[T[r][c] for c in range(3) if c != i] for r in range(3) if r != j]
            inv[i][j] = (minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0]) * (-1) ** (i + j) / det
    return inv


def random_plane_config(n: int, rng: np.random.Generator, pairs: int = 0, spread: int = 4) -> PlaneConfig:
    """Random circle-type configuration with C(n,2) base points."""
    k = math.comb(n, 2)
    while True:
        T = rng.integers(-3, 4, size=(3, 3))
        if round(np.linalg.det(T)) == 0:
            continue
        npair = min(pairs, k // 2)
        pts = [tuple(int(x) for x in rng.integers(-spread, spread + 1, size=3)) for _ in range(k - 2 * npair)]
        prs = [
            (
                tuple(int(x) for x in rng.integers(-spread, spread + 1, size=3)),
                tuple(int(x) for x in rng.integers(-spread, spread + 1, size=3)),
            )
            for _ in range(npair)
        ]
        try:
            cfg = circle_config(pts, T.tolist(), prs, flip=bool(rng.integers(0, 2)))
            C, _ = cremona_generate(cfg, n)
        except (DegenerateConfig, InvalidInput):
            continue
        # a conic tangent to a line through two base points gives a cusp
        if det_AC(C) == 0 or (n >= 3 and has_cusp(C)):
            continue
        return cfg


def random_curve(n: int, rng: np.random.Generator, bound: int = 9) -> JetCurve:
    """Random jet curve, integer coefficients in [-bound, bound], det A_C != 0, no cusp.

    Small integer coefficients land on the cusp stratum now and then (about
    one curve in 150 for n = 3); there two secant parameters merge.
    """
    while True:
        rows = rng.integers(-bound, bound + 1, size=(n, 2 * n - 1))
        try:
            C = JetCurve.from_coeffs([[int(x) for x in r] for r in rows])
        except SingularAlongLine:
            continue
        if det_AC(C) != 0 and (n < 3 or not has_cusp(C)):
            return C


# ---------------------------------------------------------------------------
# wall crossing
# ---------------------------------------------------------------------------


@dataclass
class CrossingReport:
    det_poly: list  # low -> high in t
    crossings: list  # (lo, hi] isolating intervals
    samples: list  # (t, {"euler":, "segre":, "welschinger":})
    consistent: bool
    parity_ok: bool
    warnings: list = field(default_factory=list)

    @property
    def constant(self) -> bool:
        return not self.crossings

    def to_json(self) -> dict:
        return {
            "det_poly": [format_rational(c) for c in self.det_poly],
            "crossings": [[format_rational(a), format_rational(b)] for a, b in self.crossings],
            "samples": [{"t": format_rational(t), **vals} for t, vals in self.samples],
            "constant": self.constant,
            "consistent": self.consistent,
            "parity_ok": self.parity_ok,
            "warnings": list(self.warnings),
        }


def det_along(C0: JetCurve, C1: JetCurve) -> list:
    """det A_{C_t} for C_t = (1-t) C0 + t C1 as an exact polynomial in t."""
    if C0.n != C1.n:
        raise InvalidInput("curves have different n")
    deg = 2 * C0.n
    xs = [Fraction(i) for i in range(deg + 1)]
    ys = [det_AC(C0.interpolate(C1, x, check=False)) for x in xs]
    return upoly_interpolate(xs, ys)


def _wall_intervals(D: list) -> list:
    lo, hi = Fraction(0), Fraction(1)
    g = upoly_gcd(D, upoly_deriv(D))
    if len(g) > 1 and sturm_count_interval(g, lo, hi) > 0:
        raise NonGenericPath("det A_{C_t} has a multiple zero on the segment")
    return isolate_real_roots(upoly_squarefree(D), lo, hi)


def _separate(D, walls, k):
    """Rational strictly between wall k and wall k+1 (refining the intervals if they touch)."""
    a_k, b_k = walls[k]
    a_n, b_n = walls[k + 1]
    sf = upoly_squarefree(D)
    while b_k >= a_n:
        m = (a_n + b_n) / 2
        if sturm_count_interval(sf, a_n, m) == 0:
            a_n = m
        else:
            b_n = m
        m = (a_k + b_k) / 2
        if sturm_count_interval(sf, a_k, m) == 1:
            b_k = m
        else:
            a_k = m
    t = simplest_between(b_k, a_n)
    if upoly_eval(D, t) == 0:  # only possible if b_k is itself the root
        t = (b_k + a_n) / 2
    return t


def wallcross_path(C0: JetCurve, C1: JetCurve, steps: int = 0, cfg=None, evaluate=None) -> CrossingReport:
    """Crossings of the discriminant along C_t = (1-t) C0 + t C1.

    Samples: both endpoints, one point between consecutive walls and ``steps``
    extra evenly spaced points. At each sample all indices must agree and
    equal the value at t = 0 times (-1)^(walls passed).
    ``evaluate`` maps a curve to a dict of index values.
    """
    for C in (C0, C1):
        if det_AC(C) == 0:
            raise Degenerate("segment endpoint lies on the discriminant")
    D = det_along(C0, C1)
    if not D:
        raise NonGenericPath("det A_{C_t} vanishes identically")
    walls = _wall_intervals(D)
    sf = upoly_squarefree(D)
    ts = {Fraction(0), Fraction(1)}
    ts.update(_separate(D, walls, k) for k in range(len(walls) - 1))
    for j in range(1, steps + 1):
        t = Fraction(j, steps + 1)
        if upoly_eval(D, t) != 0:
            ts.add(t)
    if evaluate is None:
        evaluate = lambda C: default_indices(C, cfg)
    samples = []
    consistent = True
    warnings = []
    base = {}
    for t in sorted(ts):
        vals = evaluate(C0.interpolate(C1, t))
        samples.append((t, vals))
        passed = sturm_count_interval(sf, Fraction(0), t) if t > 0 else 0
        if len(set(vals.values())) != 1:
            consistent = False
            warnings.append(f"indices disagree at t={format_rational(t)}: {vals}")
        for key, v in vals.items():
            b0, p0 = base.setdefault(key, (v, passed))
            if v != b0 * (-1) ** (passed - p0):
                consistent = False
                warnings.append(f"{key} at t={format_rational(t)} does not match the wall count")
    parity = euler_index(C1) == euler_index(C0) * (-1) ** len(walls)
    return CrossingReport(D, walls, samples, consistent, parity, warnings)


def default_indices(C: JetCurve, cfg=None) -> dict:
    """Euler, Segre and (n <= 3) Welschinger indices of C.

    An index that is undefined at C (e.g. infinitely many secants) is left out.
    """
    from .errors import IncompleteEnumeration, NonGenericCurve, NotBalanced
    from .segre import segre_index
    from .welsch import welschinger_weight

    out = {"euler": euler_index(C)}
    try:
        out["segre"] = segre_index(C, cfg=cfg)
    except (NonGenericCurve, IncompleteEnumeration):
        pass
    if C.n <= 3:
        try:
            out["welschinger"] = welschinger_weight(C)
        except NotBalanced:
            pass
    return out
