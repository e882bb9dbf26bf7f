"""(n-3)-dimensional (2n-4)-secants of a jet curve.

For n = 3 these are the nodes of a plane quartic and are found by elimination
(:func:`nodes_exact_n3`). For n >= 4 a complex multistart Newton solver is used
(:func:`secants_numeric`); completeness is certified by the Castelnuovo total
sum m(M) = n(n-1)/2.

Numeric divisors are handled in a chart where no root sits at [1:0]; the chart
is a real Moebius change of the parameter, so conjugation commutes with it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce
from typing import Optional

import mpmath
import numpy as np

from . import _kernels
from .errors import IncompleteEnumeration, InvalidInput, NonGenericCurve, NumericFailure, Unsupported
from .exactalg import (
    BinaryForm,
    ComplexPoint,
    RatMatrix,
    bf_gcd,
    det_exact,
    format_rational,
    kernel_exact,
    sturm_count_real,
    upoly_degree,
    upoly_deriv,
    upoly_gcd,
    upoly_interpolate,
    upoly_monic,
)
from .jet import JetCurve, components_dependent, det_AC


@dataclass(frozen=True)
class SolverConfig:
    starts: int = 500
    max_rounds: int = 4
    tol: float = 1e-10
    dedupe_digits: int = 8
    seed: int = 42
    stability_rounds: int = 2
    threads: Optional[int] = None
    charts: Optional[tuple] = None

    def to_json(self) -> dict:
        return {
            "starts": self.starts,
            "max_rounds": self.max_rounds,
            "tol": self.tol,
            "dedupe_digits": self.dedupe_digits,
            "seed": self.seed,
            "stability_rounds": self.stability_rounds,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SolverConfig":
        known = {k: obj[k] for k in cls().to_json() if k in obj}
        try:
            return cls(
                starts=int(known.get("starts", 500)),
                max_rounds=int(known.get("max_rounds", 4)),
                tol=float(known.get("tol", 1e-10)),
                dedupe_digits=int(known.get("dedupe_digits", 8)),
                seed=int(known.get("seed", 42)),
                stability_rounds=int(known.get("stability_rounds", 2)),
            )
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"bad solver config: {exc}") from exc

    @property
    def cluster_tol(self) -> float:
        return 10.0 ** (-self.dedupe_digits)


@dataclass(frozen=True)
class Divisor:
    """Degree-k divisor on P^1.

    ``form`` is the exact f_D when known; ``coeffs`` always holds a numeric
    normalized copy (u-leading, complex) and ``points`` its roots.
    """

    degree: int
    coeffs: tuple
    points: tuple = ()
    form: Optional[BinaryForm] = None

    @property
    def kind(self) -> str:
        return "exact" if self.form is not None else "numeric"

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "degree": self.degree,
            "coeffs": [_cjson(c) for c in self.coeffs],
            "points": [_pjson(p) for p in self.points],
        }
        if self.form is not None:
            out["form"] = self.form.to_json()
        return out


@dataclass(frozen=True)
class Secant:
    lambda_a: tuple
    lambda_b: tuple
    divisor: Divisor
    multiplicity: int = 1
    is_real: bool = False
    exact_lambda: Optional[tuple] = None
    image_point: Optional[tuple] = None
    node_kind: Optional[str] = None  # n = 3: "cross", "solitary" or "imaginary"
    params: tuple = ()  # homogeneous parameters of the divisor points (complex pairs)
    local_sign: Optional[int] = None  # residual-pencil sign computed at high precision
    pencil: Optional[tuple] = None  # numeric (q0, q1), original chart

    @property
    def f_D(self) -> Divisor:
        return self.divisor

    def to_json(self) -> dict:
        out = {
            "lambda_a": [_cjson(c) for c in self.lambda_a],
            "lambda_b": [_cjson(c) for c in self.lambda_b],
            "f_D": self.divisor.to_json(),
            "multiplicity": self.multiplicity,
            "is_real": self.is_real,
        }
        if self.exact_lambda is not None:
            out["exact_lambda"] = [[format_rational(c) for c in lam] for lam in self.exact_lambda]
        if self.image_point is not None:
            out["image_point"] = [_cjson(c) for c in self.image_point]
        if self.node_kind is not None:
            out["node_kind"] = self.node_kind
        return out


@dataclass
class SecantReport:
    n: int
    secants: list
    total_with_multiplicity: int
    certificate_ok: bool
    method: str
    warnings: list = field(default_factory=list)
    rounds: int = 1

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "secants": [s.to_json() for s in self.secants],
            "total_with_multiplicity": self.total_with_multiplicity,
            "expected": math.comb(self.n, 2),
            "certificate_ok": self.certificate_ok,
            "rounds": self.rounds,
            "warnings": list(self.warnings),
        }


def _num(x, digits=15):
    x = float(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.{digits}g}")


def _cjson(c):
    if isinstance(c, Fraction):
        return format_rational(c)
    c = complex(c)
    if c.imag == 0:
        return _num(c.real)
    return [_num(c.real), _num(c.imag)]


def _pjson(p: ComplexPoint):
    if p.at_infinity:
        return "inf"
    return [_num(p.re), _num(p.im)]


# ---------------------------------------------------------------------------
# generic list helpers (u-leading coefficient lists; any scalar type)
# ---------------------------------------------------------------------------


def _conv(a, b):
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _compose(coeffs, a, b, c, d):
    """f(a u + b v, c u + d v) for a u-leading coefficient list."""
    deg = len(coeffs) - 1
    zero = coeffs[0] * 0
    out = [zero] * (deg + 1)
    x = [a, b]
    y = [c, d]
    powx = [[zero + 1]]
    powy = [[zero + 1]]
    for _ in range(deg):
        powx.append(_conv(powx[-1], x))
        powy.append(_conv(powy[-1], y))
    for k, co in enumerate(coeffs):
        if co == 0:
            continue
        term = _conv(powx[deg - k], powy[k])
        for i, t in enumerate(term):
            out[i] = out[i] + co * t
    return out


def _polydiv(num, den):
    """Long division of u-leading lists; den[0] must be nonzero."""
    num = list(num)
    q = []
    for k in range(len(num) - len(den) + 1):
        c = num[k] / den[0]
        q.append(c)
        for j in range(1, len(den)):
            num[k + j] = num[k + j] - c * den[j]
    return q, num[len(num) - len(den) + 1 :]


def _quad_res(q0, q1):
    """Resultant of two binary quadratics; its sign is the Segre weight."""
    a1, b1, c1 = q0
    a2, b2, c2 = q1
    return (a1 * c2 - a2 * c1) ** 2 - (a1 * b2 - a2 * b1) * (b1 * c2 - b2 * c1)


def _normalize_numeric(coeffs):
    coeffs = np.asarray(coeffs, dtype=complex)
    big = np.max(np.abs(coeffs))
    for c in coeffs:
        if abs(c) > 1e-9 * big:
            return coeffs / c
    return coeffs


def _point_from_homog(a, b, radius=0.0) -> ComplexPoint:
    a = complex(a)
    b = complex(b)
    if abs(b) <= 1e-14 * abs(a):
        return ComplexPoint(0.0, 0.0, radius, True)
    z = a / b
    return ComplexPoint(z.real, z.imag, radius, False)


def _numeric_divisor(params, real: bool, form: Optional[BinaryForm] = None) -> Divisor:
    """Divisor with roots at the homogeneous points ``params``."""
    f = [1.0 + 0j]
    for a, b in params:
        f = _conv(f, [complex(b), -complex(a)])
    co = _normalize_numeric(f)
    if real:
        co = co.real.astype(complex)
    pts = [_point_from_homog(a, b) for a, b in params]
    pts.sort(key=lambda p: (p.at_infinity, p.re, p.im))
    if real:
        pts = _conjugate_sym(pts)
    return Divisor(len(params), tuple(complex(c) for c in co), tuple(pts), form)


def _conjugate_sym(pts):
    out = []
    used = [False] * len(pts)
    for i, p in enumerate(pts):
        if used[i]:
            continue
        used[i] = True
        if p.at_infinity or abs(p.im) < 1e-12 * (1 + abs(p.re)):
            out.append(ComplexPoint(p.re, 0.0, p.certified_radius, p.at_infinity))
            continue
        j = min(
            (k for k in range(len(pts)) if not used[k] and not pts[k].at_infinity),
            key=lambda k: abs(pts[k].z - p.z.conjugate()),
            default=None,
        )
        if j is None:
            out.append(p)
            continue
        used[j] = True
        z = 0.5 * (p.z + pts[j].z.conjugate())
        out.append(ComplexPoint(z.real, abs(z.imag), 0.0))
        out.append(ComplexPoint(z.real, -abs(z.imag), 0.0))
    return out


# ---------------------------------------------------------------------------
# verify_secant
# ---------------------------------------------------------------------------


def _rationalize(vec, max_den=10**6, tol=1e-9):
    out = []
    for x in vec:
        x = complex(x)
        if abs(x.imag) > tol:
            return None
        q = Fraction(x.real).limit_denominator(max_den)
        if abs(float(q) - x.real) > tol:
            return None
        out.append(q)
    return tuple(out)


def _normalize_vec(v):
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v / v[k]


def verify_secant(C: JetCurve, M: Secant) -> int:
    """deg gcd(lambda_a . p, lambda_b . p), computed exactly."""
    if M.exact_lambda is not None:
        la, lb = M.exact_lambda
    else:
        la = _rationalize(_normalize_vec(M.lambda_a))
        lb = _rationalize(_normalize_vec(M.lambda_b))
        if la is None or lb is None:
            # try a reduced basis of the plane before giving up
            A = np.array([M.lambda_a, M.lambda_b], dtype=complex)
            basis = _reduced_plane_basis(A)
            if basis is None:
                raise NumericFailure("secant covectors do not rationalize")
            la, lb = basis
    if _rank2(la, lb) < 2:
        raise InvalidInput("secant covectors are dependent")
    fa = _dot(la, C.p)
    fb = _dot(lb, C.p)
    if fa.is_zero or fb.is_zero:
        return 2 * C.n - 2
    return bf_gcd(fa, fb).degree


def _reduced_plane_basis(A):
    """Row-reduce a 2 x n complex matrix and rationalize the result."""
    A = np.array(A, dtype=complex)
    n = A.shape[1]
    cols = np.argsort(-np.abs(np.linalg.svd(A)[2][:2]).sum(axis=0))
    for i in range(n):
        for j in range(i + 1, n):
            piv = [cols[i], cols[j]]
            Bm = A[:, piv]
            if abs(np.linalg.det(Bm)) < 1e-8 * np.linalg.norm(A) ** 2:
                continue
            R = np.linalg.solve(Bm, A)
            la = _rationalize(R[0])
            lb = _rationalize(R[1])
            if la is not None and lb is not None:
                return la, lb
    return None


def _rank2(la, lb) -> int:
    from .exactalg import rank_exact

    return rank_exact(RatMatrix.from_rows([list(la), list(lb)]))


def _dot(lam, forms) -> BinaryForm:
    acc = BinaryForm.zero(forms[0].degree)
    for c, f in zip(lam, forms):
        if c:
            acc = acc + f.scale(c)
    return acc


# ---------------------------------------------------------------------------
# n = 3: nodes by elimination
# ---------------------------------------------------------------------------
#
# In a chart where every node has two finite parameters, write the divisor of
# a node as x^2 - s1 x + s2. Reducing x^k modulo it gives A_k x + B_k with
# A_k B_l - A_l B_k = -s2^k A_{l-k}. A node is a pair with the 3 x 2 matrix of
# remainders (alpha_i, beta_i) of rank one, i.e. all three 2 x 2 minors vanish;
# each minor has total degree 3 in (s1, s2).


def _A_polys(kmax):
    """A_k as dicts {(e1, e2): coeff} in (s1, s2)."""
    A = [{}, {(0, 0): 1}]
    B = [{(0, 0): 1}, {}]
    for k in range(1, kmax):
        nxt_A = {}
        for (a, b), c in A[k].items():
            nxt_A[(a + 1, b)] = nxt_A.get((a + 1, b), 0) + c
        for key, c in B[k].items():
            nxt_A[key] = nxt_A.get(key, 0) + c
        nxt_B = {(a, b + 1): -c for (a, b), c in A[k].items()}
        A.append({k_: v for k_, v in nxt_A.items() if v})
        B.append(nxt_B)
    return A


def _minor_poly(ci, cj, A):
    """Minor m_ij as a dict in (s1, s2); ci[e] = coefficient of x^e."""
    out: dict = {}
    d = len(ci) - 1
    for k in range(d + 1):
        for l in range(k + 1, d + 1):
            w = ci[k] * cj[l] - ci[l] * cj[k]
            if w == 0:
                continue
            for (a, b), c in A[l - k].items():
                key = (a, b + k)
                out[key] = out.get(key, 0) - w * c
    return {k: v for k, v in out.items() if v}


def _in_s1(poly, s2):
    """Coefficients (low -> high in s1) after substituting s2."""
    deg = max((a for a, _ in poly), default=0)
    out = [Fraction(0)] * (deg + 1)
    for (a, b), c in poly.items():
        out[a] += c * s2**b
    return out


def _eval2(poly, s1, s2):
    return sum(c * s1**a * s2**b for (a, b), c in poly.items())


def _s1_degree(poly):
    return max((a for a, _ in poly), default=-1)


def _eliminate_s1(f, g):
    """Res_{s1}(f, g) as a polynomial in s2, by exact interpolation."""
    df, dg = _s1_degree(f), _s1_degree(g)
    if df < 0 or dg < 0:
        return []
    npts = 3 * (df + dg) + 1
    xs = [Fraction(i - npts // 2) for i in range(npts)]
    ys = [_formal_res(_in_s1(f, x)[: df + 1], _in_s1(g, x)[: dg + 1]) for x in xs]
    return upoly_interpolate(xs, ys)


def _formal_res(fa, ga):
    m, k = len(fa) - 1, len(ga) - 1
    fh = list(reversed(fa))
    gh = list(reversed(ga))
    rows = []
    for i in range(k):
        row = [Fraction(0)] * (m + k)
        for j, c in enumerate(fh):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [Fraction(0)] * (m + k)
        for j, c in enumerate(gh):
            row[i + j] = c
        rows.append(row)
    return det_exact(RatMatrix.from_rows(rows))


def _transforms(seed):
    """Deterministic sequence of (g, M): unimodular Moebius and x-coordinate change."""
    eye = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    yield (1, 0, 0, 1), eye
    yield (1, 1, 0, 1), eye
    rng = np.random.default_rng(seed)
    for _ in range(8):
        b, c = (int(x) for x in rng.integers(-3, 4, size=2))
        a = int(rng.choice([-1, 1]))
        d = a * (1 + b * c)  # a d - b c = 1
        M = rng.integers(-2, 3, size=(3, 3))
        while round(np.linalg.det(M)) == 0:
            M = rng.integers(-2, 3, size=(3, 3))
        yield (a, b, c, d), tuple(tuple(int(x) for x in row) for row in M)


def _inverse_int3(M):
    R = RatMatrix.from_rows(M)
    det = det_exact(R)
    inv = []
    for i in range(3):
        row = []
        for j in range(3):
            minor = [[M[r][c] for c in range(3) if c != i] for r in range(3) if r != j]
            cof = Fraction(minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0])
            row.append(cof * (-1) ** (i + j) / det)
        inv.append(row)
    return inv


@dataclass
class _NodeData:
    s1: object
    s2: object
    real: bool
    kind: str
    roots: tuple  # chart parameters x of the divisor
    r: list  # image direction in the chart coordinates (mp numbers)
    sign: Optional[int]
    exact_fd: Optional[tuple] = None  # (s1, s2) as Fractions when rational


def nodes_exact_n3(C: JetCurve, seed: int = 0, dps: int = 60) -> SecantReport:
    if C.n != 3:
        raise InvalidInput("nodes_exact_n3 needs n = 3")
    if components_dependent(C):
        raise NonGenericCurve("the curve lies in a line of P^2")
    if det_AC(C) == 0:
        raise NonGenericCurve("det A_C = 0: the quartic has a point of multiplicity >= 3")
    last_err = None
    for g, M in _transforms(seed):
        try:
            data = _nodes_in_chart(C, g, M, dps)
        except NonGenericCurve as exc:
            last_err = exc
            continue
        secs = [_node_to_secant(C, g, M, nd) for nd in data]
        secs.sort(key=_secant_sort_key)
        return SecantReport(3, secs, len(secs), len(secs) == 3, "exact-elimination")
    raise NonGenericCurve(f"could not isolate three simple nodes: {last_err}")


def _chart_curve(C, g, M):
    a, b, c, d = g
    comp = [f.compose(a, b, c, d) for f in C.p]
    out = []
    for i in range(3):
        acc = BinaryForm.zero(4)
        for j in range(3):
            if M[i][j]:
                acc = acc + comp[j].scale(M[i][j])
        out.append(acc)
    return out


def _nodes_in_chart(C, g, M, dps):
    pp = _chart_curve(C, g, M)
    # c[i][e] = coefficient of x^e, x = u/v
    cs = [list(reversed(f.coeffs)) for f in pp]
    A = _A_polys(5)
    m = {
        (0, 1): _minor_poly(cs[0], cs[1], A),
        (0, 2): _minor_poly(cs[0], cs[2], A),
        (1, 2): _minor_poly(cs[1], cs[2], A),
    }
    R1 = _eliminate_s1(m[(0, 1)], m[(0, 2)])
    R2 = _eliminate_s1(m[(0, 1)], m[(1, 2)])
    R3 = _eliminate_s1(m[(0, 2)], m[(1, 2)])
    nonzero = [R for R in (R1, R2, R3) if R]
    if len(nonzero) < 2:
        raise NonGenericCurve("elimination resultants vanish identically")
    N = reduce(upoly_gcd, nonzero)
    if upoly_degree(N) != 3:
        raise NonGenericCurve(f"node polynomial has degree {upoly_degree(N)}")
    if upoly_degree(upoly_gcd(N, upoly_deriv(N))) > 0:
        raise NonGenericCurve("node polynomial is not squarefree")
    N = upoly_monic(N)
    nreal = sturm_count_real(N)
    for prec in (dps, 2 * dps, 4 * dps):
        try:
            return _solve_nodes(N, nreal, m, cs, prec)
        except NumericFailure as exc:
            err = exc
    raise NumericFailure(f"node computation did not reach a safe margin: {err}")


def _solve_nodes(N, nreal, m, cs, dps):
    ctx = mpmath.MPContext()
    ctx.dps = dps
    eps = ctx.mpf(10) ** (-(dps // 2))
    coeffs = [ctx.mpf(c.numerator) / c.denominator for c in reversed(N)]
    roots = ctx.polyroots(coeffs, maxsteps=400, extraprec=2 * dps)
    m_mp = {
        key: {e: ctx.mpf(c.numerator) / c.denominator for e, c in poly.items()}
        for key, poly in m.items()
    }
    reals = [r for r in roots if abs(ctx.im(r)) <= eps * (1 + abs(r))]
    if len(reals) != nreal:
        raise NumericFailure("real root count disagrees with the Sturm count")
    out = []
    for s2 in roots:
        is_real = abs(ctx.im(s2)) <= eps * (1 + abs(s2))
        if is_real:
            s2 = ctx.mpf(ctx.re(s2))
        s1 = _recover_s1(ctx, m_mp, s2, eps)
        if is_real:
            s1 = ctx.mpf(ctx.re(s1))
        disc = s1 * s1 - 4 * s2
        if abs(disc) <= eps * (1 + abs(s1) ** 2 + abs(s2)):
            raise NonGenericCurve("node with coincident parameters (cusp)")
        sq = ctx.sqrt(disc)
        x1, x2 = (s1 + sq) / 2, (s1 - sq) / 2
        alpha, beta = _remainders(ctx, cs, s1, s2)
        r = alpha if ctx.norm(alpha) >= ctx.norm(beta) else beta
        # back-substitution: alpha and beta parallel, and C(x1) parallel to C(x2)
        if not _parallel(ctx, alpha, beta, eps) or not _parallel(
            ctx, _eval_chart(ctx, cs, x1), _eval_chart(ctx, cs, x2), eps
        ):
            raise NonGenericCurve("candidate failed back-substitution")
        kind = "imaginary"
        sign = None
        if is_real:
            kind = "cross" if disc > 0 else "solitary"
            sign = _node_sign(ctx, cs, s1, s2, r, eps)
        exact = _rational_node(m, s1, s2) if is_real else None
        out.append(_NodeData(s1, s2, is_real, kind, (x1, x2), list(r), sign, exact))
    return out


def _recover_s1(ctx, m, s2, eps):
    polys = list(m.values())
    best = None
    for poly in polys:
        co = [sum((c * s2**b for (a, b), c in poly.items() if a == e), ctx.mpf(0)) for e in range(4)]
        while co and abs(co[-1]) <= eps:
            co.pop()
        if len(co) < 2:
            continue
        cands = ctx.polyroots(list(reversed(co)), maxsteps=400, extraprec=ctx.prec)
        for s1 in cands:
            res = max(abs(_eval_mp(p, s1, s2)) / (1 + _poly_size(p, s1, s2)) for p in polys)
            if best is None or res < best[0]:
                best = (res, s1)
    if best is None or best[0] > eps:
        raise NumericFailure("no common s1 for the three minors")
    return best[1]


def _eval_mp(poly, s1, s2):
    return sum(c * s1**a * s2**b for (a, b), c in poly.items())


def _poly_size(poly, s1, s2):
    return sum(abs(c) * abs(s1) ** a * abs(s2) ** b for (a, b), c in poly.items())


def _remainders(ctx, cs, s1, s2):
    d = len(cs[0]) - 1
    A = [ctx.mpf(0), ctx.mpf(1)]
    B = [ctx.mpf(1), ctx.mpf(0)]
    for k in range(1, d):
        A.append(s1 * A[k] + B[k])
        B.append(-s2 * A[k])
    alpha = [sum(ctx.mpf(c.numerator) / c.denominator * A[e] for e, c in enumerate(ci)) for ci in cs]
    beta = [sum(ctx.mpf(c.numerator) / c.denominator * B[e] for e, c in enumerate(ci)) for ci in cs]
    return alpha, beta


def _eval_chart(ctx, cs, x):
    return [sum(ctx.mpf(c.numerator) / c.denominator * x**e for e, c in enumerate(ci)) for ci in cs]


def _parallel(ctx, a, b, eps):
    scale = ctx.norm(a) * ctx.norm(b)
    if scale == 0:
        return True
    cr = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    return ctx.norm(cr) <= ctx.sqrt(eps) * scale


def _plane_basis(ctx, r):
    k = min(range(3), key=lambda i: abs(r[i]))
    e = [ctx.mpf(0)] * 3
    e[k] = ctx.mpf(1)
    la = _cross(r, e)
    lb = _cross(r, la)
    return la, lb


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _node_sign(ctx, cs, s1, s2, r, eps):
    la, lb = _plane_basis(ctx, r)
    fd = [ctx.mpf(1), -s1, s2]
    qs = []
    for lam in (la, lb):
        # lam . p in the chart, u-leading
        hl = []
        for e in range(len(cs[0]) - 1, -1, -1):
            hl.append(sum(lam[i] * (ctx.mpf(cs[i][e].numerator) / cs[i][e].denominator) for i in range(3)))
        q, rem = _polydiv(hl, fd)
        qs.append(q)
    res = _quad_res(qs[0], qs[1])
    scale = (ctx.norm(qs[0]) * ctx.norm(qs[1])) ** 2
    if abs(res) <= ctx.sqrt(eps) * scale:
        raise NumericFailure("Segre weight of a node is too close to the wall")
    return 1 if res > 0 else -1


def _rational_node(m, s1, s2):
    q1 = Fraction(float(s1)).limit_denominator(10**6)
    q2 = Fraction(float(s2)).limit_denominator(10**6)
    if all(_eval2(p, q1, q2) == 0 for p in m.values()):
        return (q1, q2)
    return None


def _node_to_secant(C, g, M, nd: _NodeData) -> Secant:
    a, b, c, d = g
    Minv = _inverse_int3(M)
    # chart x -> original homogeneous (a x + b, c x + d)
    params = tuple((complex(a * x + b), complex(c * x + d)) for x in nd.roots)
    r = [complex(z) for z in nd.r]
    image = np.array([sum(complex(Minv[i][j]) * r[j] for j in range(3)) for i in range(3)])
    image = _normalize_vec(image)
    if nd.real:
        image = image.real.astype(complex)
    ctx = mpmath.MPContext()
    ctx.dps = 30
    la_c, lb_c = _plane_basis(ctx, [ctx.mpmathify(z) for z in nd.r])
    Mt = np.array(M, dtype=float).T
    la = Mt @ np.array([complex(z) for z in la_c])
    lb = Mt @ np.array([complex(z) for z in lb_c])
    exact_lambda = None
    form = None
    if nd.exact_fd is not None:
        s1, s2 = nd.exact_fd
        fd_chart = BinaryForm(2, (Fraction(1), -s1, s2))
        form = fd_chart.compose(d, -b, -c, a).normalized()  # g^{-1}, det g = 1
        exact_lambda = _exact_node_lambda(C, form)
        if exact_lambda is not None:
            la = np.array([float(x) for x in exact_lambda[0]], dtype=complex)
            lb = np.array([float(x) for x in exact_lambda[1]], dtype=complex)
            ip = _cross(list(exact_lambda[0]), list(exact_lambda[1]))
            image = _normalize_vec(np.array([float(x) for x in ip], dtype=complex))
    if nd.real and exact_lambda is None:
        la, lb = _real_basis(np.array([la, lb]))
    div = _numeric_divisor(params, nd.real, form)
    if form is not None:
        div = replace(div, coeffs=tuple(complex(float(x)) for x in form.coeffs))
    return Secant(
        lambda_a=tuple(complex(x) for x in la),
        lambda_b=tuple(complex(x) for x in lb),
        divisor=div,
        multiplicity=1,
        is_real=nd.real,
        exact_lambda=exact_lambda,
        image_point=tuple(complex(x) for x in image),
        node_kind=nd.kind,
        params=params,
        local_sign=nd.sign,
    )


def _exact_node_lambda(C, form: BinaryForm):
    """Covectors lambda with f_D | lambda . p, from the exact remainder map."""
    cols = []
    for f in C.p:
        from .exactalg import coeff_divmod

        _, rem = coeff_divmod(list(f.coeffs), list(form.coeffs))
        cols.append(rem)
    # rows: remainder coefficients, columns: components
    rows = [[cols[j][i] for j in range(C.n)] for i in range(len(cols[0]))]
    ker = kernel_exact(RatMatrix.from_rows(rows))
    if len(ker) != 2:
        return None
    return tuple(tuple(v) for v in ker)


def _real_basis(L):
    """Orthonormal real basis of a conjugation-invariant plane spanned by the rows of L."""
    stack = np.vstack([L.real, L.imag])
    _, s, vh = np.linalg.svd(stack)
    return vh[0].astype(complex), vh[1].astype(complex)


def _secant_sort_key(s: Secant):
    co = s.divisor.coeffs
    return (not s.is_real, tuple((round(c.real, 6), round(c.imag, 6)) for c in co))


# ---------------------------------------------------------------------------
# numeric secants
# ---------------------------------------------------------------------------


def _balance(C: JetCurve):
    """Real centre and radius of the finite roots of the components.

    Substituting t = c + r s puts the roots near the unit circle; curves whose
    roots sit far from 0 otherwise lose solutions in the multistart.
    """
    pts = []
    for f in C.p:
        co = np.array([float(x) for x in f.coeffs])
        nz = np.nonzero(np.abs(co) > 1e-14 * np.max(np.abs(co)))[0]
        if nz.size and nz[-1] > nz[0]:
            pts.extend(np.roots(co[nz[0] : nz[-1] + 1]))
    pts = np.asarray(pts)
    pts = pts[np.isfinite(pts)]
    if pts.size == 0:
        return 0.0, 1.0
    c = float(np.median(pts.real))
    r = float(np.median(np.abs(pts - c)))
    if not (r > 1e-6 and math.isfinite(r)):
        r = 1.0
    return c, r


def _float_chart(C: JetCurve, theta: float, balance: bool = True):
    """Coefficients (u-leading) of p o g, g = (centre, scale) then rotation by theta."""
    cth, sth = math.cos(theta), math.sin(theta)
    c0, r0 = _balance(C) if balance else (0.0, 1.0)
    g = (r0 * cth + c0 * sth, -r0 * sth + c0 * cth, sth, cth)
    rows = []
    for f in C.p:
        co = [float(x) for x in f.coeffs]
        rows.append(_compose(co, *g))
    P = np.array(rows, dtype=complex)
    return P, g


def _start_points(P, m, c1, c2, af, count, rng):
    n, L = P.shape
    d = L - 1
    # divisor points uniform on P^1, homogeneous (a_i : b_i)
    A = rng.normal(size=(count, m, 2)) + 1j * rng.normal(size=(count, m, 2))
    A /= np.linalg.norm(A, axis=2, keepdims=True)
    f = np.ones((count, 1), dtype=complex)
    for i in range(m):
        lin = np.stack([A[:, i, 1], -A[:, i, 0]], axis=1)
        f = _kernels._conv_rows(f, lin)
    f /= (f @ af)[:, None]
    # rows p(a_i, b_i)
    ex = np.arange(d, -1, -1)
    mons = A[:, :, 0:1] ** ex * A[:, :, 1:2] ** (d - ex)  # (S, m, L)
    V = np.einsum("smk,jk->smj", mons, P)
    _, _, vh = np.linalg.svd(V)
    Nb = np.conj(vh[:, -2:, :]).transpose(0, 2, 1)
    Cm = np.stack([c1, c2])
    K = np.einsum("cj,sjk->sck", Cm, Nb)
    Lam = Nb @ np.linalg.pinv(K)
    la, lb = Lam[:, :, 0], Lam[:, :, 1]
    # h by least squares from lam . p ~ f h
    nh = L - m
    hs = []
    for lam in (la, lb):
        target = lam @ P
        T = np.zeros((count, L, nh), dtype=complex)
        for l in range(nh):
            T[:, l : l + m + 1, l] = f
        h = np.linalg.lstsq(T[0], target[0], rcond=None)[0][None, :] if count == 1 else np.stack(
            [np.linalg.lstsq(T[i], target[i], rcond=None)[0] for i in range(count)]
        )
        hs.append(h)
    return np.concatenate([f, hs[0], hs[1], la, lb], axis=1)


def _pool_size(cfg: SolverConfig) -> int:
    import os

    if cfg.threads:
        return max(1, int(cfg.threads))
    env = os.environ.get("SEGRE_LINES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def _run_batches(fn, starts, workers):
    if workers <= 1 or len(starts) < 64:
        return fn(starts)
    chunks = np.array_split(starts, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(fn, chunks))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


@dataclass
class _Cluster:
    fd: np.ndarray  # divisor form, u-leading, unit norm
    params: list  # homogeneous roots
    proj: np.ndarray  # projector onto the lambda plane
    lam: np.ndarray  # 2 x n
    hits: int = 1


def _projector(L):
    Q, _ = np.linalg.qr(L.T)
    return Q @ Q.conj().T


def _proj_dist(f, g):
    """Sine of the angle between two coefficient vectors (projective distance)."""
    f = f / np.linalg.norm(f)
    g = g / np.linalg.norm(g)
    ip = np.vdot(g, f)
    if ip != 0:
        g = g * (ip / abs(ip))
    return float(np.linalg.norm(f - g))


def _homog_roots(f):
    """Roots of a u-leading form as unit homogeneous pairs (u, v)."""
    f = np.asarray(f, dtype=complex)
    deg = len(f) - 1
    big = np.max(np.abs(f))
    k = 0
    while k < deg and abs(f[k]) <= 1e-13 * big:
        k += 1
    out = [(1.0 + 0j, 0j)] * k
    if deg - k > 0:
        for t in np.roots(f[k:]):
            nrm = math.sqrt(abs(t) ** 2 + 1)
            out.append((t / nrm, 1 / nrm))
    return out


def _collect(Z, res, m, n, L, cfg):
    nh = L - m
    out = []
    for z, r in zip(Z, res):
        if not np.all(np.isfinite(z)):
            continue
        if r > cfg.tol * max(1.0, np.max(np.abs(z))):
            continue
        f = z[: m + 1]
        pts = _homog_roots(f)
        if len(pts) != m:
            continue
        bad = False
        for i in range(m):
            for j in range(i + 1, m):
                (a1, b1), (a2, b2) = pts[i], pts[j]
                if abs(a1 * b2 - a2 * b1) < 1e-6:
                    bad = True
        if bad:
            continue
        o = m + 1 + 2 * nh
        L2 = np.array([z[o : o + n], z[o + n :]])
        out.append((f / np.linalg.norm(f), pts, L2))
    return out


def _merge(clusters, found, tol):
    for fd, pts, L in found:
        for cl in clusters:
            if _proj_dist(cl.fd, fd) <= tol:
                cl.hits += 1
                break
        else:
            clusters.append(_Cluster(fd, pts, _projector(L), L))


def _add_conjugates(clusters, tol):
    extra = []
    for cl in clusters:
        cf = np.conj(cl.fd)
        if _proj_dist(cf, cl.fd) <= tol:
            continue
        if any(_proj_dist(o.fd, cf) <= tol for o in clusters + extra):
            continue
        pts = [(np.conj(a), np.conj(b)) for a, b in cl.params]
        extra.append(_Cluster(cf, pts, np.conj(cl.proj), np.conj(cl.lam), 0))
    clusters.extend(extra)


def _group_planes(clusters, tol):
    groups: list[list[_Cluster]] = []
    for cl in clusters:
        for gr in groups:
            if np.linalg.norm(gr[0].proj - cl.proj) <= max(1e3 * tol, 1e-6):
                gr.append(cl)
                break
        else:
            groups.append([cl])
    return groups


def _solve_round(P, m, c1, c2, af, cfg, rng, count, workers):
    starts = _start_points(P, m, c1, c2, af, count, rng)

    def fn(S):
        return _kernels.newton_secants(P, m, c1, c2, af, S, 60, cfg.tol)

    return _run_batches(fn, starts, workers)


def secants_numeric(C: JetCurve, cfg: Optional[SolverConfig] = None, raise_on_fail: bool = True) -> SecantReport:
    cfg = cfg or SolverConfig()
    n = C.n
    if n < 3:
        raise Unsupported("secants need n >= 3")
    if components_dependent(C):
        raise NonGenericCurve("the components are linearly dependent (curve in a hyperplane)")
    m = 2 * n - 4
    rng = np.random.default_rng(cfg.seed)
    theta = float(rng.uniform(0.1, math.pi - 0.1))
    P, g = _float_chart(C, theta)
    P = P / np.max(np.abs(P))
    # whiten the components: secants are GL_n-equivariant, and nearly
    # proportional p_i otherwise leave most starts in a flat region.
    # lambda' on W is lambda' @ T on P
    U, sv, W = np.linalg.svd(P, full_matrices=False)
    T = (U / sv).T
    L = P.shape[1]
    c1 = (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(n)
    c2 = (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(n)
    af = (rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1)) / math.sqrt(m + 1)
    tol = cfg.cluster_tol
    workers = _pool_size(cfg)
    clusters: list[_Cluster] = []
    expected = math.comb(n, 2)
    total = 0
    groups: list = []
    rounds = 0
    for rnd in range(cfg.max_rounds):
        rounds = rnd + 1
        count = cfg.starts * (2**rnd)
        Z, res, _ = _solve_round(W, m, c1, c2, af, cfg, rng, count, workers)
        _merge(clusters, _collect(Z, res, m, n, L, cfg), tol)
        _add_conjugates(clusters, tol)
        groups = _group_planes(clusters, tol)
        total = sum(len(gr) for gr in groups)
        if total == expected:
            break
    secants = [_group_to_secant(C, gr, P, g, n, T) for gr in groups]
    secants.sort(key=_secant_sort_key)
    ok = total == expected
    rep = SecantReport(n, secants, total, ok, "numeric-multistart", rounds=rounds)
    if not ok:
        rep.warnings.append(f"found total {total}, expected {expected}")
        if raise_on_fail:
            raise IncompleteEnumeration(f"Castelnuovo certificate failed: {total} != {expected}", rep)
    return rep


def _real_form(f):
    """Real representative of a conjugation-invariant projective vector."""
    k = int(np.argmax(np.abs(f)))
    g = f / f[k]
    return g.real, float(np.max(np.abs(g.imag)))


def _divide_stable(num, den):
    """Quotient of exact division, run from the better-conditioned end."""
    num = list(num)
    den = list(den)
    if abs(den[0]) >= abs(den[-1]):
        return _polydiv(num, den)[0]
    q = _polydiv(num[::-1], den[::-1])[0]
    return q[::-1]


def _group_to_secant(C, group, P, g, n, T):
    a, b, c, d = g
    cl = group[0]
    lam = cl.lam @ T
    fr, imag = _real_form(cl.fd)
    # M is real when its lambda-plane is; with m(M) > 1 the individual
    # divisors in the plane may still be complex
    real = np.linalg.norm(cl.proj - np.conj(cl.proj)) <= 1e-6
    if len(group) == 1:
        real = real and imag <= 1e-7
    # P = (p o g) / const, so the covectors need no change
    if real:
        la, lb = _real_basis(lam)
    else:
        Q, _ = np.linalg.qr(lam.T)
        la, lb = Q[:, 0], Q[:, 1]
    params = tuple((a * u + b * v, c * u + d * v) for u, v in cl.params)
    div = _numeric_divisor(params, real and len(group) == 1)
    sign = None
    pencil = None
    if real and len(group) == 1:
        qs = [_divide_stable(lam.real @ P.real, fr) for lam in (la, lb)]
        r = _quad_res(qs[0], qs[1])
        scale = (np.linalg.norm(qs[0]) * np.linalg.norm(qs[1])) ** 2
        if abs(r) > 1e-7 * scale:
            sign = 1 if r > 0 else -1
        pencil = tuple(tuple(float(x) for x in _compose(q, d, -b, -c, a)) for q in qs)
    return Secant(
        lambda_a=tuple(complex(x) for x in la),
        lambda_b=tuple(complex(x) for x in lb),
        divisor=div,
        multiplicity=len(group),
        is_real=bool(real),
        params=params,
        local_sign=sign,
        pencil=pencil,
    )


def low_dimensional_secant_present(C: JetCurve, cfg: Optional[SolverConfig] = None) -> bool:
    """Best-effort test for an (n-4)-dimensional (2n-4)-secant.

    Such a secant makes every (n-3)-plane through it a secant, so Newton
    solutions show a lambda-space of dimension >= 3 at their divisor.
    """
    cfg = cfg or SolverConfig()
    if C.n < 4:
        return False
    try:
        rep = secants_numeric(C, replace(cfg, max_rounds=1), raise_on_fail=False)
    except NonGenericCurve:
        return False
    n = C.n
    for s in rep.secants:
        pts = [p.homogeneous() for p in s.divisor.points]
        V = np.array([[_eval_num(f, u, v) for f in C.p] for u, v in pts])
        sv = np.linalg.svd(V, compute_uv=False)
        full = np.max(sv) if sv.size else 0.0
        # rank of V is n - dim(lambda space)
        if len(sv) >= n - 2 and sv[n - 3] <= 1e-7 * full:
            return True
    return False


def _eval_num(f: BinaryForm, u, v):
    d = f.degree
    return sum(float(c) * u ** (d - k) * v**k for k, c in enumerate(f.coeffs))
