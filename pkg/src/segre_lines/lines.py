"""Real lines on a real hypersurface of degree 2n-1 in P^{n+1}.

Lines are searched chart by chart in G(2, n+2): in the chart with pivot
columns (i, j) a line is spanned by row1 = e_i + ..., row2 = e_j + ..., and
the 2n free entries solve F(row1 + t row2) = 0 at 2n fixed nodes t_k.
Real multistart Newton only ever lands on real solutions, which is what we
want. Duplicates across charts are merged through normalized Plücker keys.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import _kernels
from .errors import (
    Degenerate,
    IncompleteEnumeration,
    InvalidInput,
    NumericFailure,
    Unsupported,
)
from .exactalg import BinaryForm, format_rational, parse_rational
from .jet import Hypersurface, JetCurve, det_AC, euler_index
from .secants import SolverConfig, _pool_size, _rationalize

SEARCH_BOX = 50.0  # params beyond this are better represented in another chart


def double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass(frozen=True)
class RealLine:
    """Line in the chart with pivot columns ``chart`` (0-based).

    ``params`` is the 2 x n block of the row-reduced spanning matrix in the
    remaining columns; exact lines carry Fractions, the others floats.
    """

    chart: tuple
    params: tuple
    plucker_key: tuple
    exact: bool = False
    residual: float = 0.0

    @property
    def num_vars(self) -> int:
        return len(self.params[0]) + 2

    def free_columns(self) -> list:
        return [c for c in range(self.num_vars) if c not in self.chart]

    def rows(self) -> tuple:
        N = self.num_vars
        zero = Fraction(0) if self.exact else 0.0
        one = Fraction(1) if self.exact else 1.0
        r1 = [zero] * N
        r2 = [zero] * N
        i, j = self.chart
        r1[i] = one
        r2[j] = one
        for c, col in enumerate(self.free_columns()):
            r1[col] = self.params[0][c]
            r2[col] = self.params[1][c]
        return r1, r2

    def to_json(self) -> dict:
        fmt = format_rational if self.exact else (lambda x: float(x))
        return {
            "chart": [self.chart[0] + 1, self.chart[1] + 1],
            "params": [[fmt(x) for x in row] for row in self.params],
            "plucker_key": [float(x) for x in self.plucker_key],
            "exact": self.exact,
            "residual": float(self.residual),
        }

    @classmethod
    def from_json(cls, obj) -> "RealLine":
        try:
            exact = bool(obj.get("exact", False))
            conv = (lambda x: parse_rational(str(x))) if exact else float
            params = tuple(tuple(conv(x) for x in row) for row in obj["params"])
            chart = tuple(int(c) - 1 for c in obj["chart"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed line: {exc}") from exc
        if len(params) != 2 or len(params[0]) != len(params[1]) or len(chart) != 2:
            raise InvalidInput("line needs a chart pair and a 2 x n parameter block")
        N = len(params[0]) + 2
        if not (0 <= chart[0] < chart[1] < N):
            raise InvalidInput(f"bad chart {obj['chart']}")
        r1, r2 = _rows_of(chart, params, N)
        key = plucker_key(np.array([[float(x) for x in r1], [float(x) for x in r2]]))
        return cls(chart, params, tuple(key), exact, float(obj.get("residual", 0.0)))


def _rows_of(chart, params, N):
    free = [c for c in range(N) if c not in chart]
    one = type(params[0][0])(1) if params[0] else 1
    zero = one - one
    r1 = [zero] * N
    r2 = [zero] * N
    r1[chart[0]] = one
    r2[chart[1]] = one
    for c, col in enumerate(free):
        r1[col] = params[0][c]
        r2[col] = params[1][c]
    return r1, r2


# ---------------------------------------------------------------------------
# restriction to a line (works over Fraction, float and mpf)
# ---------------------------------------------------------------------------


def _conv(a, b):
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _restrict(terms, r1, r2, deriv: Optional[int] = None) -> list:
    """Coefficients (u-leading) of F(u r1 + v r2), or of dF/dx_deriv there."""
    N = len(r1)
    lin = [[r1[b], r2[b]] for b in range(N)]
    cache: dict = {}

    def power(b, e):
        if (b, e) not in cache:
            cache[(b, e)] = [lin[b][0] ** 0] if e == 0 else _conv(power(b, e - 1), lin[b])
        return cache[(b, e)]

    deg = None
    acc = None
    for exps, c in terms:
        exps = list(exps)
        if deriv is not None:
            if exps[deriv] == 0:
                continue
            c = c * exps[deriv]
            exps[deriv] -= 1
        poly = None
        for b, e in enumerate(exps):
            if e:
                poly = power(b, e) if poly is None else _conv(poly, power(b, e))
        if poly is None:
            poly = [r1[0] ** 0]
        term = [c * x for x in poly]
        if acc is None:
            acc = term
            deg = len(term)
        else:
            for k in range(deg):
                acc[k] += term[k]
    if acc is None:
        d = sum(terms[0][0]) - (deriv is not None) if terms else 0
        acc = [r1[0] * 0] * (d + 1)
    return acc


def restrict_to_line(X: Hypersurface, L) -> BinaryForm:
    """F restricted to L, a BinaryForm of degree 2n-1.

    ``L`` is a RealLine or a pair of rows. Float rows are converted exactly,
    so the result of a numeric line is small but usually not zero.
    """
    r1, r2 = L.rows() if isinstance(L, RealLine) else L
    r1 = [Fraction(x) for x in r1]
    r2 = [Fraction(x) for x in r2]
    if len(r1) != X.num_vars:
        raise InvalidInput("line lives in the wrong projective space")
    coeffs = _restrict(X.terms, r1, r2)
    return BinaryForm(X.degree, tuple(coeffs))


# ---------------------------------------------------------------------------
# Plücker keys and charts
# ---------------------------------------------------------------------------


def plucker_key(R: np.ndarray) -> np.ndarray:
    N = R.shape[1]
    p = np.array([R[0, a] * R[1, b] - R[0, b] * R[1, a] for a, b in combinations(range(N), 2)])
    p = p / np.linalg.norm(p)
    first = np.nonzero(np.abs(p) > 1e-6)[0][0]
    return p if p[first] > 0 else -p


def _best_chart(R: np.ndarray) -> tuple:
    N = R.shape[1]
    pairs = list(combinations(range(N), 2))
    minors = [abs(R[0, a] * R[1, b] - R[0, b] * R[1, a]) for a, b in pairs]
    return pairs[int(np.argmax(minors))]


def _to_chart(R: np.ndarray, chart) -> np.ndarray:
    Mp = R[:, list(chart)]
    out = np.linalg.solve(Mp, R)
    free = [c for c in range(R.shape[1]) if c not in chart]
    return out[:, free]


def _nodes(n: int) -> np.ndarray:
    k = np.arange(2 * n)
    return np.cos((2 * k + 1) * np.pi / (4 * n))


def _term_arrays(X: Hypersurface):
    exps = np.array([e for e, _ in X.terms], dtype=np.int64)
    coeffs = np.array([float(c) for _, c in X.terms])
    return exps, coeffs


# ---------------------------------------------------------------------------
# high-precision refinement and jets
# ---------------------------------------------------------------------------


def _mp_system(X, chart, z, tnodes, ctx):
    N = X.num_vars
    n = N - 2
    free = [c for c in range(N) if c not in chart]
    F = ctx.matrix(2 * n, 1)
    J = ctx.matrix(2 * n, 2 * n)
    for k, t in enumerate(tnodes):
        w = [ctx.mpf(0)] * N
        w[chart[0]] = ctx.mpf(1)
        w[chart[1]] = t
        for c, col in enumerate(free):
            w[col] = z[c] + t * z[n + c]
        val = ctx.mpf(0)
        grad = [ctx.mpf(0)] * N
        for exps, co in X.terms:
            co = ctx.mpf(co.numerator) / co.denominator
            mono = co
            for b, e in enumerate(exps):
                if e:
                    mono *= w[b] ** e
            val += mono
            for b, e in enumerate(exps):
                if e:
                    g = co * e * w[b] ** (e - 1)
                    for b2, e2 in enumerate(exps):
                        if b2 != b and e2:
                            g *= w[b2] ** e2
                    grad[b] += g
        F[k] = val
        for c, col in enumerate(free):
            J[k, c] = grad[col]
            J[k, n + c] = t * grad[col]
    return F, J


def refine_line(X: Hypersurface, L: RealLine, dps: int = 50, max_iter: int = 40):
    """Newton in mpmath at ``dps`` digits; returns (mp params 2 x n, residual)."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    n = X.n
    tn = [ctx.mpf(float(t)) for t in _nodes(n)]
    z = [ctx.mpf(float(x)) for x in L.params[0]] + [ctx.mpf(float(x)) for x in L.params[1]]
    eps = ctx.mpf(10) ** (-dps + 5)
    res = None
    for _ in range(max_iter):
        F, J = _mp_system(X, L.chart, z, tn, ctx)
        res = ctx.norm(F)
        if res < eps:
            break
        try:
            dz = ctx.lu_solve(J, -F)
        except ZeroDivisionError as exc:
            raise NumericFailure("singular Jacobian while refining a line") from exc
        z = [z[i] + dz[i] for i in range(2 * n)]
    if res is None or res > ctx.mpf(10) ** (-dps // 2):
        raise NumericFailure(f"line refinement stalled at residual {ctx.nstr(res, 3)}")
    return (z[:n], z[n:]), res, ctx


def _mp_to_fraction(x, digits: int = 30) -> Fraction:
    return Fraction(mpmath.nstr(x, digits, min_fixed=-1, max_fixed=1).replace(" ", "")) if x else Fraction(0)


@dataclass(frozen=True)
class LineJet:
    curve: JetCurve  # exact, or a rational approximation of the true jet
    exact: bool
    det_sign: int
    det: Optional[Fraction] = None  # exact lines only


def line_jet(X: Hypersurface, L: RealLine, dps: int = 50) -> LineJet:
    """Jet curve of X along L in coordinates adapted to L.

    The complement of the line is spanned by the unit vectors of the free
    columns, so p_k = dF/dx_{free_k} restricted to L. A different complement
    changes det A_C by a positive factor only.
    """
    free = L.free_columns()
    n = X.n
    if L.exact:
        r1, r2 = L.rows()
        if any(_restrict(X.terms, r1, r2)):
            raise InvalidInput("exact line does not lie on X")
        p = [BinaryForm(2 * n - 2, tuple(_restrict(X.terms, r1, r2, deriv=c))) for c in free]
        if any(f.is_zero for f in p):
            raise Degenerate("X is singular along the line")
        C = JetCurve(n, tuple(p), check=False)
        d = det_AC(C)
        if d == 0:
            raise Degenerate(f"det A_C = 0 on the line {L.to_json()}")
        return LineJet(C, True, (d > 0) - (d < 0), d)

    signs = []
    curves = []
    for digits in (dps, 2 * dps):
        (a, b), _, ctx = refine_line(X, L, dps=digits)
        r1, r2 = _rows_of(L.chart, (a, b), X.num_vars)
        p = [_restrict(X.terms, r1, r2, deriv=c) for c in free]
        A = ctx.matrix(2 * n, 2 * n)
        for j, f in enumerate(p):
            for i, c in enumerate(f):
                A[i, 2 * j] = c
                A[i + 1, 2 * j + 1] = c
        d = ctx.det(A)
        hadamard = ctx.fprod(ctx.norm(A.column(j)) for j in range(2 * n))
        if abs(d) <= hadamard * ctx.mpf(10) ** (-digits // 3):
            raise Degenerate(f"det A_C indistinguishable from 0 on the line {L.to_json()}")
        signs.append(1 if d > 0 else -1)
        scale = max(abs(c) for f in p for c in f)
        curves.append([[_mp_to_fraction(c / scale) for c in f] for f in p])
    if signs[0] != signs[1]:
        raise NumericFailure("det A_C sign changes with the working precision")
    C = JetCurve.from_coeffs(curves[1], check=False)
    if euler_index(C) != signs[1]:
        raise NumericFailure("rational approximation of the jet crosses the discriminant")
    return LineJet(C, False, signs[1])


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass
class LineSearch:
    lines: list
    stable: bool
    rounds: int
    counts: list
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.lines)

    def __len__(self):
        return len(self.lines)

    def __getitem__(self, i):
        return self.lines[i]

    def to_json(self) -> dict:
        return {
            "lines": [L.to_json() for L in self.lines],
            "count": len(self.lines),
            "stable": self.stable,
            "rounds": self.rounds,
            "counts": list(self.counts),
            "warnings": list(self.warnings),
        }


def _chart_run(X, exps, coeffs, chart, starts, cfg):
    N = X.num_vars
    free = np.array([c for c in range(N) if c not in chart], dtype=np.int64)
    Z, res, _ = _kernels.newton_lines(exps, coeffs, chart[0], chart[1], free, _nodes(X.n), starts, tol=cfg.tol)
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    ok = (res < cfg.tol * scale) & np.all(np.isfinite(Z), axis=1) & (np.max(np.abs(Z), axis=1) < SEARCH_BOX)
    n = X.n
    out = []
    for z in Z[ok]:
        R = np.zeros((2, N))
        R[0, chart[0]] = 1.0
        R[1, chart[1]] = 1.0
        R[0, free] = z[:n]
        R[1, free] = z[n:]
        out.append(R)
    return out


def _polish(X, exps, coeffs, R, cfg):
    """Re-solve the line in its best chart; returns a RealLine or None."""
    chart = _best_chart(R)
    P = _to_chart(R, chart)
    N = X.num_vars
    n = X.n
    free = np.array([c for c in range(N) if c not in chart], dtype=np.int64)
    start = np.concatenate([P[0], P[1]])[None, :]
    Z, res, _ = _kernels.newton_lines(exps, coeffs, chart[0], chart[1], free, _nodes(n), start, tol=cfg.tol)
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if not (res[0] < cfg.tol * scale and np.all(np.isfinite(Z[0]))):
        return None
    z = Z[0]
    R2 = np.zeros((2, N))
    R2[0, chart[0]] = 1.0
    R2[1, chart[1]] = 1.0
    R2[0, free] = z[:n]
    R2[1, free] = z[n:]
    key = tuple(plucker_key(R2))
    q = _rationalize(z)
    if q is not None:
        params = (tuple(q[:n]), tuple(q[n:]))
        cand = RealLine(chart, params, key, True, 0.0)
        if not any(_restrict(X.terms, *cand.rows())):
            return cand
    params = (tuple(float(x) for x in z[:n]), tuple(float(x) for x in z[n:]))
    return RealLine(chart, params, key, False, float(res[0]))


def _merge(found: list, cand: RealLine, tol: float, near: float = 1e-4) -> str:
    k = np.array(cand.plucker_key)
    for i, L in enumerate(found):
        d = float(np.linalg.norm(k - np.array(L.plucker_key)))
        if d < tol:
            if cand.exact and not L.exact:
                found[i] = cand
            return "dup"
        if d < near:
            return "ambiguous"
    found.append(cand)
    return "new"


def find_real_lines(X: Hypersurface, cfg: Optional[SolverConfig] = None, raise_on_fail: bool = True) -> LineSearch:
    cfg = cfg or SolverConfig()
    if X.n >= 4:
        raise Unsupported("line enumeration is implemented for n = 2 and n = 3")
    N = X.num_vars
    exps, coeffs = _term_arrays(X)
    charts = list(cfg.charts) if cfg.charts else list(combinations(range(N), 2))
    for ch in charts:
        if len(ch) != 2 or not (0 <= ch[0] < ch[1] < N):
            raise InvalidInput(f"bad chart {ch}")
    workers = _pool_size(cfg)
    found: list = []
    counts = []
    warnings = []
    steady = 0
    stable = False
    rounds = 0
    for rnd in range(cfg.max_rounds):
        rounds = rnd + 1
        S = cfg.starts * (2**rnd)

        def job(ci):
            rng = np.random.default_rng([cfg.seed, rnd, ci])
            starts = rng.normal(0.0, 1.0, size=(S, 2 * X.n))
            return _chart_run(X, exps, coeffs, charts[ci], starts, cfg)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                batches = list(ex.map(job, range(len(charts))))
        else:
            batches = [job(ci) for ci in range(len(charts))]
        ambiguous = 0
        for batch in batches:
            for R in batch:
                # cheap pre-check against known lines before polishing
                key = plucker_key(R)
                if any(np.linalg.norm(key - np.array(L.plucker_key)) < 1e-6 for L in found):
                    continue
                L = _polish(X, exps, coeffs, R, cfg)
                if L is None:
                    continue
                ambiguous += _merge(found, L, cfg.cluster_tol) == "ambiguous"
        if ambiguous:
            warnings.append(f"round {rounds}: {ambiguous} near-duplicate lines rejected")
        counts.append(len(found))
        if rnd > 0 and counts[-1] == counts[-2] and not ambiguous:
            steady += 1
        else:
            steady = 0
        if steady >= cfg.stability_rounds:
            stable = True
            break
    found.sort(key=lambda L: tuple(-x for x in L.plucker_key))
    out = LineSearch(found, stable, rounds, counts, warnings)
    if not stable and raise_on_fail:
        raise IncompleteEnumeration(f"line count did not stabilize: {counts}", out)
    return out


def signed_count(X: Hypersurface, lines: Sequence[RealLine]) -> int:
    return sum(line_jet(X, L).det_sign for L in lines)


def line_indices(X: Hypersurface, L: RealLine, cfg: Optional[SolverConfig] = None) -> dict:
    """Euler, Segre and Welschinger indices of one line."""
    from .segre import segre_index
    from .welsch import welschinger_weight

    J = line_jet(X, L)
    out = {"euler": J.det_sign}
    out["segre"] = segre_index(J.curve, cfg=cfg)
    if X.n <= 3:
        out["welschinger"] = welschinger_weight(J.curve)
    out["species"] = "hyperbolic" if out["segre"] > 0 else "elliptic"
    if J.det is not None:
        out["det"] = format_rational(J.det)
    else:
        # exact det of the rational jet approximant; its sign is the certified one
        out["det_approx"] = format_rational(det_AC(J.curve))
    out["exact"] = J.exact
    return out


# ---------------------------------------------------------------------------
# test hypersurfaces
# ---------------------------------------------------------------------------


def _power_terms(N, d):
    return [tuple(d if b == a else 0 for b in range(N)) for a in range(N)]


def fermat(n: int) -> Hypersurface:
    N, d = n + 2, 2 * n - 1
    return Hypersurface(n, tuple((e, 1) for e in _power_terms(N, d)))


def fermat_cubic() -> Hypersurface:
    return fermat(2)


def clebsch_cubic() -> Hypersurface:
    """sum_{i<4} x_i^3 - (x_0 + x_1 + x_2 + x_3)^3."""
    from math import factorial

    terms = [(e, 1) for e in _power_terms(4, 3)]
    for a in range(4):
        for b in range(4 - a):
            for c in range(4 - a - b):
                e = (a, b, c, 3 - a - b - c)
                mult = factorial(3) // (factorial(a) * factorial(b) * factorial(c) * factorial(e[3]))
                terms.append((e, -mult))
    return Hypersurface(2, tuple(terms))


def random_hypersurface(n: int, rng, bound: int = 10) -> Hypersurface:
    N, d = n + 2, 2 * n - 1

    def comps(total, k):
        if k == 1:
            yield (total,)
            return
        for a in range(total, -1, -1):
            for rest in comps(total - a, k - 1):
                yield (a,) + rest

    terms = [(e, int(rng.integers(-bound, bound + 1))) for e in comps(d, N)]
    return Hypersurface(n, tuple(terms))


def random_quintic(rng, bound: int = 10) -> Hypersurface:
    return random_hypersurface(3, rng, bound)
