"""Exact binary forms, resultants, Sturm counts and rational linear algebra.

Everything here works over ``fractions.Fraction``. A binary form of degree d
stores ``coeffs[k]`` = coefficient of ``u**(d-k) * v**k``. Dehomogenizing is
always done in the chart v = 1, so the point [1:0] is "infinity" and is
detected from the leading coefficient before any univariate work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, NumericFailure

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"not a rational number: {s!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# univariate polynomials, coefficient lists low -> high
# ---------------------------------------------------------------------------


def upoly_trim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def upoly_degree(a: Sequence) -> int:
    return len(upoly_trim(a)) - 1


def upoly_eval(a: Sequence, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def upoly_mul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return upoly_trim(out)


def upoly_add(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return upoly_trim(out)


def upoly_scale(a: Sequence, c) -> list:
    return upoly_trim([c * x for x in a])


def upoly_deriv(a: Sequence) -> list:
    return upoly_trim([i * a[i] for i in range(1, len(a))])


def upoly_divmod(a: Sequence, b: Sequence) -> tuple[list, list]:
    """Euclidean division over a field (Fraction coefficients)."""
    b = upoly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = [Fraction(c) for c in upoly_trim(a)]
    db = len(b) - 1
    lc = Fraction(b[-1])
    if len(r) - 1 < db:
        return [], r
    q = [Fraction(0)] * (len(r) - db)
    for k in range(len(r) - 1 - db, -1, -1):
        c = r[k + db] / lc
        q[k] = c
        if c:
            for j in range(db + 1):
                r[k + j] -= c * b[j]
    return upoly_trim(q), upoly_trim(r[:db])


def upoly_monic(a: Sequence) -> list:
    a = upoly_trim(a)
    if not a:
        return []
    lc = Fraction(a[-1])
    return [Fraction(c) / lc for c in a]


def upoly_gcd(a: Sequence, b: Sequence) -> list:
    a, b = upoly_trim(a), upoly_trim(b)
    while b:
        _, r = upoly_divmod(a, b)
        a, b = b, r
    return upoly_monic(a)


def upoly_squarefree(a: Sequence) -> list:
    a = upoly_trim(a)
    if len(a) <= 1:
        return upoly_monic(a)
    g = upoly_gcd(a, upoly_deriv(a))
    q, _ = upoly_divmod(a, g)
    return upoly_monic(q)


def upoly_interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list:
    """Exact Newton-form interpolation, returned in the monomial basis."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out: list = [coef[-1]]
    for i in range(n - 2, -1, -1):
        # out = out * (x - xs[i]) + coef[i]
        shifted = [Fraction(0)] + out
        for k in range(len(out)):
            shifted[k] -= xs[i] * out[k]
        shifted[0] += coef[i]
        out = shifted
    return upoly_trim(out)


def sturm_sequence(a: Sequence) -> list[list]:
    p0 = upoly_trim([Fraction(c) for c in a])
    seq = [p0, upoly_deriv(p0)]
    while seq[-1] and upoly_degree(seq[-1]) > 0:
        _, r = upoly_divmod(seq[-2], seq[-1])
        seq.append(upoly_scale(r, -1))
    return [s for s in seq if s]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _sign_changes(signs: Iterable[int]) -> int:
    last = 0
    count = 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _signs_at_infinity(seq: list[list], positive: bool) -> list[int]:
    out = []
    for p in seq:
        s = _sign(p[-1])
        if not positive and (len(p) - 1) % 2 == 1:
            s = -s
        out.append(s)
    return out


def sturm_count_real(a: Sequence) -> int:
    """Number of distinct real roots of a univariate polynomial."""
    a = upoly_squarefree(a)
    if len(a) <= 1:
        return 0
    seq = sturm_sequence(a)
    return _sign_changes(_signs_at_infinity(seq, False)) - _sign_changes(
        _signs_at_infinity(seq, True)
    )


def sturm_count_interval(a: Sequence, lo: Fraction, hi: Fraction, seq=None) -> int:
    """Distinct real roots in the half-open interval (lo, hi]."""
    if seq is None:
        seq = sturm_sequence(upoly_squarefree(a))
    if not seq or len(seq[0]) <= 1:
        return 0
    va = _sign_changes(_sign(upoly_eval(p, lo)) for p in seq)
    vb = _sign_changes(_sign(upoly_eval(p, hi)) for p in seq)
    return va - vb


def isolate_real_roots(
    a: Sequence, lo: Fraction, hi: Fraction, width: Fraction = Fraction(1, 2**30)
) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (l, r] each holding exactly one root of ``a`` in (lo, hi]."""
    sf = upoly_squarefree(a)
    seq = sturm_sequence(sf)
    out = []
    stack = [(Fraction(lo), Fraction(hi))]
    while stack:
        l, r = stack.pop()
        c = sturm_count_interval(sf, l, r, seq)
        if c == 0:
            continue
        if c == 1 and r - l <= width:
            out.append((l, r))
            continue
        m = (l + r) / 2
        stack.append((m, r))
        stack.append((l, m))
    out.sort()
    return out


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational with the smallest denominator strictly inside (lo, hi)."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo >= hi:
        raise InvalidInput("empty interval")
    fl = math.floor(lo)
    if fl + 1 < hi:
        if lo < 0 < hi:
            return Fraction(0)
        return Fraction(fl + 1) if lo >= 0 else Fraction(math.ceil(hi) - 1)
    if lo == fl:
        return fl + Fraction(1, math.floor(1 / (hi - fl)) + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


# ---------------------------------------------------------------------------
# binary forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryForm:
    degree: int
    coeffs: tuple

    def __post_init__(self):
        if self.degree < 0:
            raise InvalidInput("negative degree")
        if len(self.coeffs) != self.degree + 1:
            raise InvalidInput(
                f"degree {self.degree} needs {self.degree + 1} coefficients, got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(as_fraction(c) for c in self.coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> "BinaryForm":
        coeffs = tuple(coeffs)
        return cls(len(coeffs) - 1, coeffs)

    @classmethod
    def zero(cls, degree: int) -> "BinaryForm":
        return cls(degree, (0,) * (degree + 1))

    @classmethod
    def monomial(cls, a: int, b: int, c=1) -> "BinaryForm":
        """c * u**a * v**b"""
        co = [0] * (a + b + 1)
        co[b] = c
        return cls(a + b, tuple(co))

    @classmethod
    def linear(cls, a, b) -> "BinaryForm":
        """a*u + b*v"""
        return cls(1, (a, b))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        if other.degree != self.degree:
            raise InvalidInput("adding forms of different degree")
        return BinaryForm(self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "BinaryForm") -> "BinaryForm":
        return self + other.scale(-1)

    def __neg__(self) -> "BinaryForm":
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, BinaryForm):
            out = [Fraction(0)] * (self.degree + other.degree + 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return BinaryForm(self.degree + other.degree, tuple(out))
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BinaryForm":
        out = BinaryForm(0, (1,))
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "BinaryForm":
        c = as_fraction(c)
        return BinaryForm(self.degree, tuple(c * a for a in self.coeffs))

    def __call__(self, u, v):
        return bf_eval(self, (u, v))

    def d_du(self) -> "BinaryForm":
        d = self.degree
        if d == 0:
            return BinaryForm(0, (0,))
        return BinaryForm(d - 1, tuple((d - k) * self.coeffs[k] for k in range(d)))

    def d_dv(self) -> "BinaryForm":
        d = self.degree
        if d == 0:
            return BinaryForm(0, (0,))
        return BinaryForm(d - 1, tuple((k + 1) * self.coeffs[k + 1] for k in range(d)))

    def ord_infinity(self) -> int:
        """Multiplicity of the root [1:0], i.e. the power of v dividing the form."""
        k = 0
        for c in self.coeffs:
            if c != 0:
                break
            k += 1
        return k

    def dehomogenize(self) -> list:
        """f(x, 1) as a low -> high coefficient list."""
        return upoly_trim(list(reversed(self.coeffs)))

    @classmethod
    def homogenize(cls, a: Sequence, degree: int) -> "BinaryForm":
        a = upoly_trim(a)
        if len(a) - 1 > degree:
            raise InvalidInput("polynomial degree exceeds requested form degree")
        co = [Fraction(0)] * (degree + 1)
        for i, c in enumerate(a):
            co[degree - i] = Fraction(c)
        return cls(degree, tuple(co))

    def normalized(self) -> "BinaryForm":
        """Projective representative: first nonzero coefficient equal to 1."""
        for c in self.coeffs:
            if c != 0:
                return self.scale(1 / c)
        return self

    def compose(self, a, b, c, d) -> "BinaryForm":
        """f(a*u + b*v, c*u + d*v)."""
        x = BinaryForm.linear(a, b)
        y = BinaryForm.linear(c, d)
        out = BinaryForm.zero(self.degree)
        for k, co in enumerate(self.coeffs):
            if co:
                out = out + (x ** (self.degree - k)) * (y**k) * co
        return out

    def to_json(self) -> dict:
        return {"degree": self.degree, "coeffs": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "BinaryForm":
        try:
            return cls(int(obj["degree"]), tuple(parse_rational(str(c)) for c in obj["coeffs"]))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed BinaryForm: {obj!r}") from exc

    def __str__(self) -> str:
        d = self.degree
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "".join(
                f"{var}^{e}" if e > 1 else var for var, e in (("u", d - k), ("v", k)) if e > 0
            )
            cs = format_rational(c)
            if mono and c == 1:
                cs = ""
            elif mono and c == -1:
                cs = "-"
            terms.append(f"{cs}{mono}" if mono else cs)
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def bf_eval(f: BinaryForm, point) -> Fraction:
    u, v = (as_fraction(point[0]), as_fraction(point[1]))
    d = f.degree
    acc = Fraction(0)
    for k, c in enumerate(f.coeffs):
        if c:
            acc += c * u ** (d - k) * v**k
    return acc


def exact_div(f: BinaryForm, g: BinaryForm) -> BinaryForm:
    """h with f = g*h; raises InvalidInput if g does not divide f."""
    if g.is_zero:
        raise InvalidInput("division by the zero form")
    if f.is_zero:
        return BinaryForm.zero(f.degree - g.degree)
    q, r = coeff_divmod(list(f.coeffs), list(g.coeffs))
    if any(c != 0 for c in r):
        raise InvalidInput("division is not exact")
    return BinaryForm(f.degree - g.degree, tuple(q))


def coeff_divmod(f: Sequence, g: Sequence) -> tuple[list, list]:
    """Homogeneous division on u-leading coefficient lists, any scalar field.

    Leading zeros of g (factors of v) are peeled off first; the remainder has
    length deg g and is zero exactly when g divides f.
    """
    f = list(f)
    g = list(g)
    j0 = 0
    while j0 < len(g) and g[j0] == 0:
        j0 += 1
    if j0 == len(g):
        raise ZeroDivisionError("zero divisor form")
    dg = len(g) - 1
    df = len(f) - 1
    if df < dg:
        raise InvalidInput("divisor degree exceeds dividend degree")
    rem_head = f[:j0]
    r = f[j0:]
    gg = g[j0:]
    lc = gg[0]
    q = [0] * (df - dg + 1)
    for k in range(df - dg + 1):
        c = r[k] / lc
        q[k] = c
        for j in range(1, len(gg)):
            r[k + j] = r[k + j] - c * gg[j]
    tail = r[df - dg + 1 :]
    return q, rem_head + tail


def bf_gcd(f: BinaryForm, g: BinaryForm) -> BinaryForm:
    if f.is_zero and g.is_zero:
        raise InvalidInput("gcd of two zero forms")
    if f.is_zero:
        return g.normalized()
    if g.is_zero:
        return f.normalized()
    kv = min(f.ord_infinity(), g.ord_infinity())
    h = upoly_gcd(f.dehomogenize(), g.dehomogenize())
    e = len(h) - 1
    out = BinaryForm.homogenize(h, e) * BinaryForm.monomial(0, kv)
    return out.normalized()


def sylvester_matrix(f: BinaryForm, g: BinaryForm) -> "RatMatrix":
    m, k = f.degree, g.degree
    size = m + k
    rows = []
    for i in range(k):
        row = [Fraction(0)] * size
        for j, c in enumerate(f.coeffs):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [Fraction(0)] * size
        for j, c in enumerate(g.coeffs):
            row[i + j] = c
        rows.append(row)
    return RatMatrix.from_rows(rows) if size else RatMatrix(0, 0, ())


def resultant(f: BinaryForm, g: BinaryForm) -> Fraction:
    if f.is_zero or g.is_zero:
        raise InvalidInput("resultant of a zero form")
    if f.degree + g.degree == 0:
        return Fraction(1)
    return det_exact(sylvester_matrix(f, g))


def sturm_real_root_count(f: BinaryForm, squarefree: bool = False) -> int:
    """Distinct real roots of f on P^1, the point [1:0] included."""
    if f.is_zero:
        raise InvalidInput("zero form has no finite root set")
    k = f.ord_infinity()
    g = f.dehomogenize()
    if squarefree:
        if k > 1 or upoly_degree(upoly_gcd(g, upoly_deriv(g))) > 0:
            raise InvalidInput("form is not squarefree")
    return sturm_count_real(g) + (1 if k > 0 else 0)


# ---------------------------------------------------------------------------
# rational matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatMatrix:
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise InvalidInput("entries length must equal rows*cols")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        if any(len(row) != c for row in rows):
            raise InvalidInput("ragged matrix")
        return cls(r, c, tuple(as_fraction(x) for row in rows for x in row))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.entries[i * self.cols : (i + 1) * self.cols]) for i in range(self.rows)]

    def apply(self, w: Sequence) -> list:
        return [sum(self[i, j] * w[j] for j in range(self.cols)) for i in range(self.rows)]

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.to_rows()]


def _integer_rows(rows: list[list[Fraction]]) -> tuple[list[list[int]], Fraction]:
    """Scale each row to integers; returns rows and the product of scale factors."""
    out = []
    scale = Fraction(1)
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in row])
        scale *= den
    return out, scale


def det_exact(M: RatMatrix) -> Fraction:
    """Bareiss fraction-free elimination on the row-scaled integer matrix."""
    if M.rows != M.cols:
        raise InvalidInput("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return Fraction(1)
    a, scale = _integer_rows(M.to_rows())
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return Fraction(sign * a[n - 1][n - 1]) / scale


def rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over the rationals; returns (matrix, pivot columns)."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return a, []
    nr, nc = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return a, pivots


def rank_exact(M: RatMatrix) -> int:
    return len(rref(M.to_rows())[1])


def kernel_exact(M: RatMatrix) -> list[list[Fraction]]:
    """Basis of the right null space, one vector per free column."""
    if M.cols == 0:
        return []
    if M.rows == 0:
        return [[Fraction(int(i == j)) for i in range(M.cols)] for j in range(M.cols)]
    a, pivots = rref(M.to_rows())
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * M.cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][fc]
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# numeric roots on P^1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexPoint:
    """The point [re + i*im : 1] of P^1, or [1:0] when ``at_infinity``."""

    re: float
    im: float
    certified_radius: float = 0.0
    at_infinity: bool = False

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def homogeneous(self) -> tuple[complex, complex]:
        if self.at_infinity:
            return (1.0 + 0j, 0j)
        return (self.z, 1.0 + 0j)


def complex_roots(f: BinaryForm, tol: float = 1e-10, max_iter: int = 80) -> list[ComplexPoint]:
    """All roots with multiplicity: companion eigenvalues, then Newton polish."""
    if f.is_zero:
        raise InvalidInput("zero form")
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    k = f.ord_infinity()
    out = [ComplexPoint(0.0, 0.0, 0.0, True) for _ in range(k)]
    hi_lo = np.array([float(c) for c in f.coeffs[k:]], dtype=float)
    deg = len(hi_lo) - 1
    if deg == 0:
        return out
    scale = np.max(np.abs(hi_lo))
    hi_lo = hi_lo / scale
    dhi = np.polyder(hi_lo)
    roots = np.roots(hi_lo).astype(complex)
    polished = []
    for z in roots:
        for _ in range(max_iter):
            fz = np.polyval(hi_lo, z)
            dz = np.polyval(dhi, z)
            if dz == 0:
                break
            step = fz / dz
            znew = z - step
            if abs(np.polyval(hi_lo, znew)) >= abs(fz):
                break
            z = znew
            if abs(step) <= 1e-17 * (1 + abs(z)):
                break
        fz = np.polyval(hi_lo, z)
        mag = np.polyval(np.abs(hi_lo), abs(z))
        if abs(fz) > tol * mag:
            raise NumericFailure(f"root refinement stalled at {z} (residual {abs(fz):.3g})")
        dz = np.polyval(dhi, z)
        r1 = deg * abs(fz / dz) if dz != 0 else math.inf
        r2 = (abs(fz) / abs(hi_lo[0])) ** (1.0 / deg)
        polished.append((complex(z), float(min(r1, r2))))
    # conjugate closure: real input, so non-real roots pair up exactly
    real_thr = lambda z, r: abs(z.imag) <= max(r, 1e3 * tol * (1 + abs(z)))
    reals = [(complex(z.real, 0.0), r) for z, r in polished if real_thr(z, r)]
    upper = sorted([(z, r) for z, r in polished if not real_thr(z, r) and z.imag > 0], key=lambda t: (t[0].real, t[0].imag))
    lower = [(z, r) for z, r in polished if not real_thr(z, r) and z.imag < 0]
    if len(upper) != len(lower):
        raise NumericFailure("non-real roots of a real form do not pair up")
    paired = []
    for z, r in upper:
        j = min(range(len(lower)), key=lambda i: abs(lower[i][0] - z.conjugate()))
        zl, rl = lower.pop(j)
        zz = 0.5 * (z + zl.conjugate())
        rr = max(r, rl)
        paired.append((zz, rr))
        paired.append((zz.conjugate(), rr))
    for z, r in sorted(reals, key=lambda t: t[0].real) + paired:
        out.append(ComplexPoint(z.real, z.imag, r, False))
    return out
