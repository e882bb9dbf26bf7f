"""Jet curves of a hypersurface along the line l = {x_1 = ... = x_n = 0}.

Coordinates on P^{n+1} are (u, v, x_1, ..., x_n). A degree 2n-1 form vanishing
on l splits as sum_k x_k p_k(u, v) + (terms of x-degree >= 2); the tuple
(p_1, ..., p_n) is the jet curve C. The sign of det A_C is the Euler index of
the line, in the column order (u p_1, v p_1, u p_2, v p_2, ...) and the row
order u^{2n-1}, u^{2n-2} v, ..., v^{2n-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

from .errors import Degenerate, InvalidInput, SingularAlongLine
from .exactalg import (
    BinaryForm,
    RatMatrix,
    as_fraction,
    bf_gcd,
    det_exact,
    format_rational,
    kernel_exact,
    parse_rational,
    rank_exact,
)


@dataclass(frozen=True)
class Hypersurface:
    """Homogeneous form of degree 2n-1 in the n+2 variables (u, v, x_1..x_n)."""

    n: int
    terms: tuple

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput("n must be at least 2")
        merged: dict = {}
        for exps, c in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n + 2:
                raise InvalidInput(f"monomial {exps} needs {self.n + 2} exponents")
            if sum(exps) != 2 * self.n - 1:
                raise InvalidInput(f"monomial {exps} is not of degree {2 * self.n - 1}")
            if any(e < 0 for e in exps):
                raise InvalidInput(f"negative exponent in {exps}")
            merged[exps] = merged.get(exps, Fraction(0)) + as_fraction(c)
        clean = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", clean)

    @property
    def num_vars(self) -> int:
        return self.n + 2

    @property
    def degree(self) -> int:
        return 2 * self.n - 1

    def contains_standard_line(self) -> bool:
        return all(sum(e[2:]) > 0 for e, _ in self.terms)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"exps": list(e), "c": format_rational(c)} for e, c in self.terms],
        }

    @classmethod
    def from_json(cls, obj) -> "Hypersurface":
        try:
            return cls(
                int(obj["n"]),
                tuple((tuple(t["exps"]), parse_rational(str(t["c"]))) for t in obj["terms"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed Hypersurface JSON: {exc}") from exc


def common_root_free(forms: Sequence[BinaryForm]) -> bool:
    g = reduce(bf_gcd, forms)
    return g.degree == 0


@dataclass(frozen=True)
class JetCurve:
    n: int
    p: tuple
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        p = tuple(self.p)
        object.__setattr__(self, "p", p)
        if self.n < 2:
            raise InvalidInput("n must be at least 2")
        if len(p) != self.n:
            raise InvalidInput(f"expected {self.n} components, got {len(p)}")
        d = 2 * self.n - 2
        if any(f.degree != d for f in p):
            raise InvalidInput(f"every component must have degree {d}")
        if self.check and not common_root_free(p):
            raise SingularAlongLine("components of the jet curve share a root")

    @classmethod
    def from_coeffs(cls, rows: Sequence[Sequence], check: bool = True) -> "JetCurve":
        p = tuple(BinaryForm.from_coeffs(r) for r in rows)
        return cls(len(p), p, check)

    def coeff_rows(self) -> list[list[Fraction]]:
        return [list(f.coeffs) for f in self.p]

    def transform(self, M: Sequence[Sequence]) -> "JetCurve":
        """Change of x-coordinates: the new components are M applied to (p_1..p_n)."""
        n = self.n
        out = []
        for i in range(n):
            acc = BinaryForm.zero(2 * n - 2)
            for j in range(n):
                if M[i][j]:
                    acc = acc + self.p[j].scale(M[i][j])
            out.append(acc)
        return JetCurve(n, tuple(out))

    def reparametrize(self, a, b, c, d) -> "JetCurve":
        """Pull back along (u, v) -> (a u + b v, c u + d v)."""
        return JetCurve(self.n, tuple(f.compose(a, b, c, d) for f in self.p))

    def interpolate(self, other: "JetCurve", t, check: bool = True) -> "JetCurve":
        t = as_fraction(t)
        return JetCurve(
            self.n,
            tuple(f.scale(1 - t) + g.scale(t) for f, g in zip(self.p, other.p)),
            check,
        )

    def to_json(self) -> dict:
        return {"n": self.n, "p": [f.to_json() for f in self.p]}

    @classmethod
    def from_json(cls, obj) -> "JetCurve":
        try:
            return cls(int(obj["n"]), tuple(BinaryForm.from_json(f) for f in obj["p"]))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed JetCurve JSON: {exc}") from exc


def extract_jet(X: Hypersurface) -> JetCurve:
    if not X.contains_standard_line():
        raise InvalidInput("the line x_1 = ... = x_n = 0 does not lie on X")
    n = X.n
    d = 2 * n - 2
    coeffs = [[Fraction(0)] * (d + 1) for _ in range(n)]
    for exps, c in X.terms:
        xs = exps[2:]
        if sum(xs) != 1:
            continue
        k = xs.index(1)
        # u^{e_u} v^{e_v} sits at index e_v
        coeffs[k][exps[1]] += c
    p = tuple(BinaryForm(d, tuple(row)) for row in coeffs)
    if any(f.is_zero for f in p) and all(f.is_zero for f in p):
        raise SingularAlongLine("X is singular along the whole line")
    if not common_root_free(p):
        raise SingularAlongLine("the p_k share a root: X is singular at a point of l")
    return JetCurve(n, p, check=False)


def build_AC(C: JetCurve) -> RatMatrix:
    n = C.n
    size = 2 * n
    rows = [[Fraction(0)] * size for _ in range(size)]
    for j, f in enumerate(C.p):
        for i, a in enumerate(f.coeffs):
            rows[i][2 * j] = a
            rows[i + 1][2 * j + 1] = a
    return RatMatrix.from_rows(rows)


def det_AC(C: JetCurve) -> Fraction:
    return det_exact(build_AC(C))


def euler_index(C: JetCurve) -> int:
    det = det_AC(C)
    if det == 0:
        raise Degenerate("det A_C = 0: the normal bundle is not balanced")
    return 1 if det > 0 else -1


def syzygy(C: JetCurve) -> Optional[tuple]:
    """Linear forms L with sum p_i L_i = 0, or None when det A_C != 0."""
    A = build_AC(C)
    ker = kernel_exact(A)
    if not ker:
        return None
    w = ker[0]
    L = tuple(BinaryForm.linear(w[2 * j], w[2 * j + 1]) for j in range(C.n))
    total = BinaryForm.zero(2 * C.n - 1)
    for f, l in zip(C.p, L):
        total = total + f * l
    assert total.is_zero
    return L


@dataclass(frozen=True)
class DiscriminantFlags:
    in_DP: bool
    in_DP1: bool
    in_Dinf1: bool
    det: Fraction
    dinf1_searched: bool = False

    @property
    def balanced(self) -> bool:
        return not self.in_DP

    def to_json(self) -> dict:
        return {
            "in_DP": self.in_DP,
            "in_DP1": self.in_DP1,
            "in_Dinf1": self.in_Dinf1,
            "in_Dinf1_best_effort": self.dinf1_searched,
            "balanced": self.balanced,
            "det": format_rational(self.det),
        }


def has_cusp(C: JetCurve) -> bool:
    """True when dC/du and dC/dv are parallel at some point of P^1 (exact).

    That is a common root of all 2x2 minors of the 2 x n matrix of partials.
    For n = 2 the single minor is the ramification form of a map P^1 -> P^1,
    which always has roots, so the question only makes sense for n >= 3.
    """
    if C.n < 3:
        raise InvalidInput("cusps are defined for n >= 3")
    du = [f.d_du() for f in C.p]
    dv = [f.d_dv() for f in C.p]
    g = None
    for i in range(C.n):
        for j in range(i + 1, C.n):
            m = du[i] * dv[j] - dv[i] * du[j]
            if m.is_zero:
                continue
            g = m if g is None else bf_gcd(g, m)
            if g.degree == 0:
                return False
    return True


def components_dependent(C: JetCurve) -> bool:
    return rank_exact(RatMatrix.from_rows(C.coeff_rows())) < C.n


def classify_discriminants(C: JetCurve, search_inf1: bool = False, cfg=None) -> DiscriminantFlags:
    """Exact Δ^P and Δ^{P,1} membership; Δ^{∞,1} only by an optional numeric search.

    For n = 3 an (n-4)-dimensional secant does not exist, so in_Dinf1 is False.
    """
    det = det_AC(C)
    in_dp1 = components_dependent(C)
    in_inf1 = False
    searched = False
    if search_inf1 and C.n >= 4 and not in_dp1:
        from .secants import SolverConfig, low_dimensional_secant_present

        searched = True
        in_inf1 = low_dimensional_secant_present(C, cfg or SolverConfig())
    return DiscriminantFlags(det == 0 or in_dp1, in_dp1, in_inf1, det, searched)
