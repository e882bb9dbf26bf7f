"""Residual pencils, Segre points and the Segre index.

A real secant M with divisor D cuts a pencil of quadrics-worth of residual
degree-2 divisors q0 + t q1. The Segre points are the roots of the Jacobian
q0_u q1_v - q0_v q1_u; the local weight is +1 when they are real (hyperbolic)
and -1 when they are conjugate (elliptic). Since disc(Jacobian) = 16 Res(q0, q1)
the weight is also the sign of the resultant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import (
    DegenerateOnWall,
    Degenerate,
    IncompleteEnumeration,
    InvalidInput,
    InvalidSecant,
    NumericFailure,
)
from .exactalg import BinaryForm, coeff_divmod, resultant
from .jet import JetCurve, det_AC
from .secants import (
    SecantReport,
    Secant,
    SolverConfig,
    _dot,
    nodes_exact_n3,
    secants_numeric,
    verify_secant,
)


@dataclass(frozen=True)
class ResidualPencil:
    """Pair (q0, q1) of binary quadratics.

    Exact pencils hold BinaryForms; numeric ones hold float triples and the
    sign of Res(q0, q1) decided at construction time (``sign``).
    """

    q0: object
    q1: object
    exact: bool = True
    sign: Optional[int] = None

    def coeffs(self):
        if self.exact:
            return tuple(self.q0.coeffs), tuple(self.q1.coeffs)
        return tuple(self.q0), tuple(self.q1)

    def to_json(self) -> dict:
        if self.exact:
            return {"q0": self.q0.to_json(), "q1": self.q1.to_json(), "exact": True}
        return {"q0": [float(x) for x in self.q0], "q1": [float(x) for x in self.q1], "exact": False}


@dataclass(frozen=True)
class SegrePoints:
    jacobian: object  # BinaryForm (exact) or float triple
    disc_sign: int

    def to_json(self) -> dict:
        jac = self.jacobian.to_json() if isinstance(self.jacobian, BinaryForm) else [float(x) for x in self.jacobian]
        return {"jacobian": jac, "disc_sign": self.disc_sign}


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def residual_pencil(C: JetCurve, M: Secant) -> ResidualPencil:
    n = C.n
    if M.divisor.form is not None and M.exact_lambda is not None:
        k = verify_secant(C, M)
        if k > 2 * n - 4:
            raise DegenerateOnWall(f"deg(M.C) = {k} > {2 * n - 4}")
        fd = M.divisor.form
        qs = []
        for lam in M.exact_lambda:
            h = _dot(lam, C.p)
            q, rem = coeff_divmod(list(h.coeffs), list(fd.coeffs))
            if any(r != 0 for r in rem):
                raise InvalidSecant("f_D does not divide lambda . p")
            qs.append(BinaryForm(2, tuple(q)))
        if qs[0].normalized() == qs[1].normalized():
            raise InvalidSecant("residual quadratics are proportional")
        return ResidualPencil(qs[0], qs[1], True)
    if M.pencil is not None:
        return ResidualPencil(M.pencil[0], M.pencil[1], False, M.local_sign)
    if not M.is_real:
        raise InvalidSecant("the residual pencil of a non-real secant is not real")
    # a real node from the elimination route: only the sign is stored
    return ResidualPencil((), (), False, M.local_sign)


def segre_points(P: ResidualPencil) -> SegrePoints:
    if P.exact:
        q0, q1 = P.q0, P.q1
        jac = q0.d_du() * q1.d_dv() - q0.d_dv() * q1.d_du()
        if jac.is_zero:
            raise InvalidInput("q0 and q1 are proportional")
        a, b, c = jac.coeffs
        return SegrePoints(jac, _sgn(b * b - 4 * a * c))
    if not P.q0:
        if P.sign is None:
            raise NumericFailure("no Segre data stored for this secant")
        return SegrePoints((), P.sign)
    (a1, b1, c1), (a2, b2, c2) = P.q0, P.q1
    jac = (2 * (a1 * b2 - a2 * b1), 4 * (a1 * c2 - a2 * c1), 2 * (b1 * c2 - b2 * c1))
    if P.sign is None:
        raise NumericFailure("Segre points too close to coincidence to decide numerically")
    return SegrePoints(jac, P.sign)


def segre_weight(P: ResidualPencil) -> int:
    sp = segre_points(P)
    if sp.disc_sign == 0:
        raise DegenerateOnWall("Segre points coincide: the pencil has a base point")
    return sp.disc_sign


def default_report(C: JetCurve, cfg: Optional[SolverConfig] = None) -> SecantReport:
    if C.n == 3:
        return nodes_exact_n3(C, seed=(cfg.seed if cfg else 0))
    return secants_numeric(C, cfg)


def segre_index(
    C: JetCurve,
    report: Optional[SecantReport] = None,
    cfg: Optional[SolverConfig] = None,
    in_dinf1: bool = False,
) -> int:
    """S^P(C): product of local weights over real secants (with multiplicity)."""
    if det_AC(C) == 0:
        raise Degenerate("det A_C = 0")
    if in_dinf1:
        raise DegenerateOnWall("curve flagged in the stratum with a low-dimensional secant")
    if C.n == 2:
        # the secant is empty and f_D = 1: the pencil is (p1, p2) itself
        return _sgn(resultant(C.p[0], C.p[1]))
    if report is None:
        report = default_report(C, cfg)
    if not report.certificate_ok:
        raise IncompleteEnumeration("secant report is not certified", report)
    out = 1
    for M in report.secants:
        if not M.is_real:
            continue
        w = segre_weight(residual_pencil(C, M))
        out *= w**M.multiplicity
    return out


def segre_details(C: JetCurve, report: SecantReport) -> list:
    rows = []
    for M in report.secants:
        row = {"f_D": M.divisor.to_json(), "multiplicity": M.multiplicity, "is_real": M.is_real}
        if M.node_kind:
            row["node_kind"] = M.node_kind
        if M.is_real:
            P = residual_pencil(C, M)
            sp = segre_points(P)
            if P.q0 != ():
                row["pencil"] = P.to_json()
            if sp.jacobian != ():
                row.update(sp.to_json())
            else:
                row["disc_sign"] = sp.disc_sign
            row["weight"] = sp.disc_sign
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# quartics: chord diagram
# ---------------------------------------------------------------------------


def _angle(pt) -> float:
    a, b = pt
    a = complex(a)
    b = complex(b)
    # real projective point -> angle on the circle, doubled to kill the sign
    if abs(b) >= abs(a):
        ang = 2 * math.atan2((a / b).real, 1.0)
    else:
        ang = 2 * math.atan2(1.0, (b / a).real)
    return ang % (2 * math.pi)


def _upper(pt) -> int:
    a, b = (complex(x) for x in pt)
    if abs(b) >= abs(a):
        im = (a / b).imag
        scale = 1 + abs(a / b)
    else:
        # a/b = 1/(b/a): Im(1/w) = -Im(w)/|w|^2
        w = b / a
        im = -w.imag
        scale = 1 + abs(w)
    if abs(im) <= 1e-9 * scale:
        raise NumericFailure("node parameter too close to the real line")
    return 1 if im > 0 else -1


def _classify(M: Secant) -> str:
    if M.node_kind:
        return M.node_kind
    if not M.is_real:
        return "imaginary"
    ims = [_upper_or_zero(p) for p in M.params]
    return "cross" if all(i == 0 for i in ims) else "solitary"


def _upper_or_zero(pt) -> int:
    try:
        return _upper(pt)
    except NumericFailure:
        return 0


def _interlaced(c1, c2) -> bool:
    lo, hi = sorted(c1)
    inside = [lo < x < hi for x in c2]
    for x in c2:
        if min(abs(x - lo), abs(x - hi)) < 1e-9:
            raise NumericFailure("chord endpoints coincide")
    return inside[0] != inside[1]


def chord_diagram(C: JetCurve, report: SecantReport) -> dict:
    if C.n != 3:
        raise InvalidInput("chord diagrams are for n = 3")
    if len(report.secants) != 3 or any(M.multiplicity != 1 for M in report.secants):
        raise NumericFailure("need three simple nodes")
    kinds = [_classify(M) for M in report.secants]
    chords = [[_angle(p) for p in M.params] for M, k in zip(report.secants, kinds) if k == "cross"]
    inter = 0
    for i in range(len(chords)):
        for j in range(i + 1, len(chords)):
            inter += _interlaced(chords[i], chords[j])
    essential_nodes = 0
    for M, k in zip(report.secants, kinds):
        if k == "imaginary":
            s = [_upper(p) for p in M.params]
            essential_nodes += s[0] == s[1]
    if essential_nodes % 2:
        raise NumericFailure("essential nodes do not pair up under conjugation")
    essential = essential_nodes // 2
    return {
        "kinds": kinds,
        "interlaced": inter,
        "essential_pairs": essential,
        "index": (-1) ** (inter + essential),
    }


def chord_diagram_index_n3(C: JetCurve, report: Optional[SecantReport] = None) -> int:
    if report is None:
        report = nodes_exact_n3(C)
    return chord_diagram(C, report)["index"]
