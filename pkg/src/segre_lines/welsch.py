"""Welschinger weight from the degree-2 syzygies of the jet curve.

The solutions q = (q_1..q_n) of sum p_j q_j = 0 in degree-2 forms are the
sections of N(1); for a balanced curve they form an (n-1)-dimensional space
and are pointwise independent. Evaluated on the real circle they give a loop
of frames; its class in pi_1(SO_n) decides the weight. n = 2 uses the winding
number, n = 3 a step-by-step quaternion lift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotBalanced, NumericFailure, Unsupported
from .exactalg import BinaryForm, RatMatrix, kernel_exact, rref
from .jet import JetCurve, det_AC


@dataclass(frozen=True)
class SplittingSections:
    sections: tuple  # each an n-tuple of degree-2 BinaryForms

    def values(self, theta: np.ndarray) -> np.ndarray:
        """Array (len(theta), n-1, n) of the sections on the circle."""
        c = np.cos(theta)
        s = np.sin(theta)
        mons = np.stack([c * c, c * s, s * s], axis=-1)
        coef = np.array([[[float(x) for x in f.coeffs] for f in sec] for sec in self.sections])
        return np.einsum("tk,ijk->tij", mons, coef)

    def combine(self, G) -> "SplittingSections":
        """New basis sum_j G[i][j] * sections[j]."""
        out = []
        for row in G:
            vec = []
            for comp in range(len(self.sections[0])):
                acc = BinaryForm.zero(2)
                for g, sec in zip(row, self.sections):
                    if g:
                        acc = acc + sec[comp].scale(g)
                vec.append(acc)
            out.append(tuple(vec))
        return SplittingSections(tuple(out))

    def to_json(self) -> list:
        return [[f.to_json() for f in sec] for sec in self.sections]


def splitting_sections(C: JetCurve) -> SplittingSections:
    n = C.n
    # a degree-1 syzygy leaves the degree-2 count at n - 1 (splitting 1 + 3 = 2 + 2),
    # so the dimension alone does not see it
    if det_AC(C) == 0:
        raise NotBalanced("det A_C = 0")
    rows = 2 * n + 1
    cols = 3 * n
    A = [[0] * cols for _ in range(rows)]
    for j, f in enumerate(C.p):
        for l in range(3):
            for i, a in enumerate(f.coeffs):
                A[i + l][3 * j + l] = a
    ker = kernel_exact(RatMatrix.from_rows(A))
    if len(ker) != n - 1:
        raise NotBalanced(f"syzygy space has dimension {len(ker)}, expected {n - 1}")
    # reduced basis, so the output does not depend on elimination order
    red, _ = rref([list(v) for v in ker])
    red = [r for r in red if any(r)]
    secs = []
    for v in red:
        secs.append(tuple(BinaryForm(2, tuple(v[3 * j : 3 * j + 3])) for j in range(n)))
    return SplittingSections(tuple(secs))


@dataclass
class FrameLoop:
    thetas: np.ndarray
    frames: np.ndarray  # (T, n, n), rows e_1..e_n
    max_step: float
    diagnostics: dict = field(default_factory=dict)


def _frames(S: SplittingSections, thetas: np.ndarray, n: int) -> np.ndarray:
    V = S.values(thetas)
    T = len(thetas)
    F = np.empty((T, n, n))
    if n == 2:
        v = V[:, 0, :]
        nrm = np.linalg.norm(v, axis=1)
        if np.min(nrm) <= 1e-12 * np.max(nrm):
            raise NumericFailure("section vanishes on the real circle")
        e1 = v / nrm[:, None]
        F[:, 0] = e1
        F[:, 1] = np.stack([-e1[:, 1], e1[:, 0]], axis=1)
        return F
    v1, v2 = V[:, 0, :], V[:, 1, :]
    n1 = np.linalg.norm(v1, axis=1)
    cr = np.cross(v1, v2)
    if np.min(np.linalg.norm(cr, axis=1) / (n1 * np.linalg.norm(v2, axis=1))) <= 1e-10:
        raise NumericFailure("sections become dependent on the real circle")
    e1 = v1 / n1[:, None]
    w = v2 - np.sum(v2 * e1, axis=1)[:, None] * e1
    e2 = w / np.linalg.norm(w, axis=1)[:, None]
    F[:, 0] = e1
    F[:, 1] = e2
    F[:, 2] = np.cross(e1, e2)
    return F


def _step_angles(F: np.ndarray) -> np.ndarray:
    # relative rotation R_k^T R_{k+1}; angle from the trace
    rel = np.einsum("tji,tjk->tik", F[:-1], F[1:])
    tr = np.trace(rel, axis1=1, axis2=2)
    n = F.shape[1]
    if n == 2:
        return np.abs(np.arctan2(rel[:, 1, 0], rel[:, 0, 0]))
    return np.arccos(np.clip((tr - 1) / 2, -1.0, 1.0))


def frame_loop(S: SplittingSections, n: int, initial: int = 64, max_step: float = math.pi / 4,
               max_points: int = 1 << 16) -> FrameLoop:
    thetas = np.linspace(0.0, math.pi, initial + 1)
    while True:
        F = _frames(S, thetas, n)
        ang = _step_angles(F)
        bad = np.nonzero(ang >= max_step)[0]
        if bad.size == 0:
            return FrameLoop(thetas, F, float(np.max(ang)))
        if len(thetas) > max_points:
            raise NumericFailure("frame loop refinement did not converge")
        mids = 0.5 * (thetas[bad] + thetas[bad + 1])
        thetas = np.sort(np.concatenate([thetas, mids]))


def _quat(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) of a rotation matrix (columns convention)."""
    m = R
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    return q / np.linalg.norm(q)


def spin_lift(loop: FrameLoop) -> tuple[int, dict]:
    """Lift an SO(3) loop to S^3; +1 if the lift closes, -1 if it ends at the antipode."""
    qs = [_quat(loop.frames[0].T)]
    for F in loop.frames[1:]:
        q = _quat(F.T)
        if np.dot(q, qs[-1]) < 0:
            q = -q
        qs.append(q)
    start, end = qs[0], qs[-1]
    d = float(np.dot(start, end))
    if abs(abs(d) - 1) > 1e-6:
        raise NumericFailure("frame loop does not close")
    return (1 if d > 0 else -1), {"q_start": start.tolist(), "q_end": end.tolist()}


def winding(loop: FrameLoop) -> int:
    e1 = loop.frames[:, 0, :]
    ang = np.unwrap(np.arctan2(e1[:, 1], e1[:, 0]))
    w = (ang[-1] - ang[0]) / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 1e-6:
        raise NumericFailure("frame loop does not close")
    return int(k)


def welschinger_weight(C: JetCurve, sections: SplittingSections | None = None, max_step: float = math.pi / 4,
                       initial: int = 64, details: dict | None = None) -> int:
    if C.n >= 4:
        raise Unsupported("spin lift implemented for n = 2 and n = 3 only")
    S = sections or splitting_sections(C)
    loop = frame_loop(S, C.n, initial=initial, max_step=max_step)
    if C.n == 2:
        w = winding(loop)
        out = -1 if w % 2 else 1
        info = {"winding": w}
    else:
        out, info = spin_lift(loop)
    if details is not None:
        details.update(info)
        details["samples"] = len(loop.thetas)
        details["max_step_angle"] = round(loop.max_step, 12)
    return out
