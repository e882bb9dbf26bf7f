"""Hot loops of the multistart Newton solvers.

Two backends with identical semantics:

* ``numba``: per-start damped Newton compiled with ``@njit(nogil=True)``;
* ``numpy``: the same iteration vectorized across starts.

The backend is chosen at import time from ``SEGRE_LINES_NUMBA`` ("0" forces
numpy) and can be switched later with :func:`set_backend`.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


BACKEND = "numba" if HAVE_NUMBA and os.environ.get("SEGRE_LINES_NUMBA", "1") != "0" else "numpy"

MAX_HALVINGS = 12
DIVERGED = 1e8


def set_backend(name: str) -> None:
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    BACKEND = name


# ---------------------------------------------------------------------------
# shared pieces (compiled when numba is present)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _solve(A, b):
    """Gaussian elimination with partial pivoting; A and b are overwritten."""
    n = A.shape[0]
    for k in range(n):
        p = k
        best = abs(A[k, k])
        for i in range(k + 1, n):
            if abs(A[i, k]) > best:
                best = abs(A[i, k])
                p = i
        if best == 0.0:
            return False
        if p != k:
            for j in range(n):
                tmp = A[k, j]
                A[k, j] = A[p, j]
                A[p, j] = tmp
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            if f != 0:
                for j in range(k, n):
                    A[i, j] -= f * A[k, j]
                b[i] -= f * b[k]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= A[i, j] * b[j]
        b[i] = s / A[i, i]
    return True


@njit(cache=True, nogil=True)
def _norm(x):
    s = 0.0
    for i in range(x.shape[0]):
        s += abs(x[i]) ** 2
    return np.sqrt(s)


# ---------------------------------------------------------------------------
# secant system, bilinear form. Unknowns z = (f, h_a, h_b, lam_a, lam_b) with
# f of degree m (m+1 coefficients) and h of degree d - m. Equations:
#   lam_a . p - f h_a = 0,  lam_b . p - f h_b = 0   (coefficientwise)
#   c1.lam_a = 1, c2.lam_a = 0, c1.lam_b = 0, c2.lam_b = 1, a.f = 1
# Coefficient lists are u-leading.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _secant_FJ(P, m, c1, c2, af, z, F, J, want_J):
    n, L = P.shape
    nf = m + 1
    nh = L - m
    oh = nf
    ol = nf + 2 * nh
    if want_J:
        J[:, :] = 0j
    for side in range(2):
        hoff = oh + side * nh
        loff = ol + side * n
        roff = side * L
        for k in range(L):
            acc = 0j
            for j in range(n):
                acc += z[loff + j] * P[j, k]
                if want_J:
                    J[roff + k, loff + j] = P[j, k]
            F[roff + k] = acc
        for i in range(nf):
            for l in range(nh):
                F[roff + i + l] -= z[i] * z[hoff + l]
                if want_J:
                    J[roff + i + l, i] -= z[hoff + l]
                    J[roff + i + l, hoff + l] -= z[i]
    r = 2 * L
    s1 = 0j
    s2 = 0j
    s3 = 0j
    s4 = 0j
    for j in range(n):
        s1 += c1[j] * z[ol + j]
        s2 += c2[j] * z[ol + j]
        s3 += c1[j] * z[ol + n + j]
        s4 += c2[j] * z[ol + n + j]
    F[r] = s1 - 1.0
    F[r + 1] = s2
    F[r + 2] = s3
    F[r + 3] = s4 - 1.0
    s5 = 0j
    for i in range(nf):
        s5 += af[i] * z[i]
    F[r + 4] = s5 - 1.0
    if want_J:
        for j in range(n):
            J[r, ol + j] = c1[j]
            J[r + 1, ol + j] = c2[j]
            J[r + 2, ol + n + j] = c1[j]
            J[r + 3, ol + n + j] = c2[j]
        for i in range(nf):
            J[r + 4, i] = af[i]


@njit(cache=True, nogil=True)
def _newton_secants_nb(P, m, c1, c2, af, starts, max_iter, tol):
    S, N = starts.shape
    out = starts.copy()
    res = np.empty(S)
    iters = np.zeros(S, dtype=np.int64)
    F = np.empty(N, dtype=np.complex128)
    Fn = np.empty(N, dtype=np.complex128)
    J = np.empty((N, N), dtype=np.complex128)
    for s in range(S):
        z = starts[s].copy()
        _secant_FJ(P, m, c1, c2, af, z, F, J, False)
        nf = _norm(F)
        for it in range(max_iter):
            if nf < tol * 1e-4:
                break
            _secant_FJ(P, m, c1, c2, af, z, F, J, True)
            dz = -F.copy()
            if not _solve(J, dz):
                break
            alpha = 1.0
            ok = False
            zn = z.copy()
            for _h in range(MAX_HALVINGS):
                for q in range(N):
                    zn[q] = z[q] + alpha * dz[q]
                _secant_FJ(P, m, c1, c2, af, zn, Fn, J, False)
                nfn = _norm(Fn)
                if nfn < nf:
                    ok = True
                    break
                alpha *= 0.5
            if not ok:
                break
            z[:] = zn
            F[:] = Fn
            nf = nfn
            iters[s] = it + 1
            big = 0.0
            for q in range(N):
                if abs(z[q]) > big:
                    big = abs(z[q])
            if big > DIVERGED:
                break
        out[s] = z
        res[s] = nf
    return out, res, iters


def _conv_rows(A, B):
    """Row-wise convolution of (S, a) and (S, b)."""
    S, la = A.shape
    lb = B.shape[1]
    out = np.zeros((S, la + lb - 1), dtype=complex)
    for i in range(la):
        out[:, i : i + lb] += A[:, i : i + 1] * B
    return out


def _split(Z, m, n, L):
    nf = m + 1
    nh = L - m
    f = Z[:, :nf]
    ha = Z[:, nf : nf + nh]
    hb = Z[:, nf + nh : nf + 2 * nh]
    la = Z[:, nf + 2 * nh : nf + 2 * nh + n]
    lb = Z[:, nf + 2 * nh + n :]
    return f, ha, hb, la, lb


def _secant_F_np(P, m, c1, c2, af, Z):
    n, L = P.shape
    f, ha, hb, la, lb = _split(Z, m, n, L)
    F = np.empty((Z.shape[0], 2 * L + 5), dtype=complex)
    F[:, :L] = la @ P - _conv_rows(f, ha)
    F[:, L : 2 * L] = lb @ P - _conv_rows(f, hb)
    F[:, 2 * L] = la @ c1 - 1.0
    F[:, 2 * L + 1] = la @ c2
    F[:, 2 * L + 2] = lb @ c1
    F[:, 2 * L + 3] = lb @ c2 - 1.0
    F[:, 2 * L + 4] = f @ af - 1.0
    return F


def _secant_J_np(P, m, c1, c2, af, Z):
    S, N = Z.shape
    n, L = P.shape
    nf, nh = m + 1, L - m
    f, ha, hb, la, lb = _split(Z, m, n, L)
    J = np.zeros((S, N, N), dtype=complex)
    ol = nf + 2 * nh
    for side, h in enumerate((ha, hb)):
        roff = side * L
        hoff = nf + side * nh
        J[:, roff : roff + L, ol + side * n : ol + (side + 1) * n] = P.T
        for i in range(nf):
            J[:, roff + i : roff + i + nh, i] -= h
        for l in range(nh):
            J[:, roff + l : roff + l + nf, hoff + l] -= f
    r = 2 * L
    J[:, r, ol : ol + n] = c1
    J[:, r + 1, ol : ol + n] = c2
    J[:, r + 2, ol + n :] = c1
    J[:, r + 3, ol + n :] = c2
    J[:, r + 4, :nf] = af
    return J


def _damped_newton_np(Fun, Jac, starts, max_iter, tol):
    Z = starts.copy()
    S = Z.shape[0]
    F = Fun(Z)
    nf = np.linalg.norm(F, axis=1)
    active = np.ones(S, dtype=bool)
    iters = np.zeros(S, dtype=np.int64)
    for it in range(max_iter):
        active &= nf >= tol * 1e-4
        if not active.any():
            break
        ia = np.nonzero(active)[0]
        J = Jac(Z[ia])
        rhs = -F[ia]
        dz = np.zeros_like(rhs)
        solvable = np.ones(len(ia), dtype=bool)
        try:
            dz = np.linalg.solve(J, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            for q in range(len(ia)):
                try:
                    dz[q] = np.linalg.solve(J[q], rhs[q])
                except np.linalg.LinAlgError:
                    solvable[q] = False
        solvable &= np.all(np.isfinite(dz), axis=1)
        alpha = np.ones(len(ia))
        done = ~solvable
        accepted = np.zeros(len(ia), dtype=bool)
        Znew = Z[ia].copy()
        Fnew = F[ia].copy()
        nfnew = nf[ia].copy()
        for _h in range(MAX_HALVINGS):
            todo = ~done
            if not todo.any():
                break
            cand = Z[ia][todo] + alpha[todo, None] * dz[todo]
            Fc = Fun(cand)
            nc = np.linalg.norm(Fc, axis=1)
            better = nc < nf[ia][todo]
            sel = np.nonzero(todo)[0]
            good = sel[better]
            Znew[good] = cand[better]
            Fnew[good] = Fc[better]
            nfnew[good] = nc[better]
            accepted[good] = True
            done[good] = True
            alpha[sel[~better]] *= 0.5
        Z[ia] = Znew
        F[ia] = Fnew
        nf[ia] = nfnew
        iters[ia[accepted]] = it + 1
        stop = ~accepted | (np.max(np.abs(Znew), axis=1) > DIVERGED)
        active[ia[stop]] = False
    return Z, nf, iters


def newton_secants(P, m, c1, c2, af, starts, max_iter=60, tol=1e-10):
    """Damped Newton from every row of ``starts``; returns (Z, residual norms, iterations)."""
    P = np.ascontiguousarray(P, dtype=np.complex128)
    c1 = np.ascontiguousarray(c1, dtype=np.complex128)
    c2 = np.ascontiguousarray(c2, dtype=np.complex128)
    af = np.ascontiguousarray(af, dtype=np.complex128)
    starts = np.ascontiguousarray(starts, dtype=np.complex128)
    if BACKEND == "numba":
        return _newton_secants_nb(P, m, c1, c2, af, starts, max_iter, tol)
    return _damped_newton_np(
        lambda Z: _secant_F_np(P, m, c1, c2, af, Z),
        lambda Z: _secant_J_np(P, m, c1, c2, af, Z),
        starts,
        max_iter,
        tol,
    )


# ---------------------------------------------------------------------------
# real lines in a Grassmannian chart: F(row1 + t_k row2) = 0 for 2n nodes t_k
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _poly_val_grad(exps, coeffs, w, grad):
    T, N = exps.shape
    dmax = 0
    for a in range(T):
        for b in range(N):
            if exps[a, b] > dmax:
                dmax = exps[a, b]
    pw = np.empty((N, dmax + 1))
    for b in range(N):
        pw[b, 0] = 1.0
        for e in range(1, dmax + 1):
            pw[b, e] = pw[b, e - 1] * w[b]
    grad[:] = 0.0
    val = 0.0
    pre = np.empty(N + 1)
    for a in range(T):
        pre[0] = 1.0
        for b in range(N):
            pre[b + 1] = pre[b] * pw[b, exps[a, b]]
        val += coeffs[a] * pre[N]
        suf = 1.0
        for b in range(N - 1, -1, -1):
            e = exps[a, b]
            if e > 0:
                grad[b] += coeffs[a] * e * pw[b, e - 1] * pre[b] * suf
            suf *= pw[b, e]
    return val


@njit(cache=True, nogil=True)
def _line_point(piv0, piv1, free, z, t, N, w):
    n = free.shape[0]
    for b in range(N):
        w[b] = 0.0
    w[piv0] = 1.0
    w[piv1] = t
    for c in range(n):
        w[free[c]] = z[c] + t * z[n + c]


@njit(cache=True, nogil=True)
def _lines_F(exps, coeffs, piv0, piv1, free, tnodes, z, F):
    N = exps.shape[1]
    w = np.empty(N)
    g = np.empty(N)
    for k in range(tnodes.shape[0]):
        _line_point(piv0, piv1, free, z, tnodes[k], N, w)
        F[k] = _poly_val_grad(exps, coeffs, w, g)


@njit(cache=True, nogil=True)
def _lines_J(exps, coeffs, piv0, piv1, free, tnodes, z, J):
    N = exps.shape[1]
    n = free.shape[0]
    w = np.empty(N)
    g = np.empty(N)
    for k in range(tnodes.shape[0]):
        t = tnodes[k]
        _line_point(piv0, piv1, free, z, t, N, w)
        _poly_val_grad(exps, coeffs, w, g)
        for c in range(n):
            J[k, c] = g[free[c]]
            J[k, n + c] = t * g[free[c]]


@njit(cache=True, nogil=True)
def _newton_lines_nb(exps, coeffs, piv0, piv1, free, tnodes, starts, max_iter, tol):
    S, N = starts.shape
    out = starts.copy()
    res = np.empty(S)
    iters = np.zeros(S, dtype=np.int64)
    F = np.empty(N)
    Fn = np.empty(N)
    J = np.empty((N, N))
    for s in range(S):
        z = starts[s].copy()
        _lines_F(exps, coeffs, piv0, piv1, free, tnodes, z, F)
        nf = _norm(F)
        for it in range(max_iter):
            if nf < tol * 1e-4:
                break
            _lines_J(exps, coeffs, piv0, piv1, free, tnodes, z, J)
            dz = -F.copy()
            if not _solve(J, dz):
                break
            alpha = 1.0
            ok = False
            zn = z.copy()
            for _h in range(MAX_HALVINGS):
                for q in range(N):
                    zn[q] = z[q] + alpha * dz[q]
                _lines_F(exps, coeffs, piv0, piv1, free, tnodes, zn, Fn)
                nfn = _norm(Fn)
                if nfn < nf:
                    ok = True
                    break
                alpha *= 0.5
            if not ok:
                break
            z[:] = zn
            F[:] = Fn
            nf = nfn
            iters[s] = it + 1
            big = 0.0
            for q in range(N):
                if abs(z[q]) > big:
                    big = abs(z[q])
            if big > DIVERGED:
                break
        out[s] = z
        res[s] = nf
    return out, res, iters


def _poly_val_grad_np(exps, coeffs, W):
    """Values and gradients at the points W (..., N)."""
    dmax = int(exps.max()) if exps.size else 0
    pw = W[..., None] ** np.arange(dmax + 1)  # (..., N, dmax+1)
    N = exps.shape[1]
    cols = np.arange(N)
    mono_f = pw[..., cols, exps]  # (..., T, N)
    val = (np.prod(mono_f, axis=-1) * coeffs).sum(axis=-1)
    grad = np.empty(W.shape)
    for b in range(N):
        e = exps[:, b]
        dfac = np.where(e > 0, pw[..., b, np.maximum(e - 1, 0)], 0.0) * e
        others = np.prod(np.delete(mono_f, b, axis=-1), axis=-1)
        grad[..., b] = (dfac * others * coeffs).sum(axis=-1)
    return val, grad


def _lines_points_np(piv0, piv1, free, tnodes, Z, N):
    S = Z.shape[0]
    n = free.shape[0]
    W = np.zeros((S, tnodes.shape[0], N))
    W[:, :, piv0] = 1.0
    W[:, :, piv1] = tnodes[None, :]
    W[:, :, free] = Z[:, None, :n] + tnodes[None, :, None] * Z[:, None, n:]
    return W


def newton_lines(exps, coeffs, piv0, piv1, free, tnodes, starts, max_iter=60, tol=1e-10):
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    free = np.ascontiguousarray(free, dtype=np.int64)
    tnodes = np.ascontiguousarray(tnodes, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    if BACKEND == "numba":
        return _newton_lines_nb(exps, coeffs, int(piv0), int(piv1), free, tnodes, starts, max_iter, tol)
    N = exps.shape[1]

    def Fun(Z):
        W = _lines_points_np(piv0, piv1, free, tnodes, Z, N)
        return _poly_val_grad_np(exps, coeffs, W)[0]

    def Jac(Z):
        W = _lines_points_np(piv0, piv1, free, tnodes, Z, N)
        _, G = _poly_val_grad_np(exps, coeffs, W)
        Gf = G[:, :, free]
        return np.concatenate([Gf, tnodes[None, :, None] * Gf], axis=2)

    return _damped_newton_np(Fun, Jac, starts, max_iter, tol)


def poly_val_grad(exps, coeffs, W):
    """Batch evaluation helper used by tests and the benchmark."""
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    if BACKEND == "numba":
        vals = np.empty(W.shape[0])
        grads = np.empty(W.shape)
        for i in range(W.shape[0]):
            vals[i] = _poly_val_grad(exps, coeffs, W[i], grads[i])
        return vals, grads
    return _poly_val_grad_np(exps, coeffs, W)
