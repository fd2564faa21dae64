# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver kernels; signature-compatible with ``_kernels_np``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

from .errors import SingularSystemError

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _pow_gamma(double x, double g) nogil:
    if g == 2.0:
        return x * x
    if g == 1.0:
        return x
    if g == 3.0:
        return x * x * x
    return pow(x, g)


cdef inline double _sound(double r, double kg, double g) nogil:
    # sqrt(p'(r)) with p' = k*g*r^(g-1); kg = k*g precomputed
    if g == 2.0:
        return sqrt(kg * r)
    if g == 1.0:
        return sqrt(kg)
    return sqrt(kg) * pow(r, 0.5 * (g - 1.0))


cdef inline double _minmod(double a, double b) nogil:
    if a > 0.0 and b > 0.0:
        return a if a < b else b
    if a < 0.0 and b < 0.0:
        return a if a > b else b
    return 0.0


def max_signal_speed(const double[:, ::1] r, const double[:, ::1] m, const double[::1] k, const double[::1] gamma):
    cdef Py_ssize_t n = r.shape[0], N = r.shape[1], i, c
    cdef double best = 0.0, s, kg
    for i in range(n):
        kg = k[i] * gamma[i]
        for c in range(N):
            s = fabs(m[i, c] / r[i, c]) + _sound(r[i, c], kg, gamma[i])
            if s > best:
                best = s
    return best


def hyperbolic_update(
    const double[:, ::1] r_pad,
    const double[:, ::1] m_pad,
    const double[::1] k,
    const double[::1] gamma,
    double coef,
    bint muscl,
):
    cdef Py_ssize_t n = r_pad.shape[0], N = r_pad.shape[1] - 4
    cdef Py_ssize_t i, f, c
    cdef double srl, sml, srr, smr
    cdef double rl, rr, ml, mr, vl, vr, pl, pr, cl, cr, s, a

    rl_a = np.empty((n, N + 1))
    rr_a = np.empty((n, N + 1))
    ml_a = np.empty((n, N + 1))
    mr_a = np.empty((n, N + 1))
    fr_a = np.empty((n, N + 1))
    fm_a = np.empty((n, N + 1))
    rn_a = np.empty((n, N))
    mn_a = np.empty((n, N))
    cdef double[:, ::1] rlv = rl_a, rrv = rr_a, mlv = ml_a, mrv = mr_a
    cdef double[:, ::1] frv = fr_a, fmv = fm_a, rnv = rn_a, mnv = mn_a
    amax_a = np.zeros(N + 1)
    cdef double[::1] amax = amax_a

    for i in range(n):
        for f in range(N + 1):
            # face f sits between padded cells f+1 and f+2
            if muscl:
                srl = _minmod(r_pad[i, f + 1] - r_pad[i, f], r_pad[i, f + 2] - r_pad[i, f + 1])
                sml = _minmod(m_pad[i, f + 1] - m_pad[i, f], m_pad[i, f + 2] - m_pad[i, f + 1])
                srr = _minmod(r_pad[i, f + 2] - r_pad[i, f + 1], r_pad[i, f + 3] - r_pad[i, f + 2])
                smr = _minmod(m_pad[i, f + 2] - m_pad[i, f + 1], m_pad[i, f + 3] - m_pad[i, f + 2])
                rlv[i, f] = r_pad[i, f + 1] + 0.5 * srl
                mlv[i, f] = m_pad[i, f + 1] + 0.5 * sml
                rrv[i, f] = r_pad[i, f + 2] - 0.5 * srr
                mrv[i, f] = m_pad[i, f + 2] - 0.5 * smr
            else:
                rlv[i, f] = r_pad[i, f + 1]
                mlv[i, f] = m_pad[i, f + 1]
                rrv[i, f] = r_pad[i, f + 2]
                mrv[i, f] = m_pad[i, f + 2]

    cdef double kg
    for i in range(n):
        kg = k[i] * gamma[i]
        for f in range(N + 1):
            rl = rlv[i, f]
            rr = rrv[i, f]
            vl = mlv[i, f] / rl
            vr = mrv[i, f] / rr
            cl = _sound(rl, kg, gamma[i])
            cr = _sound(rr, kg, gamma[i])
            s = fabs(vl) + cl
            if fabs(vr) + cr > s:
                s = fabs(vr) + cr
            if s > amax[f]:
                amax[f] = s

    for i in range(n):
        for f in range(N + 1):
            rl = rlv[i, f]
            rr = rrv[i, f]
            ml = mlv[i, f]
            mr = mrv[i, f]
            vl = ml / rl
            vr = mr / rr
            pl = k[i] * _pow_gamma(rl, gamma[i])
            pr = k[i] * _pow_gamma(rr, gamma[i])
            a = amax[f]
            frv[i, f] = 0.5 * (ml + mr) - 0.5 * a * (rr - rl)
            fmv[i, f] = 0.5 * (ml * vl + pl + mr * vr + pr) - 0.5 * a * (mr - ml)

    for i in range(n):
        for c in range(N):
            rnv[i, c] = r_pad[i, c + 2] - coef * (frv[i, c + 1] - frv[i, c])
            mnv[i, c] = m_pad[i, c + 2] - coef * (fmv[i, c + 1] - fmv[i, c])
    return rn_a, mn_a


cdef inline double _lam(
    const double[:, ::1] lam0, const double[:, ::1] lami, const double[:, ::1] lamj,
    Py_ssize_t i, Py_ssize_t j, double ri, double rj,
) nogil:
    return lam0[i, j] + lami[i, j] * ri + lamj[i, j] * rj


cdef int _gauss_solve(double[:, ::1] a, double[::1] b, Py_ssize_t n) nogil:
    """In-place Gaussian elimination with partial pivoting; returns 0 on success."""
    cdef Py_ssize_t col, row, piv, j
    cdef double best, tmp, factor
    for col in range(n):
        piv = col
        best = fabs(a[col, col])
        for row in range(col + 1, n):
            if fabs(a[row, col]) > best:
                best = fabs(a[row, col])
                piv = row
        if best == 0.0:
            return 1
        if piv != col:
            for j in range(n):
                tmp = a[col, j]
                a[col, j] = a[piv, j]
                a[piv, j] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            if factor != 0.0:
                for j in range(col, n):
                    a[row, j] -= factor * a[col, j]
                b[row] -= factor * b[col]
    for col in range(n - 1, -1, -1):
        tmp = b[col]
        for j in range(col + 1, n):
            tmp -= a[col, j] * b[j]
        b[col] = tmp / a[col, col]
    return 0


def source_update(
    const double[:, ::1] r,
    const double[:, ::1] m,
    const double[::1] M,
    const double[:, ::1] lam0,
    const double[:, ::1] lami,
    const double[:, ::1] lamj,
    double coef,
):
    cdef Py_ssize_t n = r.shape[0], N = r.shape[1], i, j, c
    cdef double a11, a12, a21, a22, det, lam_ij, diag
    out_a = np.empty((n, N))
    cdef double[:, ::1] out = out_a
    cdef int bad = 0

    if n == 1:
        det = 1.0 + coef * M[0]
        for c in range(N):
            out[0, c] = m[0, c] / det
        return out_a

    if n == 2:
        for c in range(N):
            lam_ij = _lam(lam0, lami, lamj, 0, 1, r[0, c], r[1, c])
            a11 = 1.0 + coef * (M[0] + lam_ij * r[1, c])
            a12 = coef * (-r[0, c] * lam_ij)
            lam_ij = _lam(lam0, lami, lamj, 1, 0, r[1, c], r[0, c])
            a21 = coef * (-r[1, c] * lam_ij)
            a22 = 1.0 + coef * (M[1] + lam_ij * r[0, c])
            det = a11 * a22 - a12 * a21
            if det == 0.0:
                bad = 1
                break
            out[0, c] = (a22 * m[0, c] - a12 * m[1, c]) / det
            out[1, c] = (a11 * m[1, c] - a21 * m[0, c]) / det
        if bad:
            raise SingularSystemError("singular 2x2 cellwise system")
        return out_a

    amat_a = np.empty((n, n))
    rhs_a = np.empty(n)
    cdef double[:, ::1] amat = amat_a
    cdef double[::1] rhs = rhs_a
    for c in range(N):
        for i in range(n):
            diag = M[i]
            for j in range(n):
                if i == j:
                    continue
                lam_ij = _lam(lam0, lami, lamj, i, j, r[i, c], r[j, c])
                diag += lam_ij * r[j, c]
                amat[i, j] = coef * (-r[i, c] * lam_ij)
            amat[i, i] = 1.0 + coef * diag
            rhs[i] = m[i, c]
        if _gauss_solve(amat, rhs, n):
            raise SingularSystemError("singular cellwise system")
        for i in range(n):
            out[i, c] = rhs[i]
    return out_a


def parabolic_update(
    const double[:, ::1] r_pad,
    const double[::1] M,
    const double[::1] k,
    const double[::1] gamma,
    const double[:, ::1] lam0,
    const double[:, ::1] lami,
    const double[:, ::1] lamj,
    double coef,
):
    cdef Py_ssize_t n = r_pad.shape[0], N = r_pad.shape[1] - 2, i, j, f, c
    cdef double a11, a12, a21, a22, det, lam_ij, diag, rfi, rfj
    flux_a = np.empty((n, N + 1))
    out_a = np.empty((n, N))
    cdef double[:, ::1] flux = flux_a
    cdef double[:, ::1] out = out_a
    cdef double[:, ::1] dp

    dp_a = np.empty((n, N + 1))
    dp = dp_a
    for i in range(n):
        for f in range(N + 1):
            dp[i, f] = k[i] * (_pow_gamma(r_pad[i, f + 1], gamma[i]) - _pow_gamma(r_pad[i, f], gamma[i]))

    if n == 1:
        for f in range(N + 1):
            flux[0, f] = dp[0, f] / M[0]
    elif n == 2:
        for f in range(N + 1):
            rfi = 0.5 * (r_pad[0, f] + r_pad[0, f + 1])
            rfj = 0.5 * (r_pad[1, f] + r_pad[1, f + 1])
            lam_ij = _lam(lam0, lami, lamj, 0, 1, rfi, rfj)
            a11 = M[0] + lam_ij * rfj
            a12 = -rfi * lam_ij
            lam_ij = _lam(lam0, lami, lamj, 1, 0, rfj, rfi)
            a21 = -rfj * lam_ij
            a22 = M[1] + lam_ij * rfi
            det = a11 * a22 - a12 * a21
            if det == 0.0:
                raise SingularSystemError("singular face mobility matrix")
            flux[0, f] = (a22 * dp[0, f] - a12 * dp[1, f]) / det
            flux[1, f] = (a11 * dp[1, f] - a21 * dp[0, f]) / det
    else:
        amat_a = np.empty((n, n))
        rhs_a = np.empty(n)
        _solve_faces(r_pad, M, lam0, lami, lamj, dp, flux, amat_a, rhs_a, n, N)

    for i in range(n):
        for c in range(N):
            out[i, c] = r_pad[i, c + 1] + coef * (flux[i, c + 1] - flux[i, c])
    return out_a


cdef void _solve_faces(
    const double[:, ::1] r_pad,
    const double[::1] M,
    const double[:, ::1] lam0,
    const double[:, ::1] lami,
    const double[:, ::1] lamj,
    const double[:, ::1] dp,
    double[:, ::1] flux,
    cnp.ndarray amat_a,
    cnp.ndarray rhs_a,
    Py_ssize_t n,
    Py_ssize_t N,
):
    cdef double[:, ::1] amat = amat_a
    cdef double[::1] rhs = rhs_a
    cdef Py_ssize_t i, j, f
    cdef double diag, lam_ij, rfi, rfj
    for f in range(N + 1):
        for i in range(n):
            rfi = 0.5 * (r_pad[i, f] + r_pad[i, f + 1])
            diag = M[i]
            for j in range(n):
                if i == j:
                    continue
                rfj = 0.5 * (r_pad[j, f] + r_pad[j, f + 1])
                lam_ij = _lam(lam0, lami, lamj, i, j, rfi, rfj)
                diag += lam_ij * rfj
                amat[i, j] = -rfi * lam_ij
            amat[i, i] = diag
            rhs[i] = dp[i, f]
        if _gauss_solve(amat, rhs, n):
            raise SingularSystemError("singular face mobility matrix")
        for i in range(n):
            flux[i, f] = rhs[i]
