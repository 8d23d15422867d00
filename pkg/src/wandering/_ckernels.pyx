# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see _kernels_py for the reference."""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, exp, expm1, fmod, hypot, log, log1p, sin, INFINITY, M_PI

cnp.import_array()

NAME = "cython"

ctypedef struct cpx:
    double re
    double im


cdef inline cpx mk(double a, double b) noexcept nogil:
    cdef cpx z
    z.re = a
    z.im = b
    return z


cdef inline cpx cmul(cpx a, cpx b) noexcept nogil:
    return mk(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


cdef inline cpx cdiv(cpx a, cpx b) noexcept nogil:
    # same operation order as Python's complex division is not required; results
    # only have to be deterministic within this backend
    cdef double d
    cdef double r
    if b.re == 0.0 and b.im == 0.0:
        return mk(INFINITY, 0.0)
    if abs(b.re) >= abs(b.im):
        r = b.im / b.re
        d = b.re + b.im * r
        return mk((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    r = b.re / b.im
    d = b.re * r + b.im
    return mk((a.re * r + a.im) / d, (a.im * r - a.re) / d)


cdef inline cpx cexp_(cpx u) noexcept nogil:
    cdef double e = exp(u.re)
    return mk(e * cos(u.im), e * sin(u.im))


cdef inline cpx cexpm1_(cpx u) noexcept nogil:
    cdef double s = sin(0.5 * u.im)
    return mk(expm1(u.re) * cos(u.im) - 2.0 * s * s, exp(u.re) * sin(u.im))


cdef inline cpx clog1p_(cpx t) noexcept nogil:
    cdef double a = t.re
    cdef double b = t.im
    cdef double s
    if hypot(a, b) > 0.5:
        if a == -1.0 and b == 0.0:
            return mk(-INFINITY, 0.0)
        return mk(log(hypot(1.0 + a, b)), atan2(b, 1.0 + a))
    return mk(0.5 * log1p(a * (2.0 + a) + b * b), atan2(b, 1.0 + a))


cdef inline cpx log1mexp_(cpx u) noexcept nogil:
    cdef cpx t
    cdef cpx v
    if u.re < -0.7:
        t = cexp_(u)
        return clog1p_(mk(-t.re, -t.im))
    if u.re > 0.7:
        t = cexp_(mk(-u.re, -u.im))
        v = clog1p_(mk(-t.re, -t.im))
        return mk(u.re + v.re, u.im + M_PI + v.im)
    v = cexpm1_(u)
    if v.re == 0.0 and v.im == 0.0:
        return mk(-INFINITY, 0.0)
    return mk(log(hypot(v.re, v.im)), atan2(-v.im, -v.re))


cdef inline cpx phi_(cpx v) noexcept nogil:
    cdef cpx p
    cdef cpx d
    if v.re > 0:
        p = phi_(mk(-v.re, -v.im))
        return mk(-1.0 - p.re, -p.im)
    d = cexpm1_(v)
    return cdiv(cexp_(v), mk(-d.re, -d.im))


cdef inline cpx psi_(cpx v) noexcept nogil:
    cdef cpx d
    if v.re > 0:
        v = mk(-v.re, -v.im)
    d = cexpm1_(v)
    return cdiv(cexp_(v), cmul(d, d))


cdef void _fsum(const double complex[:] log_w, const double complex[:] shift,
                const double[:] mult, const unsigned char[:] below,
                double[:] re, double[:] im) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef cpx u, h
    cdef double m
    for i in range(log_w.shape[0]):
        re[i] = 0.0
        im[i] = 0.0
    for j in range(shift.shape[0]):
        m = mult[j]
        for i in range(log_w.shape[0]):
            u = mk(log_w[i].real + shift[j].real, log_w[i].imag + shift[j].imag)
            if below[j]:
                u = mk(-u.re, -u.im)
            h = log1mexp_(u)
            re[i] += m * h.re
            im[i] += m * h.im


def factor_sum(log_w, shift, mult, below):
    cdef double complex[:] lw = np.ascontiguousarray(np.atleast_1d(log_w), dtype=complex)
    cdef double complex[:] sh = np.ascontiguousarray(shift, dtype=complex)
    cdef double[:] mu = np.ascontiguousarray(mult, dtype=float)
    cdef unsigned char[:] bl = np.ascontiguousarray(below, dtype=np.uint8)
    n = lw.shape[0]
    re = np.empty(n)
    im = np.empty(n)
    cdef double[:] rv = re
    cdef double[:] iv = im
    with nogil:
        _fsum(lw, sh, mu, bl, rv, iv)
    out = re + 1j * im
    return out if np.ndim(log_w) else out[0]


def logderiv_sum(log_w, shift, mult, below):
    cdef double complex[:] lw = np.ascontiguousarray(np.atleast_1d(log_w), dtype=complex)
    cdef double complex[:] sh = np.ascontiguousarray(shift, dtype=complex)
    cdef double[:] mu = np.ascontiguousarray(mult, dtype=float)
    cdef unsigned char[:] bl = np.ascontiguousarray(below, dtype=np.uint8)
    cdef Py_ssize_t n = lw.shape[0]
    g = np.zeros(n, dtype=complex)
    dg = np.zeros(n, dtype=complex)
    cdef double complex[:] gv = g
    cdef double complex[:] dv = dg
    cdef Py_ssize_t i, j
    cdef cpx u, p, q
    cdef double m
    with nogil:
        for j in range(sh.shape[0]):
            m = mu[j]
            for i in range(n):
                u = mk(lw[i].real + sh[j].real, lw[i].imag + sh[j].imag)
                if bl[j]:
                    p = phi_(mk(-u.re, -u.im))
                    gv[i] = gv[i] + m * (p.re + 1j * p.im)
                else:
                    p = phi_(u)
                    gv[i] = gv[i] - m * (p.re + 1j * p.im)
                q = psi_(u)
                dv[i] = dv[i] - m * (q.re + 1j * q.im)
    if np.ndim(log_w):
        return g, dg
    return g[0], dg[0]


def orbit_layers(table, base0, lw0, int max_iter, long target, double stuck_log):
    (ptr_, shift_, mult_, below_, M_, const_, gap_, L_, theta_, first_, nbase_) = table
    cdef long[:] ptr = np.ascontiguousarray(ptr_, dtype=np.int64)
    cdef double complex[:] shift = np.ascontiguousarray(shift_, dtype=complex)
    cdef double[:] mult = np.ascontiguousarray(mult_, dtype=float)
    cdef unsigned char[:] below = np.ascontiguousarray(below_, dtype=np.uint8)
    cdef double[:] M = np.ascontiguousarray(M_, dtype=float)
    cdef double complex[:] const = np.ascontiguousarray(const_, dtype=complex)
    cdef double[:] gap = np.ascontiguousarray(gap_, dtype=float)
    cdef double[:] L = np.ascontiguousarray(L_, dtype=float)
    cdef double[:] theta = np.ascontiguousarray(theta_, dtype=float)
    cdef long first = first_
    cdef long nbase = nbase_
    cdef long nL = L.shape[0]
    cdef Py_ssize_t n = len(base0)
    layer_a = np.full(n, -1, dtype=np.int64)
    status_a = np.full(n, 3, dtype=np.int64)
    cdef long[:] layer = layer_a
    cdef long[:] status = status_a
    cdef long[:] b0 = np.ascontiguousarray(base0, dtype=np.int64)
    cdef double complex[:] w0 = np.ascontiguousarray(lw0, dtype=complex)
    cdef Py_ssize_t p, j
    cdef long b, nb, it, r
    cdef double xr, xi, ore, oim, delta, x, ang
    cdef cpx u, h
    with nogil:
        for p in range(n):
            b = b0[p]
            xr = w0[p].real
            xi = w0[p].imag
            r = b if xr >= 0 else b - 1
            r = -1 if r < 0 else r + first
            if r >= target:
                layer[p] = 0
                status[p] = 0
                continue
            for it in range(1, max_iter + 1):
                if b >= nbase:
                    status[p] = 2
                    break
                ore = M[b] * xr + const[b].real
                oim = M[b] * xi + const[b].imag
                for j in range(ptr[b], ptr[b + 1]):
                    u = mk(xr + shift[j].real, xi + shift[j].imag)
                    if below[j]:
                        u = mk(-u.re, -u.im)
                    h = log1mexp_(u)
                    ore += mult[j] * h.re
                    oim += mult[j] * h.im
                delta = ore - gap[b]
                nb = b + 1
                x = delta
                while True:
                    if nb + 1 < nL and x > 0.5 * (L[nb + 1] - L[nb]):
                        x -= L[nb + 1] - L[nb]
                        nb += 1
                    elif nb > 0 and x < -0.5 * (L[nb] - L[nb - 1]):
                        x += L[nb] - L[nb - 1]
                        nb -= 1
                    else:
                        break
                ang = fmod(oim - theta[nb] + M_PI, 2 * M_PI)
                if ang < 0:
                    ang += 2 * M_PI
                b = nb
                xr = x
                xi = ang - M_PI
                if not (x > -INFINITY) or (nb == 0 and x + L[0] < stuck_log):
                    status[p] = 1
                    break
                r = b if xr >= 0 else b - 1
                r = -1 if r < 0 else r + first
                if r >= target:
                    layer[p] = it
                    status[p] = 0
                    break
    return layer_a, status_a
